"""Seeded replay simulator and stream recorder.

The simulator streams a reference clip as if a participant were being
tracked live: optional per-bone angular noise, frame dropout, and time
warping, all fully determined by the seed. Noise rotates bone
directions rather than jittering positions, so its magnitude is
directly comparable to the scoring metric; positions are rebuilt from
the perturbed directions with the original bone lengths.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError
from .library import BeatGrid, MotionClip, save_clip
from .skeleton import (
    BONE_COUNT,
    BONE_CHILDREN,
    BONE_PARENTS,
    SkeletonFrame,
    frame_from_directions,
)
from .wire import WireMessage, frame_from_payload


@dataclass(frozen=True)
class ReplayConfig:
    clip_id: str = ""
    noise_deg: float = 0.0
    dropout_p: float = 0.0
    time_scale: float = 1.0
    offset_ms: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.noise_deg < 0:
            raise ConfigError(f"noise_deg must be non-negative, got {self.noise_deg}")
        if not (0.0 <= self.dropout_p < 1.0):
            raise ConfigError(f"dropout_p must be in [0, 1), got {self.dropout_p}")
        if self.time_scale <= 0:
            raise ConfigError(f"time_scale must be positive, got {self.time_scale}")


def _perturb_positions(positions, sigma_rad, rng):
    vec = positions[BONE_CHILDREN] - positions[BONE_PARENTS]
    lengths = np.linalg.norm(vec, axis=1)
    dirs = np.zeros_like(vec)
    nonzero = lengths > 0
    dirs[nonzero] = vec[nonzero] / lengths[nonzero, None]

    axes = rng.normal(size=(BONE_COUNT, 3))
    axes /= np.linalg.norm(axes, axis=1, keepdims=True)
    angles = rng.normal(0.0, sigma_rad, BONE_COUNT)

    cos = np.cos(angles)[:, None]
    sin = np.sin(angles)[:, None]
    dot = np.einsum("ij,ij->i", axes, dirs)[:, None]
    rotated = dirs * cos + np.cross(axes, dirs) * sin + axes * dot * (1.0 - cos)

    rebuilt = frame_from_directions(
        rotated, lengths, root_position=positions[3]  # hip_center keeps its place
    )
    return rebuilt.positions


def replay_frames(clip: MotionClip, cfg: ReplayConfig):
    """Yield the clip's frames through the simulator, in order."""
    rng = np.random.default_rng(cfg.seed)
    sigma = np.radians(cfg.noise_deg)
    for frame in clip.frames:
        dropped = rng.random() < cfg.dropout_p
        if dropped:
            continue
        t = int(round(cfg.offset_ms + frame.t_ms / cfg.time_scale))
        if cfg.noise_deg > 0:
            positions = _perturb_positions(frame.positions, sigma, rng)
            yield SkeletonFrame(t, positions, frame.confidence)
        else:
            yield replace(frame, t_ms=t)


def replay_stream(clip: MotionClip, cfg: ReplayConfig, sink) -> None:
    for frame in replay_frames(clip, cfg):
        sink(frame)


def record(stream, path) -> None:
    """Write incoming frames as a clip file.

    Accepts SkeletonFrames or WireMessages (hello ignored, frames
    collected). The header is synthesized: fps from the median frame
    spacing, no key poses. A stream too short to make a valid clip
    still produces a file; loading it reports the violation.
    """
    frames = []
    for item in stream:
        if isinstance(item, SkeletonFrame):
            frames.append(item)
        elif isinstance(item, WireMessage):
            if item.kind == "frame":
                frames.append(frame_from_payload(item.payload))
        else:
            raise ConfigError(f"cannot record {type(item).__name__}")

    if len(frames) >= 2:
        spacing = np.diff([f.t_ms for f in frames])
        fps = 1000.0 / float(np.median(spacing))
    else:
        fps = 30.0
    clip = MotionClip(
        clip_id="recorded",
        title="Recorded stream",
        fps=fps,
        frames=tuple(frames),
        beat_grid=BeatGrid(bpm=120.0),
    )
    save_clip(clip, path)
