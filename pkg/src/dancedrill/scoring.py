"""Pose and rhythm scoring.

Frame distance is a weighted mean angular error over bone directions.
Offline scoring aligns whole sequences with banded dynamic time
warping; live scoring runs an incremental matcher with a time-derived
cursor. Both end in a ScoreReport combining pose and timing on a 0-100
scale.

Angles use atan2(|a x b|, a . b), which is algebraically the arccos of
the clamped dot product but exact at 0 for identical vectors and better
conditioned near the ends of the range. Identical inputs therefore
score exactly 100.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BandInfeasible,
    ConfigError,
    EmptyInput,
    IncompleteAttempt,
    OutOfOrderFrame,
)
from .library import MotionClip
from .skeleton import BONE_COUNT, BONE_WEIGHTS, NormalizedPose, SkeletonFrame, normalize

DEFAULT_E_MAX = 0.35  # radians; calibrated so heavy noise lands well under passing scores
DEFAULT_BAND_FRAMES = 15
DEFAULT_TIMING_FULL_MS = 100.0
DEFAULT_TIMING_ZERO_MS = 500.0
DEFAULT_POSE_WEIGHT = 0.7
DEFAULT_TIMING_WEIGHT = 0.3
DEFAULT_WINDOW = 30
DEFAULT_MIN_CONFIDENCE = 0.3


@dataclass(frozen=True)
class ScoringConfig:
    e_max: float = DEFAULT_E_MAX
    band_frames: int = DEFAULT_BAND_FRAMES
    timing_full_ms: float = DEFAULT_TIMING_FULL_MS
    timing_zero_ms: float = DEFAULT_TIMING_ZERO_MS
    pose_weight: float = DEFAULT_POSE_WEIGHT
    timing_weight: float = DEFAULT_TIMING_WEIGHT
    window: int = DEFAULT_WINDOW
    min_confidence: float = DEFAULT_MIN_CONFIDENCE
    weights: np.ndarray = field(default_factory=lambda: BONE_WEIGHTS.copy())

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        object.__setattr__(self, "weights", w)
        if w.shape != (BONE_COUNT,) or (w <= 0).any():
            raise ConfigError("bone weights must be 19 positive reals")
        if self.e_max <= 0:
            raise ConfigError(f"e_max must be positive, got {self.e_max}")
        if not (0 < self.timing_full_ms < self.timing_zero_ms):
            raise ConfigError(
                f"need 0 < timing_full_ms < timing_zero_ms, got {self.timing_full_ms}, {self.timing_zero_ms}"
            )
        if abs(self.pose_weight + self.timing_weight - 1.0) > 1e-9:
            raise ConfigError("pose_weight + timing_weight must equal 1")
        if self.band_frames < 1:
            raise ConfigError(f"band_frames must be at least 1, got {self.band_frames}")
        if self.window < 1:
            raise ConfigError(f"window must be at least 1, got {self.window}")
        if not (0.0 <= self.min_confidence <= 1.0):
            raise ConfigError(f"min_confidence {self.min_confidence} outside [0, 1]")


@dataclass(frozen=True)
class KeyPoseResult:
    label: str
    matched_perf_t_ms: int
    angular_error: float
    timing_offset_ms: float
    credit: float


@dataclass(frozen=True)
class AlignmentResult:
    path: tuple[tuple[int, int], ...]
    cost: float
    mean_error: float
    per_key_pose: tuple[KeyPoseResult, ...]


@dataclass(frozen=True)
class ScoreReport:
    pose_score: float
    timing_score: float
    total: float
    key_poses: tuple[KeyPoseResult, ...] = ()


@dataclass(frozen=True)
class FrameScoreUpdate:
    t_ms: int
    frame_score: float
    rolling_avg: float
    total_so_far: float
    key_pose_hits: tuple[KeyPoseResult, ...] = ()


def frame_distance(a: NormalizedPose, b: NormalizedPose, cfg: ScoringConfig) -> float:
    """Weighted mean angle between corresponding bone directions.

    Only bones valid in both poses participate; with no common valid
    bone the distance is the worst case e_max.
    """
    both = a.valid & b.valid
    if not both.any():
        return cfg.e_max
    da = a.directions[both]
    db = b.directions[both]
    dots = np.einsum("ij,ij->i", da, db)
    sines = np.linalg.norm(np.cross(da, db), axis=1)
    theta = np.arctan2(sines, dots)
    w = cfg.weights[both]
    return float((w * theta).sum() / w.sum())


def score_from_error(e: float, cfg: ScoringConfig) -> float:
    if e < 0:
        raise ConfigError(f"angular error must be non-negative, got {e}")
    return 100.0 * max(0.0, 1.0 - e / cfg.e_max)


def timing_credit(offset_ms: float, cfg: ScoringConfig) -> float:
    """100 inside the full window, linear to 0 at the zero window."""
    a = abs(offset_ms)
    if a <= cfg.timing_full_ms:
        return 100.0
    if a >= cfg.timing_zero_ms:
        return 0.0
    return 100.0 * (cfg.timing_zero_ms - a) / (cfg.timing_zero_ms - cfg.timing_full_ms)


class _FeatureBank:
    """Normalized directions of a frame sequence, stacked for vector math."""

    def __init__(self, frames, cfg: ScoringConfig):
        poses = [normalize(f, cfg.min_confidence) for f in frames]
        self.dirs = np.stack([p.directions for p in poses])
        self.valid = np.stack([p.valid for p in poses])


def _distances_to_window(dirs, valid, bank: _FeatureBank, lo: int, hi: int, cfg: ScoringConfig):
    """Distances from one pose to bank frames lo..hi inclusive, as a vector."""
    wd = bank.dirs[lo : hi + 1]
    wv = bank.valid[lo : hi + 1] & valid[None, :]
    dots = np.einsum("wij,ij->wi", wd, dirs)
    sines = np.linalg.norm(np.cross(dirs[None, :, :], wd), axis=2)
    theta = np.arctan2(sines, dots)
    wsum = (cfg.weights[None, :] * wv).sum(axis=1)
    werr = (cfg.weights[None, :] * theta * wv).sum(axis=1)
    out = np.full(hi - lo + 1, cfg.e_max)
    has = wsum > 0
    out[has] = werr[has] / wsum[has]
    return out


def dtw_align(ref: MotionClip, perf, cfg: ScoringConfig) -> AlignmentResult:
    """Minimal-cost monotone alignment within a Sakoe-Chiba band.

    Steps are (1,1), (1,0), (0,1); ties break toward the diagonal, then
    the reference advance, making the chosen path deterministic.
    """
    perf = list(perf)
    n_ref = len(ref.frames)
    n_perf = len(perf)
    if n_ref < 2 or n_perf < 2:
        raise EmptyInput(f"need at least 2 frames on both sides, got {n_ref} and {n_perf}")
    band = cfg.band_frames
    if abs(n_ref - n_perf) > band:
        raise BandInfeasible(
            f"length difference {abs(n_ref - n_perf)} exceeds band half-width {band}"
        )

    ref_bank = _FeatureBank(ref.frames, cfg)
    perf_bank = _FeatureBank(perf, cfg)

    dist = np.full((n_ref, n_perf), np.inf)
    for i in range(n_ref):
        lo = max(0, i - band)
        hi = min(n_perf - 1, i + band)
        dist[i, lo : hi + 1] = _distances_to_window(
            ref_bank.dirs[i], ref_bank.valid[i], perf_bank, lo, hi, cfg
        )

    acc = np.full((n_ref, n_perf), np.inf)
    step = np.zeros((n_ref, n_perf), dtype=np.uint8)  # 0 diag, 1 ref-advance, 2 perf-advance
    acc[0, 0] = dist[0, 0]
    for i in range(n_ref):
        lo = max(0, i - band)
        hi = min(n_perf - 1, i + band)
        for j in range(lo, hi + 1):
            if i == 0 and j == 0:
                continue
            best = np.inf
            chosen = 0
            if i > 0 and j > 0 and acc[i - 1, j - 1] < best:
                best = acc[i - 1, j - 1]
                chosen = 0
            if i > 0 and acc[i - 1, j] < best:
                best = acc[i - 1, j]
                chosen = 1
            if j > 0 and acc[i, j - 1] < best:
                best = acc[i, j - 1]
                chosen = 2
            if not np.isinf(best):
                acc[i, j] = dist[i, j] + best
                step[i, j] = chosen

    cost = float(acc[n_ref - 1, n_perf - 1])
    path = []
    i, j = n_ref - 1, n_perf - 1
    while True:
        path.append((i, j))
        if i == 0 and j == 0:
            break
        s = step[i, j]
        if s == 0:
            i, j = i - 1, j - 1
        elif s == 1:
            i -= 1
        else:
            j -= 1
    path.reverse()

    first_perf_for_ref = {}
    for ri, pj in path:
        first_perf_for_ref.setdefault(ri, pj)
    per_key_pose = []
    for kp in ref.beat_grid.key_poses:
        pj = first_perf_for_ref[kp.frame_index]
        matched_t = perf[pj].t_ms
        offset = float(matched_t - kp.t_ms)
        per_key_pose.append(
            KeyPoseResult(
                label=kp.label,
                matched_perf_t_ms=matched_t,
                angular_error=float(dist[kp.frame_index, pj]),
                timing_offset_ms=offset,
                credit=timing_credit(offset, cfg),
            )
        )

    return AlignmentResult(
        path=tuple(path),
        cost=cost,
        mean_error=cost / len(path),
        per_key_pose=tuple(per_key_pose),
    )


class OnlineMatcher:
    """Incremental matcher for live frames against one reference clip.

    The cursor is derived from the frame timestamp and refined by a
    windowed nearest-pose search; it never moves backward. Crossing a
    key pose index records a timing hit.
    """

    def __init__(self, ref: MotionClip, cfg: ScoringConfig):
        if len(ref.frames) < 2:
            raise EmptyInput("reference needs at least 2 frames")
        self.ref = ref
        self.cfg = cfg
        self._bank = _FeatureBank(ref.frames, cfg)
        self._ref_times = np.array([f.t_ms for f in ref.frames])
        self._key_poses = list(ref.beat_grid.key_poses)
        self._next_kp = 0
        self.cursor = -1
        self.last_t_ms: int | None = None
        self.rolling = deque(maxlen=cfg.window)
        self._score_sum = 0.0
        self._score_count = 0
        self.hits: list[KeyPoseResult] = []

    @property
    def at_end(self) -> bool:
        return self.cursor >= len(self.ref.frames) - 1

    @property
    def coverage(self) -> float:
        if self.cursor < 0:
            return 0.0
        return float(self._ref_times[self.cursor]) / float(self._ref_times[-1])

    def step(self, frame: SkeletonFrame) -> FrameScoreUpdate:
        if self.last_t_ms is not None and frame.t_ms < self.last_t_ms:
            raise OutOfOrderFrame(f"frame t_ms {frame.t_ms} before previous {self.last_t_ms}")
        self.last_t_ms = frame.t_ms

        n_ref = len(self.ref.frames)
        time_cursor = int(round(frame.t_ms * self.ref.fps / 1000.0))
        time_cursor = min(max(time_cursor, 0), n_ref - 1)
        lo = max(0, time_cursor - self.cfg.band_frames)
        hi = min(n_ref - 1, time_cursor + self.cfg.band_frames)

        pose = normalize(frame, self.cfg.min_confidence)
        dists = _distances_to_window(pose.directions, pose.valid, self._bank, lo, hi, self.cfg)
        rel = int(np.argmin(dists))
        matched = lo + rel
        error = float(dists[rel])

        new_cursor = max(self.cursor, matched)
        hits_now = []
        while self._next_kp < len(self._key_poses):
            kp = self._key_poses[self._next_kp]
            if not (self.cursor < kp.frame_index <= new_cursor):
                break
            offset = float(frame.t_ms - kp.t_ms)
            hits_now.append(
                KeyPoseResult(
                    label=kp.label,
                    matched_perf_t_ms=frame.t_ms,
                    angular_error=error,
                    timing_offset_ms=offset,
                    credit=timing_credit(offset, self.cfg),
                )
            )
            self._next_kp += 1
        self.cursor = new_cursor
        self.hits.extend(hits_now)

        frame_score = score_from_error(error, self.cfg)
        self.rolling.append(frame_score)
        self._score_sum += frame_score
        self._score_count += 1

        pose_mean = self._score_sum / self._score_count
        if self.hits:
            timing_mean = sum(h.credit for h in self.hits) / len(self.hits)
        else:
            timing_mean = 100.0
        total = self.cfg.pose_weight * pose_mean + self.cfg.timing_weight * timing_mean
        return FrameScoreUpdate(
            t_ms=frame.t_ms,
            frame_score=frame_score,
            rolling_avg=sum(self.rolling) / len(self.rolling),
            total_so_far=total,
            key_pose_hits=tuple(hits_now),
        )


def online_step(state: OnlineMatcher, frame: SkeletonFrame, cfg: ScoringConfig | None = None):
    """Functional wrapper over OnlineMatcher.step; returns (state, update)."""
    return state, state.step(frame)


def finalize(result, cfg: ScoringConfig) -> ScoreReport:
    """Build the final report from either alignment flavor.

    Online attempts must have covered at least half the reference
    duration. Key poses the cursor never reached count as credit 0;
    a clip with no key poses earns full timing credit.
    """
    if isinstance(result, AlignmentResult):
        pose_score = score_from_error(result.mean_error, cfg)
        key_poses = result.per_key_pose
        if key_poses:
            timing_score = sum(k.credit for k in key_poses) / len(key_poses)
        else:
            timing_score = 100.0
    elif isinstance(result, OnlineMatcher):
        if result.coverage < 0.5:
            raise IncompleteAttempt(result.coverage)
        if result._score_count == 0:
            raise EmptyInput("no frames were scored")
        pose_score = result._score_sum / result._score_count
        total_kps = len(result._key_poses)
        if total_kps:
            timing_score = sum(h.credit for h in result.hits) / total_kps
        else:
            timing_score = 100.0
        key_poses = tuple(result.hits)
    else:
        raise ConfigError(f"cannot finalize {type(result).__name__}")

    total = cfg.pose_weight * pose_score + cfg.timing_weight * timing_score
    return ScoreReport(
        pose_score=pose_score,
        timing_score=timing_score,
        total=total,
        key_poses=tuple(key_poses),
    )
