"""Reference clips, beat grids, challenge catalogs, and progress storage.

Clip files are NDJSON: a header line, one line per frame, then a
trailing key-pose record. Every error carries the 1-based line number
of the offending record where one exists.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    InvariantError,
    IoError,
    LockedChallengeError,
    ParseError,
    RangeError,
    SchemaError,
)
from .skeleton import JOINT_COUNT, SkeletonFrame, validate_frame

FORMAT_VERSION = 1
JOINT_SET = "k20"
DEFAULT_UNLOCK_THRESHOLD = 75.0


@dataclass(frozen=True)
class KeyPose:
    t_ms: int
    frame_index: int
    label: str


@dataclass(frozen=True)
class BeatGrid:
    bpm: float
    key_poses: tuple[KeyPose, ...] = ()


@dataclass(frozen=True)
class MotionClip:
    clip_id: str
    title: str
    fps: float
    frames: tuple[SkeletonFrame, ...]
    beat_grid: BeatGrid

    @property
    def duration_ms(self) -> int:
        return self.frames[-1].t_ms


@dataclass(frozen=True)
class ChallengeSpec:
    challenge_id: str
    clip_id: str
    segment: tuple[int, int]
    order_index: int
    unlock_threshold: float = DEFAULT_UNLOCK_THRESHOLD
    clip_path: str | None = None


def _parse_json_line(raw: str, lineno: int) -> dict:
    try:
        record = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON ({exc.msg})", line=lineno) from None
    if not isinstance(record, dict):
        raise ParseError("record is not an object", line=lineno)
    return record


def _frame_from_record(record: dict, lineno: int) -> SkeletonFrame:
    if "t_ms" not in record or "j" not in record:
        raise ParseError("frame record needs t_ms and j", line=lineno)
    joints = record["j"]
    if not isinstance(joints, list) or len(joints) != JOINT_COUNT:
        raise SchemaError(
            f"expected {JOINT_COUNT} joints, got {len(joints) if isinstance(joints, list) else 'non-list'}",
            line=lineno,
        )
    try:
        arr = np.array(joints, dtype=np.float64)
    except (TypeError, ValueError):
        raise ParseError("joint entries must be [x, y, z, c] numbers", line=lineno) from None
    if arr.shape != (JOINT_COUNT, 4):
        raise ParseError("joint entries must be [x, y, z, c] numbers", line=lineno)
    t_ms = record["t_ms"]
    if not isinstance(t_ms, int):
        raise ParseError(f"t_ms {t_ms!r} is not an integer", line=lineno)
    frame = SkeletonFrame(t_ms=t_ms, positions=arr[:, :3], confidence=arr[:, 3])
    result = validate_frame(frame)
    if not result.ok:
        raise InvariantError(result.violations[0], line=lineno)
    return frame


def _key_poses_from_record(record: dict, lineno: int) -> tuple[KeyPose, ...]:
    entries = record["key_poses"]
    if not isinstance(entries, list):
        raise ParseError("key_poses must be a list", line=lineno)
    poses = []
    for entry in entries:
        if not isinstance(entry, dict) or not {"t_ms", "frame_index", "label"} <= set(entry):
            raise ParseError("key pose needs t_ms, frame_index, label", line=lineno)
        poses.append(KeyPose(int(entry["t_ms"]), int(entry["frame_index"]), str(entry["label"])))
    return tuple(poses)


def load_clip(path) -> MotionClip:
    """Parse and fully validate a clip file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise IoError(str(exc)) from None
    lines = [ln for ln in lines if ln.strip()]
    if not lines:
        raise ParseError("empty file", line=1)

    header = _parse_json_line(lines[0], 1)
    if header.get("format_version") != FORMAT_VERSION:
        raise SchemaError(f"unsupported format_version {header.get('format_version')!r}", line=1)
    if header.get("joint_set") != JOINT_SET:
        raise SchemaError(f"unsupported joint_set {header.get('joint_set')!r}", line=1)
    for key in ("fps", "clip_id", "title", "bpm"):
        if key not in header:
            raise SchemaError(f"header missing {key}", line=1)
    fps = float(header["fps"])
    bpm = float(header["bpm"])
    if fps <= 0:
        raise InvariantError(f"fps must be positive, got {fps}", line=1)
    if bpm <= 0:
        raise InvariantError(f"bpm must be positive, got {bpm}", line=1)

    frames: list[SkeletonFrame] = []
    key_poses: tuple[KeyPose, ...] | None = None
    for offset, raw in enumerate(lines[1:], start=2):
        record = _parse_json_line(raw, offset)
        if "key_poses" in record:
            if key_poses is not None:
                raise ParseError("second key_poses record", line=offset)
            key_poses = _key_poses_from_record(record, offset)
            continue
        if key_poses is not None:
            raise ParseError("frame record after key_poses trailer", line=offset)
        frame = _frame_from_record(record, offset)
        if frames and frame.t_ms <= frames[-1].t_ms:
            raise InvariantError(
                f"t_ms {frame.t_ms} not after previous {frames[-1].t_ms}", line=offset
            )
        frames.append(frame)

    if key_poses is None:
        raise ParseError("missing key_poses trailer", line=len(lines))
    if len(frames) < 2:
        raise InvariantError(f"clip has {len(frames)} frames, need at least 2", line=len(lines))

    duration = frames[-1].t_ms
    prev_t = -1
    for kp in key_poses:
        if kp.t_ms <= prev_t:
            raise InvariantError(f"key pose t_ms {kp.t_ms} not increasing", line=len(lines))
        prev_t = kp.t_ms
        if not (0 <= kp.t_ms <= duration):
            raise InvariantError(f"key pose t_ms {kp.t_ms} outside clip duration", line=len(lines))
        if not (0 <= kp.frame_index < len(frames)):
            raise InvariantError(f"key pose frame_index {kp.frame_index} out of range", line=len(lines))
        if abs(kp.t_ms - kp.frame_index * 1000.0 / fps) > 1000.0 / fps:
            raise InvariantError(
                f"key pose t_ms {kp.t_ms} inconsistent with frame_index {kp.frame_index} at {fps} fps",
                line=len(lines),
            )

    return MotionClip(
        clip_id=str(header["clip_id"]),
        title=str(header["title"]),
        fps=fps,
        frames=tuple(frames),
        beat_grid=BeatGrid(bpm=bpm, key_poses=key_poses),
    )


def _frame_record(frame: SkeletonFrame) -> str:
    joints = [
        [frame.positions[j, 0], frame.positions[j, 1], frame.positions[j, 2], frame.confidence[j]]
        for j in range(JOINT_COUNT)
    ]
    return json.dumps({"t_ms": int(frame.t_ms), "j": joints})


def save_clip(clip: MotionClip, path) -> None:
    header = {
        "format_version": FORMAT_VERSION,
        "joint_set": JOINT_SET,
        "fps": clip.fps,
        "clip_id": clip.clip_id,
        "title": clip.title,
        "bpm": clip.beat_grid.bpm,
    }
    trailer = {
        "key_poses": [
            {"t_ms": kp.t_ms, "frame_index": kp.frame_index, "label": kp.label}
            for kp in clip.beat_grid.key_poses
        ]
    }
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(header) + "\n")
            for frame in clip.frames:
                fh.write(_frame_record(frame) + "\n")
            fh.write(json.dumps(trailer) + "\n")
    except OSError as exc:
        raise IoError(str(exc)) from None


def segment_challenge(clip: MotionClip, spec: ChallengeSpec) -> MotionClip:
    """Cut the challenge segment out of a clip, timestamps re-based to 0.

    Bounds are inclusive on both ends so a key pose sitting exactly on a
    boundary is kept.
    """
    if spec.clip_id != clip.clip_id:
        raise RangeError(f"challenge {spec.challenge_id} wants clip {spec.clip_id}, got {clip.clip_id}")
    start_ms, end_ms = spec.segment
    if start_ms >= end_ms:
        raise RangeError(f"segment start {start_ms} not before end {end_ms}")
    if start_ms < 0 or end_ms > clip.duration_ms:
        raise RangeError(f"segment [{start_ms}, {end_ms}] outside clip duration {clip.duration_ms}")

    frames = [
        replace(f, t_ms=f.t_ms - start_ms)
        for f in clip.frames
        if start_ms <= f.t_ms <= end_ms
    ]
    if len(frames) < 2:
        raise RangeError(f"segment [{start_ms}, {end_ms}] holds fewer than 2 frames")

    times = np.array([f.t_ms for f in frames])
    key_poses = []
    for kp in clip.beat_grid.key_poses:
        if start_ms <= kp.t_ms <= end_ms:
            t = kp.t_ms - start_ms
            key_poses.append(KeyPose(t, int(np.argmin(np.abs(times - t))), kp.label))
    return MotionClip(
        clip_id=clip.clip_id,
        title=clip.title,
        fps=clip.fps,
        frames=tuple(frames),
        beat_grid=BeatGrid(bpm=clip.beat_grid.bpm, key_poses=tuple(key_poses)),
    )


class Catalog:
    """Ordered challenge list with unique ids and order indices."""

    def __init__(self, challenges):
        self.challenges = sorted(challenges, key=lambda c: c.order_index)
        self.by_id = {}
        orders = set()
        for ch in self.challenges:
            if ch.challenge_id in self.by_id:
                raise InvariantError(f"duplicate challenge_id {ch.challenge_id}")
            if ch.order_index in orders:
                raise InvariantError(f"duplicate order_index {ch.order_index}")
            if ch.order_index < 0:
                raise InvariantError(f"negative order_index {ch.order_index}")
            self.by_id[ch.challenge_id] = ch
            orders.add(ch.order_index)

    def next_after(self, challenge_id: str) -> ChallengeSpec | None:
        current = self.by_id[challenge_id]
        later = [c for c in self.challenges if c.order_index > current.order_index]
        return later[0] if later else None


def load_catalog(path) -> Catalog:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise IoError(str(exc)) from None
    base = os.path.dirname(os.path.abspath(path))
    challenges = []
    for lineno, raw in enumerate(lines, start=1):
        if not raw.strip():
            continue
        record = _parse_json_line(raw, lineno)
        for key in ("challenge_id", "clip_id", "segment", "order_index"):
            if key not in record:
                raise SchemaError(f"challenge record missing {key}", line=lineno)
        segment = record["segment"]
        if not (isinstance(segment, list) and len(segment) == 2):
            raise ParseError("segment must be [start_ms, end_ms]", line=lineno)
        clip_path = record.get("clip_path")
        if clip_path is not None and not os.path.isabs(clip_path):
            clip_path = os.path.join(base, clip_path)
        threshold = float(record.get("unlock_threshold", DEFAULT_UNLOCK_THRESHOLD))
        if not (0.0 <= threshold <= 100.0):
            raise InvariantError(f"unlock_threshold {threshold} outside [0, 100]", line=lineno)
        challenges.append(
            ChallengeSpec(
                challenge_id=str(record["challenge_id"]),
                clip_id=str(record["clip_id"]),
                segment=(int(segment[0]), int(segment[1])),
                order_index=int(record["order_index"]),
                unlock_threshold=threshold,
                clip_path=clip_path,
            )
        )
    if not challenges:
        raise InvariantError("catalog holds no challenges")
    return Catalog(challenges)


def clip_provider(catalog: Catalog):
    """Loader for the clips a catalog references, cached by clip_id."""
    cache: dict[str, MotionClip] = {}

    def provide(clip_id: str) -> MotionClip:
        if clip_id not in cache:
            for ch in catalog.challenges:
                if ch.clip_id == clip_id and ch.clip_path:
                    cache[clip_id] = load_clip(ch.clip_path)
                    break
            else:
                raise RangeError(f"no clip file known for clip_id {clip_id!r}")
        return cache[clip_id]

    return provide


@dataclass
class ProgressRecord:
    best_score: float = 0.0
    unlocked: bool = False
    attempts: int = 0


class ProgressStore:
    """Per-participant best scores and unlock flags.

    Mutations are serialized by the session event loop; writes rewrite
    the whole file atomically (temp file plus rename).
    """

    def __init__(self, path=None):
        self.path = path
        self.records: dict[str, ProgressRecord] = {}

    @classmethod
    def load(cls, path) -> "ProgressStore":
        store = cls(path)
        if not os.path.exists(path):
            return store
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                if not raw.strip():
                    continue
                record = _parse_json_line(raw, lineno)
                store.records[str(record["challenge_id"])] = ProgressRecord(
                    best_score=float(record.get("best_score", 0.0)),
                    unlocked=bool(record.get("unlocked", False)),
                    attempts=int(record.get("attempts", 0)),
                )
        return store

    def save(self) -> None:
        if self.path is None:
            return
        tmp = f"{self.path}.tmp"
        try:
            with open(tmp, "w", encoding="utf-8") as fh:
                for challenge_id in sorted(self.records):
                    rec = self.records[challenge_id]
                    fh.write(
                        json.dumps(
                            {
                                "challenge_id": challenge_id,
                                "best_score": rec.best_score,
                                "unlocked": rec.unlocked,
                                "attempts": rec.attempts,
                            }
                        )
                        + "\n"
                    )
            os.replace(tmp, self.path)
        except OSError as exc:
            raise IoError(str(exc)) from None

    def record(self, challenge_id: str) -> ProgressRecord:
        return self.records.setdefault(challenge_id, ProgressRecord())

    def is_unlocked(self, catalog: Catalog, challenge_id: str) -> bool:
        spec = catalog.by_id.get(challenge_id)
        if spec is None:
            return False
        if spec.order_index == 0:
            return True
        rec = self.records.get(challenge_id)
        return bool(rec and rec.unlocked)


def unlock_check(store: ProgressStore, catalog: Catalog, challenge_id: str, final_score: float):
    """Record an attempt; unlock the next challenge when the threshold is met.

    Returns (store, newly_unlocked ids). Emits an id at most once: a
    challenge already unlocked never reappears. Re-applying with a lower
    score leaves best_score and the unlock set unchanged.
    """
    spec = catalog.by_id.get(challenge_id)
    if spec is None:
        raise RangeError(f"unknown challenge {challenge_id}")
    if not store.is_unlocked(catalog, challenge_id):
        raise LockedChallengeError(f"challenge {challenge_id} is locked")

    rec = store.record(challenge_id)
    rec.attempts += 1
    rec.best_score = max(rec.best_score, float(final_score))
    rec.unlocked = True

    newly = []
    if final_score >= spec.unlock_threshold:
        nxt = catalog.next_after(challenge_id)
        if nxt is not None and nxt.order_index > 0:
            nxt_rec = store.record(nxt.challenge_id)
            if not nxt_rec.unlocked:
                nxt_rec.unlocked = True
                newly.append(nxt.challenge_id)
    store.save()
    return store, newly
