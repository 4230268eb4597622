"""Skeleton data model, frame validation, and pose normalization.

The engine tracks a fixed 20-joint skeleton. Joints are identified by
stable integer codes 0..19 (serialization order); bones are the 19
parent to child edges of the joint tree rooted at hip_center.

Normalization removes everything about a pose that should not affect a
score: where the dancer stands, how tall they are, and which way they
face (yaw only; leaning and crouching stay score-relevant). The result
is a set of per-bone unit direction vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .errors import DegenerateSpine


class JointId(IntEnum):
    head = 0
    shoulder_center = 1
    spine = 2
    hip_center = 3
    shoulder_l = 4
    elbow_l = 5
    wrist_l = 6
    hand_l = 7
    shoulder_r = 8
    elbow_r = 9
    wrist_r = 10
    hand_r = 11
    hip_l = 12
    knee_l = 13
    ankle_l = 14
    foot_l = 15
    hip_r = 16
    knee_r = 17
    ankle_r = 18
    foot_r = 19


JOINT_COUNT = 20

# (parent, child, weight). Torso and girdle links 0.5, arms 1.0, legs 2.0;
# legs carry the largest weight because footwork dominates this dance style.
BONES: tuple[tuple[JointId, JointId, float], ...] = (
    (JointId.hip_center, JointId.spine, 0.5),
    (JointId.spine, JointId.shoulder_center, 0.5),
    (JointId.shoulder_center, JointId.head, 0.5),
    (JointId.hip_center, JointId.hip_l, 0.5),
    (JointId.hip_center, JointId.hip_r, 0.5),
    (JointId.shoulder_center, JointId.shoulder_l, 0.5),
    (JointId.shoulder_center, JointId.shoulder_r, 0.5),
    (JointId.shoulder_l, JointId.elbow_l, 1.0),
    (JointId.elbow_l, JointId.wrist_l, 1.0),
    (JointId.wrist_l, JointId.hand_l, 1.0),
    (JointId.shoulder_r, JointId.elbow_r, 1.0),
    (JointId.elbow_r, JointId.wrist_r, 1.0),
    (JointId.wrist_r, JointId.hand_r, 1.0),
    (JointId.hip_l, JointId.knee_l, 2.0),
    (JointId.knee_l, JointId.ankle_l, 2.0),
    (JointId.ankle_l, JointId.foot_l, 2.0),
    (JointId.hip_r, JointId.knee_r, 2.0),
    (JointId.knee_r, JointId.ankle_r, 2.0),
    (JointId.ankle_r, JointId.foot_r, 2.0),
)

BONE_COUNT = len(BONES)
BONE_PARENTS = np.array([b[0] for b in BONES], dtype=np.intp)
BONE_CHILDREN = np.array([b[1] for b in BONES], dtype=np.intp)
BONE_WEIGHTS = np.array([b[2] for b in BONES], dtype=np.float64)
TOTAL_WEIGHT = float(BONE_WEIGHTS.sum())  # 21.5

DEFAULT_MIN_CONFIDENCE = 0.3


@dataclass(frozen=True)
class SkeletonFrame:
    """One timestamped sample of joint positions.

    positions: (20, 3) float64, meters, right-handed, +Y up.
    confidence: (20,) float64 in [0, 1].
    """

    t_ms: int
    positions: np.ndarray
    confidence: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "positions", np.asarray(self.positions, dtype=np.float64))
        object.__setattr__(self, "confidence", np.asarray(self.confidence, dtype=np.float64))


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    violations: tuple[str, ...] = ()


@dataclass(frozen=True)
class NormalizedPose:
    """Per-bone unit directions after normalization.

    directions: (19, 3); rows for invalid bones are zero.
    valid: (19,) bool; a bone is invalid when either endpoint fell below
    the confidence floor or the bone had no measurable length.
    facing_degenerate: the hips had no horizontal separation, so the yaw
    alignment step was skipped.
    """

    directions: np.ndarray
    valid: np.ndarray
    facing_degenerate: bool = False


def validate_frame(frame: SkeletonFrame) -> ValidationResult:
    """Check structural well-formedness; returns violations, never raises."""
    violations: list[str] = []
    pos = frame.positions
    conf = frame.confidence
    if not isinstance(frame.t_ms, (int, np.integer)) or frame.t_ms < 0:
        violations.append(f"t_ms {frame.t_ms!r} is not a non-negative integer")
    if pos.shape != (JOINT_COUNT, 3):
        violations.append(f"positions shape {pos.shape} != ({JOINT_COUNT}, 3)")
    if conf.shape != (JOINT_COUNT,):
        violations.append(f"confidence shape {conf.shape} != ({JOINT_COUNT},)")
    if violations:
        return ValidationResult(False, tuple(violations))
    finite = np.isfinite(pos).all(axis=1)
    for j in np.flatnonzero(~finite):
        violations.append(f"{JointId(j).name} position is not finite")
    bad_conf = ~(np.isfinite(conf) & (conf >= 0.0) & (conf <= 1.0))
    for j in np.flatnonzero(bad_conf):
        violations.append(f"{JointId(j).name} confidence {conf[j]!r} outside [0, 1]")
    return ValidationResult(not violations, tuple(violations))


def normalize(frame: SkeletonFrame, min_confidence: float = DEFAULT_MIN_CONFIDENCE) -> NormalizedPose:
    """Reduce a frame to scale-, position-, and yaw-invariant bone directions.

    Steps: translate hip_center to the origin; scale so the hip_center
    to shoulder_center distance is 1; rotate about +Y so the horizontal
    projection of hip_l to hip_r points along +X; emit unit directions.

    Raises DegenerateSpine when the hip to shoulder distance collapses.
    A vertically stacked hip pair (no horizontal facing) skips the
    rotation and sets facing_degenerate instead of raising: a flagged
    pose still scores, which keeps live sessions robust.
    """
    p = frame.positions - frame.positions[JointId.hip_center]
    spine_len = float(np.linalg.norm(p[JointId.shoulder_center]))
    if spine_len < 1e-6:
        raise DegenerateSpine(
            f"hip_center to shoulder_center distance {spine_len:g} m below 1e-6"
        )
    p = p / spine_len

    facing_degenerate = False
    h = p[JointId.hip_r] - p[JointId.hip_l]
    hx, hz = float(h[0]), float(h[2])
    hn = float(np.hypot(hx, hz))
    if hn < 1e-6:
        facing_degenerate = True
    else:
        c, s = hx / hn, hz / hn
        rot = np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
        p = p @ rot.T

    vec = p[BONE_CHILDREN] - p[BONE_PARENTS]
    length = np.linalg.norm(vec, axis=1)
    conf_ok = (frame.confidence[BONE_PARENTS] >= min_confidence) & (
        frame.confidence[BONE_CHILDREN] >= min_confidence
    )
    valid = conf_ok & (length >= 1e-9)
    directions = np.zeros((BONE_COUNT, 3))
    directions[valid] = vec[valid] / length[valid, None]
    return NormalizedPose(directions=directions, valid=valid, facing_degenerate=facing_degenerate)


def bone_lengths(frame: SkeletonFrame) -> np.ndarray:
    """Lengths of the 19 bones in meters, in BONES order."""
    vec = frame.positions[BONE_CHILDREN] - frame.positions[BONE_PARENTS]
    return np.linalg.norm(vec, axis=1)


def frame_from_directions(
    directions: np.ndarray,
    lengths: np.ndarray | None = None,
    root_position: np.ndarray | None = None,
    t_ms: int = 0,
    confidence: np.ndarray | None = None,
) -> SkeletonFrame:
    """Rebuild joint positions from bone directions by walking the tree.

    BONES is ordered parent-first, so a single pass suffices. Unit
    lengths and an origin root reproduce the canonical body a
    NormalizedPose describes.
    """
    if lengths is None:
        lengths = np.ones(BONE_COUNT)
    pos = np.zeros((JOINT_COUNT, 3))
    if root_position is not None:
        pos[:] = np.asarray(root_position, dtype=np.float64)
    for i, (parent, child, _w) in enumerate(BONES):
        pos[child] = pos[parent] + directions[i] * lengths[i]
    if confidence is None:
        confidence = np.ones(JOINT_COUNT)
    return SkeletonFrame(t_ms=t_ms, positions=pos, confidence=confidence)
