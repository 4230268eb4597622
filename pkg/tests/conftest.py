"""Shared test fixtures: a symmetric template body, posed variants, clips."""

import numpy as np

from dancedrill.library import BeatGrid, KeyPose, MotionClip
from dancedrill.skeleton import JointId, SkeletonFrame, JOINT_COUNT

# Upright body, meters. Symmetric left/right so that normalization is
# exactly idempotent on reconstructed poses.
TEMPLATE_POSITIONS = np.array(
    [
        [0.00, 1.58, 0.00],  # head
        [0.00, 1.40, 0.00],  # shoulder_center
        [0.00, 1.12, 0.00],  # spine
        [0.00, 1.00, 0.00],  # hip_center
        [-0.20, 1.38, 0.00],  # shoulder_l
        [-0.33, 1.12, 0.00],  # elbow_l
        [-0.37, 0.88, 0.00],  # wrist_l
        [-0.38, 0.80, 0.00],  # hand_l
        [0.20, 1.38, 0.00],  # shoulder_r
        [0.33, 1.12, 0.00],  # elbow_r
        [0.37, 0.88, 0.00],  # wrist_r
        [0.38, 0.80, 0.00],  # hand_r
        [-0.11, 0.96, 0.00],  # hip_l
        [-0.12, 0.55, 0.02],  # knee_l
        [-0.13, 0.12, 0.00],  # ankle_l
        [-0.13, 0.04, 0.12],  # foot_l
        [0.11, 0.96, 0.00],  # hip_r
        [0.12, 0.55, 0.02],  # knee_r
        [0.13, 0.12, 0.00],  # ankle_r
        [0.13, 0.04, 0.12],  # foot_r
    ]
)

LIMB_JOINTS = [
    JointId.head,
    JointId.elbow_l,
    JointId.wrist_l,
    JointId.hand_l,
    JointId.elbow_r,
    JointId.wrist_r,
    JointId.hand_r,
    JointId.knee_l,
    JointId.ankle_l,
    JointId.foot_l,
    JointId.knee_r,
    JointId.ankle_r,
    JointId.foot_r,
]


def template_frame(t_ms=0):
    return SkeletonFrame(
        t_ms=t_ms,
        positions=TEMPLATE_POSITIONS.copy(),
        confidence=np.ones(JOINT_COUNT),
    )


def posed_frame(seed, t_ms=0, girdle_safe=False, spread=0.05):
    """Template with jittered joints; girdle_safe keeps torso and girdle
    symmetric so idempotence of normalization holds exactly."""
    rng = np.random.default_rng(seed)
    pos = TEMPLATE_POSITIONS.copy()
    targets = LIMB_JOINTS if girdle_safe else range(JOINT_COUNT)
    for j in targets:
        pos[j] += rng.normal(0.0, spread, 3)
    return SkeletonFrame(t_ms=t_ms, positions=pos, confidence=np.ones(JOINT_COUNT))


def yaw_matrix(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def swung_frame(phase, t_ms=0):
    """Template with arms and legs swung by smooth functions of phase.

    Consecutive phases give distinct poses, which keeps online matching
    unambiguous in tests.
    """
    pos = TEMPLATE_POSITIONS.copy()
    a = 0.25 * np.sin(phase)
    b = 0.2 * np.cos(phase * 0.7)
    for side, sign in ((JointId.wrist_l, -1.0), (JointId.wrist_r, 1.0)):
        pos[side] += [0.0, a * sign, b]
        pos[side + 1] += [0.0, a * sign, b]  # hand follows wrist
    for side, sign in ((JointId.knee_l, -1.0), (JointId.knee_r, 1.0)):
        pos[side] += [0.0, 0.0, 0.15 * np.sin(phase + sign * 0.5)]
    pos[JointId.head] += [0.05 * np.sin(phase * 0.3), 0.0, 0.0]
    return SkeletonFrame(t_ms=t_ms, positions=pos, confidence=np.ones(JOINT_COUNT))


def make_clip(
    n_frames=40,
    fps=30.0,
    bpm=96.0,
    clip_id="test-clip",
    title="Test Clip",
    n_key_poses=3,
):
    frames = [
        swung_frame(i * 0.3, t_ms=round(i * 1000.0 / fps)) for i in range(n_frames)
    ]
    key_poses = []
    for k in range(n_key_poses):
        idx = (k + 1) * n_frames // (n_key_poses + 1)
        key_poses.append(KeyPose(frames[idx].t_ms, idx, f"kp{k + 1:02d}"))
    return MotionClip(
        clip_id=clip_id,
        title=title,
        fps=fps,
        frames=tuple(frames),
        beat_grid=BeatGrid(bpm=bpm, key_poses=tuple(key_poses)),
    )
