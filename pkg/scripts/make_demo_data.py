"""Regenerate the packaged demo corpus.

Builds three reference clips with beat-locked choreography, the
challenge catalog, the sound-cue manifest, the default engine config,
and a scripted session event log. Everything is deterministic; rerun
after changing any generator below and commit the results.

Usage: python3 scripts/make_demo_data.py
"""

import json
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from dancedrill.library import (  # noqa: E402
    BeatGrid,
    KeyPose,
    MotionClip,
    load_catalog,
    load_clip,
    save_clip,
    segment_challenge,
)
from dancedrill.replay import ReplayConfig, replay_frames  # noqa: E402
from dancedrill.skeleton import JOINT_COUNT, JointId, SkeletonFrame  # noqa: E402
from dancedrill.wire import encode_event  # noqa: E402

DATA = ROOT / "src" / "dancedrill" / "data"

J = JointId

# Upright body, meters, symmetric left/right.
TEMPLATE = np.array(
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


def beat_phase(t_ms, bpm):
    return 2.0 * np.pi * bpm * t_ms / 60000.0


def yaw_about(pos, pivot, theta):
    c, s = np.cos(theta), np.sin(theta)
    rot = np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
    return (pos - pivot) @ rot.T + pivot


def warmup_steps(t_ms, bpm):
    """Marching knees, opposite arm swing, a light head bob."""
    pos = TEMPLATE.copy()
    th = beat_phase(t_ms, bpm)
    lift_l = 0.18 * max(0.0, np.sin(th))
    lift_r = 0.18 * max(0.0, np.sin(th + np.pi))
    for j, lift in ((J.knee_l, lift_l), (J.knee_r, lift_r)):
        pos[j] += [0.0, lift, 0.35 * lift]
        pos[j + 1] += [0.0, 0.7 * lift, 0.5 * lift]  # ankle follows
        pos[j + 2] += [0.0, 0.7 * lift, 0.5 * lift]  # foot follows
    swing = 0.12 * np.sin(th)
    for j in (J.wrist_l, J.hand_l):
        pos[j] += [0.0, swing, 0.08 * np.cos(th)]
    for j in (J.wrist_r, J.hand_r):
        pos[j] += [0.0, -swing, -0.08 * np.cos(th)]
    pos[J.head] += [0.0, 0.02 * np.sin(2 * th), 0.0]
    pos += np.array([0.05 * np.sin(th), 0.0, 0.0])  # whole-body sway
    return pos


def turning_sleeves(t_ms, bpm):
    """Circling wrists with a slow whole-body turn."""
    pos = TEMPLATE.copy()
    th = beat_phase(t_ms, bpm)
    for j, ph in ((J.wrist_l, 0.0), (J.wrist_r, np.pi / 2)):
        dx = 0.15 * np.cos(th + ph)
        dy = 0.12 * np.sin(th + ph)
        dz = 0.10 * np.sin(th + ph)
        pos[j] += [dx, dy, dz]
        pos[j + 1] += [dx, dy, dz]  # hand follows wrist
        pos[j - 1] += [0.5 * dx, 0.5 * dy, 0.5 * dz]  # elbow follows half
    lean = 0.04 * np.sin(th / 2)
    pos[J.head] += [lean, 0.0, 0.0]
    pos[J.shoulder_center] += [0.7 * lean, 0.0, 0.0]
    turn = 0.5 * np.sin(2.0 * np.pi * t_ms / 8000.0)
    return yaw_about(pos, pos[J.hip_center], turn)


def drum_flourish(t_ms, bpm):
    """Beat-locked strikes with alternating forward kicks."""
    pos = TEMPLATE.copy()
    th = beat_phase(t_ms, bpm)
    strike = 0.25 * max(0.0, np.sin(th)) ** 3
    counter = 0.25 * max(0.0, np.sin(th + np.pi)) ** 3
    for j in (J.wrist_l, J.hand_l):
        pos[j] += [0.0, 0.4 * strike, strike]
    for j in (J.wrist_r, J.hand_r):
        pos[j] += [0.0, 0.4 * counter, counter]
    kick_l = 0.2 * max(0.0, np.sin(th / 2))
    kick_r = 0.2 * max(0.0, np.sin(th / 2 + np.pi))
    for j, kick in ((J.knee_l, kick_l), (J.knee_r, kick_r)):
        pos[j + 1] += [0.0, 0.3 * kick, kick]  # ankle
        pos[j + 2] += [0.0, 0.3 * kick, kick]  # foot
    pos[J.head] += [0.03 * np.sin(2 * th), 0.0, 0.0]
    return pos


CLIPS = (
    ("demo-a", "Warmup Steps", 600, 96.0, warmup_steps,
     [(120, "step-left"), (240, "step-right"), (360, "arms-open"), (480, "closing-stance")]),
    ("demo-b", "Turning Sleeves", 720, 104.0, turning_sleeves,
     [(120, "sleeve-rise-left"), (240, "turn-east"), (360, "sleeve-cross"),
      (480, "turn-west"), (600, "finale-pose")]),
    ("demo-c", "Drum Flourish", 900, 120.0, drum_flourish,
     [(120, "strike-high"), (270, "strike-low"), (420, "kick-left"),
      (570, "kick-right"), (720, "spin-prep"), (860, "flourish-end")]),
)

FPS = 30.0


def build_clip(clip_id, title, n_frames, bpm, motion, marks):
    frames = []
    for i in range(n_frames):
        t = round(i * 1000.0 / FPS)
        pos = np.round(motion(t, bpm), 4)
        frames.append(SkeletonFrame(t_ms=t, positions=pos, confidence=np.ones(JOINT_COUNT)))
    key_poses = tuple(KeyPose(frames[idx].t_ms, idx, label) for idx, label in marks)
    return MotionClip(
        clip_id=clip_id,
        title=title,
        fps=FPS,
        frames=tuple(frames),
        beat_grid=BeatGrid(bpm=bpm, key_poses=key_poses),
    )


def write_clips():
    (DATA / "clips").mkdir(parents=True, exist_ok=True)
    clips = {}
    for clip_id, title, n_frames, bpm, motion, marks in CLIPS:
        clip = build_clip(clip_id, title, n_frames, bpm, motion, marks)
        path = DATA / "clips" / f"{clip_id}.ndjson"
        save_clip(clip, path)
        load_clip(path)  # regenerated files must pass their own validation
        clips[clip_id] = clip
        print(f"wrote {path} ({n_frames} frames)")
    return clips


def write_catalog(clips):
    rows = [
        {"challenge_id": "ch-warmup", "clip_id": "demo-a", "order_index": 0,
         "unlock_threshold": 75.0},
        {"challenge_id": "ch-sleeves", "clip_id": "demo-b", "order_index": 1,
         "unlock_threshold": 75.0},
        {"challenge_id": "ch-flourish", "clip_id": "demo-c", "order_index": 2,
         "unlock_threshold": 80.0},
    ]
    path = DATA / "catalog.ndjson"
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            clip = clips[row["clip_id"]]
            row["segment"] = [0, clip.duration_ms]
            row["clip_path"] = f"clips/{row['clip_id']}.ndjson"
            fh.write(json.dumps(row) + "\n")
    load_catalog(path)
    print(f"wrote {path}")


CUES = [
    ("ambient", "amb-courtyard", 12000),
    ("ambient", "amb-drums-far", 9000),
    ("ambient", "amb-evening-crowd", 15000),
    ("cheer", "cheer-short", 1200),
    ("cheer", "cheer-rise", 1800),
    ("cheer", "cheer-burst", 900),
    ("applause", "applause-wave", 2600),
    ("applause", "applause-roll", 3200),
    ("applause", "applause-burst", 1500),
]


def write_cues():
    path = DATA / "cues.ndjson"
    with open(path, "w", encoding="utf-8") as fh:
        for category, cue_id, duration in CUES:
            fh.write(json.dumps({
                "cue_id": cue_id,
                "category": category,
                "duration_ms": duration,
                "asset_path": f"assets/{cue_id.replace('-', '_')}.ogg",
            }) + "\n")
    print(f"wrote {path}")


DEFAULT_CONFIG = """\
# Engine defaults. Every number here is a tuning decision for this
# installation profile; copy the file, edit, and pass it via --config.

[scoring]
e_max = 0.35            # error (radians) that zeroes a frame's credit; calibrated against the simulator noise ladder
band_frames = 15        # alignment half-width, frames; half a second at 30 fps
timing_full_ms = 100.0  # key-pose offsets inside this earn full rhythm credit
timing_zero_ms = 500.0  # offsets at or beyond this earn none
pose_weight = 0.7       # pose vs rhythm split of the final total
timing_weight = 0.3     # must sum to 1 with pose_weight
window = 30             # rolling-average span, frames
min_confidence = 0.3    # joints tracked below this are left out of comparisons
# Per-bone weights, tree order from the hips out: torso and girdle 0.5,
# arm bones 1.0, leg bones 2.0 (the legs carry the style).
weights = [0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0]

[session]
cheer_threshold = 70.0    # rolling average that wakes the crowd
applaud_threshold = 90.0  # key-pose credit that draws applause
cheer_duration_ms = 1000
applaud_duration_ms = 3000
countdown_ms = 3000
timeout_grace_ms = 2000   # silence allowed past the reference end before the attempt closes

[paths]
catalog = "catalog.ndjson"
cues = "cues.ndjson"
progress_dir = ""  # empty keeps progress in memory; point at a directory to persist unlocks

[server]
listen = "127.0.0.1:7770"  # newline-delimited frame/command socket
http = "127.0.0.1:7771"    # console page plus the /session web socket

[stage]
listener_position = [0.0, 1.6, 0.0]
listener_facing = [0.0, 0.0, 1.0]
d_ref = 1.0   # distance of unity gain, meters
d_max = 20.0  # emitters beyond this are silent

[[stage.emitters]]
id = "stage-left"
position = [3.0, 2.0, 4.0]

[[stage.emitters]]
id = "stage-right"
position = [-3.0, 2.0, 4.0]

[[stage.emitters]]
id = "drum-center"
position = [0.0, 1.2, 6.0]
"""


def write_default_config():
    path = DATA / "default_config.toml"
    path.write_text(DEFAULT_CONFIG, encoding="utf-8")
    print(f"wrote {path}")


def write_demo_events(clips):
    """Scripted session: guided intro, then ch-warmup performed with
    light simulator noise. Replaying this log is the standard demo."""
    clip = clips["demo-a"]
    events = [
        {"e": "Tick", "now_ms": 0},
        {"e": "StartChallenge"},  # idle -> guided step 0
        {"e": "StartChallenge"},
        {"e": "StartChallenge"},
        {"e": "StartChallenge"},  # -> character select
        {"e": "Select", "kind": "character", "id": "drum-dancer"},
        {"e": "Select", "kind": "challenge", "id": "ch-warmup"},
        {"e": "StartChallenge"},  # -> countdown, ends at 3000
        {"e": "Tick", "now_ms": 1000},
        {"e": "Tick", "now_ms": 2000},
        {"e": "Tick", "now_ms": 3000},  # -> performing
    ]
    perform_start = 3000
    cfg = ReplayConfig(clip_id="demo-a", noise_deg=3.0, seed=11)
    for i, frame in enumerate(replay_frames(clip, cfg)):
        rounded = SkeletonFrame(
            t_ms=frame.t_ms,
            positions=np.round(frame.positions, 4),
            confidence=frame.confidence,
        )
        events.append({"e": "FrameIn", "frame": rounded})
        if i % 30 == 29:  # one session tick per second of performance
            events.append({"e": "Tick", "now_ms": perform_start + frame.t_ms})
    events.append({"e": "Tick", "now_ms": perform_start + clip.duration_ms + 500})
    events.append({"e": "StartChallenge"})  # results -> challenge select

    path = DATA / "demo_events.ndjson"
    with open(path, "w", encoding="utf-8") as fh:
        for event in events:
            fh.write(encode_event(event) + "\n")
    print(f"wrote {path} ({len(events)} events)")


def main():
    clips = write_clips()
    write_catalog(clips)
    write_cues()
    write_default_config()
    write_demo_events(clips)


if __name__ == "__main__":
    main()
