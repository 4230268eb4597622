import json

import numpy as np
import pytest

from conftest import make_clip, template_frame
from dancedrill import errors
from dancedrill.library import (
    BeatGrid,
    Catalog,
    ChallengeSpec,
    KeyPose,
    MotionClip,
    ProgressStore,
    load_catalog,
    load_clip,
    save_clip,
    segment_challenge,
    unlock_check,
)
from dancedrill.skeleton import SkeletonFrame, JOINT_COUNT


def clips_equal(a: MotionClip, b: MotionClip) -> bool:
    if (a.clip_id, a.title, a.fps, a.beat_grid) != (b.clip_id, b.title, b.fps, b.beat_grid):
        return False
    if len(a.frames) != len(b.frames):
        return False
    for fa, fb in zip(a.frames, b.frames):
        if fa.t_ms != fb.t_ms:
            return False
        if not np.array_equal(fa.positions, fb.positions):
            return False
        if not np.array_equal(fa.confidence, fb.confidence):
            return False
    return True


def test_save_load_round_trip_exact(tmp_path):
    clip = make_clip(n_frames=25)
    path = tmp_path / "clip.ndjson"
    save_clip(clip, path)
    assert clips_equal(load_clip(path), clip)


def test_round_trip_preserves_10k_random_timestamps(tmp_path):
    rng = np.random.default_rng(42)
    base = template_frame()
    t = 0
    frames = []
    for _ in range(10_000):
        t += int(rng.integers(20, 50))
        pos = base.positions + rng.normal(0, 0.02, (JOINT_COUNT, 3))
        frames.append(SkeletonFrame(t, pos, np.ones(JOINT_COUNT)))
    clip = MotionClip("big", "Big", 30.0, tuple(frames), BeatGrid(bpm=120.0))
    path = tmp_path / "big.ndjson"
    save_clip(clip, path)
    loaded = load_clip(path)
    assert [f.t_ms for f in loaded.frames] == [f.t_ms for f in clip.frames]
    for i in (0, 1234, 9999):
        assert np.array_equal(loaded.frames[i].positions, clip.frames[i].positions)


def _write_lines(path, lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _clip_lines(tmp_path, clip):
    path = tmp_path / "c.ndjson"
    save_clip(clip, path)
    return path.read_text(encoding="utf-8").splitlines()


def test_out_of_order_frames_name_the_line(tmp_path):
    lines = _clip_lines(tmp_path, make_clip(n_frames=5))
    lines[2], lines[3] = lines[3], lines[2]
    path = _write_lines(tmp_path / "bad.ndjson", lines)
    with pytest.raises(errors.InvariantError) as exc:
        load_clip(path)
    assert "line 4" in str(exc.value)


def test_19_joint_frame_is_a_schema_error(tmp_path):
    lines = _clip_lines(tmp_path, make_clip(n_frames=4))
    record = json.loads(lines[2])
    record["j"] = record["j"][:19]
    lines[2] = json.dumps(record)
    with pytest.raises(errors.SchemaError):
        load_clip(_write_lines(tmp_path / "bad.ndjson", lines))


def test_invalid_json_names_the_line(tmp_path):
    lines = _clip_lines(tmp_path, make_clip(n_frames=4))
    lines[3] = "not json"
    with pytest.raises(errors.ParseError) as exc:
        load_clip(_write_lines(tmp_path / "bad.ndjson", lines))
    assert exc.value.line == 4


def test_single_frame_clip_rejected(tmp_path):
    lines = _clip_lines(tmp_path, make_clip(n_frames=4))
    short = [lines[0], lines[1], lines[-1]]
    with pytest.raises(errors.ParseError):
        load_clip(_write_lines(tmp_path / "bad.ndjson", short))


def test_missing_trailer_rejected(tmp_path):
    lines = _clip_lines(tmp_path, make_clip(n_frames=4))
    with pytest.raises(errors.ParseError):
        load_clip(_write_lines(tmp_path / "bad.ndjson", lines[:-1]))


def test_wrong_joint_set_is_a_schema_error(tmp_path):
    lines = _clip_lines(tmp_path, make_clip(n_frames=4))
    header = json.loads(lines[0])
    header["joint_set"] = "k25"
    lines[0] = json.dumps(header)
    with pytest.raises(errors.SchemaError):
        load_clip(_write_lines(tmp_path / "bad.ndjson", lines))


def test_key_pose_outside_duration_rejected(tmp_path):
    clip = make_clip(n_frames=10, n_key_poses=0)
    bad = MotionClip(
        clip.clip_id, clip.title, clip.fps, clip.frames,
        BeatGrid(bpm=96.0, key_poses=(KeyPose(999_999, 5, "kp"),)),
    )
    path = tmp_path / "bad.ndjson"
    save_clip(bad, path)
    with pytest.raises(errors.InvariantError):
        load_clip(path)


def test_key_pose_frame_index_mismatch_rejected(tmp_path):
    clip = make_clip(n_frames=30, n_key_poses=0)
    bad = MotionClip(
        clip.clip_id, clip.title, clip.fps, clip.frames,
        BeatGrid(bpm=96.0, key_poses=(KeyPose(clip.frames[20].t_ms, 2, "kp"),)),
    )
    path = tmp_path / "bad.ndjson"
    save_clip(bad, path)
    with pytest.raises(errors.InvariantError):
        load_clip(path)


def _spec(clip, start, end, challenge_id="ch", order=0):
    return ChallengeSpec(challenge_id, clip.clip_id, (start, end), order)


def test_segment_full_clip_is_identity():
    clip = make_clip(n_frames=20)
    out = segment_challenge(clip, _spec(clip, 0, clip.duration_ms))
    assert clips_equal(out, clip)


def test_segment_1000_to_2000_at_30fps_keeps_31_frames():
    clip = make_clip(n_frames=90, fps=30.0)
    out = segment_challenge(clip, _spec(clip, 1000, 2000))
    assert len(out.frames) == 31
    assert out.frames[0].t_ms == 0
    assert out.frames[-1].t_ms == 1000


def test_segment_rebases_key_poses(tmp_path):
    clip = make_clip(n_frames=90, n_key_poses=5)
    out = segment_challenge(clip, _spec(clip, 500, 2500))
    kept = [kp for kp in clip.beat_grid.key_poses if 500 <= kp.t_ms <= 2500]
    assert [kp.t_ms for kp in out.beat_grid.key_poses] == [kp.t_ms - 500 for kp in kept]
    # the sub-clip must satisfy every clip invariant; the loader checks them all
    path = tmp_path / "seg.ndjson"
    save_clip(out, path)
    load_clip(path)


def test_segment_bad_ranges():
    clip = make_clip(n_frames=20)
    with pytest.raises(errors.RangeError):
        segment_challenge(clip, _spec(clip, 300, 100))
    with pytest.raises(errors.RangeError):
        segment_challenge(clip, _spec(clip, 0, 10_000_000))
    other = ChallengeSpec("ch", "other-clip", (0, 100), 0)
    with pytest.raises(errors.RangeError):
        segment_challenge(clip, other)


def _catalog(thresholds=(75.0, 75.0, 75.0)):
    return Catalog(
        [
            ChallengeSpec(f"ch{i}", f"clip{i}", (0, 1000), i, thresholds[i])
            for i in range(len(thresholds))
        ]
    )


def test_unlock_at_threshold():
    store = ProgressStore()
    _, newly = unlock_check(store, _catalog(), "ch0", 75.0)
    assert newly == ["ch1"]
    assert store.is_unlocked(_catalog(), "ch1")


def test_no_unlock_just_below_threshold():
    store = ProgressStore()
    _, newly = unlock_check(store, _catalog(), "ch0", 74.9)
    assert newly == []
    assert store.record("ch0").best_score == 74.9
    assert not store.is_unlocked(_catalog(), "ch1")


def test_resubmit_lower_score_keeps_best_and_unlocks():
    store = ProgressStore()
    unlock_check(store, _catalog(), "ch0", 80.0)
    _, newly = unlock_check(store, _catalog(), "ch0", 60.0)
    assert newly == []
    assert store.record("ch0").best_score == 80.0
    assert store.record("ch0").attempts == 2
    assert store.is_unlocked(_catalog(), "ch1")


def test_unlock_emitted_at_most_once():
    store = ProgressStore()
    _, first = unlock_check(store, _catalog(), "ch0", 90.0)
    _, second = unlock_check(store, _catalog(), "ch0", 95.0)
    assert first == ["ch1"]
    assert second == []


def test_submitting_to_locked_challenge_raises():
    store = ProgressStore()
    with pytest.raises(errors.LockedChallengeError):
        unlock_check(store, _catalog(), "ch1", 99.0)


def test_unknown_challenge_raises():
    store = ProgressStore()
    with pytest.raises(errors.RangeError):
        unlock_check(store, _catalog(), "nope", 99.0)


def test_unlocked_set_is_always_a_prefix():
    rng = np.random.default_rng(3)
    catalog = _catalog((75.0, 60.0, 80.0))
    store = ProgressStore()
    for _ in range(60):
        cid = f"ch{rng.integers(0, 3)}"
        score = float(rng.uniform(0, 100))
        try:
            unlock_check(store, catalog, cid, score)
        except errors.LockedChallengeError:
            continue
        unlocked = [store.is_unlocked(catalog, c.challenge_id) for c in catalog.challenges]
        assert unlocked == sorted(unlocked, reverse=True)


def test_progress_round_trip(tmp_path):
    path = tmp_path / "p.ndjson"
    store = ProgressStore(path=str(path))
    unlock_check(store, _catalog(), "ch0", 88.5)
    loaded = ProgressStore.load(str(path))
    assert loaded.record("ch0").best_score == 88.5
    assert loaded.record("ch0").attempts == 1
    assert loaded.record("ch1").unlocked


def test_catalog_file_round_trip(tmp_path):
    path = tmp_path / "catalog.ndjson"
    records = [
        {"challenge_id": "a", "clip_id": "x", "segment": [0, 1000], "order_index": 0,
         "unlock_threshold": 70.0, "clip_path": "clips/x.ndjson"},
        {"challenge_id": "b", "clip_id": "y", "segment": [0, 2000], "order_index": 1},
    ]
    path.write_text("".join(json.dumps(r) + "\n" for r in records), encoding="utf-8")
    catalog = load_catalog(path)
    assert [c.challenge_id for c in catalog.challenges] == ["a", "b"]
    assert catalog.by_id["b"].unlock_threshold == 75.0
    assert catalog.by_id["a"].clip_path.endswith("clips/x.ndjson")
    assert catalog.next_after("a").challenge_id == "b"
    assert catalog.next_after("b") is None


def test_catalog_rejects_duplicate_order():
    with pytest.raises(errors.InvariantError):
        Catalog(
            [
                ChallengeSpec("a", "x", (0, 1000), 0),
                ChallengeSpec("b", "y", (0, 1000), 0),
            ]
        )
