import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_clip, posed_frame, swung_frame
from dancedrill import errors
from dancedrill.library import BeatGrid, MotionClip
from dancedrill.scoring import (
    AlignmentResult,
    KeyPoseResult,
    OnlineMatcher,
    ScoringConfig,
    _FeatureBank,
    _distances_to_window,
    dtw_align,
    finalize,
    frame_distance,
    score_from_error,
    timing_credit,
)
from dancedrill.skeleton import BONE_COUNT, NormalizedPose, normalize

CFG = ScoringConfig()


def all_valid_pose(direction=(0.0, 1.0, 0.0)):
    dirs = np.tile(np.array(direction), (BONE_COUNT, 1))
    return NormalizedPose(directions=dirs, valid=np.ones(BONE_COUNT, dtype=bool))


def test_config_validation():
    with pytest.raises(errors.ConfigError):
        ScoringConfig(e_max=0.0)
    with pytest.raises(errors.ConfigError):
        ScoringConfig(pose_weight=0.8, timing_weight=0.3)
    with pytest.raises(errors.ConfigError):
        ScoringConfig(timing_full_ms=500, timing_zero_ms=100)
    with pytest.raises(errors.ConfigError):
        ScoringConfig(band_frames=0)
    with pytest.raises(errors.ConfigError):
        ScoringConfig(weights=np.zeros(BONE_COUNT))


def test_identical_poses_have_exactly_zero_distance():
    pose = normalize(posed_frame(11))
    assert frame_distance(pose, pose, CFG) == 0.0


def test_single_bone_90_degrees_weighted_mean():
    a = all_valid_pose()
    b = all_valid_pose()
    dirs = b.directions.copy()
    dirs[14] = [0.0, 0.0, 1.0]  # knee_l to ankle_l, weight 2.0
    b = NormalizedPose(directions=dirs, valid=b.valid)
    assert frame_distance(a, b, CFG) == 2.0 * (np.pi / 2) / 21.5


def test_no_common_valid_bones_returns_e_max():
    a = all_valid_pose()
    b = all_valid_pose()
    av = np.zeros(BONE_COUNT, dtype=bool)
    av[0] = True
    bv = np.zeros(BONE_COUNT, dtype=bool)
    bv[5] = True
    a = NormalizedPose(directions=a.directions, valid=av)
    b = NormalizedPose(directions=b.directions, valid=bv)
    assert frame_distance(a, b, CFG) == CFG.e_max


@settings(max_examples=40, deadline=None)
@given(s1=st.integers(0, 10**6), s2=st.integers(0, 10**6))
def test_distance_symmetric_nonnegative_bounded(s1, s2):
    a = normalize(posed_frame(s1))
    b = normalize(posed_frame(s2))
    d_ab = frame_distance(a, b, CFG)
    assert d_ab == frame_distance(b, a, CFG)
    assert 0.0 <= d_ab <= max(np.pi, CFG.e_max)


def test_score_from_error_anchors():
    assert score_from_error(0.0, CFG) == 100.0
    assert score_from_error(CFG.e_max, CFG) == 0.0
    assert score_from_error(2 * CFG.e_max, CFG) == 0.0
    half = ScoringConfig(e_max=np.pi / 2)
    assert score_from_error(np.pi / 4, half) == 50.0
    with pytest.raises(errors.ConfigError):
        score_from_error(-0.1, CFG)


def test_timing_credit_piecewise_linear():
    assert timing_credit(0, CFG) == 100.0
    assert timing_credit(100, CFG) == 100.0
    assert timing_credit(-100, CFG) == 100.0
    assert timing_credit(300, CFG) == 50.0
    assert timing_credit(-300, CFG) == 50.0
    assert timing_credit(500, CFG) == 0.0
    assert timing_credit(900, CFG) == 0.0


def test_dtw_self_alignment_is_perfect():
    clip = make_clip(n_frames=40)
    result = dtw_align(clip, clip.frames, CFG)
    assert result.mean_error == 0.0
    assert result.path == tuple((i, i) for i in range(40))
    assert all(k.timing_offset_ms == 0.0 and k.credit == 100.0 for k in result.per_key_pose)
    report = finalize(result, CFG)
    assert report.total == 100.0


def test_dtw_prefers_zero_cost_compression():
    a = swung_frame(0.0, t_ms=0)
    a2 = swung_frame(0.0, t_ms=33)
    b = swung_frame(1.5, t_ms=66)
    ref = MotionClip("r", "R", 30.0, (a, a2, b), BeatGrid(bpm=96.0))
    perf = [swung_frame(0.0, t_ms=0), swung_frame(1.5, t_ms=33)]
    result = dtw_align(ref, perf, CFG)
    assert result.cost == 0.0
    assert result.path == ((0, 0), (1, 0), (2, 1))


def brute_force_cost(dist, band):
    n_ref, n_perf = dist.shape
    best = [np.inf]

    def walk(i, j, acc):
        if abs(i - j) > band:
            return
        acc = acc + dist[i, j]
        if i == n_ref - 1 and j == n_perf - 1:
            if acc < best[0]:
                best[0] = acc
            return
        if i + 1 < n_ref and j + 1 < n_perf:
            walk(i + 1, j + 1, acc)
        if i + 1 < n_ref:
            walk(i + 1, j, acc)
        if j + 1 < n_perf:
            walk(i, j + 1, acc)

    walk(0, 0, 0.0)
    return best[0]


def random_instance(seed, max_len=8):
    rng = np.random.default_rng(seed)
    n_ref = int(rng.integers(2, max_len + 1))
    n_perf = int(rng.integers(2, max_len + 1))
    ref_frames = [posed_frame(seed * 1000 + i, t_ms=i * 33) for i in range(n_ref)]
    perf_frames = [posed_frame(seed * 1000 + 500 + i, t_ms=i * 33) for i in range(n_perf)]
    ref = MotionClip("r", "R", 30.0, tuple(ref_frames), BeatGrid(bpm=120.0))
    return ref, perf_frames


def dtw_matches_brute_force(seed, band=8):
    ref, perf = random_instance(seed)
    cfg = ScoringConfig(band_frames=band)
    result = dtw_align(ref, perf, cfg)
    ref_bank = _FeatureBank(ref.frames, cfg)
    perf_bank = _FeatureBank(perf, cfg)
    dist = np.full((len(ref.frames), len(perf)), np.inf)
    for i in range(len(ref.frames)):
        dist[i, :] = _distances_to_window(
            ref_bank.dirs[i], ref_bank.valid[i], perf_bank, 0, len(perf) - 1, cfg
        )
    assert result.cost == brute_force_cost(dist, band)


def test_dtw_equals_brute_force_on_random_instances():
    for seed in range(40):
        dtw_matches_brute_force(seed)


def test_wider_band_never_costs_more():
    ref = make_clip(n_frames=30)
    rng = np.random.default_rng(5)
    perf = [
        swung_frame(i * 0.3 + rng.normal(0, 0.2), t_ms=i * 33) for i in range(34)
    ]
    costs = []
    for band in (4, 8, 16, 34):
        costs.append(dtw_align(ref, perf, ScoringConfig(band_frames=band)).cost)
    assert all(a >= b for a, b in zip(costs, costs[1:]))


def test_band_infeasible_and_empty_input():
    ref = make_clip(n_frames=10)
    with pytest.raises(errors.BandInfeasible):
        dtw_align(ref, make_clip(n_frames=40).frames, ScoringConfig(band_frames=15))
    with pytest.raises(errors.EmptyInput):
        dtw_align(ref, ref.frames[:1], CFG)


def stream(matcher, frames, delay_ms=0):
    updates = []
    for f in frames:
        shifted = type(f)(f.t_ms + delay_ms, f.positions, f.confidence)
        updates.append(matcher.step(shifted))
    return updates


def test_online_self_stream_is_perfect():
    clip = make_clip(n_frames=60)
    matcher = OnlineMatcher(clip, CFG)
    updates = stream(matcher, clip.frames)
    assert all(u.frame_score == 100.0 for u in updates)
    assert all(u.rolling_avg == 100.0 for u in updates)
    assert matcher.at_end
    assert [h.timing_offset_ms for h in matcher.hits] == [0.0, 0.0, 0.0]
    report = finalize(matcher, CFG)
    assert report.total == 100.0


@pytest.mark.parametrize(
    "delay,expected",
    [(0, 100.0), (100, 100.0), (300, 50.0), (500, 0.0)],
)
def test_online_constant_delay_timing_credit(delay, expected):
    clip = make_clip(n_frames=60)
    matcher = OnlineMatcher(clip, CFG)
    updates = stream(matcher, clip.frames, delay_ms=delay)
    assert all(u.frame_score == 100.0 for u in updates)
    assert len(matcher.hits) == 3
    for hit in matcher.hits:
        assert hit.timing_offset_ms == float(delay)
        assert hit.credit == expected


def test_out_of_order_frame_rejected():
    clip = make_clip(n_frames=20)
    matcher = OnlineMatcher(clip, CFG)
    matcher.step(clip.frames[5])
    with pytest.raises(errors.OutOfOrderFrame):
        matcher.step(clip.frames[2])


def test_equal_timestamps_allowed():
    clip = make_clip(n_frames=20)
    matcher = OnlineMatcher(clip, CFG)
    matcher.step(clip.frames[0])
    matcher.step(clip.frames[0])


def test_cursor_never_moves_backward():
    clip = make_clip(n_frames=40)
    matcher = OnlineMatcher(clip, CFG)
    matcher.step(clip.frames[10])
    reached = matcher.cursor
    replayed = type(clip.frames[2])(
        clip.frames[10].t_ms + 1, clip.frames[2].positions, clip.frames[2].confidence
    )
    matcher.step(replayed)
    assert matcher.cursor >= reached


def test_dropped_frames_still_finalize():
    clip = make_clip(n_frames=60)
    rng = np.random.default_rng(9)
    kept = [f for f in clip.frames if rng.random() > 0.3]
    matcher = OnlineMatcher(clip, CFG)
    stream(matcher, kept)
    report = finalize(matcher, CFG)
    assert matcher.coverage >= 0.5
    assert report.total >= 90.0


def test_short_attempt_is_incomplete():
    clip = make_clip(n_frames=60)
    matcher = OnlineMatcher(clip, CFG)
    stream(matcher, clip.frames[:24])
    with pytest.raises(errors.IncompleteAttempt):
        finalize(matcher, CFG)


def test_missed_tail_key_poses_count_as_zero():
    clip = make_clip(n_frames=40, n_key_poses=3)  # key poses at frames 10, 20, 30
    matcher = OnlineMatcher(clip, CFG)
    stream(matcher, clip.frames[:25])
    report = finalize(matcher, CFG)
    assert len(matcher.hits) == 2
    assert report.timing_score == pytest.approx(200.0 / 3)
    assert report.pose_score == 100.0


def test_finalize_weighted_mean_example():
    result = AlignmentResult(
        path=((0, 0), (1, 1)),
        cost=0.4 * CFG.e_max,
        mean_error=0.2 * CFG.e_max,
        per_key_pose=(
            KeyPoseResult("kp01", 300, 0.1, 300.0, 50.0),
            KeyPoseResult("kp02", 900, 0.1, 300.0, 50.0),
        ),
    )
    report = finalize(result, CFG)
    assert report.pose_score == pytest.approx(80.0)
    assert report.timing_score == 50.0
    assert report.total == pytest.approx(71.0)


def test_no_key_poses_earn_full_timing_credit():
    clip = make_clip(n_frames=30, n_key_poses=0)
    matcher = OnlineMatcher(clip, CFG)
    stream(matcher, clip.frames)
    assert finalize(matcher, CFG).timing_score == 100.0
