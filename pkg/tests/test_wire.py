import numpy as np
import pytest

from dancedrill import errors, wire
from dancedrill.skeleton import JOINT_COUNT, SkeletonFrame


def random_frame(rng, t_ms=0):
    return SkeletonFrame(
        t_ms=t_ms,
        positions=rng.normal(0, 5, (JOINT_COUNT, 3)),
        confidence=rng.uniform(0, 1, JOINT_COUNT),
    )


def test_frame_round_trip_is_value_exact():
    rng = np.random.default_rng(0)
    for i in range(500):
        frame = random_frame(rng, t_ms=i * 33)
        msg = wire.WireMessage("frame", wire.frame_to_payload(frame))
        back = wire.decode(wire.encode(msg))
        assert back.kind == "frame"
        restored = wire.frame_from_payload(back.payload)
        assert restored.t_ms == frame.t_ms
        assert np.array_equal(restored.positions, frame.positions)
        assert np.array_equal(restored.confidence, frame.confidence)


def test_command_and_output_round_trip():
    for payload in (
        {"e": "Select", "kind": "challenge", "id": "ch0"},
        {"e": "StartChallenge"},
        {"e": "Tick", "now_ms": 1234},
    ):
        msg = wire.WireMessage("command", payload)
        assert wire.decode(wire.encode(msg)) == msg
    out = wire.WireMessage("output", {"o": "ScoreUpdate", "frame_score": 98.7654321})
    assert wire.decode(wire.encode(out)) == out


def test_hello_shape():
    msg = wire.hello()
    assert msg.payload == {"format_version": 1, "joint_set": "k20"}
    assert wire.decode(wire.encode(msg)) == msg


def test_hello_snapshot_flag_is_additive():
    msg = wire.hello(snapshot=True)
    assert msg.payload == {"format_version": 1, "joint_set": "k20", "snapshot": True}
    # the plain greeting must stay byte-identical for recorded streams
    assert b"snapshot" not in wire.encode(wire.hello())


def test_not_json_is_malformed():
    with pytest.raises(errors.MalformedLine):
        wire.decode(b"not json\n")


def test_missing_tags_is_malformed():
    with pytest.raises(errors.MalformedLine):
        wire.decode(b'{"kind": "frame"}')
    with pytest.raises(errors.MalformedLine):
        wire.decode(b'[1, 2, 3]')


def test_unknown_kind_decodes_to_error_value():
    msg = wire.decode(b'{"k": "telemetry", "v": {}}')
    assert msg.kind == "error"
    assert msg.payload["code"] == "unknown-kind"


def test_oversize_line_rejected_both_ways():
    big = wire.WireMessage("command", {"e": "Select", "id": "x" * (70 * 1024)})
    with pytest.raises(errors.FrameTooLarge):
        wire.encode(big)
    with pytest.raises(errors.FrameTooLarge):
        wire.decode(b"x" * (65 * 1024))


def test_bad_frame_payloads_rejected():
    with pytest.raises(errors.MalformedLine):
        wire.frame_from_payload({"t_ms": 0, "j": [[0, 0, 0, 1]] * 19})
    with pytest.raises(errors.MalformedLine):
        wire.frame_from_payload({"t_ms": 0.5, "j": [[0, 0, 0, 1]] * 20})
    with pytest.raises(errors.MalformedLine):
        wire.frame_from_payload({"j": [[0, 0, 0, 1]] * 20})


def test_event_log_round_trip():
    rng = np.random.default_rng(1)
    frame = random_frame(rng, t_ms=42)
    events = [
        {"e": "Tick", "now_ms": 0},
        {"e": "StartChallenge"},
        {"e": "FrameIn", "frame": frame},
    ]
    lines = [wire.encode_event(e) for e in events]
    decoded = [wire.decode_event(ln) for ln in lines]
    assert decoded[0] == events[0]
    assert decoded[1] == events[1]
    restored = decoded[2]["frame"]
    assert restored.t_ms == 42
    assert np.array_equal(restored.positions, frame.positions)
