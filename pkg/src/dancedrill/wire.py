"""Newline-delimited wire protocol.

One JSON object per line, tagged {"k": kind, "v": payload}. Kinds:
hello, frame, command, output, error. The first message on a
connection must be hello; frames carry skeleton samples, commands carry
session events, outputs flow back to subscribers.

Numeric fields survive encode/decode exactly: Python's float repr is
shortest-round-trip.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import FrameTooLarge, MalformedLine
from .skeleton import JOINT_COUNT, SkeletonFrame

FORMAT_VERSION = 1
JOINT_SET = "k20"
MAX_LINE_BYTES = 64 * 1024

KINDS = ("hello", "frame", "command", "output", "error")


@dataclass(frozen=True)
class WireMessage:
    kind: str
    payload: dict


def dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"))


def hello(snapshot: bool = False) -> WireMessage:
    payload = {"format_version": FORMAT_VERSION, "joint_set": JOINT_SET}
    if snapshot:
        # subscriber wants the current session state replayed to it
        payload["snapshot"] = True
    return WireMessage("hello", payload)


def error(code: str, detail: str = "") -> WireMessage:
    return WireMessage("error", {"code": code, "detail": detail})


def frame_to_payload(frame: SkeletonFrame) -> dict:
    joints = [
        [frame.positions[j, 0], frame.positions[j, 1], frame.positions[j, 2], frame.confidence[j]]
        for j in range(JOINT_COUNT)
    ]
    return {"t_ms": int(frame.t_ms), "j": joints}


def frame_from_payload(payload) -> SkeletonFrame:
    if not isinstance(payload, dict) or "t_ms" not in payload or "j" not in payload:
        raise MalformedLine("frame payload needs t_ms and j")
    joints = payload["j"]
    if not isinstance(joints, list) or len(joints) != JOINT_COUNT:
        raise MalformedLine(f"frame payload needs {JOINT_COUNT} joints")
    try:
        arr = np.array(joints, dtype=np.float64)
    except (TypeError, ValueError):
        raise MalformedLine("joint entries must be [x, y, z, c] numbers") from None
    if arr.shape != (JOINT_COUNT, 4):
        raise MalformedLine("joint entries must be [x, y, z, c] numbers")
    t_ms = payload["t_ms"]
    if not isinstance(t_ms, int):
        raise MalformedLine(f"t_ms {t_ms!r} is not an integer")
    return SkeletonFrame(t_ms=t_ms, positions=arr[:, :3], confidence=arr[:, 3])


def encode(msg: WireMessage) -> bytes:
    data = (dumps({"k": msg.kind, "v": msg.payload}) + "\n").encode("utf-8")
    if len(data) > MAX_LINE_BYTES:
        raise FrameTooLarge(f"encoded message is {len(data)} bytes, limit {MAX_LINE_BYTES}")
    return data


def decode(line) -> WireMessage:
    """Parse one line; unknown kinds become error-carrying values, not raises."""
    if isinstance(line, str):
        line = line.encode("utf-8")
    if len(line) > MAX_LINE_BYTES:
        raise FrameTooLarge(f"line is {len(line)} bytes, limit {MAX_LINE_BYTES}")
    try:
        obj = json.loads(line)
    except (json.JSONDecodeError, UnicodeDecodeError):
        raise MalformedLine("line is not valid JSON") from None
    if not isinstance(obj, dict) or "k" not in obj or "v" not in obj:
        raise MalformedLine('message needs "k" and "v" fields')
    kind = obj["k"]
    if kind not in KINDS:
        return error("unknown-kind", f"unrecognized kind tag {kind!r}")
    return WireMessage(str(kind), obj["v"])


# -- session event logs -------------------------------------------------


def encode_event(event: dict) -> str:
    """One event as a log line; FrameIn frames become joint arrays."""
    if event.get("e") == "FrameIn":
        out = {"e": "FrameIn", "frame": frame_to_payload(event["frame"])}
        return dumps(out)
    return dumps(event)


def decode_event(line: str) -> dict:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError:
        raise MalformedLine("event line is not valid JSON") from None
    if not isinstance(obj, dict) or "e" not in obj:
        raise MalformedLine('event line needs an "e" field')
    if obj.get("e") == "FrameIn":
        return {"e": "FrameIn", "frame": frame_from_payload(obj.get("frame"))}
    return obj
