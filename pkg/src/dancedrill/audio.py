"""Sound cue selection and listener-relative spatialization.

Cue choice is uniform over the requested category minus whatever played
last there, so back-to-back repeats never happen once a category has
two cues. Spatialization maps emitter geometry to (gain, pan):
inverse-distance gain clamped at a reference distance with a hard
cutoff, and pan as the sine of the signed horizontal angle off the
facing direction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFacing, EmptyCategory, InvariantError, IoError, ParseError

CATEGORIES = ("cheer", "applause", "ambient")


@dataclass(frozen=True)
class SoundCue:
    cue_id: str
    category: str
    duration_ms: int
    asset_path: str = ""


@dataclass(frozen=True)
class SoundEvent:
    cue_id: str
    gain: float
    pan: float
    start_t_ms: int


@dataclass(frozen=True)
class Emitter:
    emitter_id: str
    position: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=np.float64))


@dataclass(frozen=True)
class Listener:
    position: np.ndarray
    facing: np.ndarray
    d_ref: float = 1.0
    d_max: float = 20.0

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=np.float64))
        object.__setattr__(self, "facing", np.asarray(self.facing, dtype=np.float64))


class CueLibrary:
    def __init__(self, cues):
        self.by_category: dict[str, list[SoundCue]] = {c: [] for c in CATEGORIES}
        seen = set()
        for cue in cues:
            if cue.category not in self.by_category:
                raise InvariantError(f"unknown cue category {cue.category!r}")
            if cue.cue_id in seen:
                raise InvariantError(f"duplicate cue_id {cue.cue_id!r}")
            if cue.duration_ms <= 0:
                raise InvariantError(f"cue {cue.cue_id!r} duration must be positive")
            seen.add(cue.cue_id)
            self.by_category[cue.category].append(cue)
        self.last_played: dict[str, str | None] = {c: None for c in CATEGORIES}

    @classmethod
    def load(cls, path) -> "CueLibrary":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                lines = fh.read().splitlines()
        except OSError as exc:
            raise IoError(str(exc)) from None
        cues = []
        for lineno, raw in enumerate(lines, start=1):
            if not raw.strip():
                continue
            try:
                record = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON ({exc.msg})", line=lineno) from None
            for key in ("cue_id", "category", "duration_ms"):
                if key not in record:
                    raise ParseError(f"cue record missing {key}", line=lineno)
            cues.append(
                SoundCue(
                    cue_id=str(record["cue_id"]),
                    category=str(record["category"]),
                    duration_ms=int(record["duration_ms"]),
                    asset_path=str(record.get("asset_path", "")),
                )
            )
        return cls(cues)


def select_cue(lib: CueLibrary, category: str, rng: np.random.Generator) -> SoundCue:
    """Draw uniformly over the category, excluding the last played cue.

    Mutates lib.last_played. A single-cue category always returns that
    cue; an empty one raises EmptyCategory.
    """
    if category not in lib.by_category:
        raise EmptyCategory(f"unknown category {category!r}")
    cues = lib.by_category[category]
    if not cues:
        raise EmptyCategory(f"no cues in category {category!r}")
    last = lib.last_played[category]
    candidates = [c for c in cues if c.cue_id != last] if len(cues) > 1 else cues
    cue = candidates[int(rng.integers(len(candidates)))]
    lib.last_played[category] = cue.cue_id
    return cue


def spatialize(emitter, listener: Listener):
    """Compute (gain, pan) for an emitter position relative to a listener.

    gain = clamp(d_ref / max(d, d_ref), 0, 1), and 0 beyond d_max.
    pan is the sine of the signed horizontal angle between facing and
    the emitter direction: straight ahead 0, 90 degrees right +1.
    """
    pos = np.asarray(emitter, dtype=np.float64)
    facing = listener.facing
    norm = float(np.linalg.norm(facing))
    if abs(norm - 1.0) > 1e-6:
        raise DegenerateFacing(f"facing must be unit length, got norm {norm:g}")

    delta = pos - listener.position
    d = float(np.linalg.norm(delta))
    if d > listener.d_max:
        gain = 0.0
    else:
        gain = min(max(listener.d_ref / max(d, listener.d_ref), 0.0), 1.0)

    fh = np.array([facing[0], 0.0, facing[2]])
    fh_norm = float(np.linalg.norm(fh))
    if fh_norm < 1e-9:
        raise DegenerateFacing("facing has no horizontal component, pan undefined")
    vh = np.array([delta[0], 0.0, delta[2]])
    vh_norm = float(np.linalg.norm(vh))
    if vh_norm < 1e-9:
        pan = 0.0
    else:
        # right-hand side of facing for +Y up: cross(facing_h, up)
        right = np.array([-fh[2], 0.0, fh[0]]) / fh_norm
        pan = float(np.dot(vh / vh_norm, right))
    return gain, pan
