"""Engine configuration: TOML parsing, strict validation, canonical re-emit.

One file drives everything an installation needs to tune: scoring
shape, session thresholds, data file locations, listen addresses, and
the stage layout the spatializer uses. Unknown keys are rejected so a
typo fails loudly instead of silently keeping a default. Paths are
resolved relative to the config file's directory at load time;
re-emitting therefore produces absolute paths, and parse -> emit ->
parse is a fixed point.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from .audio import Emitter, Listener
from .errors import ConfigError, IoError
from .scoring import ScoringConfig
from .session import SessionConfig

_SCORING_KEYS = (
    "e_max",
    "band_frames",
    "timing_full_ms",
    "timing_zero_ms",
    "pose_weight",
    "timing_weight",
    "window",
    "min_confidence",
    "weights",
)
_SESSION_KEYS = (
    "cheer_threshold",
    "applaud_threshold",
    "cheer_duration_ms",
    "applaud_duration_ms",
    "countdown_ms",
    "timeout_grace_ms",
)
_PATH_KEYS = ("catalog", "cues", "progress_dir")
_SERVER_KEYS = ("listen", "http")
_STAGE_KEYS = (
    "listener_position",
    "listener_facing",
    "d_ref",
    "d_max",
    "emitters",
)
_EMITTER_KEYS = ("id", "position")
_SECTIONS = {
    "scoring": _SCORING_KEYS,
    "session": _SESSION_KEYS,
    "paths": _PATH_KEYS,
    "server": _SERVER_KEYS,
    "stage": _STAGE_KEYS,
}


@dataclass(frozen=True)
class StageConfig:
    listener: Listener
    emitters: tuple[Emitter, ...]


@dataclass(frozen=True)
class EngineConfig:
    scoring: ScoringConfig
    session: SessionConfig
    catalog_path: str
    cues_path: str
    progress_dir: str  # empty string keeps progress in memory only
    listen: str
    http_listen: str
    stage: StageConfig


def _reject_unknown(mapping, allowed, prefix):
    for key in mapping:
        if key not in allowed:
            raise ConfigError(f"unknown config key {prefix}{key}")


def _vec3(value, name):
    if not isinstance(value, list) or len(value) != 3:
        raise ConfigError(f"{name} must be a list of 3 numbers")
    try:
        return [float(v) for v in value]
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a list of 3 numbers") from None


def _resolve(base: Path, value: str) -> str:
    if not value:
        return ""
    p = Path(value)
    if not p.is_absolute():
        p = base / p
    return str(p)


def loads_config(text: str, base_dir) -> EngineConfig:
    """Parse config text; relative paths resolve against base_dir."""
    base = Path(base_dir)
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid config: {exc}") from None
    _reject_unknown(data, _SECTIONS, "")
    for section, allowed in _SECTIONS.items():
        value = data.get(section, {})
        if not isinstance(value, dict):
            raise ConfigError(f"[{section}] must be a table")
        _reject_unknown(value, allowed, f"{section}.")

    sc = dict(data.get("scoring", {}))
    if "weights" in sc:
        weights = sc["weights"]
        if not isinstance(weights, list):
            raise ConfigError("scoring.weights must be a list")
        sc["weights"] = np.asarray(weights, dtype=np.float64)
    scoring = ScoringConfig(**sc)

    session = SessionConfig(**data.get("session", {}))

    paths = data.get("paths", {})
    server = data.get("server", {})

    stage = data.get("stage", {})
    listener_position = _vec3(
        stage.get("listener_position", [0.0, 1.6, 0.0]), "stage.listener_position"
    )
    listener_facing = _vec3(
        stage.get("listener_facing", [0.0, 0.0, 1.0]), "stage.listener_facing"
    )
    norm = float(np.linalg.norm(listener_facing))
    if abs(norm - 1.0) > 1e-6:
        raise ConfigError(f"stage.listener_facing must be unit length, got norm {norm:g}")
    listener = Listener(
        position=listener_position,
        facing=listener_facing,
        d_ref=float(stage.get("d_ref", 1.0)),
        d_max=float(stage.get("d_max", 20.0)),
    )
    emitters = []
    raw_emitters = stage.get("emitters", [])
    if not isinstance(raw_emitters, list):
        raise ConfigError("stage.emitters must be an array of tables")
    for i, entry in enumerate(raw_emitters):
        if not isinstance(entry, dict):
            raise ConfigError("stage.emitters must be an array of tables")
        _reject_unknown(entry, _EMITTER_KEYS, f"stage.emitters[{i}].")
        if "id" not in entry or "position" not in entry:
            raise ConfigError(f"stage.emitters[{i}] needs id and position")
        emitters.append(
            Emitter(
                emitter_id=str(entry["id"]),
                position=_vec3(entry["position"], f"stage.emitters[{i}].position"),
            )
        )

    return EngineConfig(
        scoring=scoring,
        session=session,
        catalog_path=_resolve(base, str(paths.get("catalog", ""))),
        cues_path=_resolve(base, str(paths.get("cues", ""))),
        progress_dir=_resolve(base, str(paths.get("progress_dir", ""))),
        listen=str(server.get("listen", "127.0.0.1:7770")),
        http_listen=str(server.get("http", "127.0.0.1:7771")),
        stage=StageConfig(listener=listener, emitters=tuple(emitters)),
    )


def load_config(path) -> EngineConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(str(exc)) from None
    return loads_config(text, p.parent)


def data_dir() -> Path:
    return Path(str(resources.files("dancedrill").joinpath("data")))


def default_config() -> EngineConfig:
    return load_config(data_dir() / "default_config.toml")


def _toml_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    raise ConfigError(f"cannot emit config value of type {type(value).__name__}")


def dump_config(cfg: EngineConfig) -> str:
    """Emit the canonical TOML form of a config."""
    sc, se, st = cfg.scoring, cfg.session, cfg.stage
    lines = ["[scoring]"]
    for key in _SCORING_KEYS:
        lines.append(f"{key} = {_toml_value(getattr(sc, key))}")
    lines.append("")
    lines.append("[session]")
    for key in _SESSION_KEYS:
        lines.append(f"{key} = {_toml_value(getattr(se, key))}")
    lines.append("")
    lines.append("[paths]")
    lines.append(f"catalog = {_toml_value(cfg.catalog_path)}")
    lines.append(f"cues = {_toml_value(cfg.cues_path)}")
    lines.append(f"progress_dir = {_toml_value(cfg.progress_dir)}")
    lines.append("")
    lines.append("[server]")
    lines.append(f"listen = {_toml_value(cfg.listen)}")
    lines.append(f"http = {_toml_value(cfg.http_listen)}")
    lines.append("")
    lines.append("[stage]")
    lines.append(f"listener_position = {_toml_value(st.listener.position)}")
    lines.append(f"listener_facing = {_toml_value(st.listener.facing)}")
    lines.append(f"d_ref = {_toml_value(st.listener.d_ref)}")
    lines.append(f"d_max = {_toml_value(st.listener.d_max)}")
    for emitter in st.emitters:
        lines.append("")
        lines.append("[[stage.emitters]]")
        lines.append(f"id = {_toml_value(emitter.emitter_id)}")
        lines.append(f"position = {_toml_value(emitter.position)}")
    lines.append("")
    return "\n".join(lines)
