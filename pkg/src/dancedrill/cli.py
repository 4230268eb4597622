"""Command-line entry points.

Every command exits 0 on success, 1 on a domain error (bad data,
unreachable peer, infeasible scoring), 2 on usage errors. With
--machine, output is one JSON record per line and nothing else is
printed, so the commands compose in pipelines.
"""

from __future__ import annotations

import asyncio
import json
from dataclasses import replace
from pathlib import Path

import click

from . import report as report_mod
from . import wire
from .audio import CueLibrary
from .config import EngineConfig, data_dir, default_config, load_config
from .errors import DanceDrillError
from .library import ProgressStore, clip_provider, load_catalog, load_clip
from .replay import ReplayConfig, record, replay_frames
from .scoring import dtw_align, finalize
from .server import EngineServer, serve_forever
from .session import run_session


def _load_engine_config(config_path) -> EngineConfig:
    try:
        if config_path is None:
            return default_config()
        return load_config(config_path)
    except DanceDrillError as exc:
        raise click.ClickException(str(exc)) from None


def _machine_line(record_dict) -> None:
    click.echo(wire.dumps(record_dict))


@click.group()
def main():
    """Dance training engine: serve, score, replay, validate, report."""


# -- serve -------------------------------------------------------------


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="Engine config file (TOML). Defaults to the built-in profile.")
@click.option("--listen", default=None, help="Override the frame/command socket address.")
@click.option("--http", "http_listen", default=None, help="Override the console address.")
@click.option("--catalog", "catalog_path", type=click.Path(exists=True), default=None,
              help="Override the challenge catalog path.")
@click.option("--seed", default=0, show_default=True, help="Seed for sound-cue choice.")
@click.option("--static-dir", type=click.Path(exists=True, file_okay=False), default=None,
              help="Directory of console files to serve at /.")
@click.option("--ticker/--no-ticker", default=True, show_default=True,
              help="Drive session time from the wall clock.")
def serve(config_path, listen, http_listen, catalog_path, seed, static_dir, ticker):
    """Run the live engine until interrupted."""
    cfg = _load_engine_config(config_path)
    if listen:
        cfg = replace(cfg, listen=listen)
    if http_listen:
        cfg = replace(cfg, http_listen=http_listen)
    if catalog_path:
        cfg = replace(cfg, catalog_path=str(Path(catalog_path).resolve()))
    try:
        server = EngineServer(cfg, seed=seed, ticker=ticker, static_dir=static_dir)
    except DanceDrillError as exc:
        raise click.ClickException(str(exc)) from None
    click.echo(f"listening on {cfg.listen} (socket) and {cfg.http_listen} (console)")
    try:
        asyncio.run(serve_forever(server))
    except KeyboardInterrupt:
        click.echo("stopped")
    except DanceDrillError as exc:
        raise click.ClickException(str(exc)) from None


# -- score -------------------------------------------------------------


def _report_record(rep) -> dict:
    return {
        "pose_score": rep.pose_score,
        "timing_score": rep.timing_score,
        "total": rep.total,
        "key_poses": [
            {
                "label": k.label,
                "offset_ms": k.timing_offset_ms,
                "credit": k.credit,
            }
            for k in rep.key_poses
        ],
    }


@main.command()
@click.argument("ref_path", type=click.Path(exists=True))
@click.argument("perf_path", type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--machine", is_flag=True, help="One JSON record on stdout.")
def score(ref_path, perf_path, config_path, machine):
    """Score a performance clip against a reference clip."""
    cfg = _load_engine_config(config_path)
    try:
        ref = load_clip(ref_path)
        perf = load_clip(perf_path)
        alignment = dtw_align(ref, perf.frames, cfg.scoring)
        rep = finalize(alignment, cfg.scoring)
    except DanceDrillError as exc:
        raise click.ClickException(str(exc)) from None

    if machine:
        _machine_line(_report_record(rep))
        return
    click.echo(f"reference   {ref.clip_id}  ({len(ref.frames)} frames)")
    click.echo(f"performance {perf.clip_id}  ({len(perf.frames)} frames)")
    click.echo(f"pose score   {rep.pose_score:8.3f}")
    click.echo(f"timing score {rep.timing_score:8.3f}")
    click.echo(f"total        {rep.total:8.3f}")
    for kp in rep.key_poses:
        click.echo(
            f"  {kp.label:<18} credit {kp.credit:6.1f}  offset {kp.timing_offset_ms:+5.0f} ms"
        )


# -- replay ------------------------------------------------------------


async def _stream_to_target(frames, target, pace):
    host, sep, port = target.rpartition(":")
    if not sep or not port.isdigit():
        raise click.ClickException(f"target {target!r} is not host:port")
    try:
        reader, writer = await asyncio.open_connection(host, int(port))
    except OSError as exc:
        raise click.ClickException(f"cannot reach {target}: {exc}") from None

    async def drain_inbound():
        # subscribers receive every broadcast; discard them so the
        # server never sees us as stalled
        try:
            while await reader.readline():
                pass
        except (ConnectionError, asyncio.CancelledError):
            pass

    drainer = asyncio.create_task(drain_inbound())
    sent = 0
    try:
        writer.write(wire.encode(wire.hello()))
        await writer.drain()
        loop = asyncio.get_running_loop()
        start = loop.time()
        first_t = None
        for frame in frames:
            if pace:
                if first_t is None:
                    first_t = frame.t_ms
                due = start + (frame.t_ms - first_t) / 1000.0
                delay = due - loop.time()
                if delay > 0:
                    await asyncio.sleep(delay)
            writer.write(wire.encode(wire.WireMessage("frame", wire.frame_to_payload(frame))))
            await writer.drain()
            sent += 1
    finally:
        drainer.cancel()
        writer.close()
        try:
            await writer.wait_closed()
        except (ConnectionError, OSError):
            pass
    return sent


@main.command()
@click.argument("clip_path", type=click.Path(exists=True))
@click.option("--noise-deg", default=0.0, show_default=True,
              help="Per-bone angular noise, degrees.")
@click.option("--dropout", "dropout_p", default=0.0, show_default=True,
              help="Per-frame drop probability.")
@click.option("--time-scale", default=1.0, show_default=True)
@click.option("--offset-ms", default=0, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--target", default=None, help="Stream to HOST:PORT instead of stdout.")
@click.option("--pace/--no-pace", default=True, show_default=True,
              help="Follow frame timestamps when streaming to a target.")
@click.option("--record", "record_path", type=click.Path(), default=None,
              help="Also write the emitted frames as a clip file.")
def replay(clip_path, noise_deg, dropout_p, time_scale, offset_ms, seed, target, pace,
           record_path):
    """Stream a clip through the simulator."""
    try:
        clip = load_clip(clip_path)
        cfg = ReplayConfig(
            clip_id=clip.clip_id,
            noise_deg=noise_deg,
            dropout_p=dropout_p,
            time_scale=time_scale,
            offset_ms=offset_ms,
            seed=seed,
        )
        frames = list(replay_frames(clip, cfg))
    except DanceDrillError as exc:
        raise click.ClickException(str(exc)) from None

    if target is None:
        click.echo(wire.encode(wire.hello()).decode("utf-8"), nl=False)
        for frame in frames:
            line = wire.encode(wire.WireMessage("frame", wire.frame_to_payload(frame)))
            click.echo(line.decode("utf-8"), nl=False)
    else:
        sent = asyncio.run(_stream_to_target(frames, target, pace))
        click.echo(f"streamed {sent} frames to {target}")

    if record_path is not None:
        try:
            record(frames, record_path)
        except DanceDrillError as exc:
            raise click.ClickException(str(exc)) from None


# -- validate ----------------------------------------------------------


def _probe_kind(path) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            if not raw.strip():
                continue
            try:
                head = json.loads(raw)
            except json.JSONDecodeError:
                return "clip"
            if not isinstance(head, dict):
                return "clip"
            if "format_version" in head:
                return "clip"
            if "challenge_id" in head:
                return "catalog"
            if "cue_id" in head:
                return "cues"
            return "clip"
    return "clip"


_VALIDATORS = {"clip": load_clip, "catalog": load_catalog, "cues": CueLibrary.load}


@main.command()
@click.argument("paths", nargs=-1, required=True, type=click.Path(exists=True))
@click.option("--machine", is_flag=True, help="One JSON record per file.")
def validate(paths, machine):
    """Check data files; exits 1 when any file fails."""
    failures = 0
    for path in paths:
        kind = _probe_kind(path)
        error = None
        line = None
        try:
            _VALIDATORS[kind](path)
        except DanceDrillError as exc:
            error = str(exc)
            line = getattr(exc, "line", None)
            failures += 1
        if machine:
            _machine_line(
                {"path": str(path), "kind": kind, "ok": error is None,
                 "error": error, "line": line}
            )
        elif error is None:
            click.echo(f"OK   {path} ({kind})")
        else:
            click.echo(f"FAIL {path} ({kind}): {error}")
    if failures:
        raise click.exceptions.Exit(1)


# -- report ------------------------------------------------------------


@main.command("report")
@click.argument("trace_path", type=click.Path(exists=True))
@click.option("--out-dir", type=click.Path(file_okay=False), default=None,
              help="Where the CSV and figures go; defaults next to the trace.")
@click.option("--machine", is_flag=True, help="Summary as one JSON record.")
def report_cmd(trace_path, out_dir, machine):
    """Summarize a session trace; writes a CSV and rendered figures."""
    trace_path = Path(trace_path)
    out_dir = Path(out_dir) if out_dir else trace_path.parent
    try:
        trace = report_mod.load_trace(trace_path)
    except DanceDrillError as exc:
        raise click.ClickException(str(exc)) from None
    summary = report_mod.summarize_trace(trace)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = trace_path.stem
    csv_path = out_dir / f"{stem}_scores.csv"
    rows = report_mod.write_score_csv(trace, csv_path)
    figures = report_mod.render_figures(trace, out_dir, stem=stem)

    if machine:
        summary = dict(summary)
        summary["csv"] = str(csv_path)
        summary["figures"] = [str(p) for p in figures]
        _machine_line(summary)
        return
    click.echo(report_mod.format_summary(summary))
    click.echo(f"wrote {csv_path} ({rows} rows)")
    for fig in figures:
        click.echo(f"wrote {fig}")


# -- run ---------------------------------------------------------------


@main.command()
@click.argument("events_path", type=click.Path(exists=True), required=False)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--seed", default=0, show_default=True, help="Seed for sound-cue choice.")
@click.option("--machine", is_flag=True, help="One JSON record per output.")
@click.option("--trace-out", type=click.Path(), default=None,
              help="Also write the trace as newline-delimited records.")
def run(events_path, config_path, seed, machine, trace_out):
    """Play an event log through a fresh session (demo log by default)."""
    cfg = _load_engine_config(config_path)
    if events_path is None:
        events_path = data_dir() / "demo_events.ndjson"

    try:
        events = []
        with open(events_path, "r", encoding="utf-8") as fh:
            for raw in fh:
                if raw.strip():
                    events.append(wire.decode_event(raw))
        catalog = load_catalog(cfg.catalog_path)
        store = (
            ProgressStore.load(Path(cfg.progress_dir) / "progress.ndjson")
            if cfg.progress_dir
            else ProgressStore()
        )
        cues = CueLibrary.load(cfg.cues_path) if cfg.cues_path else None
        trace = run_session(
            events,
            catalog,
            store,
            seed=seed,
            clip_provider=clip_provider(catalog),
            cue_library=cues,
            listener=cfg.stage.listener,
            emitters=cfg.stage.emitters,
            scoring_cfg=cfg.scoring,
            session_cfg=cfg.session,
        )
    except DanceDrillError as exc:
        raise click.ClickException(str(exc)) from None
    except OSError as exc:
        raise click.ClickException(str(exc)) from None

    if trace_out:
        with open(trace_out, "w", encoding="utf-8") as fh:
            for out in trace:
                fh.write(wire.dumps(out) + "\n")

    if machine:
        for out in trace:
            _machine_line(out)
        return
    click.echo(report_mod.format_summary(report_mod.summarize_trace(trace)))


if __name__ == "__main__":
    main()
