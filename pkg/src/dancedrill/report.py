"""Session trace summaries: totals, timelines, CSV, and rendered figures.

A trace is the output list a session run produces, one record per
event outcome. Everything here is read-only over that list, so the
same trace can be summarized, exported, and plotted independently.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

from .errors import MalformedLine

_AUDIENCE_LEVEL = {"Standby": 0, "Cheering": 1, "Applauding": 2}


def load_trace(path) -> list[dict]:
    """Read a trace file; accepts bare output records or wire-wrapped ones."""
    outputs = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                record = json.loads(raw)
            except json.JSONDecodeError:
                raise MalformedLine(f"line {lineno}: not valid JSON") from None
            if isinstance(record, dict) and record.get("k") == "output":
                record = record.get("v")
            if not isinstance(record, dict) or "o" not in record:
                raise MalformedLine(f'line {lineno}: not an output record (needs "o")')
            outputs.append(record)
    return outputs


def summarize_trace(trace) -> dict:
    counts: dict[str, int] = {}
    phases = []
    score = None
    hits = []
    unlocked = []
    audience = []
    sounds = []
    frames_scored = 0
    final_rolling = None
    clock = 0

    for i, out in enumerate(trace):
        kind = out["o"]
        counts[kind] = counts.get(kind, 0) + 1
        if kind == "PhaseChanged":
            phases.append(out["phase"])
        elif kind == "ScoreUpdate":
            frames_scored += 1
            final_rolling = out["rolling_avg"]
            clock = out["t_ms"]
        elif kind == "KeyPoseHit":
            hits.append(
                {"label": out["label"], "credit": out["credit"], "offset_ms": out["offset_ms"]}
            )
        elif kind == "AudienceChanged":
            # mode entry emits a SoundRequested right after, stamped with
            # the exact entry time; fall back to the running clock
            t = clock
            if i + 1 < len(trace) and trace[i + 1]["o"] == "SoundRequested":
                t = trace[i + 1]["at_ms"]
            audience.append({"t_ms": t, "mode": out["mode"]})
        elif kind == "SoundRequested":
            clock = max(clock, out["at_ms"])
        elif kind == "SoundEvent":
            sounds.append(
                {
                    "t_ms": out["start_t_ms"],
                    "cue_id": out["cue_id"],
                    "gain": out["gain"],
                    "pan": out["pan"],
                }
            )
        elif kind == "ChallengeUnlocked":
            unlocked.append(out["id"])
        elif kind == "ResultsReady":
            score = out["report"]

    return {
        "outputs": len(trace),
        "counts": counts,
        "phases": phases,
        "score": score,
        "key_pose_hits": hits,
        "unlocked": unlocked,
        "audience": audience,
        "sounds": sounds,
        "frames_scored": frames_scored,
        "final_rolling": final_rolling,
    }


def format_summary(summary: dict) -> str:
    lines = [
        f"outputs        {summary['outputs']}",
        f"frames scored  {summary['frames_scored']}",
        f"phases         {' > '.join(summary['phases']) or '(none)'}",
    ]
    score = summary["score"]
    if score is not None:
        lines.append(
            "score          total {:.2f}  (pose {:.2f}, timing {:.2f})".format(
                score["total"], score["pose_score"], score["timing_score"]
            )
        )
        for kp in score.get("key_poses", []):
            lines.append(
                "  key pose     {:<18} credit {:6.1f}  offset {} ms".format(
                    kp["label"], kp["credit"], kp["offset_ms"]
                )
            )
    else:
        lines.append("score          (no finished attempt)")
    lines.append(f"unlocked       {', '.join(summary['unlocked']) or '(none)'}")
    for entry in summary["audience"]:
        lines.append(f"  audience     {entry['t_ms']:>7} ms  {entry['mode']}")
    for snd in summary["sounds"]:
        lines.append(
            "  sound        {:>7} ms  {:<18} gain {:.2f}  pan {:+.2f}".format(
                snd["t_ms"], snd["cue_id"], snd["gain"], snd["pan"]
            )
        )
    return "\n".join(lines)


def write_score_csv(trace, path) -> int:
    """One row per ScoreUpdate; returns the row count."""
    rows = 0
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t_ms", "frame_score", "rolling_avg", "total_so_far"])
        for out in trace:
            if out["o"] == "ScoreUpdate":
                writer.writerow(
                    [out["t_ms"], out["frame_score"], out["rolling_avg"], out["total_so_far"]]
                )
                rows += 1
    return rows


def render_figures(trace, out_dir, stem="session") -> list[Path]:
    """Render the score and audience timelines as PNG files."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = summarize_trace(trace)

    times, frame_scores, rolling = [], [], []
    hit_times, hit_credits = [], []
    last_t = 0
    for out in trace:
        if out["o"] == "ScoreUpdate":
            last_t = out["t_ms"]
            times.append(out["t_ms"])
            frame_scores.append(out["frame_score"])
            rolling.append(out["rolling_avg"])
        elif out["o"] == "KeyPoseHit":
            hit_times.append(last_t)
            hit_credits.append(out["credit"])

    paths = []

    fig, ax = plt.subplots(figsize=(9, 4))
    ax.plot(times, frame_scores, lw=0.7, alpha=0.6, label="frame score")
    ax.plot(times, rolling, lw=1.8, label="rolling average")
    if hit_times:
        ax.scatter(hit_times, hit_credits, marker="v", zorder=3, label="key pose credit")
    ax.set_xlabel("challenge time (ms)")
    ax.set_ylabel("score")
    ax.set_ylim(-2, 105)
    ax.legend(loc="lower left")
    ax.set_title("Scores over the attempt")
    score_path = out_dir / f"{stem}_scores.png"
    fig.tight_layout()
    fig.savefig(score_path, dpi=110)
    plt.close(fig)
    paths.append(score_path)

    fig, ax = plt.subplots(figsize=(9, 2.8))
    if summary["audience"]:
        steps_t = [a["t_ms"] for a in summary["audience"]]
        steps_v = [_AUDIENCE_LEVEL[a["mode"]] for a in summary["audience"]]
        end = max(last_t, steps_t[-1])
        ax.step(steps_t + [end], steps_v + [steps_v[-1]], where="post")
    ax.set_yticks([0, 1, 2], ["standby", "cheering", "applauding"])
    ax.set_ylim(-0.3, 2.3)
    ax.set_xlabel("challenge time (ms)")
    for snd in summary["sounds"]:
        ax.axvline(snd["t_ms"], color="gray", lw=0.6, alpha=0.5)
    ax.set_title("Audience timeline")
    audience_path = out_dir / f"{stem}_audience.png"
    fig.tight_layout()
    fig.savefig(audience_path, dpi=110)
    plt.close(fig)
    paths.append(audience_path)

    return paths
