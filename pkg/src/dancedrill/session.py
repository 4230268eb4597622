"""Session and audience state machines.

One Session object is owned by a single event consumer. Events arrive
in order; every (phase, event) combination yields a defined result, an
illegal one producing a NoOp output rather than an error, so a live
floor never crashes on out-of-phase input.

Events and outputs are plain dicts tagged "e" and "o". Outputs are a
pure function of (state, event); the only randomness in the whole
pipeline, cue choice, lives in the run_session driver under an explicit
seed.

Clocks: Tick events carry the session clock; frames carry the challenge
clock (milliseconds from challenge start). The countdown deadline pins
the two together when a performance begins.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import library, scoring
from .audio import CueLibrary, Emitter, Listener, select_cue, spatialize
from .errors import EmptyCategory, OutOfOrderFrame
from .scoring import OnlineMatcher, ScoringConfig
from .skeleton import validate_frame

IDLE = "Idle"
GUIDED = "Guided"
CHARACTER_SELECT = "CharacterSelect"
CHALLENGE_SELECT = "ChallengeSelect"
COUNTDOWN = "Countdown"
PERFORMING = "Performing"
RESULTS = "Results"

GUIDED_STEPS = 3

STANDBY = "Standby"
CHEERING = "Cheering"
APPLAUDING = "Applauding"

# audience mode to cue category
MODE_CATEGORY = {STANDBY: "ambient", CHEERING: "cheer", APPLAUDING: "applause"}


@dataclass(frozen=True)
class SessionConfig:
    cheer_threshold: float = 70.0
    applaud_threshold: float = 90.0
    cheer_duration_ms: int = 1000
    applaud_duration_ms: int = 3000
    countdown_ms: int = 3000
    timeout_grace_ms: int = 2000


@dataclass(frozen=True)
class AudienceState:
    mode: str = STANDBY
    mode_until_ms: int | None = None


def audience_update(
    audience: AudienceState,
    rolling_avg: float | None,
    keypose_credit: float | None,
    now_ms: int,
    cfg: SessionConfig,
):
    """Advance the audience machine; returns (state, outputs).

    rolling_avg None means a pure clock tick: only expiry applies.
    Applauding is never downgraded by mere cheering until it expires.
    Only mode ENTRY emits outputs; refreshing an active mode is silent.
    """
    mode, until = audience.mode, audience.mode_until_ms
    active = mode != STANDBY and until is not None and now_ms < until

    if keypose_credit is not None and keypose_credit >= cfg.applaud_threshold:
        new_mode = APPLAUDING
        new_until = now_ms + cfg.applaud_duration_ms
    elif mode == APPLAUDING and active:
        new_mode, new_until = mode, until
    elif rolling_avg is not None and rolling_avg >= cfg.cheer_threshold:
        new_mode = CHEERING
        new_until = now_ms + cfg.cheer_duration_ms
    elif mode == CHEERING and active:
        new_mode, new_until = mode, until
    else:
        new_mode, new_until = STANDBY, None

    new_state = AudienceState(new_mode, new_until)
    outputs = []
    if new_mode != mode:
        outputs.append({"o": "AudienceChanged", "mode": new_mode})
        outputs.append({"o": "SoundRequested", "category": MODE_CATEGORY[new_mode], "at_ms": now_ms})
    return new_state, outputs


class Session:
    """The full interactive flow, from idle through results."""

    def __init__(
        self,
        catalog: library.Catalog,
        store: library.ProgressStore,
        clip_provider,
        scoring_cfg: ScoringConfig | None = None,
        session_cfg: SessionConfig | None = None,
        emitters: tuple[Emitter, ...] = (),
        participant_id: str = "guest",
    ):
        self.catalog = catalog
        self.store = store
        self.clip_provider = clip_provider
        self.scoring_cfg = scoring_cfg or ScoringConfig()
        self.session_cfg = session_cfg or SessionConfig()
        self.emitters = tuple(emitters)
        self.participant_id = participant_id

        self.phase = IDLE
        self.guided_step = 0
        self.character_id: str | None = None
        self.challenge_id: str | None = None
        self.last_now_ms = 0
        self.countdown_deadline_ms: int | None = None
        self.perform_start_ms: int | None = None
        self.matcher: OnlineMatcher | None = None
        self.audience = AudienceState()
        self.report = None
        self._emitter_cursor: dict[str, int] = {}

    # -- helpers -------------------------------------------------------

    def _phase_output(self, extra=None):
        out = {"o": "PhaseChanged", "phase": self.phase}
        if extra:
            out.update(extra)
        return out

    def _noop(self, reason):
        return [{"o": "NoOp", "reason": reason}]

    def _pick_emitter(self, category):
        if not self.emitters:
            return None
        i = self._emitter_cursor.get(category, 0)
        self._emitter_cursor[category] = i + 1
        return self.emitters[i % len(self.emitters)].emitter_id

    def _stamp_emitters(self, outputs):
        # emitter choice is deliberately seed-independent round-robin so
        # traces with different seeds differ only in cue ids
        for out in outputs:
            if out["o"] == "SoundRequested" and "emitter_id" not in out:
                out["emitter_id"] = self._pick_emitter(out["category"])
        return outputs

    def _challenge_clip(self):
        spec = self.catalog.by_id[self.challenge_id]
        clip = self.clip_provider(spec.clip_id)
        return library.segment_challenge(clip, spec)

    def _enter_performing(self):
        self.phase = PERFORMING
        self.matcher = OnlineMatcher(self._challenge_clip(), self.scoring_cfg)
        self.perform_start_ms = self.countdown_deadline_ms
        self.countdown_deadline_ms = None
        self.audience = AudienceState()
        outputs = [
            self._phase_output(),
            {"o": "AudienceChanged", "mode": STANDBY},
            {"o": "SoundRequested", "category": MODE_CATEGORY[STANDBY], "at_ms": 0},
        ]
        return self._stamp_emitters(outputs)

    def _report_record(self, report):
        return {
            "pose_score": report.pose_score,
            "timing_score": report.timing_score,
            "total": report.total,
            "key_poses": [
                {"label": k.label, "offset_ms": k.timing_offset_ms, "credit": k.credit}
                for k in report.key_poses
            ],
        }

    def snapshot(self) -> dict:
        """Current view state as one output record.

        Sent to subscribers whose hello asks for it, so a client joining
        or rejoining mid-session can rebuild its display without having
        seen the outputs that led here.
        """
        challenges = []
        for spec in self.catalog.challenges:
            rec = self.store.records.get(spec.challenge_id)
            challenges.append(
                {
                    "id": spec.challenge_id,
                    "clip_id": spec.clip_id,
                    "order_index": spec.order_index,
                    "unlock_threshold": spec.unlock_threshold,
                    "unlocked": self.store.is_unlocked(self.catalog, spec.challenge_id),
                    "best_score": rec.best_score if rec else 0.0,
                    "attempts": rec.attempts if rec else 0,
                }
            )
        return {
            "o": "Snapshot",
            "phase": self.phase,
            "guided_step": self.guided_step,
            "character_id": self.character_id,
            "challenge_id": self.challenge_id,
            "audience": self.audience.mode,
            "challenges": challenges,
            "report": self._report_record(self.report) if self.report else None,
        }

    def _finish(self):
        report = scoring.finalize(self.matcher, self.scoring_cfg)
        self.report = report
        _, newly = library.unlock_check(
            self.store, self.catalog, self.challenge_id, report.total
        )
        self.phase = RESULTS
        self.matcher = None
        outputs = [{"o": "ResultsReady", "report": self._report_record(report)}]
        for challenge_id in newly:
            outputs.append({"o": "ChallengeUnlocked", "id": challenge_id})
        outputs.append(self._phase_output())
        return outputs

    def _abandon(self):
        # unscoreable attempt: count it, back to selection
        rec = self.store.record(self.challenge_id)
        rec.attempts += 1
        self.store.save()
        self.matcher = None
        self.phase = CHALLENGE_SELECT
        return [{"o": "NoOp", "reason": "incomplete-attempt"}, self._phase_output()]

    # -- event handlers ------------------------------------------------

    def apply(self, event: dict) -> list[dict]:
        kind = event.get("e")
        handler = {
            "Reset": self._on_reset,
            "Tick": self._on_tick,
            "Select": self._on_select,
            "StartChallenge": self._on_start,
            "FrameIn": self._on_frame,
        }.get(kind)
        if handler is None:
            return self._noop(f"unknown-event:{kind}")
        return handler(event)

    def _on_reset(self, event):
        self.phase = IDLE
        self.guided_step = 0
        self.character_id = None
        self.challenge_id = None
        self.countdown_deadline_ms = None
        self.perform_start_ms = None
        self.matcher = None
        self.audience = AudienceState()
        self.report = None
        return [self._phase_output()]

    def _on_tick(self, event):
        now = int(event.get("now_ms", 0))
        if now < self.last_now_ms:
            return self._noop("tick-backward")
        self.last_now_ms = now

        if self.phase == COUNTDOWN and now >= self.countdown_deadline_ms:
            return self._enter_performing()

        if self.phase == PERFORMING:
            challenge_now = now - self.perform_start_ms
            self.audience, outputs = audience_update(
                self.audience, None, None, challenge_now, self.session_cfg
            )
            self._stamp_emitters(outputs)
            ref_end = self.matcher.ref.duration_ms
            if challenge_now > ref_end + self.session_cfg.timeout_grace_ms:
                if self.matcher.coverage >= 0.5:
                    outputs.extend(self._finish())
                else:
                    outputs.extend(self._abandon())
            return outputs
        return []

    def _on_select(self, event):
        kind, ident = event.get("kind"), event.get("id")
        if self.phase == CHARACTER_SELECT and kind == "character":
            self.character_id = ident
            self.phase = CHALLENGE_SELECT
            return [self._phase_output()]
        if self.phase == CHALLENGE_SELECT and kind == "challenge":
            if ident not in self.catalog.by_id:
                return self._noop("unknown-challenge")
            if not self.store.is_unlocked(self.catalog, ident):
                return self._noop("locked")
            self.challenge_id = ident
            return []
        return self._noop("select-ignored")

    def _on_start(self, event):
        if self.phase == IDLE:
            self.phase = GUIDED
            self.guided_step = 0
            return [self._phase_output({"step": 0})]
        if self.phase == GUIDED:
            if self.guided_step < GUIDED_STEPS - 1:
                self.guided_step += 1
                return [self._phase_output({"step": self.guided_step})]
            self.phase = CHARACTER_SELECT
            return [self._phase_output()]
        if self.phase == CHALLENGE_SELECT:
            if self.challenge_id is None:
                return self._noop("no-challenge-selected")
            self.phase = COUNTDOWN
            self.countdown_deadline_ms = self.last_now_ms + self.session_cfg.countdown_ms
            return [self._phase_output({"ends_at_ms": self.countdown_deadline_ms})]
        if self.phase == RESULTS:
            self.phase = CHALLENGE_SELECT
            return [self._phase_output()]
        if self.phase == COUNTDOWN:
            return self._noop("countdown-running")
        if self.phase == PERFORMING:
            return self._noop("already-performing")
        return self._noop("start-ignored")

    def _on_frame(self, event):
        if self.phase != PERFORMING:
            return self._noop("not-performing")
        frame = event["frame"]
        if not validate_frame(frame).ok:
            return self._noop("invalid-frame")
        try:
            update = self.matcher.step(frame)
        except OutOfOrderFrame:
            return self._noop("out-of-order-frame")

        outputs = [
            {
                "o": "ScoreUpdate",
                "t_ms": update.t_ms,
                "frame_score": update.frame_score,
                "rolling_avg": update.rolling_avg,
                "total_so_far": update.total_so_far,
            }
        ]
        credit = None
        for hit in update.key_pose_hits:
            outputs.append(
                {
                    "o": "KeyPoseHit",
                    "label": hit.label,
                    "credit": hit.credit,
                    "offset_ms": hit.timing_offset_ms,
                }
            )
            credit = hit.credit if credit is None else max(credit, hit.credit)

        self.audience, audience_outputs = audience_update(
            self.audience, update.rolling_avg, credit, frame.t_ms, self.session_cfg
        )
        outputs.extend(self._stamp_emitters(audience_outputs))

        if self.matcher.at_end:
            outputs.extend(self._finish())
        return outputs


def apply_event(session: Session, event: dict):
    """Functional wrapper: returns (session, outputs)."""
    return session, session.apply(event)


def resolve_sound(out, cue_library, listener, emitter_by_id, rng):
    """Turn a SoundRequested output into a concrete SoundEvent record.

    Returns None when the category holds no cues; every other failure
    mode is a configuration error and raises.
    """
    try:
        cue = select_cue(cue_library, out["category"], rng)
    except EmptyCategory:
        return None
    gain, pan = 1.0, 0.0
    emitter = emitter_by_id.get(out.get("emitter_id"))
    if emitter is not None and listener is not None:
        gain, pan = spatialize(emitter.position, listener)
    return {
        "o": "SoundEvent",
        "cue_id": cue.cue_id,
        "gain": gain,
        "pan": pan,
        "start_t_ms": out["at_ms"],
    }


def run_session(
    events,
    catalog: library.Catalog,
    store: library.ProgressStore,
    seed: int,
    clip_provider,
    cue_library: CueLibrary | None = None,
    listener: Listener | None = None,
    emitters: tuple[Emitter, ...] = (),
    scoring_cfg: ScoringConfig | None = None,
    session_cfg: SessionConfig | None = None,
) -> list[dict]:
    """Fold an event stream through a fresh session; returns the output trace.

    Each SoundRequested output is resolved to a concrete SoundEvent
    (cue id under the seeded rng, gain and pan from stage geometry) and
    appended right after it, so a trace is fully self-describing.
    """
    session = Session(
        catalog,
        store,
        clip_provider,
        scoring_cfg=scoring_cfg,
        session_cfg=session_cfg,
        emitters=emitters,
    )
    rng = np.random.default_rng(seed)
    emitter_by_id = {e.emitter_id: e for e in emitters}
    trace = [{"o": "PhaseChanged", "phase": IDLE}]
    for event in events:
        for out in session.apply(event):
            trace.append(out)
            if out["o"] == "SoundRequested" and cue_library is not None:
                resolved = resolve_sound(out, cue_library, listener, emitter_by_id, rng)
                if resolved is not None:
                    trace.append(resolved)
    return trace
