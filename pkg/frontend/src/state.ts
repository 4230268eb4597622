// View model and reducer. Everything on screen is a fold over wire
// messages; there is no scoring logic here and no transition the
// engine did not announce. A Snapshot output replaces the whole
// session-shaped part of the model, which is what makes reconnecting
// mid-session lossless.

import type { ChallengeRow, PoseFrame, Report, WireMessage } from './protocol'

export type Connection = 'connecting' | 'open' | 'closed'

export interface Toast {
  text: string
  tone: 'info' | 'warn' | 'gold'
  bornMs: number
}

export interface LiveScore {
  tMs: number
  frame: number
  rolling: number
  total: number
}

export interface KeyFlash {
  label: string
  credit: number
  offsetMs: number
  bornMs: number
}

export interface ViewModel {
  connection: Connection
  phase: string
  guidedStep: number | null
  characterId: string | null
  challengeId: string | null
  countdownEndsAtMs: number | null
  audience: string
  challenges: ChallengeRow[]
  live: LiveScore | null
  pose: PoseFrame | null
  report: Report | null
  replayRunning: boolean
  replayClipId: string | null
  lastNoop: { reason: string; bornMs: number } | null
  keyFlash: KeyFlash | null
  toasts: Toast[]
}

export const TOAST_TTL_MS = 4000
export const KEY_FLASH_TTL_MS = 900
const MAX_TOASTS = 5

export function freshModel(): ViewModel {
  return {
    connection: 'connecting',
    phase: 'Idle',
    guidedStep: null,
    characterId: null,
    challengeId: null,
    countdownEndsAtMs: null,
    audience: 'Standby',
    challenges: [],
    live: null,
    pose: null,
    report: null,
    replayRunning: false,
    replayClipId: null,
    lastNoop: null,
    keyFlash: null,
    toasts: [],
  }
}

function pushToast(model: ViewModel, text: string, tone: Toast['tone'], nowMs: number) {
  model.toasts.push({ text, tone, bornMs: nowMs })
  if (model.toasts.length > MAX_TOASTS) {
    model.toasts.splice(0, model.toasts.length - MAX_TOASTS)
  }
}

function challengeRow(model: ViewModel, id: string): ChallengeRow | undefined {
  return model.challenges.find((c) => c.id === id)
}

export function apply(model: ViewModel, msg: WireMessage, nowMs: number): ViewModel {
  if (msg.k === 'error') {
    const code = msg.v?.code ?? 'error'
    pushToast(model, `engine: ${code}`, 'warn', nowMs)
    return model
  }
  if (msg.k !== 'output') return model

  const out = msg.v
  switch (out.o) {
    case 'PhaseChanged': {
      model.phase = out.phase
      model.guidedStep = out.phase === 'Guided' ? (out.step ?? 0) : null
      model.countdownEndsAtMs = out.phase === 'Countdown' ? (out.ends_at_ms ?? null) : null
      if (out.phase === 'Performing') {
        model.live = null
        model.pose = null
        model.report = null
        model.keyFlash = null
      }
      if (out.phase === 'Idle') {
        // Reset announced by the engine; selections are gone
        model.characterId = null
        model.challengeId = null
        model.live = null
        model.pose = null
        model.report = null
      }
      break
    }
    case 'ScoreUpdate': {
      model.live = {
        tMs: out.t_ms,
        frame: out.frame_score,
        rolling: out.rolling_avg,
        total: out.total_so_far,
      }
      break
    }
    case 'KeyPoseHit': {
      model.keyFlash = {
        label: out.label,
        credit: out.credit,
        offsetMs: out.offset_ms,
        bornMs: nowMs,
      }
      const sign = out.offset_ms >= 0 ? '+' : ''
      pushToast(
        model,
        `key pose ${out.label}: credit ${Math.round(out.credit)} (${sign}${Math.round(out.offset_ms)} ms)`,
        out.credit >= 100 ? 'gold' : 'info',
        nowMs,
      )
      break
    }
    case 'AudienceChanged': {
      model.audience = out.mode
      pushToast(model, `audience: ${out.mode.toLowerCase()}`, out.mode === 'Applauding' ? 'gold' : 'info', nowMs)
      break
    }
    case 'SoundEvent': {
      const side = out.pan < -0.05 ? 'left' : out.pan > 0.05 ? 'right' : 'center'
      pushToast(model, `♪ ${out.cue_id} (${side})`, 'info', nowMs)
      break
    }
    case 'ResultsReady': {
      model.report = out.report
      // fold the attempt into the local challenge table the same way the
      // progress store does; the next Snapshot overwrites it anyway
      if (model.challengeId) {
        const row = challengeRow(model, model.challengeId)
        if (row) {
          row.attempts += 1
          if (out.report.total > row.best_score) row.best_score = out.report.total
        }
      }
      break
    }
    case 'ChallengeUnlocked': {
      const row = challengeRow(model, out.id)
      if (row) row.unlocked = true
      pushToast(model, `challenge unlocked: ${out.id}`, 'gold', nowMs)
      break
    }
    case 'NoOp': {
      model.lastNoop = { reason: out.reason, bornMs: nowMs }
      break
    }
    case 'Snapshot': {
      model.phase = out.phase
      model.guidedStep = out.phase === 'Guided' ? out.guided_step : null
      model.characterId = out.character_id
      model.challengeId = out.challenge_id
      model.audience = out.audience
      model.challenges = out.challenges
      model.report = out.report
      break
    }
    case 'PoseFrame': {
      model.pose = out
      break
    }
    case 'ReplayStarted': {
      model.replayRunning = true
      model.replayClipId = out.clip_id
      pushToast(model, `replay started: ${out.clip_id} @ ${out.noise_deg}° noise`, 'info', nowMs)
      break
    }
    case 'ReplayStopped': {
      model.replayRunning = false
      if (out.reason === 'stopped') pushToast(model, 'replay stopped', 'info', nowMs)
      break
    }
    default:
      // SoundRequested and anything newer than this build: ignore
      break
  }
  return model
}

// Drop expired transients; call once per render frame.
export function prune(model: ViewModel, nowMs: number) {
  model.toasts = model.toasts.filter((t) => nowMs - t.bornMs < TOAST_TTL_MS)
  if (model.keyFlash && nowMs - model.keyFlash.bornMs > KEY_FLASH_TTL_MS) {
    model.keyFlash = null
  }
  if (model.lastNoop && nowMs - model.lastNoop.bornMs > TOAST_TTL_MS) {
    model.lastNoop = null
  }
}
