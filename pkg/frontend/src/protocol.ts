// Wire protocol spoken by the engine gateway: one JSON object per
// message, {"k": kind, "v": payload}, 64 KiB ceiling. Over the web
// socket each socket message is one line-equivalent, so no newline
// framing here.

export const FORMAT_VERSION = 1
export const JOINT_SET = 'k20'
export const MAX_LINE_BYTES = 64 * 1024

export type Kind = 'hello' | 'frame' | 'command' | 'output' | 'error'

const KNOWN_KINDS: ReadonlySet<string> = new Set(['hello', 'frame', 'command', 'output', 'error'])

export interface WireMessage {
  k: Kind
  v: any
}

export class ProtocolError extends Error {}

export function encode(msg: WireMessage): string {
  const text = JSON.stringify({ k: msg.k, v: msg.v })
  if (text.length > MAX_LINE_BYTES) {
    throw new ProtocolError(`message of ${text.length} bytes exceeds the ${MAX_LINE_BYTES} cap`)
  }
  return text
}

// Unknown kinds decode to error-valued messages rather than throwing,
// matching the engine: the stream stays up, the message is reportable.
export function decode(data: string): WireMessage {
  if (data.length > MAX_LINE_BYTES) {
    throw new ProtocolError(`message of ${data.length} bytes exceeds the ${MAX_LINE_BYTES} cap`)
  }
  let parsed: any
  try {
    parsed = JSON.parse(data)
  } catch {
    throw new ProtocolError('not JSON')
  }
  if (typeof parsed !== 'object' || parsed === null || typeof parsed.k !== 'string' || !('v' in parsed)) {
    throw new ProtocolError('missing k/v tags')
  }
  if (!KNOWN_KINDS.has(parsed.k)) {
    return { k: 'error', v: { code: 'unknown-kind', detail: parsed.k } }
  }
  return { k: parsed.k as Kind, v: parsed.v }
}

export function hello(snapshot = false): WireMessage {
  const v: Record<string, unknown> = { format_version: FORMAT_VERSION, joint_set: JOINT_SET }
  if (snapshot) v.snapshot = true
  return { k: 'hello', v }
}

export function command(event: Record<string, unknown>): WireMessage {
  return { k: 'command', v: event }
}

// -- commands the console sends ---------------------------------------

export const selectCharacter = (id: string) => command({ e: 'Select', kind: 'character', id })
export const selectChallenge = (id: string) => command({ e: 'Select', kind: 'challenge', id })
export const startChallenge = () => command({ e: 'StartChallenge' })
export const reset = () => command({ e: 'Reset' })

export interface ReplayOptions {
  clipId?: string
  noiseDeg: number
  dropoutP: number
  timeScale: number
  seed: number
}

export function replayStart(opts: ReplayOptions): WireMessage {
  const event: Record<string, unknown> = {
    e: 'Replay',
    action: 'start',
    noise_deg: opts.noiseDeg,
    dropout_p: opts.dropoutP,
    time_scale: opts.timeScale,
    seed: opts.seed,
  }
  if (opts.clipId) event.clip_id = opts.clipId
  return command(event)
}

export const replayStop = () => command({ e: 'Replay', action: 'stop' })

// -- outputs the console receives -------------------------------------

export interface PhaseChanged {
  o: 'PhaseChanged'
  phase: string
  step?: number
  ends_at_ms?: number
}

export interface ScoreUpdate {
  o: 'ScoreUpdate'
  t_ms: number
  frame_score: number
  rolling_avg: number
  total_so_far: number
}

export interface KeyPoseHit {
  o: 'KeyPoseHit'
  label: string
  credit: number
  offset_ms: number
}

export interface AudienceChanged {
  o: 'AudienceChanged'
  mode: string
}

export interface SoundEvent {
  o: 'SoundEvent'
  cue_id: string
  gain: number
  pan: number
  start_t_ms: number
}

export interface KeyPoseRow {
  label: string
  offset_ms: number | null
  credit: number
}

export interface Report {
  pose_score: number
  timing_score: number
  total: number
  key_poses: KeyPoseRow[]
}

export interface ResultsReady {
  o: 'ResultsReady'
  report: Report
}

export interface ChallengeUnlocked {
  o: 'ChallengeUnlocked'
  id: string
}

export interface NoOp {
  o: 'NoOp'
  reason: string
}

export interface ChallengeRow {
  id: string
  clip_id: string
  order_index: number
  unlock_threshold: number
  unlocked: boolean
  best_score: number
  attempts: number
}

export interface Snapshot {
  o: 'Snapshot'
  phase: string
  guided_step: number
  character_id: string | null
  challenge_id: string | null
  audience: string
  challenges: ChallengeRow[]
  report: Report | null
}

export interface PoseFrame {
  o: 'PoseFrame'
  t_ms: number
  actual: number[][]
  conf: number[]
  ref: number[][] | null
  ref_index: number | null
}

export interface ReplayStarted {
  o: 'ReplayStarted'
  clip_id: string
  noise_deg: number
  dropout_p: number
  time_scale: number
  offset_ms: number
  seed: number
}

export interface ReplayStopped {
  o: 'ReplayStopped'
  reason: 'finished' | 'stopped'
}

export type Output =
  | PhaseChanged
  | ScoreUpdate
  | KeyPoseHit
  | AudienceChanged
  | SoundEvent
  | ResultsReady
  | ChallengeUnlocked
  | NoOp
  | Snapshot
  | PoseFrame
  | ReplayStarted
  | ReplayStopped
  | { o: 'SoundRequested'; category: string; at_ms: number; [key: string]: unknown }
