import assert from 'node:assert/strict'
import { test } from 'node:test'

import type { ChallengeRow, WireMessage } from '../src/protocol'
import { apply, freshModel, prune, TOAST_TTL_MS } from '../src/state'
import type { ViewModel } from '../src/state'

const out = (o: string, fields: Record<string, unknown> = {}): WireMessage => ({
  k: 'output',
  v: { o, ...fields },
})

function rows(): ChallengeRow[] {
  return [
    { id: 'ch-warmup', clip_id: 'demo-a', order_index: 0, unlock_threshold: 75, unlocked: true, best_score: 0, attempts: 0 },
    { id: 'ch-sleeves', clip_id: 'demo-b', order_index: 1, unlock_threshold: 75, unlocked: false, best_score: 0, attempts: 0 },
  ]
}

function feed(model: ViewModel, msgs: WireMessage[], nowMs = 0) {
  for (const m of msgs) apply(model, m, nowMs)
  return model
}

test('phase outputs move the model through a whole session', () => {
  const m = freshModel()
  feed(m, [
    out('Snapshot', {
      phase: 'Idle', guided_step: 0, character_id: null, challenge_id: null,
      audience: 'Standby', challenges: rows(), report: null,
    }),
    out('PhaseChanged', { phase: 'Guided', step: 0 }),
    out('PhaseChanged', { phase: 'Guided', step: 2 }),
  ])
  assert.equal(m.phase, 'Guided')
  assert.equal(m.guidedStep, 2)

  feed(m, [out('PhaseChanged', { phase: 'CharacterSelect' })])
  assert.equal(m.guidedStep, null)

  feed(m, [
    out('PhaseChanged', { phase: 'ChallengeSelect' }),
    out('PhaseChanged', { phase: 'Countdown', ends_at_ms: 4250 }),
  ])
  assert.equal(m.countdownEndsAtMs, 4250)

  feed(m, [out('PhaseChanged', { phase: 'Performing' })])
  assert.equal(m.countdownEndsAtMs, null)
  assert.equal(m.live, null)
  assert.equal(m.report, null)
})

test('score and pose updates land in the live view', () => {
  const m = freshModel()
  feed(m, [
    out('PhaseChanged', { phase: 'Performing' }),
    out('ScoreUpdate', { t_ms: 333, frame_score: 91.5, rolling_avg: 93.1, total_so_far: 92.0 }),
    out('PoseFrame', { t_ms: 333, actual: [[0, 1, 0]], conf: [1], ref: [[0, 1.01, 0]], ref_index: 9 }),
  ])
  assert.equal(m.live?.rolling, 93.1)
  assert.equal(m.live?.total, 92.0)
  assert.equal(m.pose?.ref_index, 9)
})

test('key pose hits flash and toast, aged flashes fall away', () => {
  const m = freshModel()
  apply(m, out('KeyPoseHit', { label: 'drum-accent', credit: 100, offset_ms: -40 }), 1000)
  assert.equal(m.keyFlash?.label, 'drum-accent')
  assert.equal(m.toasts.length, 1)
  assert.equal(m.toasts[0].tone, 'gold')

  prune(m, 1500)
  assert.ok(m.keyFlash, 'still inside flash ttl')
  prune(m, 2000)
  assert.equal(m.keyFlash, null)
})

test('audience mode drives badge and toast tone', () => {
  const m = freshModel()
  apply(m, out('AudienceChanged', { mode: 'Applauding' }), 0)
  assert.equal(m.audience, 'Applauding')
  assert.equal(m.toasts.at(-1)?.tone, 'gold')
  apply(m, out('AudienceChanged', { mode: 'Standby' }), 0)
  assert.equal(m.audience, 'Standby')
})

test('results fold into the challenge table like the progress store', () => {
  const m = freshModel()
  m.challenges = rows()
  m.challengeId = 'ch-warmup'
  apply(m, out('ResultsReady', {
    report: { pose_score: 80, timing_score: 90, total: 83.0, key_poses: [] },
  }), 0)
  apply(m, out('ResultsReady', {
    report: { pose_score: 70, timing_score: 75, total: 71.5, key_poses: [] },
  }), 0)
  const row = m.challenges[0]
  assert.equal(row.attempts, 2)
  assert.equal(row.best_score, 83.0)
})

test('unlock output flips the row and announces it', () => {
  const m = freshModel()
  m.challenges = rows()
  apply(m, out('ChallengeUnlocked', { id: 'ch-sleeves' }), 0)
  assert.equal(m.challenges[1].unlocked, true)
  assert.match(m.toasts.at(-1)?.text ?? '', /ch-sleeves/)
})

test('noop reasons surface and expire', () => {
  const m = freshModel()
  apply(m, out('NoOp', { reason: 'locked' }), 100)
  assert.equal(m.lastNoop?.reason, 'locked')
  prune(m, 100 + TOAST_TTL_MS + 1)
  assert.equal(m.lastNoop, null)
})

test('replay lifecycle toggles the running flag', () => {
  const m = freshModel()
  apply(m, out('ReplayStarted', { clip_id: 'demo-a', noise_deg: 5, dropout_p: 0, time_scale: 1, offset_ms: 0, seed: 1 }), 0)
  assert.equal(m.replayRunning, true)
  assert.equal(m.replayClipId, 'demo-a')
  apply(m, out('ReplayStopped', { reason: 'finished' }), 0)
  assert.equal(m.replayRunning, false)
})

test('engine errors become warning toasts', () => {
  const m = freshModel()
  apply(m, { k: 'error', v: { code: 'bad-replay-config', detail: 'nope' } }, 0)
  assert.equal(m.toasts.at(-1)?.tone, 'warn')
  assert.match(m.toasts.at(-1)?.text ?? '', /bad-replay-config/)
})

test('toast queue stays capped and drains by age', () => {
  const m = freshModel()
  for (let i = 0; i < 9; i++) {
    apply(m, out('AudienceChanged', { mode: i % 2 ? 'Cheering' : 'Standby' }), i * 10)
  }
  assert.equal(m.toasts.length, 5)
  prune(m, 80 + TOAST_TTL_MS) // everything born at <= 80 ms expires
  assert.equal(m.toasts.length, 0)
})

// The reconnect contract: a client that missed the whole history and
// joins with a snapshot hello must see the same session-shaped view as
// one that watched every output.
test('snapshot plus tail equals full history', () => {
  const watched = freshModel()
  feed(watched, [
    out('Snapshot', {
      phase: 'Idle', guided_step: 0, character_id: null, challenge_id: null,
      audience: 'Standby', challenges: rows(), report: null,
    }),
    out('PhaseChanged', { phase: 'Guided', step: 0 }),
    out('PhaseChanged', { phase: 'Guided', step: 1 }),
    out('PhaseChanged', { phase: 'Guided', step: 2 }),
    out('PhaseChanged', { phase: 'CharacterSelect' }),
    out('PhaseChanged', { phase: 'ChallengeSelect' }),
  ])
  // selections are local echoes of this client's own clicks; a success
  // is silence on the wire
  watched.characterId = 'dancer-red'
  watched.challengeId = 'ch-warmup'
  feed(watched, [
    out('PhaseChanged', { phase: 'Countdown', ends_at_ms: 9000 }),
    out('PhaseChanged', { phase: 'Performing' }),
    out('ScoreUpdate', { t_ms: 33, frame_score: 97, rolling_avg: 97, total_so_far: 97 }),
    out('ResultsReady', { report: { pose_score: 95, timing_score: 100, total: 96.5, key_poses: [] } }),
    out('PhaseChanged', { phase: 'Results' }),
  ])

  // what the engine would snapshot at this point in the session
  const joined = freshModel()
  const snapshotRows = rows()
  snapshotRows[0].best_score = 96.5
  snapshotRows[0].attempts = 1
  feed(joined, [
    out('Snapshot', {
      phase: 'Results', guided_step: 0, character_id: 'dancer-red', challenge_id: 'ch-warmup',
      audience: 'Standby', challenges: snapshotRows,
      report: { pose_score: 95, timing_score: 100, total: 96.5, key_poses: [] },
    }),
  ])

  assert.equal(joined.phase, watched.phase)
  assert.equal(joined.characterId, watched.characterId)
  assert.equal(joined.challengeId, watched.challengeId)
  assert.equal(joined.audience, watched.audience)
  assert.deepEqual(joined.report, watched.report)
  // the watcher folded its attempt locally; the snapshot carries the
  // store's truth; both agree
  assert.deepEqual(joined.challenges, watched.challenges)
})
