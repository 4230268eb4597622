import assert from 'node:assert/strict'
import { test } from 'node:test'

import * as protocol from '../src/protocol'

// Deterministic RNG so a failure names a reproducible seed.
function mulberry32(seed: number) {
  let a = seed >>> 0
  return () => {
    a = (a + 0x6d2b79f5) >>> 0
    let t = a
    t = Math.imul(t ^ (t >>> 15), t | 1)
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61)
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296
  }
}

function randomPayload(rng: () => number, depth = 0): any {
  const roll = rng()
  if (depth >= 2 || roll < 0.15) {
    const scalar = rng()
    if (scalar < 0.2) return null
    if (scalar < 0.4) return rng() < 0.5
    if (scalar < 0.6) return Math.floor(rng() * 2e12) - 1e12
    if (scalar < 0.8) return (rng() - 0.5) * Math.pow(10, Math.floor(rng() * 12) - 6)
    let s = ''
    const n = Math.floor(rng() * 12)
    for (let i = 0; i < n; i++) s += String.fromCharCode(32 + Math.floor(rng() * 12000))
    return s
  }
  if (roll < 0.55) {
    const arr = []
    const n = Math.floor(rng() * 5)
    for (let i = 0; i < n; i++) arr.push(randomPayload(rng, depth + 1))
    return arr
  }
  const obj: Record<string, any> = {}
  const n = Math.floor(rng() * 5)
  for (let i = 0; i < n; i++) obj[`k${i}_${Math.floor(rng() * 100)}`] = randomPayload(rng, depth + 1)
  return obj
}

const KINDS: protocol.Kind[] = ['hello', 'frame', 'command', 'output', 'error']

test('two thousand random messages round-trip value-exact', () => {
  const rng = mulberry32(1234)
  for (let i = 0; i < 2000; i++) {
    const msg: protocol.WireMessage = {
      k: KINDS[Math.floor(rng() * KINDS.length)],
      v: randomPayload(rng),
    }
    const back = protocol.decode(protocol.encode(msg))
    assert.deepEqual(back, msg, `iteration ${i}`)
  }
})

test('hello payload shape, with and without the snapshot flag', () => {
  assert.deepEqual(protocol.hello().v, { format_version: 1, joint_set: 'k20' })
  assert.deepEqual(protocol.hello(true).v, { format_version: 1, joint_set: 'k20', snapshot: true })
  assert.ok(!protocol.encode(protocol.hello()).includes('snapshot'))
})

test('non-JSON and untagged lines are rejected', () => {
  assert.throws(() => protocol.decode('not json at all'), protocol.ProtocolError)
  assert.throws(() => protocol.decode('[1, 2, 3]'), protocol.ProtocolError)
  assert.throws(() => protocol.decode('{"k": "hello"}'), protocol.ProtocolError)
  assert.throws(() => protocol.decode('{"v": {}}'), protocol.ProtocolError)
})

test('unknown kinds decode to error values instead of throwing', () => {
  const msg = protocol.decode('{"k": "surprise", "v": 1}')
  assert.equal(msg.k, 'error')
  assert.equal(msg.v.code, 'unknown-kind')
})

test('oversize messages are refused both ways', () => {
  const big = 'x'.repeat(protocol.MAX_LINE_BYTES)
  assert.throws(() => protocol.encode({ k: 'output', v: big }), protocol.ProtocolError)
  assert.throws(() => protocol.decode(`{"k":"output","v":"${big}"}`), protocol.ProtocolError)
})

test('selection and session commands carry the engine event shape', () => {
  assert.deepEqual(protocol.selectCharacter('dancer-red').v, {
    e: 'Select',
    kind: 'character',
    id: 'dancer-red',
  })
  assert.deepEqual(protocol.selectChallenge('ch-warmup').v, {
    e: 'Select',
    kind: 'challenge',
    id: 'ch-warmup',
  })
  assert.deepEqual(protocol.startChallenge().v, { e: 'StartChallenge' })
  assert.deepEqual(protocol.reset().v, { e: 'Reset' })
})

test('replay start carries the panel config, stop is bare', () => {
  const start = protocol.replayStart({ noiseDeg: 20, dropoutP: 0.05, timeScale: 1.25, seed: 7 })
  assert.deepEqual(start.v, {
    e: 'Replay',
    action: 'start',
    noise_deg: 20,
    dropout_p: 0.05,
    time_scale: 1.25,
    seed: 7,
  })
  const pinned = protocol.replayStart({
    clipId: 'demo-b',
    noiseDeg: 0,
    dropoutP: 0,
    timeScale: 1,
    seed: 0,
  })
  assert.equal(pinned.v.clip_id, 'demo-b')
  assert.deepEqual(protocol.replayStop().v, { e: 'Replay', action: 'stop' })
})
