// Entry point: one web socket, one model, one render loop.

import * as protocol from './protocol'
import { Hud } from './hud'
import { Overlay } from './overlay'
import { SimPanel } from './panel'
import { CuePlayer } from './sound'
import { ScoreSeries } from './series'
import { apply, freshModel, prune } from './state'
import type { ViewModel } from './state'

const model: ViewModel = freshModel()
const series = new ScoreSeries(600)
const player = new CuePlayer()

let ws: WebSocket | null = null
let retryMs = 1000
let soundWanted = false

function wsUrl(): string {
  const proto = location.protocol === 'https:' ? 'wss' : 'ws'
  return `${proto}://${location.host}/session`
}

function send(msg: protocol.WireMessage) {
  if (ws && ws.readyState === WebSocket.OPEN) {
    ws.send(protocol.encode(msg))
  }
}

// A successful Select is acknowledged with silence (character picks get
// a PhaseChanged, challenge picks get nothing), so the chosen id is
// echoed locally and rolled back if the engine answers with a NoOp.
let prevCharacterId: string | null = null
let prevChallengeId: string | null = null

const hud = new Hud(document, {
  onSelectCharacter: (id) => {
    prevCharacterId = model.characterId
    model.characterId = id
    send(protocol.selectCharacter(id))
  },
  onSelectChallenge: (id) => {
    prevChallengeId = model.challengeId
    model.challengeId = id
    send(protocol.selectChallenge(id))
  },
  onStart: () => send(protocol.startChallenge()),
  onReset: () => send(protocol.reset()),
  onSoundToggle: () => {
    soundWanted = !soundWanted
    if (soundWanted) player.unlock()
    hud.setSoundOn(soundWanted)
  },
})

const overlay = new Overlay(document.getElementById('stage-canvas') as HTMLCanvasElement)

const panel = new SimPanel(document.getElementById('sim-panel') as HTMLElement, {
  onStart: (opts) => send(protocol.replayStart(opts)),
  onStop: () => send(protocol.replayStop()),
})

function handleMessage(raw: string) {
  let msg: protocol.WireMessage
  try {
    msg = protocol.decode(raw)
  } catch {
    return
  }
  const now = performance.now()
  apply(model, msg, now)

  if (msg.k !== 'output') return
  const out = msg.v as protocol.Output
  switch (out.o) {
    case 'ScoreUpdate':
      series.push(out.t_ms, out.frame_score, out.rolling_avg)
      break
    case 'PhaseChanged':
      if (out.phase === 'Performing') {
        series.clear()
        // hands-free loop: the stage has no camera here, so an attempt
        // starts its simulated performer unless the operator opted out
        if (panel.autoLaunch && !model.replayRunning) {
          send(protocol.replayStart(panel.values()))
        }
      }
      break
    case 'SoundEvent':
      if (soundWanted) player.play(out)
      break
    case 'NoOp':
      if (out.reason === 'locked' || out.reason === 'unknown-challenge') {
        model.challengeId = prevChallengeId
      } else if (out.reason === 'select-ignored') {
        model.characterId = prevCharacterId
        model.challengeId = prevChallengeId
      }
      break
    default:
      break
  }
}

function connect() {
  model.connection = 'connecting'
  const sock = new WebSocket(wsUrl())
  ws = sock

  sock.onopen = () => {
    retryMs = 1000
    model.connection = 'open'
    sock.send(protocol.encode(protocol.hello(true)))
  }

  sock.onmessage = (ev) => {
    if (typeof ev.data === 'string') handleMessage(ev.data)
  }

  sock.onclose = () => {
    if (ws !== sock) return
    model.connection = 'closed'
    model.replayRunning = false
    setTimeout(connect, retryMs)
    retryMs = Math.min(retryMs * 2, 8000)
  }

  sock.onerror = () => {
    // onclose follows and owns the retry
  }
}

function frame() {
  const now = performance.now()
  prune(model, now)
  overlay.draw(model, now)
  hud.render(model, series)
  panel.setRunning(model.replayRunning)
  requestAnimationFrame(frame)
}

connect()
requestAnimationFrame(frame)
