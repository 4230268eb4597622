// Everything in the side column plus header pills and toasts. Pure
// view of the model; every click turns into exactly one command via
// the callbacks, no local phase logic beyond enabling buttons.

import type { ViewModel } from './state'
import type { ScoreSeries } from './series'

export interface HudCallbacks {
  onSelectCharacter: (id: string) => void
  onSelectChallenge: (id: string) => void
  onStart: () => void
  onReset: () => void
  onSoundToggle: () => void
}

export const CHARACTERS: ReadonlyArray<{ id: string; label: string }> = [
  { id: 'dancer-red', label: 'Red Sash' },
  { id: 'dancer-jade', label: 'Jade Fan' },
  { id: 'dancer-gold', label: 'Gold Drum' },
]

const GUIDED_NOTES = [
  'Walkthrough 1/3: stand on the marked spot facing the stage.',
  'Walkthrough 2/3: follow the glowing figure with your arms.',
  'Walkthrough 3/3: match the drum beat with your steps.',
]

// NoOp reasons worth surfacing next to the controls
const NOTICE_TEXT: Record<string, string> = {
  'locked': 'That challenge is still locked. Beat the previous one first.',
  'unknown-challenge': 'The engine does not know that challenge.',
  'no-challenge-selected': 'Pick a challenge first.',
  'countdown-running': 'Countdown already running.',
  'already-performing': 'An attempt is already in progress.',
}

export class Hud {
  private connPill: HTMLElement
  private phaseBanner: HTMLElement
  private audienceBadge: HTMLElement
  private soundToggle: HTMLButtonElement
  private guidedNote: HTMLElement
  private characterButtons: HTMLElement
  private challengeList: HTMLElement
  private inlineNotice: HTMLElement
  private primaryAction: HTMLButtonElement
  private scoreCard: HTMLElement
  private rollingScore: HTMLElement
  private frameScore: HTMLElement
  private totalScore: HTMLElement
  private sparkCanvas: HTMLCanvasElement
  private resultsCard: HTMLElement
  private resultTotal: HTMLElement
  private resultPose: HTMLElement
  private resultTiming: HTMLElement
  private keyPoseBody: HTMLElement
  private toasts: HTMLElement

  constructor(root: Document, private callbacks: HudCallbacks) {
    const get = <T extends HTMLElement>(id: string): T => {
      const el = root.getElementById(id)
      if (!el) throw new Error(`missing #${id}`)
      return el as T
    }
    this.connPill = get('conn-pill')
    this.phaseBanner = get('phase-banner')
    this.audienceBadge = get('audience-badge')
    this.soundToggle = get<HTMLButtonElement>('sound-toggle')
    this.guidedNote = get('guided-note')
    this.characterButtons = get('character-buttons')
    this.challengeList = get('challenge-list')
    this.inlineNotice = get('inline-notice')
    this.primaryAction = get<HTMLButtonElement>('primary-action')
    this.scoreCard = get('score-card')
    this.rollingScore = get('rolling-score')
    this.frameScore = get('frame-score')
    this.totalScore = get('total-score')
    this.sparkCanvas = get<HTMLCanvasElement>('spark-canvas')
    this.resultsCard = get('results-card')
    this.resultTotal = get('result-total')
    this.resultPose = get('result-pose')
    this.resultTiming = get('result-timing')
    this.keyPoseBody = root.querySelector('#keypose-table tbody') as HTMLElement
    this.toasts = get('toasts')

    for (const ch of CHARACTERS) {
      const btn = root.createElement('button')
      btn.textContent = ch.label
      btn.dataset.id = ch.id
      btn.addEventListener('click', () => this.callbacks.onSelectCharacter(ch.id))
      this.characterButtons.appendChild(btn)
    }
    this.primaryAction.addEventListener('click', () => this.callbacks.onStart())
    get('reset-action').addEventListener('click', () => this.callbacks.onReset())
    this.soundToggle.addEventListener('click', () => this.callbacks.onSoundToggle())
  }

  setSoundOn(on: boolean) {
    this.soundToggle.classList.toggle('on', on)
    this.soundToggle.innerHTML = on ? '&#9834; sound on' : '&#9834; sound off'
  }

  render(model: ViewModel, series: ScoreSeries) {
    this.connPill.textContent = model.connection
    this.connPill.className = `pill conn-${model.connection}`

    this.phaseBanner.textContent =
      model.phase === 'Guided' && model.guidedStep !== null
        ? `Guided ${model.guidedStep + 1}/3`
        : model.phase

    this.audienceBadge.textContent = model.audience
    this.audienceBadge.className = `pill badge-${model.audience.toLowerCase()}`

    const guided = model.phase === 'Guided' && model.guidedStep !== null
    this.guidedNote.hidden = !guided
    if (guided) {
      this.guidedNote.textContent = GUIDED_NOTES[model.guidedStep!] ?? ''
    }

    this.renderCharacters(model)
    this.renderChallenges(model)
    this.renderNotice(model)
    this.renderPrimary(model)
    this.renderScore(model, series)
    this.renderResults(model)
    this.renderToasts(model)
  }

  private renderCharacters(model: ViewModel) {
    const selecting = model.phase === 'CharacterSelect'
    for (const btn of Array.from(this.characterButtons.children) as HTMLButtonElement[]) {
      btn.disabled = !selecting
      btn.classList.toggle('chosen', btn.dataset.id === model.characterId)
    }
  }

  private renderChallenges(model: ViewModel) {
    const selecting = model.phase === 'ChallengeSelect'
    this.challengeList.textContent = ''
    const doc = this.challengeList.ownerDocument
    for (const row of model.challenges) {
      const li = doc.createElement('li')
      li.classList.toggle('locked', !row.unlocked)
      li.classList.toggle('selected', row.id === model.challengeId)
      const name = doc.createElement('span')
      name.className = 'ch-name'
      name.textContent = `${row.unlocked ? '' : '\u{1f512} '}${row.id}`
      const meta = doc.createElement('span')
      meta.className = 'ch-meta'
      meta.textContent =
        row.attempts > 0
          ? `best ${row.best_score.toFixed(1)} · ${row.attempts}×`
          : `needs ${row.unlock_threshold.toFixed(0)}`
      li.append(name, meta)
      if (selecting) {
        li.addEventListener('click', () => this.callbacks.onSelectChallenge(row.id))
      }
      this.challengeList.appendChild(li)
    }
  }

  private renderNotice(model: ViewModel) {
    const text = model.lastNoop ? NOTICE_TEXT[model.lastNoop.reason] : undefined
    this.inlineNotice.hidden = !text
    if (text) this.inlineNotice.textContent = text
  }

  private renderPrimary(model: ViewModel) {
    const btn = this.primaryAction
    switch (model.phase) {
      case 'Idle':
        btn.disabled = false
        btn.textContent = 'Begin walkthrough'
        break
      case 'Guided':
        btn.disabled = false
        btn.textContent = 'Next step'
        break
      case 'CharacterSelect':
        btn.disabled = true
        btn.textContent = 'Pick a character'
        break
      case 'ChallengeSelect':
        btn.disabled = model.challengeId === null
        btn.textContent = model.challengeId === null ? 'Pick a challenge' : 'Start challenge'
        break
      case 'Countdown':
        btn.disabled = true
        btn.textContent = 'Get ready…'
        break
      case 'Performing':
        btn.disabled = true
        btn.textContent = 'Performing…'
        break
      case 'Results':
        btn.disabled = false
        btn.textContent = 'Back to challenges'
        break
      default:
        btn.disabled = true
        btn.textContent = model.phase
    }
  }

  private renderScore(model: ViewModel, series: ScoreSeries) {
    const show = model.phase === 'Performing' || model.live !== null
    this.scoreCard.hidden = !show
    if (!show) return
    if (model.live) {
      this.rollingScore.textContent = model.live.rolling.toFixed(1)
      this.frameScore.textContent = model.live.frame.toFixed(1)
      this.totalScore.textContent = model.live.total.toFixed(1)
    } else {
      this.rollingScore.textContent = '–'
      this.frameScore.textContent = '–'
      this.totalScore.textContent = '–'
    }
    this.drawSparkline(series)
  }

  private drawSparkline(series: ScoreSeries) {
    const canvas = this.sparkCanvas
    const ctx = canvas.getContext('2d')
    if (!ctx) return
    const w = canvas.clientWidth || 300
    if (canvas.width !== w) canvas.width = w
    const h = canvas.height
    ctx.clearRect(0, 0, w, h)
    ctx.strokeStyle = 'rgba(255,255,255,0.12)'
    ctx.beginPath()
    ctx.moveTo(0, h / 2)
    ctx.lineTo(w, h / 2)
    ctx.stroke()
    const n = series.length
    if (n < 2) return
    const step = w / (series.capacity - 1)
    const y = (score: number) => h - (Math.min(Math.max(score, 0), 100) / 100) * (h - 4) - 2

    ctx.strokeStyle = 'rgba(255, 184, 77, 0.35)'
    ctx.beginPath()
    for (let i = 0; i < n; i++) {
      const s = series.at(i)
      if (i === 0) ctx.moveTo(i * step, y(s.frame))
      else ctx.lineTo(i * step, y(s.frame))
    }
    ctx.stroke()

    ctx.strokeStyle = '#ffb84d'
    ctx.lineWidth = 1.6
    ctx.beginPath()
    for (let i = 0; i < n; i++) {
      const s = series.at(i)
      if (i === 0) ctx.moveTo(i * step, y(s.rolling))
      else ctx.lineTo(i * step, y(s.rolling))
    }
    ctx.stroke()
    ctx.lineWidth = 1
  }

  private renderResults(model: ViewModel) {
    const show = model.report !== null && model.phase !== 'Performing'
    this.resultsCard.hidden = !show
    if (!show || !model.report) return
    const rep = model.report
    this.resultTotal.textContent = rep.total.toFixed(1)
    this.resultPose.textContent = rep.pose_score.toFixed(1)
    this.resultTiming.textContent = rep.timing_score.toFixed(1)

    this.keyPoseBody.textContent = ''
    const doc = this.keyPoseBody.ownerDocument
    for (const kp of rep.key_poses) {
      const tr = doc.createElement('tr')
      const label = doc.createElement('td')
      label.textContent = kp.label
      const offset = doc.createElement('td')
      offset.textContent = kp.offset_ms === null ? 'missed' : `${Math.round(kp.offset_ms)} ms`
      const credit = doc.createElement('td')
      credit.textContent = kp.credit.toFixed(0)
      credit.className = kp.credit >= 100 ? 'full' : kp.credit <= 0 ? 'miss' : ''
      tr.append(label, offset, credit)
      this.keyPoseBody.appendChild(tr)
    }
  }

  private renderToasts(model: ViewModel) {
    this.toasts.textContent = ''
    const doc = this.toasts.ownerDocument
    for (const toast of model.toasts) {
      const div = doc.createElement('div')
      div.className = `toast ${toast.tone}`
      div.textContent = toast.text
      this.toasts.appendChild(div)
    }
  }
}
