// Simulator what-if panel. Sliders edit a replay configuration; start
// and stop go straight to the gateway, nothing is interpreted locally.

import type { ReplayOptions } from './protocol'

export interface SimPanelCallbacks {
  onStart: (opts: ReplayOptions) => void
  onStop: () => void
}

export class SimPanel {
  private noiseSlider!: HTMLInputElement
  private noiseValue!: HTMLElement
  private dropoutSlider!: HTMLInputElement
  private dropoutValue!: HTMLElement
  private scaleSlider!: HTMLInputElement
  private scaleValue!: HTMLElement
  private seedInput!: HTMLInputElement
  private autoBox!: HTMLInputElement
  private startBtn!: HTMLButtonElement
  private stopBtn!: HTMLButtonElement
  private running = false

  constructor(container: HTMLElement, private callbacks: SimPanelCallbacks) {
    container.innerHTML = `
      <div class="sim-row">
        <label>noise</label>
        <input type="range" class="sim-noise" min="0" max="30" step="0.5" value="0">
        <span class="sim-value sim-noise-value">0.0&deg;</span>
      </div>
      <div class="sim-row">
        <label>dropout</label>
        <input type="range" class="sim-dropout" min="0" max="0.5" step="0.01" value="0">
        <span class="sim-value sim-dropout-value">0%</span>
      </div>
      <div class="sim-row">
        <label>time scale</label>
        <input type="range" class="sim-scale" min="0.5" max="2" step="0.05" value="1">
        <span class="sim-value sim-scale-value">1.00&times;</span>
      </div>
      <div class="sim-row">
        <label>seed</label>
        <input type="number" class="sim-seed" value="0" step="1">
      </div>
      <div class="sim-buttons">
        <button class="sim-start">Start replay</button>
        <button class="sim-stop" disabled>Stop</button>
      </div>
      <label class="sim-auto">
        <input type="checkbox" class="sim-autolaunch" checked>
        launch automatically when performing starts
      </label>
    `
    this.noiseSlider = container.querySelector('.sim-noise') as HTMLInputElement
    this.noiseValue = container.querySelector('.sim-noise-value') as HTMLElement
    this.dropoutSlider = container.querySelector('.sim-dropout') as HTMLInputElement
    this.dropoutValue = container.querySelector('.sim-dropout-value') as HTMLElement
    this.scaleSlider = container.querySelector('.sim-scale') as HTMLInputElement
    this.scaleValue = container.querySelector('.sim-scale-value') as HTMLElement
    this.seedInput = container.querySelector('.sim-seed') as HTMLInputElement
    this.autoBox = container.querySelector('.sim-autolaunch') as HTMLInputElement
    this.startBtn = container.querySelector('.sim-start') as HTMLButtonElement
    this.stopBtn = container.querySelector('.sim-stop') as HTMLButtonElement

    this.noiseSlider.addEventListener('input', () => this.refreshLabels())
    this.dropoutSlider.addEventListener('input', () => this.refreshLabels())
    this.scaleSlider.addEventListener('input', () => this.refreshLabels())
    this.startBtn.addEventListener('click', () => this.callbacks.onStart(this.values()))
    this.stopBtn.addEventListener('click', () => this.callbacks.onStop())
    this.refreshLabels()
  }

  private refreshLabels() {
    this.noiseValue.innerHTML = `${parseFloat(this.noiseSlider.value).toFixed(1)}&deg;`
    this.dropoutValue.textContent = `${Math.round(parseFloat(this.dropoutSlider.value) * 100)}%`
    this.scaleValue.innerHTML = `${parseFloat(this.scaleSlider.value).toFixed(2)}&times;`
  }

  values(): ReplayOptions {
    const seed = parseInt(this.seedInput.value, 10)
    return {
      noiseDeg: parseFloat(this.noiseSlider.value),
      dropoutP: parseFloat(this.dropoutSlider.value),
      timeScale: parseFloat(this.scaleSlider.value),
      seed: Number.isFinite(seed) ? seed : 0,
    }
  }

  get autoLaunch(): boolean {
    return this.autoBox.checked
  }

  setRunning(running: boolean) {
    if (running === this.running) return
    this.running = running
    this.startBtn.disabled = running
    this.startBtn.classList.toggle('running', running)
    this.startBtn.textContent = running ? 'Replaying…' : 'Start replay'
    this.stopBtn.disabled = !running
  }
}
