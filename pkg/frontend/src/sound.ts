// Cue playback. No audio assets ship with the console, so each cue id
// maps to a short synthesized sketch; gain and pan from the engine's
// SoundEvent are honored as-is. Browsers refuse audio before a user
// gesture, so the context is created lazily from a click handler.

import type { SoundEvent } from './protocol'

export class CuePlayer {
  private ctx: AudioContext | null = null
  private enabled = false

  // call from any user gesture; repeated calls are fine
  unlock() {
    if (typeof AudioContext === 'undefined') return
    if (!this.ctx) this.ctx = new AudioContext()
    if (this.ctx.state === 'suspended') void this.ctx.resume()
    this.enabled = true
  }

  get ready(): boolean {
    return this.enabled && this.ctx !== null && this.ctx.state === 'running'
  }

  play(ev: SoundEvent) {
    if (!this.ready || !this.ctx) return
    const out = this.ctx.createGain()
    out.gain.value = Math.min(Math.max(ev.gain, 0), 1) * 0.4
    const pan = this.ctx.createStereoPanner()
    pan.pan.value = Math.min(Math.max(ev.pan, -1), 1)
    out.connect(pan).connect(this.ctx.destination)

    if (ev.cue_id.startsWith('applause')) {
      this.noiseBurst(out, 0.9)
    } else if (ev.cue_id.startsWith('cheer')) {
      this.blip(out, 523, 0)
      this.blip(out, 659, 0.12)
      this.blip(out, 784, 0.24)
    } else {
      // ambient and anything unrecognized: a soft low drone
      this.drone(out, 110, 1.4)
    }
  }

  private blip(dest: AudioNode, freq: number, delayS: number) {
    if (!this.ctx) return
    const t = this.ctx.currentTime + delayS
    const osc = this.ctx.createOscillator()
    osc.type = 'triangle'
    osc.frequency.value = freq
    const env = this.ctx.createGain()
    env.gain.setValueAtTime(0.0001, t)
    env.gain.exponentialRampToValueAtTime(1, t + 0.02)
    env.gain.exponentialRampToValueAtTime(0.0001, t + 0.18)
    osc.connect(env).connect(dest)
    osc.start(t)
    osc.stop(t + 0.2)
  }

  private drone(dest: AudioNode, freq: number, durS: number) {
    if (!this.ctx) return
    const t = this.ctx.currentTime
    const osc = this.ctx.createOscillator()
    osc.type = 'sine'
    osc.frequency.value = freq
    const env = this.ctx.createGain()
    env.gain.setValueAtTime(0.0001, t)
    env.gain.exponentialRampToValueAtTime(0.6, t + 0.3)
    env.gain.exponentialRampToValueAtTime(0.0001, t + durS)
    osc.connect(env).connect(dest)
    osc.start(t)
    osc.stop(t + durS + 0.05)
  }

  private noiseBurst(dest: AudioNode, durS: number) {
    if (!this.ctx) return
    const rate = this.ctx.sampleRate
    const buf = this.ctx.createBuffer(1, Math.floor(rate * durS), rate)
    const data = buf.getChannelData(0)
    for (let i = 0; i < data.length; i++) {
      const decay = 1 - i / data.length
      data[i] = (Math.random() * 2 - 1) * decay * decay
    }
    const src = this.ctx.createBufferSource()
    src.buffer = buf
    src.connect(dest)
    src.start()
  }
}
