// Stage canvas: reference pose ghosted behind the participant, front
// view. Also paints the countdown digits and the key-pose flash so
// everything spatial lives on one surface.

import { BONES } from './skeleton'
import { projectFront } from './skeleton'
import type { ViewModel } from './state'
import { KEY_FLASH_TTL_MS } from './state'

const GHOST_STROKE = 'rgba(140, 170, 255, 0.35)'
const GHOST_JOINT = 'rgba(140, 170, 255, 0.45)'
const BODY_STROKE = '#ffb84d'
const BODY_JOINT = '#ffd89a'
const LOW_CONF_JOINT = 'rgba(255, 216, 154, 0.25)'
const MIN_CONF = 0.3

export class Overlay {
  private ctx: CanvasRenderingContext2D

  constructor(private canvas: HTMLCanvasElement) {
    const ctx = canvas.getContext('2d')
    if (!ctx) throw new Error('2d canvas unavailable')
    this.ctx = ctx
  }

  private fitToContainer() {
    const dpr = window.devicePixelRatio || 1
    const w = this.canvas.clientWidth
    const h = this.canvas.clientHeight
    if (this.canvas.width !== w * dpr || this.canvas.height !== h * dpr) {
      this.canvas.width = w * dpr
      this.canvas.height = h * dpr
    }
    this.ctx.setTransform(dpr, 0, 0, dpr, 0, 0)
    return { w, h }
  }

  draw(model: ViewModel, nowMs: number) {
    const { w, h } = this.fitToContainer()
    const ctx = this.ctx
    ctx.clearRect(0, 0, w, h)

    const pose = model.pose
    if (pose) {
      const poses: number[][][] = []
      if (pose.ref) poses.push(pose.ref)
      poses.push(pose.actual)
      const projected = projectFront(poses, { x: 0, y: 0, width: w, height: h })
      let k = 0
      if (pose.ref) {
        this.drawPose(projected[k++].points, GHOST_STROKE, GHOST_JOINT, 6, null)
      }
      this.drawPose(projected[k].points, BODY_STROKE, BODY_JOINT, 3.5, pose.conf)
    } else {
      ctx.fillStyle = 'rgba(255,255,255,0.25)'
      ctx.font = '14px system-ui, sans-serif'
      ctx.textAlign = 'center'
      ctx.fillText(this.idleCaption(model), w / 2, h / 2)
    }

    if (model.phase === 'Countdown') {
      // the deadline lives on the session clock, so pulse instead of
      // pretending to know the exact remaining time
      const pulse = 0.55 + 0.35 * Math.sin(nowMs / 180)
      ctx.fillStyle = `rgba(255, 255, 255, ${pulse.toFixed(3)})`
      ctx.font = 'bold 42px system-ui, sans-serif'
      ctx.textAlign = 'center'
      ctx.fillText('GET READY', w / 2, h / 2 + 14)
    }

    const flash = model.keyFlash
    if (flash) {
      const age = (nowMs - flash.bornMs) / KEY_FLASH_TTL_MS
      if (age >= 0 && age < 1) {
        const r = 30 + age * 90
        ctx.strokeStyle = `rgba(255, 215, 0, ${0.8 * (1 - age)})`
        ctx.lineWidth = 5 * (1 - age) + 1
        ctx.beginPath()
        ctx.arc(w / 2, h / 2, r, 0, Math.PI * 2)
        ctx.stroke()
      }
    }
  }

  private idleCaption(model: ViewModel): string {
    switch (model.phase) {
      case 'Performing':
        return 'waiting for frames…'
      case 'Results':
        return 'attempt complete'
      default:
        return 'stage empty'
    }
  }

  private drawPose(
    points: Array<[number, number]>,
    stroke: string,
    jointFill: string,
    lineWidth: number,
    conf: number[] | null,
  ) {
    const ctx = this.ctx
    ctx.strokeStyle = stroke
    ctx.lineWidth = lineWidth
    ctx.lineCap = 'round'
    for (const [a, b] of BONES) {
      ctx.beginPath()
      ctx.moveTo(points[a][0], points[a][1])
      ctx.lineTo(points[b][0], points[b][1])
      ctx.stroke()
    }
    for (let j = 0; j < points.length; j++) {
      const weak = conf !== null && conf[j] < MIN_CONF
      ctx.fillStyle = weak ? LOW_CONF_JOINT : jointFill
      ctx.beginPath()
      ctx.arc(points[j][0], points[j][1], j === 0 ? lineWidth + 4 : lineWidth, 0, Math.PI * 2)
      ctx.fill()
    }
  }
}
