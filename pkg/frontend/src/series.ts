// Fixed-capacity rolling score series for the sparkline. Oldest
// samples fall off; reads come back in chronological order.

export interface Sample {
  tMs: number
  frame: number
  rolling: number
}

export class ScoreSeries {
  private t: Float64Array
  private frame: Float64Array
  private rolling: Float64Array
  private head = 0
  private count = 0

  constructor(readonly capacity = 600) {
    if (capacity < 1) throw new RangeError('capacity must be at least 1')
    this.t = new Float64Array(capacity)
    this.frame = new Float64Array(capacity)
    this.rolling = new Float64Array(capacity)
  }

  get length(): number {
    return this.count
  }

  push(tMs: number, frameScore: number, rollingAvg: number) {
    this.t[this.head] = tMs
    this.frame[this.head] = frameScore
    this.rolling[this.head] = rollingAvg
    this.head = (this.head + 1) % this.capacity
    if (this.count < this.capacity) this.count += 1
  }

  clear() {
    this.head = 0
    this.count = 0
  }

  at(i: number): Sample {
    if (i < 0 || i >= this.count) throw new RangeError(`index ${i} out of range`)
    const base = this.count < this.capacity ? 0 : this.head
    const j = (base + i) % this.capacity
    return { tMs: this.t[j], frame: this.frame[j], rolling: this.rolling[j] }
  }

  toArray(): Sample[] {
    const out: Sample[] = new Array(this.count)
    for (let i = 0; i < this.count; i++) out[i] = this.at(i)
    return out
  }

  timeBounds(): [number, number] | null {
    if (this.count === 0) return null
    return [this.at(0).tMs, this.at(this.count - 1).tMs]
  }
}
