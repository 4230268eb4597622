// The 20-joint skeleton the engine tracks, in serialization order, and
// the 19 parent-child bones of the joint tree. Must stay in lockstep
// with the engine tables; the ids are the wire format.

export const JOINT_COUNT = 20

export enum Joint {
  Head = 0,
  ShoulderCenter = 1,
  Spine = 2,
  HipCenter = 3,
  ShoulderL = 4,
  ElbowL = 5,
  WristL = 6,
  HandL = 7,
  ShoulderR = 8,
  ElbowR = 9,
  WristR = 10,
  HandR = 11,
  HipL = 12,
  KneeL = 13,
  AnkleL = 14,
  FootL = 15,
  HipR = 16,
  KneeR = 17,
  AnkleR = 18,
  FootR = 19,
}

export const BONES: ReadonlyArray<readonly [Joint, Joint]> = [
  [Joint.HipCenter, Joint.Spine],
  [Joint.Spine, Joint.ShoulderCenter],
  [Joint.ShoulderCenter, Joint.Head],
  [Joint.HipCenter, Joint.HipL],
  [Joint.HipCenter, Joint.HipR],
  [Joint.ShoulderCenter, Joint.ShoulderL],
  [Joint.ShoulderCenter, Joint.ShoulderR],
  [Joint.ShoulderL, Joint.ElbowL],
  [Joint.ElbowL, Joint.WristL],
  [Joint.WristL, Joint.HandL],
  [Joint.ShoulderR, Joint.ElbowR],
  [Joint.ElbowR, Joint.WristR],
  [Joint.WristR, Joint.HandR],
  [Joint.HipL, Joint.KneeL],
  [Joint.KneeL, Joint.AnkleL],
  [Joint.AnkleL, Joint.FootL],
  [Joint.HipR, Joint.KneeR],
  [Joint.KneeR, Joint.AnkleR],
  [Joint.AnkleR, Joint.FootR],
]

export interface Viewport {
  x: number
  y: number
  width: number
  height: number
}

export interface Projected {
  // canvas-space [x, y] per joint, same order as the input
  points: Array<[number, number]>
  scale: number
}

// Orthographic front view: world x goes right, world y goes up, depth
// is dropped. One uniform scale fits the given poses into the viewport
// so participant and reference share a frame of reference; padding is
// a fraction of the viewport kept clear on every side.
export function projectFront(
  poses: ReadonlyArray<ReadonlyArray<ReadonlyArray<number>>>,
  view: Viewport,
  padding = 0.1,
): Projected[] {
  let minX = Infinity
  let maxX = -Infinity
  let minY = Infinity
  let maxY = -Infinity
  for (const pose of poses) {
    for (const p of pose) {
      if (p[0] < minX) minX = p[0]
      if (p[0] > maxX) maxX = p[0]
      if (p[1] < minY) minY = p[1]
      if (p[1] > maxY) maxY = p[1]
    }
  }
  if (!isFinite(minX)) return []

  const spanX = Math.max(maxX - minX, 1e-6)
  const spanY = Math.max(maxY - minY, 1e-6)
  const usableW = view.width * (1 - 2 * padding)
  const usableH = view.height * (1 - 2 * padding)
  const scale = Math.min(usableW / spanX, usableH / spanY)
  const cx = (minX + maxX) / 2
  const cy = (minY + maxY) / 2
  const midX = view.x + view.width / 2
  const midY = view.y + view.height / 2

  return poses.map((pose) => ({
    points: pose.map((p): [number, number] => [
      midX + (p[0] - cx) * scale,
      midY - (p[1] - cy) * scale,
    ]),
    scale,
  }))
}
