import assert from 'node:assert/strict'
import { test } from 'node:test'

import { BONES, JOINT_COUNT, Joint, projectFront } from '../src/skeleton'

test('the bone table is a tree over all twenty joints', () => {
  assert.equal(BONES.length, 19)
  const children = BONES.map(([, child]) => child)
  assert.equal(new Set(children).size, 19, 'each joint is the child of at most one bone')
  assert.ok(!children.includes(Joint.HipCenter), 'the root has no parent')
  const touched = new Set<number>()
  for (const [a, b] of BONES) {
    touched.add(a)
    touched.add(b)
  }
  assert.equal(touched.size, JOINT_COUNT)
})

test('front projection fits the pose inside the viewport with y up', () => {
  // a 1 x 2 world-units figure: x in [-0.5, 0.5], y in [0, 2]
  const pose = [
    [0, 2, 0.3],
    [-0.5, 1, -0.2],
    [0.5, 0, 0.1],
  ]
  const view = { x: 0, y: 0, width: 200, height: 100 }
  const [proj] = projectFront([pose], view, 0.1)
  for (const [x, y] of proj.points) {
    assert.ok(x >= 10 && x <= 190, `x ${x} inside padded viewport`)
    assert.ok(y >= 5 && y <= 95, `y ${y} inside padded viewport`)
  }
  // height is the binding axis: 2 world units into 80 px
  assert.ok(Math.abs(proj.scale - 40) < 1e-9)
  // world top must be canvas top
  assert.ok(proj.points[0][1] < proj.points[2][1])
  // depth never leaks into the projection
  const flat = projectFront([pose.map((p) => [p[0], p[1], 0])], view, 0.1)[0]
  assert.deepEqual(proj.points, flat.points)
})

test('both poses of a pair share one scale and center', () => {
  const a = [
    [0, 0, 0],
    [0, 1, 0],
  ]
  const b = [
    [2, 0, 0],
    [2, 1, 0],
  ]
  const view = { x: 0, y: 0, width: 100, height: 100 }
  const [pa, pb] = projectFront([a, b], view, 0)
  assert.equal(pa.scale, pb.scale)
  // the horizontal gap between the figures survives projection
  const gap = pb.points[0][0] - pa.points[0][0]
  assert.ok(Math.abs(gap - 2 * pa.scale) < 1e-9)
})

test('empty input projects to nothing', () => {
  assert.deepEqual(projectFront([], { x: 0, y: 0, width: 10, height: 10 }), [])
})
