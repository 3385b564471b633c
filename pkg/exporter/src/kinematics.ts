// Ego kinematics are not stored in the source tables; they are derived from
// consecutive poses: speed from displacements, acceleration from speed
// differences, steering from the yaw rate via an inverse bicycle model.

const WHEELBASE = 3.0
const MIN_SPEED_FOR_STEERING = 0.5

export function quaternionYaw([w, x, y, z]: [number, number, number, number]): number {
  return Math.atan2(2 * (w * z + x * y), 1 - 2 * (y * y + z * z))
}

export function wrapAngle(angle: number): number {
  let a = angle % (2 * Math.PI)
  if (a > Math.PI) a -= 2 * Math.PI
  if (a <= -Math.PI) a += 2 * Math.PI
  return a
}

export interface PoseSample {
  t: number // seconds
  x: number
  y: number
  heading: number
}

export interface DerivedKinematics {
  velocity: number[]
  acceleration: number[]
  steering: number[]
}

export function deriveKinematics(poses: PoseSample[]): DerivedKinematics {
  const n = poses.length
  const velocity = new Array<number>(n).fill(0)
  const yawRate = new Array<number>(n).fill(0)
  for (let i = 0; i < n - 1; i++) {
    const dt = poses[i + 1].t - poses[i].t
    const dx = poses[i + 1].x - poses[i].x
    const dy = poses[i + 1].y - poses[i].y
    velocity[i] = Math.hypot(dx, dy) / dt
    yawRate[i] = wrapAngle(poses[i + 1].heading - poses[i].heading) / dt
  }
  if (n > 1) {
    velocity[n - 1] = velocity[n - 2]
    yawRate[n - 1] = yawRate[n - 2]
  }
  const acceleration = new Array<number>(n).fill(0)
  for (let i = 0; i < n - 1; i++) {
    const dt = poses[i + 1].t - poses[i].t
    acceleration[i] = (velocity[i + 1] - velocity[i]) / dt
  }
  const steering = velocity.map((v, i) =>
    v < MIN_SPEED_FOR_STEERING ? 0 : Math.atan((WHEELBASE * yawRate[i]) / v),
  )
  return { velocity, acceleration, steering }
}

/** Largest implied speed between consecutive poses; Infinity on a timestamp
 * regression. Used for the bad-pose exclusion rule. */
export function maxImpliedSpeed(poses: PoseSample[]): number {
  let worst = 0
  for (let i = 0; i < poses.length - 1; i++) {
    const dt = poses[i + 1].t - poses[i].t
    if (dt <= 0) return Infinity
    const speed = Math.hypot(poses[i + 1].x - poses[i].x, poses[i + 1].y - poses[i].y) / dt
    worst = Math.max(worst, speed)
  }
  return worst
}

export function round(value: number, digits: number): number {
  const factor = 10 ** digits
  return Math.round(value * factor) / factor
}
