// Scene conversion: devkit tables -> neutral RawScene documents.

import type {
  DevkitTables,
  NeutralDetection,
  NeutralFrame,
  NeutralScene,
  SampleRecord,
  SceneRecord,
} from './types.js'
import { indexBy } from './tables.js'
import { deriveKinematics, maxImpliedSpeed, quaternionYaw, round, type PoseSample } from './kinematics.js'

// source category names -> neutral detection categories
const CATEGORY_MAP: Record<string, string> = {
  'human.pedestrian.adult': 'pedestrian_adult',
  'human.pedestrian.child': 'pedestrian_child',
  'human.pedestrian.construction_worker': 'pedestrian_adult',
  'human.pedestrian.police_officer': 'police_officer',
  'human.pedestrian.personal_mobility': 'personal_mobility',
  'vehicle.car': 'vehicle_4wheel',
  'vehicle.truck': 'vehicle_4wheel',
  'vehicle.bus.bendy': 'vehicle_4wheel',
  'vehicle.bus.rigid': 'vehicle_4wheel',
  'vehicle.construction': 'vehicle_4wheel',
  'vehicle.emergency.ambulance': 'vehicle_4wheel',
  'vehicle.emergency.police': 'vehicle_4wheel',
  'vehicle.trailer': 'vehicle_4wheel',
  'vehicle.motorcycle': 'motorcycle',
  'vehicle.bicycle': 'bicycle',
  'movable_object.debris': 'debris',
  'movable_object.trafficcone': 'traffic_cone',
  'movable_object.pushable_pullable': 'pushable_pullable',
}

const ATTRIBUTE_MAP: Record<string, string> = {
  'vehicle.moving': 'moving',
  'vehicle.stopped': 'moving', // stopped in traffic is still active, unlike parked
  'vehicle.parked': 'parked',
  'cycle.with_rider': 'with_rider',
  'cycle.without_rider': 'without_rider',
  'pedestrian.moving': 'moving',
}

const VISIBILITY_MAP: Record<string, number> = {
  'v0-40': 0.2,
  'v40-60': 0.5,
  'v60-80': 0.7,
  'v80-100': 0.9,
}

export function mapCategory(name: string): string {
  return CATEGORY_MAP[name] ?? 'other'
}

export function mapActivity(attributeNames: string[]): string {
  for (const name of attributeNames) {
    const mapped = ATTRIBUTE_MAP[name]
    if (mapped) return mapped
  }
  return 'unknown'
}

export function mapVisibility(level: string): number {
  const mapped = VISIBILITY_MAP[level]
  if (mapped === undefined) throw new Error(`unknown visibility level ${level}`)
  return mapped
}

export function parseTags(description: string): string[] {
  const tags: string[] = []
  const lower = description.toLowerCase()
  if (lower.includes('night')) tags.push('night')
  if (lower.includes('rain')) tags.push('rain')
  return tags.sort()
}

function orderedSamples(scene: SceneRecord, samples: SampleRecord[]): SampleRecord[] {
  const byToken = indexBy(samples)
  const chain: SampleRecord[] = []
  let cursor = scene.first_sample_token
  while (cursor) {
    const sample = byToken.get(cursor)
    if (!sample) throw new Error(`scene ${scene.name}: dangling sample token ${cursor}`)
    chain.push(sample)
    if (sample.token === scene.last_sample_token) break
    cursor = sample.next
  }
  if (chain.length !== scene.nbr_samples) {
    throw new Error(
      `scene ${scene.name}: sample chain has ${chain.length} entries, expected ${scene.nbr_samples}`,
    )
  }
  return chain
}

export interface SceneConversion {
  scene: NeutralScene | null
  location: string
  exclusionReason?: string
}

export function convertScene(
  tables: DevkitTables,
  sceneRecord: SceneRecord,
  mapRef: string,
  maxPlausibleSpeed: number,
  keepBadPose: boolean,
): SceneConversion {
  const log = indexBy(tables.log).get(sceneRecord.log_token)
  if (!log) throw new Error(`scene ${sceneRecord.name}: missing log ${sceneRecord.log_token}`)

  const sensors = indexBy(tables.sensor)
  const calibrated = indexBy(tables.calibrated_sensor)
  const poses = indexBy(tables.ego_pose)
  const keyFrameData = tables.sample_data.filter((sd) => {
    if (!sd.is_key_frame) return false
    const sensorToken = calibrated.get(sd.calibrated_sensor_token)?.sensor_token
    return sensorToken !== undefined && sensors.get(sensorToken)?.channel === 'LIDAR_TOP'
  })
  const dataBySample = new Map(keyFrameData.map((sd) => [sd.sample_token, sd]))

  const samples = orderedSamples(sceneRecord, tables.sample.filter(
    (s) => s.scene_token === sceneRecord.token,
  ))
  const t0 = samples[0].timestamp
  const poseSamples: PoseSample[] = samples.map((sample) => {
    const sampleData = dataBySample.get(sample.token)
    if (!sampleData) throw new Error(`scene ${sceneRecord.name}: no key frame for sample ${sample.token}`)
    const pose = poses.get(sampleData.ego_pose_token)
    if (!pose) throw new Error(`scene ${sceneRecord.name}: missing ego pose ${sampleData.ego_pose_token}`)
    return {
      t: (sample.timestamp - t0) / 1e6,
      x: pose.translation[0],
      y: pose.translation[1],
      heading: quaternionYaw(pose.rotation),
    }
  })

  const impliedSpeed = maxImpliedSpeed(poseSamples)
  if (impliedSpeed > maxPlausibleSpeed && !keepBadPose) {
    const reason = Number.isFinite(impliedSpeed)
      ? `implied speed ${impliedSpeed.toFixed(1)} m/s exceeds ${maxPlausibleSpeed}`
      : 'timestamp regression between consecutive poses'
    return { scene: null, location: log.location, exclusionReason: reason }
  }

  const { velocity, acceleration, steering } = deriveKinematics(poseSamples)

  const instances = indexBy(tables.instance)
  const categories = indexBy(tables.category)
  const attributes = indexBy(tables.attribute)
  const visibilities = indexBy(tables.visibility)
  const annotationsBySample = new Map<string, NeutralDetection[]>()
  for (const annotation of tables.sample_annotation) {
    const instance = instances.get(annotation.instance_token)
    const categoryName = instance ? categories.get(instance.category_token)?.name : undefined
    if (categoryName === undefined) {
      throw new Error(`annotation ${annotation.token}: unresolvable category`)
    }
    const visibilityLevel = visibilities.get(annotation.visibility_token)?.level
    if (visibilityLevel === undefined) {
      throw new Error(`annotation ${annotation.token}: unresolvable visibility`)
    }
    const names = annotation.attribute_tokens.map((t) => attributes.get(t)?.name ?? '')
    const detection: NeutralDetection = {
      category: mapCategory(categoryName),
      position: [round(annotation.translation[0], 3), round(annotation.translation[1], 3)],
      visibility: mapVisibility(visibilityLevel),
      activity: mapActivity(names),
    }
    const bucket = annotationsBySample.get(annotation.sample_token)
    if (bucket) bucket.push(detection)
    else annotationsBySample.set(annotation.sample_token, [detection])
  }

  const frames: NeutralFrame[] = samples.map((sample, i) => ({
    t: round(poseSamples[i].t, 3),
    ego_position: [round(poseSamples[i].x, 3), round(poseSamples[i].y, 3)],
    ego_heading: round(poseSamples[i].heading, 6),
    ego_velocity: round(velocity[i], 3),
    ego_acceleration: round(acceleration[i], 3),
    ego_steering: round(steering[i], 3),
    detections: annotationsBySample.get(sample.token) ?? [],
  }))

  return {
    scene: {
      scene_id: sceneRecord.name,
      tags: parseTags(sceneRecord.description),
      map_ref: mapRef,
      frames,
    },
    location: log.location,
  }
}
