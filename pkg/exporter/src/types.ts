// Devkit-shaped table records (the subset this exporter reads) and the
// neutral interchange types it emits.

export interface SceneRecord {
  token: string
  name: string
  description: string
  log_token: string
  nbr_samples: number
  first_sample_token: string
  last_sample_token: string
}

export interface SampleRecord {
  token: string
  timestamp: number // microseconds
  scene_token: string
  prev: string
  next: string
}

export interface SampleDataRecord {
  token: string
  sample_token: string
  ego_pose_token: string
  calibrated_sensor_token: string
  is_key_frame: boolean
  timestamp: number
}

export interface EgoPoseRecord {
  token: string
  timestamp: number
  translation: [number, number, number]
  rotation: [number, number, number, number] // [w, x, y, z]
}

export interface CalibratedSensorRecord {
  token: string
  sensor_token: string
}

export interface SensorRecord {
  token: string
  channel: string
  modality: string
}

export interface SampleAnnotationRecord {
  token: string
  sample_token: string
  instance_token: string
  visibility_token: string
  attribute_tokens: string[]
  translation: [number, number, number]
}

export interface InstanceRecord {
  token: string
  category_token: string
}

export interface CategoryRecord {
  token: string
  name: string
}

export interface AttributeRecord {
  token: string
  name: string
}

export interface VisibilityRecord {
  token: string
  level: string // "v0-40" | "v40-60" | "v60-80" | "v80-100"
}

export interface LogRecord {
  token: string
  location: string
}

export interface DevkitTables {
  scene: SceneRecord[]
  sample: SampleRecord[]
  sample_data: SampleDataRecord[]
  ego_pose: EgoPoseRecord[]
  calibrated_sensor: CalibratedSensorRecord[]
  sensor: SensorRecord[]
  sample_annotation: SampleAnnotationRecord[]
  instance: InstanceRecord[]
  category: CategoryRecord[]
  attribute: AttributeRecord[]
  visibility: VisibilityRecord[]
  log: LogRecord[]
}

// map expansion (token-indirected geometry, one file per location)

export interface MapNode {
  token: string
  x: number
  y: number
}

export interface MapLine {
  token: string
  node_tokens: string[]
}

export interface MapPolygon {
  token: string
  exterior_node_tokens: string[]
}

export interface MapExpansion {
  node: MapNode[]
  line: MapLine[]
  polygon: MapPolygon[]
  lane: { token: string; polygon_token: string; centerline_line_token: string; width: number }[]
  road_divider: { token: string; line_token: string }[]
  lane_divider: { token: string; line_token: string }[]
  drivable_area: { token: string; polygon_tokens: string[] }[]
  carpark_area: { token: string; polygon_token: string }[]
  ped_crossing: { token: string; polygon_token: string }[]
  road_segment: { token: string; polygon_token: string; is_intersection: boolean }[]
  stop_line: { token: string; polygon_token: string; stop_line_type: string }[]
  traffic_light: { token: string; node_token: string; facing: number }[]
}

// neutral output shapes (the primary pipeline's input contract)

export interface NeutralDetection {
  category: string
  position: [number, number]
  visibility: number
  activity: string
}

export interface NeutralFrame {
  t: number
  ego_position: [number, number]
  ego_heading: number
  ego_velocity: number
  ego_acceleration: number
  ego_steering: number
  detections: NeutralDetection[]
}

export interface NeutralScene {
  scene_id: string
  tags: string[]
  map_ref: string
  frames: NeutralFrame[]
}

export type NeutralMapFeature =
  | { type: 'lane'; id: string; centerline: [number, number][]; width: number }
  | { type: 'divider'; id: string; line: [number, number][] }
  | { type: 'drivable_area' | 'carpark' | 'crosswalk' | 'intersection'; id: string; polygon: [number, number][] }
  | { type: 'stop_area'; id: string; polygon: [number, number][]; stop_type: string }
  | { type: 'traffic_light'; id: string; position: [number, number]; facing: number }

export interface NeutralMap {
  features: NeutralMapFeature[]
}

export interface ExportOptions {
  dataroot: string
  version: string
  outDir: string
  maxPlausibleSpeed?: number // m/s; consecutive-pose speeds above this drop the scene
  keepBadPose?: boolean
}

export interface ExportReport {
  exported: string[]
  excluded: { scene: string; reason: string }[]
  maps: string[]
}
