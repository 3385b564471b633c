import fs from 'node:fs'
import path from 'node:path'

import type { DevkitTables, MapExpansion } from './types.js'

const TABLE_NAMES = [
  'scene',
  'sample',
  'sample_data',
  'ego_pose',
  'calibrated_sensor',
  'sensor',
  'sample_annotation',
  'instance',
  'category',
  'attribute',
  'visibility',
  'log',
] as const

export function loadTables(dataroot: string, version: string): DevkitTables {
  const base = path.join(dataroot, version)
  if (!fs.existsSync(base)) {
    throw new Error(`dataroot has no ${version} table directory: ${base}`)
  }
  const tables: Record<string, unknown> = {}
  for (const name of TABLE_NAMES) {
    const file = path.join(base, `${name}.json`)
    if (!fs.existsSync(file)) {
      throw new Error(`missing devkit table: ${file}`)
    }
    tables[name] = JSON.parse(fs.readFileSync(file, 'utf-8'))
  }
  return tables as unknown as DevkitTables
}

export function loadMapExpansion(dataroot: string, location: string): MapExpansion {
  const file = path.join(dataroot, 'maps', 'expansion', `${location}.json`)
  if (!fs.existsSync(file)) {
    throw new Error(`missing map expansion for location ${location}: ${file}`)
  }
  return JSON.parse(fs.readFileSync(file, 'utf-8')) as MapExpansion
}

export function indexBy<T extends { token: string }>(records: T[]): Map<string, T> {
  const index = new Map<string, T>()
  for (const record of records) index.set(record.token, record)
  return index
}
