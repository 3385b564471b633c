// Orchestration: load tables, convert every scene and each referenced map
// location, validate the outputs, write them out.

import fs from 'node:fs'
import path from 'node:path'

import { convertScene } from './convert.js'
import { convertMap } from './mapconvert.js'
import { validateMap, validateRawScene } from './schema.js'
import { indexBy, loadMapExpansion, loadTables } from './tables.js'
import type { ExportOptions, ExportReport } from './types.js'

const DEFAULT_MAX_SPEED = 60 // m/s

export function runExport(options: ExportOptions): ExportReport {
  const tables = loadTables(options.dataroot, options.version)
  const logs = indexBy(tables.log)
  const maxSpeed = options.maxPlausibleSpeed ?? DEFAULT_MAX_SPEED

  const scenesDir = path.join(options.outDir, 'scenes')
  const mapsDir = path.join(options.outDir, 'maps')
  fs.mkdirSync(scenesDir, { recursive: true })
  fs.mkdirSync(mapsDir, { recursive: true })

  const report: ExportReport = { exported: [], excluded: [], maps: [] }
  const exportedLocations = new Set<string>()

  for (const sceneRecord of tables.scene) {
    const log = logs.get(sceneRecord.log_token)
    if (!log) throw new Error(`scene ${sceneRecord.name}: missing log record`)
    const mapRef = path.posix.join('..', 'maps', `${log.location}.json`)
    const conversion = convertScene(
      tables,
      sceneRecord,
      mapRef,
      maxSpeed,
      options.keepBadPose ?? false,
    )
    if (!conversion.scene) {
      report.excluded.push({
        scene: sceneRecord.name,
        reason: conversion.exclusionReason ?? 'unknown',
      })
      continue
    }
    validateRawScene(conversion.scene, `scene ${sceneRecord.name}`)
    fs.writeFileSync(
      path.join(scenesDir, `${sceneRecord.name}.json`),
      JSON.stringify(conversion.scene),
    )
    report.exported.push(sceneRecord.name)
    exportedLocations.add(conversion.location)
  }

  for (const location of [...exportedLocations].sort()) {
    const neutral = convertMap(loadMapExpansion(options.dataroot, location))
    validateMap(neutral, `map ${location}`)
    fs.writeFileSync(path.join(mapsDir, `${location}.json`), JSON.stringify(neutral))
    report.maps.push(location)
  }

  return report
}
