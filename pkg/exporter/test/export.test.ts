import fs from 'node:fs'
import os from 'node:os'
import path from 'node:path'
import { execFileSync, spawnSync } from 'node:child_process'
import { fileURLToPath } from 'node:url'

import { afterAll, beforeAll, describe, expect, it } from 'vitest'

import { mapActivity, mapCategory, mapVisibility, parseTags } from '../src/convert'
import { deriveKinematics, maxImpliedSpeed, quaternionYaw } from '../src/kinematics'
import { runExport } from '../src/export'
import { validateMap, validateRawScene } from '../src/schema'
import type { ExportReport, NeutralScene } from '../src/types'

const HERE = path.dirname(fileURLToPath(import.meta.url))
const FIXTURE = path.resolve(HERE, '../fixture/fixture-devkit')
const REPO_ROOT = path.resolve(HERE, '../..')

let outDir: string
let report: ExportReport

beforeAll(() => {
  outDir = fs.mkdtempSync(path.join(os.tmpdir(), 'nuscenes-export-'))
  report = runExport({ dataroot: FIXTURE, version: 'v1.0-fixture', outDir })
})

afterAll(() => {
  fs.rmSync(outDir, { recursive: true, force: true })
})

function readScene(name: string): NeutralScene {
  return JSON.parse(fs.readFileSync(path.join(outDir, 'scenes', `${name}.json`), 'utf-8'))
}

describe('fixture export', () => {
  it('exports the two well-formed scenes and the location map', () => {
    expect(report.exported.sort()).toEqual(['scene-0001', 'scene-0002'])
    expect(report.maps).toEqual(['fixture-town'])
    expect(fs.existsSync(path.join(outDir, 'maps', 'fixture-town.json'))).toBe(true)
  })

  it('excludes the pose-glitch scene with a reason', () => {
    expect(report.excluded).toHaveLength(1)
    expect(report.excluded[0].scene).toBe('scene-0003')
    expect(report.excluded[0].reason).toMatch(/implied speed/)
  })

  it('keeps the glitch scene when exclusions are disabled', () => {
    const keepDir = fs.mkdtempSync(path.join(os.tmpdir(), 'nuscenes-keep-'))
    try {
      const keepReport = runExport({
        dataroot: FIXTURE,
        version: 'v1.0-fixture',
        outDir: keepDir,
        keepBadPose: true,
      })
      expect(keepReport.exported).toContain('scene-0003')
    } finally {
      fs.rmSync(keepDir, { recursive: true, force: true })
    }
  })

  it('produces schema-valid documents', () => {
    for (const name of report.exported) {
      validateRawScene(readScene(name), name)
    }
    const map = JSON.parse(
      fs.readFileSync(path.join(outDir, 'maps', 'fixture-town.json'), 'utf-8'),
    )
    validateMap(map, 'fixture-town')
  })

  it('parses rain and night tags from the scene description', () => {
    expect(readScene('scene-0001').tags).toEqual([])
    expect(readScene('scene-0002').tags).toEqual(['night', 'rain'])
  })

  it('derives braking kinematics from the pose chain', () => {
    const frames = readScene('scene-0001').frames
    expect(frames[0].ego_velocity).toBeCloseTo(7, 3)
    const braking = frames.filter((f) => f.ego_acceleration < -1)
    expect(braking.length).toBeGreaterThan(3)
    expect(frames.every((f) => f.ego_steering === 0)).toBe(true)
  })

  it('maps detection categories, visibility levels and activities', () => {
    const detections = readScene('scene-0001').frames[0].detections
    const byCategory = new Map(detections.map((d) => [d.category, d]))
    expect(byCategory.get('vehicle_4wheel')?.activity).toBe('parked')
    expect(byCategory.get('bicycle')?.activity).toBe('with_rider')
    expect(byCategory.get('pedestrian_adult')?.visibility).toBeCloseTo(0.7)
    expect(byCategory.get('vehicle_4wheel')?.visibility).toBeCloseTo(0.9)
  })

  it('points map_ref at the exported location map', () => {
    const scene = readScene('scene-0002')
    const resolved = path.resolve(path.join(outDir, 'scenes'), scene.map_ref)
    expect(fs.existsSync(resolved)).toBe(true)
  })
})

describe('unit mappings', () => {
  it('category map falls back to other', () => {
    expect(mapCategory('vehicle.car')).toBe('vehicle_4wheel')
    expect(mapCategory('animal')).toBe('other')
  })

  it('activity map prefers known attributes', () => {
    expect(mapActivity(['vehicle.parked'])).toBe('parked')
    expect(mapActivity(['vehicle.stopped'])).toBe('moving')
    expect(mapActivity([])).toBe('unknown')
  })

  it('visibility levels resolve to fractions', () => {
    expect(mapVisibility('v0-40')).toBeCloseTo(0.2)
    expect(() => mapVisibility('v??')).toThrow()
  })

  it('tag parsing is case-insensitive and sorted', () => {
    expect(parseTags('Heavy RAIN at NIGHT')).toEqual(['night', 'rain'])
    expect(parseTags('Sunny parking lot')).toEqual([])
  })

  it('quaternion yaw and implied-speed helpers behave', () => {
    expect(quaternionYaw([1, 0, 0, 0])).toBeCloseTo(0)
    expect(quaternionYaw([Math.SQRT1_2, 0, 0, Math.SQRT1_2])).toBeCloseTo(Math.PI / 2)
    const poses = [
      { t: 0, x: 0, y: 0, heading: 0 },
      { t: 0.5, x: 3, y: 0, heading: 0 },
    ]
    expect(maxImpliedSpeed(poses)).toBeCloseTo(6)
    expect(deriveKinematics(poses).velocity[0]).toBeCloseTo(6)
    expect(maxImpliedSpeed([poses[1], { ...poses[0], t: 0.5 }])).toBe(Infinity)
  })
})

describe('end-to-end through the consumer pipeline', () => {
  it('exported files drive discretize -> build -> intents -> metrics', () => {
    const python = process.env.PYTHON ?? 'python3'
    const probe = spawnSync(python, ['-c', 'import intentgraph'], { encoding: 'utf-8' })
    if (probe.status !== 0) {
      throw new Error(
        'the consumer package is not importable; install it first (pip install -e ' +
          REPO_ROOT +
          ')',
      )
    }
    const work = fs.mkdtempSync(path.join(os.tmpdir(), 'nuscenes-e2e-'))
    try {
      const cli = (...args: string[]) =>
        execFileSync(python, ['-m', 'intentgraph.cli', ...args], {
          cwd: work,
          encoding: 'utf-8',
        })
      cli('discretize', '--scenes', path.join(outDir, 'scenes'), '--out', 'traj.jsonl')
      cli('build', '--traj', 'traj.jsonl', '--out', 'pg.json')
      cli('intents', '--pg', 'pg.json', '--out', 'intents.json')
      cli('metrics', '--pg', 'pg.json', '--intents', 'intents.json', '--C', '0.5',
          '--out', 'metrics.csv')
      const metrics = fs.readFileSync(path.join(work, 'metrics.csv'), 'utf-8')
      expect(metrics.split('\n')[0]).toBe(
        'cohort,desire,kind,C,attributed,expected,n_states_attributed,visitation_mass',
      )
      // the rainy night scene must be reachable through tag filtering too
      cli('build', '--traj', 'traj.jsonl', '--filter-tag', 'rain', '--out', 'pg-rain.json')
      const rainGraph = JSON.parse(fs.readFileSync(path.join(work, 'pg-rain.json'), 'utf-8'))
      expect(rainGraph.nodes.length).toBeGreaterThan(0)
    } finally {
      fs.rmSync(work, { recursive: true, force: true })
    }
  })
})
