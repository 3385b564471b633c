import { parseArgs } from 'node:util'

import { runExport } from './export.js'

function usage(): never {
  console.error(
    'usage: nuscenes-export --dataroot <dir> --version <v1.0-...> --out <dir>\n' +
      '           [--max-speed <m/s>] [--keep-bad-pose]',
  )
  process.exit(2)
}

export function main(argv: string[]): void {
  let parsed
  try {
    parsed = parseArgs({
      args: argv,
      options: {
        dataroot: { type: 'string' },
        version: { type: 'string' },
        out: { type: 'string' },
        'max-speed': { type: 'string' },
        'keep-bad-pose': { type: 'boolean', default: false },
      },
    })
  } catch {
    usage()
  }
  const { values } = parsed
  if (!values.dataroot || !values.version || !values.out) usage()
  const maxSpeed = values['max-speed'] ? Number(values['max-speed']) : undefined
  if (maxSpeed !== undefined && !(maxSpeed > 0)) usage()
  try {
    const report = runExport({
      dataroot: values.dataroot,
      version: values.version,
      outDir: values.out,
      maxPlausibleSpeed: maxSpeed,
      keepBadPose: values['keep-bad-pose'],
    })
    console.log(
      `exported ${report.exported.length} scenes, ${report.maps.length} maps -> ${values.out}`,
    )
    for (const { scene, reason } of report.excluded) {
      console.log(`excluded ${scene}: ${reason}`)
    }
  } catch (error) {
    console.error(`error: ${error instanceof Error ? error.message : error}`)
    process.exit(1)
  }
}

main(process.argv.slice(2))
