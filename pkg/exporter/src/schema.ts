// Output validation against the JSON Schemas published by the consumer
// package; exporting anything those schemas reject is a bug here, not there.

import fs from 'node:fs'
import path from 'node:path'
import { fileURLToPath } from 'node:url'

import { Ajv, type ValidateFunction } from 'ajv'

const HERE = path.dirname(fileURLToPath(import.meta.url))

// repo layout first (exporter/ next to src/intentgraph/), env override second
const CANDIDATE_DIRS = [
  process.env.INTENTGRAPH_SCHEMA_DIR,
  path.resolve(HERE, '../../src/intentgraph/schemas'),
  path.resolve(HERE, '../../../src/intentgraph/schemas'),
].filter((p): p is string => !!p)

function schemaDir(): string {
  for (const dir of CANDIDATE_DIRS) {
    if (fs.existsSync(path.join(dir, 'rawscene.schema.json'))) return dir
  }
  throw new Error(
    'cannot locate the published schemas; set INTENTGRAPH_SCHEMA_DIR to the directory ' +
      'containing rawscene.schema.json and map.schema.json',
  )
}

const ajv = new Ajv({ allErrors: true })
const validators = new Map<string, ValidateFunction>()

function validator(name: 'rawscene' | 'map'): ValidateFunction {
  let cached = validators.get(name)
  if (!cached) {
    const schema = JSON.parse(
      fs.readFileSync(path.join(schemaDir(), `${name}.schema.json`), 'utf-8'),
    )
    cached = ajv.compile(schema)
    validators.set(name, cached)
  }
  return cached
}

function check(doc: unknown, name: 'rawscene' | 'map', label: string): void {
  const validate = validator(name)
  if (!validate(doc)) {
    const details = (validate.errors ?? [])
      .slice(0, 10)
      .map((e) => `${e.instancePath || '<root>'} ${e.message}`)
      .join('; ')
    throw new Error(`${label} violates the ${name} schema: ${details}`)
  }
}

export function validateRawScene(doc: unknown, label: string): void {
  check(doc, 'rawscene', label)
}

export function validateMap(doc: unknown, label: string): void {
  check(doc, 'map', label)
}
