// Map expansion (token-indirected nodes/lines/polygons plus feature layers)
// -> the neutral typed feature list.

import type { MapExpansion, NeutralMap, NeutralMapFeature } from './types.js'

const STOP_LINE_TYPES: Record<string, string> = {
  STOP_SIGN: 'stop',
  YIELD: 'yield',
  TURN_STOP: 'turn_stop',
  // PED_CROSSING / TRAFFIC_LIGHT stop lines are covered by the dedicated
  // crosswalk and traffic-light features and carry no extra signal here.
}

export function convertMap(expansion: MapExpansion): NeutralMap {
  const nodes = new Map(expansion.node.map((n) => [n.token, [n.x, n.y] as [number, number]]))
  const lines = new Map(expansion.line.map((l) => [l.token, l.node_tokens]))
  const polygons = new Map(expansion.polygon.map((p) => [p.token, p.exterior_node_tokens]))

  function resolveNodes(tokens: string[], what: string): [number, number][] {
    return tokens.map((token) => {
      const point = nodes.get(token)
      if (!point) throw new Error(`${what}: dangling node token ${token}`)
      return point
    })
  }

  function polyline(lineToken: string, what: string): [number, number][] {
    const tokens = lines.get(lineToken)
    if (!tokens) throw new Error(`${what}: dangling line token ${lineToken}`)
    return resolveNodes(tokens, what)
  }

  function polygon(polygonToken: string, what: string): [number, number][] {
    const tokens = polygons.get(polygonToken)
    if (!tokens) throw new Error(`${what}: dangling polygon token ${polygonToken}`)
    return resolveNodes(tokens, what)
  }

  const features: NeutralMapFeature[] = []
  for (const lane of expansion.lane) {
    features.push({
      type: 'lane',
      id: lane.token,
      centerline: polyline(lane.centerline_line_token, `lane ${lane.token}`),
      width: lane.width,
    })
  }
  for (const divider of [...expansion.road_divider, ...expansion.lane_divider]) {
    features.push({
      type: 'divider',
      id: divider.token,
      line: polyline(divider.line_token, `divider ${divider.token}`),
    })
  }
  for (const area of expansion.drivable_area) {
    area.polygon_tokens.forEach((token, i) => {
      features.push({
        type: 'drivable_area',
        id: `${area.token}/${i}`,
        polygon: polygon(token, `drivable_area ${area.token}`),
      })
    })
  }
  for (const carpark of expansion.carpark_area) {
    features.push({
      type: 'carpark',
      id: carpark.token,
      polygon: polygon(carpark.polygon_token, `carpark ${carpark.token}`),
    })
  }
  for (const crossing of expansion.ped_crossing) {
    features.push({
      type: 'crosswalk',
      id: crossing.token,
      polygon: polygon(crossing.polygon_token, `ped_crossing ${crossing.token}`),
    })
  }
  for (const segment of expansion.road_segment) {
    if (!segment.is_intersection) continue
    features.push({
      type: 'intersection',
      id: segment.token,
      polygon: polygon(segment.polygon_token, `road_segment ${segment.token}`),
    })
  }
  for (const stopLine of expansion.stop_line) {
    const mapped = STOP_LINE_TYPES[stopLine.stop_line_type]
    if (!mapped) continue
    features.push({
      type: 'stop_area',
      id: stopLine.token,
      polygon: polygon(stopLine.polygon_token, `stop_line ${stopLine.token}`),
      stop_type: mapped,
    })
  }
  for (const light of expansion.traffic_light) {
    const position = nodes.get(light.node_token)
    if (!position) throw new Error(`traffic_light ${light.token}: dangling node token`)
    features.push({ type: 'traffic_light', id: light.token, position, facing: light.facing })
  }
  features.sort((a, b) => (a.type + a.id < b.type + b.id ? -1 : 1))
  return { features }
}
