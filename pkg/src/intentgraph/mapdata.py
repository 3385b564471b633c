"""Typed road-map features and the geometric query surface over them.

A :class:`FeatureMap` answers pure point queries (drivable membership, lane
matching, divider proximity, ...) used by the state discretiser. Geometry is
plain 2D in meters; shapely does the polygon work.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from shapely.geometry import LineString, Point, Polygon
from shapely.prepared import prep

from .errors import InputError

XY = tuple[float, float]

STOP_TYPES = ("stop", "yield", "turn_stop")


def norm_angle(angle: float) -> float:
    """Wrap to (-pi, pi]."""
    wrapped = math.fmod(angle + math.pi, 2 * math.pi)
    if wrapped <= 0:
        wrapped += 2 * math.pi
    return wrapped - math.pi


def angle_between(a: float, b: float) -> float:
    """Absolute angular difference in [0, pi]."""
    return abs(norm_angle(a - b))


def point_in_sector(
    origin: XY, heading: float, radius: float, half_angle: float, point: XY
) -> bool:
    """Exact membership in the circular sector ahead of ``origin``."""
    dx = point[0] - origin[0]
    dy = point[1] - origin[1]
    dist = math.hypot(dx, dy)
    if dist > radius:
        return False
    if dist == 0.0:
        return True
    return angle_between(math.atan2(dy, dx), heading) <= half_angle


def sector_polygon(
    origin: XY, heading: float, radius: float, half_angle: float, segments: int = 24
) -> Polygon:
    """Polygonal sector, inscribed; vertex directions are fixed so the shape
    grows monotonically with radius."""
    points = [origin]
    for k in range(segments + 1):
        angle = heading - half_angle + (2 * half_angle) * k / segments
        points.append((origin[0] + radius * math.cos(angle), origin[1] + radius * math.sin(angle)))
    return Polygon(points)


@dataclass(frozen=True)
class LaneFeature:
    id: str
    centerline: tuple[XY, ...]
    width: float


@dataclass(frozen=True)
class DividerFeature:
    id: str
    line: tuple[XY, ...]


@dataclass(frozen=True)
class PolygonFeature:
    id: str
    polygon: tuple[XY, ...]


@dataclass(frozen=True)
class StopAreaFeature:
    id: str
    polygon: tuple[XY, ...]
    stop_type: str  # stop | yield | turn_stop


@dataclass(frozen=True)
class TrafficLightFeature:
    id: str
    position: XY
    facing: float  # direction the light shows toward, radians


@dataclass(frozen=True)
class LaneMatch:
    """Result of matching a point to the nearest lane centerline."""

    lane_id: str
    distance: float
    direction: float  # tangent heading at the matched point
    progress: float  # arclength fraction in [0, 1]
    halfwidth: float


class FeatureMap:
    """Static road map; all queries are pure."""

    def __init__(
        self,
        lanes: Sequence[LaneFeature] = (),
        dividers: Sequence[DividerFeature] = (),
        drivable_areas: Sequence[PolygonFeature] = (),
        carparks: Sequence[PolygonFeature] = (),
        crosswalks: Sequence[PolygonFeature] = (),
        stop_areas: Sequence[StopAreaFeature] = (),
        traffic_lights: Sequence[TrafficLightFeature] = (),
        intersections: Sequence[PolygonFeature] = (),
    ):
        self.lanes = tuple(lanes)
        self.dividers = tuple(dividers)
        self.drivable_areas = tuple(drivable_areas)
        self.carparks = tuple(carparks)
        self.crosswalks = tuple(crosswalks)
        self.stop_areas = tuple(stop_areas)
        self.traffic_lights = tuple(traffic_lights)
        self.intersections = tuple(intersections)

        self._lane_lines = [(lane, LineString(lane.centerline)) for lane in self.lanes]
        self._divider_lines = [LineString(d.line) for d in self.dividers]
        self._drivable = [(prep(Polygon(a.polygon)), Polygon(a.polygon)) for a in self.drivable_areas]
        self._carpark = [prep(Polygon(a.polygon)) for a in self.carparks]
        self._intersection = [(a.id, prep(Polygon(a.polygon))) for a in self.intersections]
        self._crosswalk_polys = [Polygon(c.polygon) for c in self.crosswalks]
        self._stop_polys = [(s, Polygon(s.polygon)) for s in self.stop_areas]

    # -- membership ----------------------------------------------------------

    def drivable_contains(self, point: XY) -> bool:
        p = Point(point)
        return any(prepared.intersects(p) for prepared, _ in self._drivable)

    def carpark_contains(self, point: XY) -> bool:
        p = Point(point)
        return any(prepared.intersects(p) for prepared in self._carpark)

    def intersection_at(self, point: XY) -> str | None:
        p = Point(point)
        for feature_id, prepared in self._intersection:
            if prepared.intersects(p):
                return feature_id
        return None

    # -- lanes and dividers ----------------------------------------------------

    def nearest_lane(self, point: XY) -> LaneMatch | None:
        """Nearest centerline by perpendicular distance; ties by smaller id."""
        if not self._lane_lines:
            return None
        p = Point(point)
        best: tuple[float, str, LaneFeature, LineString] | None = None
        for lane, line in self._lane_lines:
            d = line.distance(p)
            key = (d, lane.id)
            if best is None or key < (best[0], best[1]):
                best = (d, lane.id, lane, line)
        distance, _, lane, line = best
        s = line.project(p)
        length = line.length
        eps = min(0.5, length / 2)
        before = line.interpolate(max(0.0, s - eps))
        after = line.interpolate(min(length, s + eps))
        direction = math.atan2(after.y - before.y, after.x - before.x)
        progress = 0.0 if length == 0 else min(1.0, max(0.0, s / length))
        return LaneMatch(lane.id, distance, direction, progress, lane.width / 2)

    def divider_distance(self, point: XY) -> float | None:
        if not self._divider_lines:
            return None
        p = Point(point)
        return min(line.distance(p) for line in self._divider_lines)

    # -- sector queries --------------------------------------------------------

    def crosswalk_in_sector(self, sector: Polygon) -> bool:
        return any(sector.intersects(poly) for poly in self._crosswalk_polys)

    def stop_types_in_sector(self, sector: Polygon) -> set[str]:
        return {s.stop_type for s, poly in self._stop_polys if sector.intersects(poly)}

    # -- serialization ----------------------------------------------------------

    def to_json_obj(self) -> dict:
        features: list[dict] = []
        for lane in self.lanes:
            features.append(
                {"type": "lane", "id": lane.id, "centerline": [list(p) for p in lane.centerline], "width": lane.width}
            )
        for d in self.dividers:
            features.append({"type": "divider", "id": d.id, "line": [list(p) for p in d.line]})
        for kind, items in (
            ("drivable_area", self.drivable_areas),
            ("carpark", self.carparks),
            ("crosswalk", self.crosswalks),
            ("intersection", self.intersections),
        ):
            for f in items:
                features.append({"type": kind, "id": f.id, "polygon": [list(p) for p in f.polygon]})
        for s in self.stop_areas:
            features.append(
                {"type": "stop_area", "id": s.id, "polygon": [list(p) for p in s.polygon], "stop_type": s.stop_type}
            )
        for t in self.traffic_lights:
            features.append(
                {"type": "traffic_light", "id": t.id, "position": list(t.position), "facing": t.facing}
            )
        features.sort(key=lambda f: (f["type"], f["id"]))
        return {"features": features}

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), separators=(",", ":"))

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "FeatureMap":
        lanes, dividers, drivable, carparks = [], [], [], []
        crosswalks, stop_areas, lights, intersections = [], [], [], []
        try:
            for f in obj["features"]:
                kind = f["type"]
                if kind == "lane":
                    lanes.append(
                        LaneFeature(f["id"], tuple(map(tuple, f["centerline"])), float(f["width"]))
                    )
                elif kind == "divider":
                    dividers.append(DividerFeature(f["id"], tuple(map(tuple, f["line"]))))
                elif kind == "drivable_area":
                    drivable.append(PolygonFeature(f["id"], tuple(map(tuple, f["polygon"]))))
                elif kind == "carpark":
                    carparks.append(PolygonFeature(f["id"], tuple(map(tuple, f["polygon"]))))
                elif kind == "crosswalk":
                    crosswalks.append(PolygonFeature(f["id"], tuple(map(tuple, f["polygon"]))))
                elif kind == "intersection":
                    intersections.append(PolygonFeature(f["id"], tuple(map(tuple, f["polygon"]))))
                elif kind == "stop_area":
                    if f["stop_type"] not in STOP_TYPES:
                        raise InputError(f"unknown stop_type {f['stop_type']!r}")
                    stop_areas.append(
                        StopAreaFeature(f["id"], tuple(map(tuple, f["polygon"])), f["stop_type"])
                    )
                elif kind == "traffic_light":
                    lights.append(
                        TrafficLightFeature(f["id"], tuple(f["position"]), float(f["facing"]))
                    )
                else:
                    raise InputError(f"unknown map feature type {kind!r}")
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed map JSON: {exc}") from exc
        return cls(lanes, dividers, drivable, carparks, crosswalks, stop_areas, lights, intersections)

    @classmethod
    def from_file(cls, path: Path | str) -> "FeatureMap":
        return cls.from_json_obj(json.loads(Path(path).read_text()))
