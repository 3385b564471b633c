"""Continuous raw scenes to discrete state-action trajectories.

Every frame maps to a total assignment of the eleven predicates plus one
action label. Discretisation never fails: geometry that cannot be resolved
degrades to None/No values. The action heuristic is threshold-based and
depends only on the current frame's kinematics.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Mapping, Protocol, Sequence

import yaml
from shapely.geometry import Polygon

from .errors import InputError
from .graph import Trajectory
from .mapdata import (
    FeatureMap,
    LaneMatch,
    angle_between,
    norm_angle,
    point_in_sector,
    sector_polygon,
    XY,
)
from .vocab import ActionLabel, DiscreteState

DETECTION_CATEGORIES = frozenset(
    {
        "pedestrian_adult",
        "pedestrian_child",
        "police_officer",
        "motorcycle",
        "bicycle",
        "personal_mobility",
        "vehicle_4wheel",
        "debris",
        "traffic_cone",
        "pushable_pullable",
        "other",
    }
)
PEDESTRIAN_CATEGORIES = frozenset({"pedestrian_adult", "pedestrian_child", "police_officer"})
TWO_WHEEL_CATEGORIES = frozenset({"motorcycle", "bicycle", "personal_mobility"})
OBJECT_CATEGORIES = frozenset({"debris", "traffic_cone", "pushable_pullable"})

ACTIVITIES = frozenset({"moving", "parked", "with_rider", "without_rider", "unknown"})


@dataclass(frozen=True)
class Detection:
    category: str
    position: XY
    visibility: float
    activity: str = "unknown"

    def __post_init__(self) -> None:
        if self.category not in DETECTION_CATEGORIES:
            raise InputError(f"unknown detection category {self.category!r}")
        if self.activity not in ACTIVITIES:
            raise InputError(f"unknown detection activity {self.activity!r}")
        if not 0.0 <= self.visibility <= 1.0:
            raise InputError(f"visibility must be in [0,1], got {self.visibility}")


@dataclass(frozen=True)
class RawFrame:
    t: float
    ego_position: XY
    ego_heading: float
    ego_velocity: float
    ego_acceleration: float
    ego_steering: float  # signed, left positive
    detections: tuple[Detection, ...] = ()


@dataclass(frozen=True)
class RawScene:
    scene_id: str
    tags: frozenset[str]
    map_ref: str
    frames: tuple[RawFrame, ...]

    def __post_init__(self) -> None:
        if not self.frames:
            raise InputError(f"scene {self.scene_id!r} has no frames")
        times = [f.t for f in self.frames]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise InputError(f"scene {self.scene_id!r}: timestamps must strictly increase")


@dataclass(frozen=True)
class DiscretizerConfig:
    """All thresholds and front-area geometry; every value overridable."""

    speed_stopped_max: float = 0.2  # m/s
    speed_slow_max: float = 4.0
    speed_medium_max: float = 8.33
    steering_forward_max: float = 0.1  # rad; at or above is a turn
    accel_gas_min: float = 0.5  # m/s^2
    accel_brake_min: float = 0.5  # magnitude
    sector_half_angle_deg: float = 45.0
    proximity_radius: float = 15.0  # pedestrians / two-wheelers / objects / crosswalks
    signage_radius: float = 30.0  # traffic lights / stop areas
    object_visibility_min: float = 0.6
    divider_halfwidth: float = 0.3
    lane_match_slack: float = 1.0
    light_facing_tolerance_deg: float = 60.0
    turn_classification_deg: float = 45.0  # route heading change separating turns

    @property
    def half_angle(self) -> float:
        return math.radians(self.sector_half_angle_deg)

    @classmethod
    def from_mapping(cls, mapping: Mapping) -> "DiscretizerConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(mapping) - known)
        if unknown:
            raise InputError(f"unknown discretizer config keys: {unknown}")
        return replace(cls(), **{k: float(v) for k, v in mapping.items()})

    @classmethod
    def from_file(cls, path: Path | str) -> "DiscretizerConfig":
        doc = yaml.safe_load(Path(path).read_text()) or {}
        if not isinstance(doc, Mapping):
            raise InputError(f"{path}: config must be a key-value mapping")
        return cls.from_mapping(doc)


DEFAULT_CONFIG = DiscretizerConfig()


class MapOracle(Protocol):
    """Query surface the discretiser needs; all methods are pure."""

    def drivable_contains(self, point: XY) -> bool: ...
    def carpark_contains(self, point: XY) -> bool: ...
    def intersection_at(self, point: XY) -> str | None: ...
    def nearest_lane(self, point: XY) -> LaneMatch | None: ...
    def divider_distance(self, point: XY) -> float | None: ...
    def crosswalk_in_sector(self, sector: Polygon) -> bool: ...
    def stop_types_in_sector(self, sector: Polygon) -> set[str]: ...
    @property
    def traffic_lights(self): ...
    def route_manoeuvre(self, t: float) -> str | None: ...


class SceneMapView:
    """A static map plus one scene's recorded-route lookahead."""

    def __init__(self, feature_map: FeatureMap, route_by_time: Mapping[float, str | None]):
        self._map = feature_map
        self._route = dict(route_by_time)

    def __getattr__(self, name):
        return getattr(self._map, name)

    def route_manoeuvre(self, t: float) -> str | None:
        return self._route.get(t)


def with_route(feature_map: FeatureMap) -> SceneMapView:
    """Routeless view: NextIntersection degrades to None."""
    return SceneMapView(feature_map, {})


# -- per-predicate logic -------------------------------------------------------


def _velocity_value(v: float, cfg: DiscretizerConfig) -> str:
    if v < cfg.speed_stopped_max:
        return "Stopped"
    if v < cfg.speed_slow_max:
        return "Slow"
    if v < cfg.speed_medium_max:
        return "Medium"
    return "High"


def _steering_value(steering: float, cfg: DiscretizerConfig) -> str:
    if abs(steering) < cfg.steering_forward_max:
        return "Forward"
    return "Left" if steering > 0 else "Right"


def _lane_values(
    frame: RawFrame, oracle: MapOracle, cfg: DiscretizerConfig
) -> tuple[str, str]:
    """(LanePosition, BlockProgress)."""
    pos = frame.ego_position
    if not oracle.drivable_contains(pos):
        return "None", "None"

    divider_d = oracle.divider_distance(pos)
    on_divider = divider_d is not None and divider_d <= cfg.divider_halfwidth
    match = oracle.nearest_lane(pos)
    matched = match is not None and match.distance <= match.halfwidth + cfg.lane_match_slack

    if on_divider:
        lane_position = "Centre"
    elif matched:
        aligned = angle_between(frame.ego_heading, match.direction) <= math.pi / 2
        lane_position = "Aligned" if aligned else "Opposite"
    else:
        lane_position = "None"

    if oracle.intersection_at(pos) is not None:
        block = "Intersection"
    elif matched:
        if match.progress < 1 / 3:
            block = "Start"
        elif match.progress < 2 / 3:
            block = "Middle"
        else:
            block = "End"
    else:
        block = "None"
    return lane_position, block


_STOP_PRIORITY = (("stop", "Stop"), ("yield", "Yield"), ("turn_stop", "TurnStop"))


def discretize_state(
    frame: RawFrame, oracle: MapOracle, config: DiscretizerConfig = DEFAULT_CONFIG
) -> DiscreteState:
    """Total assignment of all eleven predicates; never fails."""
    cfg = config
    pos, heading = frame.ego_position, frame.ego_heading
    near = sector_polygon(pos, heading, cfg.proximity_radius, cfg.half_angle)
    far = sector_polygon(pos, heading, cfg.signage_radius, cfg.half_angle)

    lane_position, block = _lane_values(frame, oracle, cfg)

    stop_types = oracle.stop_types_in_sector(far)
    stop_value = "None"
    for raw, value in _STOP_PRIORITY:
        if raw in stop_types:
            stop_value = value
            break

    light_tol = math.radians(cfg.light_facing_tolerance_deg)
    light = any(
        point_in_sector(pos, heading, cfg.signage_radius, cfg.half_angle, tl.position)
        and angle_between(tl.facing, heading + math.pi) <= light_tol
        for tl in oracle.traffic_lights
    )

    pedestrian = two_wheel = objects = False
    for det in frame.detections:
        if not point_in_sector(pos, heading, cfg.proximity_radius, cfg.half_angle, det.position):
            continue
        if det.category in PEDESTRIAN_CATEGORIES:
            if det.visibility > 0 and oracle.drivable_contains(det.position):
                pedestrian = True
        elif det.category in TWO_WHEEL_CATEGORIES:
            if (
                det.visibility > 0
                and det.activity == "with_rider"
                and oracle.drivable_contains(det.position)
            ):
                two_wheel = True
        if det.visibility >= cfg.object_visibility_min and (
            (det.category == "vehicle_4wheel" and det.activity != "parked")
            or det.category in OBJECT_CATEGORIES
        ):
            if oracle.drivable_contains(det.position) or oracle.carpark_contains(det.position):
                objects = True

    return DiscreteState(
        (
            _velocity_value(frame.ego_velocity, cfg),
            _steering_value(frame.ego_steering, cfg),
            lane_position,
            block,
            oracle.route_manoeuvre(frame.t) or "None",
            stop_value,
            "Yes" if oracle.crosswalk_in_sector(near) else "No",
            "Yes" if light else "No",
            "Yes" if pedestrian else "No",
            "Yes" if two_wheel else "No",
            "Yes" if objects else "No",
        )
    )


def label_action(
    frame: RawFrame,
    next_frame: RawFrame | None = None,
    config: DiscretizerConfig = DEFAULT_CONFIG,
) -> ActionLabel:
    """Threshold heuristic over the current frame's kinematics.

    ``next_frame`` is accepted for signature stability but unused: labels
    must not depend on history or lookahead.
    """
    cfg = config
    v, a, steering = frame.ego_velocity, frame.ego_acceleration, frame.ego_steering
    if v < cfg.speed_stopped_max:
        return ActionLabel.STOP if a < -cfg.accel_brake_min else ActionLabel.IDLE
    turning = abs(steering) >= cfg.steering_forward_max
    left = steering > 0
    if a > cfg.accel_gas_min:
        if turning:
            return ActionLabel.GAS_TURN_LEFT if left else ActionLabel.GAS_TURN_RIGHT
        return ActionLabel.GAS
    if a < -cfg.accel_brake_min:
        if turning:
            return ActionLabel.BRAKE_TURN_LEFT if left else ActionLabel.BRAKE_TURN_RIGHT
        return ActionLabel.BRAKE
    if turning:
        return ActionLabel.TURN_LEFT if left else ActionLabel.TURN_RIGHT
    return ActionLabel.GO_STRAIGHT


# -- recorded-route lookahead ---------------------------------------------------


def derive_route_lookahead(
    frames: Sequence[RawFrame],
    feature_map: FeatureMap,
    config: DiscretizerConfig = DEFAULT_CONFIG,
) -> list[str | None]:
    """Per-frame manoeuvre the recorded route takes at the next intersection.

    Traversals of intersection polygons are located along the scene; the
    manoeuvre is classified by the heading change between entering and
    leaving. Frames after the last traversal get None (no imminent
    intersection within the recording).
    """
    inside = [feature_map.intersection_at(f.ego_position) is not None for f in frames]
    traversals: list[tuple[int, int | None, str]] = []
    i = 0
    n = len(frames)
    threshold = math.radians(config.turn_classification_deg)
    while i < n:
        if inside[i] and (i == 0 or not inside[i - 1]):
            entry = i
            j = i
            while j < n and inside[j]:
                j += 1
            exit_idx = j if j < n else None
            before = frames[entry - 1].ego_heading if entry > 0 else frames[entry].ego_heading
            after = frames[exit_idx].ego_heading if exit_idx is not None else frames[-1].ego_heading
            delta = norm_angle(after - before)
            if delta >= threshold:
                manoeuvre = "Left"
            elif delta <= -threshold:
                manoeuvre = "Right"
            else:
                manoeuvre = "Straight"
            traversals.append((entry, exit_idx, manoeuvre))
            i = j
        else:
            i += 1
    lookahead: list[str | None] = []
    for idx in range(n):
        value: str | None = None
        for entry, exit_idx, manoeuvre in traversals:
            if exit_idx is None or idx < exit_idx:
                value = manoeuvre
                break
        lookahead.append(value)
    return lookahead


def discretize_scene(
    scene: RawScene,
    feature_map: FeatureMap,
    config: DiscretizerConfig = DEFAULT_CONFIG,
) -> Trajectory:
    """One step per frame, order preserved, nothing deduplicated."""
    route = derive_route_lookahead(scene.frames, feature_map, config)
    view = SceneMapView(feature_map, {f.t: r for f, r in zip(scene.frames, route)})
    steps = []
    for i, frame in enumerate(scene.frames):
        nxt = scene.frames[i + 1] if i + 1 < len(scene.frames) else None
        steps.append((discretize_state(frame, view, config), label_action(frame, nxt, config)))
    return Trajectory(scene.scene_id, scene.tags, tuple(steps))


# -- RawScene JSON ---------------------------------------------------------------


def raw_scene_to_json_obj(scene: RawScene) -> dict:
    return {
        "scene_id": scene.scene_id,
        "tags": sorted(scene.tags),
        "map_ref": scene.map_ref,
        "frames": [
            {
                "t": f.t,
                "ego_position": list(f.ego_position),
                "ego_heading": f.ego_heading,
                "ego_velocity": f.ego_velocity,
                "ego_acceleration": f.ego_acceleration,
                "ego_steering": f.ego_steering,
                "detections": [
                    {
                        "category": d.category,
                        "position": list(d.position),
                        "visibility": d.visibility,
                        "activity": d.activity,
                    }
                    for d in f.detections
                ],
            }
            for f in scene.frames
        ],
    }


def raw_scene_from_json_obj(obj: Mapping) -> RawScene:
    try:
        frames = tuple(
            RawFrame(
                t=float(f["t"]),
                ego_position=tuple(f["ego_position"]),
                ego_heading=float(f["ego_heading"]),
                ego_velocity=float(f["ego_velocity"]),
                ego_acceleration=float(f["ego_acceleration"]),
                ego_steering=float(f["ego_steering"]),
                detections=tuple(
                    Detection(
                        category=d["category"],
                        position=tuple(d["position"]),
                        visibility=float(d["visibility"]),
                        activity=d.get("activity", "unknown"),
                    )
                    for d in f.get("detections", [])
                ),
            )
            for f in obj["frames"]
        )
        return RawScene(
            scene_id=str(obj["scene_id"]),
            tags=frozenset(obj.get("tags", [])),
            map_ref=str(obj.get("map_ref", "")),
            frames=frames,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed raw scene JSON: {exc}") from exc


def load_raw_scene(path: Path | str) -> RawScene:
    return raw_scene_from_json_obj(json.loads(Path(path).read_text()))
