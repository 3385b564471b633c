"""Seeded synthetic scenes with scripted ego policies and known ground truth.

The world is one composite map with a separate road strip per scenario
template (offset far apart in y so front-area queries never cross strips).
Geometry is axis-aligned and coarse on purpose: every map answer is exactly
computable, which is what makes the generated corpora usable as ground truth
for the solver and metrics.

Each generated scene comes with an event log: every maximal run of frames in
which some registered desire's region held, and whether the scripted policy
fulfilled that desire during the run.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .desires import DesireRegistry, load_builtin_registry
from .discretize import (
    DEFAULT_CONFIG,
    Detection,
    DiscretizerConfig,
    RawFrame,
    RawScene,
    discretize_scene,
)
from .errors import InputError
from .mapdata import (
    DividerFeature,
    FeatureMap,
    LaneFeature,
    PolygonFeature,
    StopAreaFeature,
    TrafficLightFeature,
)

DT = 0.5  # 2 Hz
WHEELBASE = 3.0

TEMPLATES = (
    "cruise",
    "stop_sign",
    "traffic_light",
    "crosswalk_ped",
    "ped_road",
    "cyclist",
    "turn_left",
    "turn_right",
    "lane_change_left",
    "lane_change_right",
)

_STRIP_SPACING = 200.0


@dataclass(frozen=True)
class ScriptedPolicy:
    """Per-situation compliance probabilities; same seed, same corpus."""

    name: str
    p_brake_at_stop: float = 0.95
    p_brake_at_light: float = 0.9
    p_brake_at_ped: float = 0.95
    p_yield_two_wheel: float = 0.9
    seed: int = 0

    def __post_init__(self) -> None:
        for p in (
            self.p_brake_at_stop,
            self.p_brake_at_light,
            self.p_brake_at_ped,
            self.p_yield_two_wheel,
        ):
            if not 0.0 <= p <= 1.0:
                raise InputError(f"policy probability out of range: {p}")


COMPLIANT = ScriptedPolicy(name="compliant")
RECKLESS = ScriptedPolicy(
    name="reckless",
    p_brake_at_stop=0.0,
    p_brake_at_light=0.0,
    p_brake_at_ped=0.0,
    p_yield_two_wheel=0.0,
)

POLICIES = {"compliant": COMPLIANT, "reckless": RECKLESS}


@dataclass(frozen=True)
class WorldConfig:
    template: str = "cruise"

    def __post_init__(self) -> None:
        if self.template not in TEMPLATES:
            raise InputError(f"unknown scenario template {self.template!r}")


@dataclass(frozen=True)
class DesireEvent:
    """One maximal run of frames where a desire's region held."""

    scene_id: str
    desire: str
    start: int
    end: int  # inclusive
    fulfilled: bool
    fulfil_index: int | None


# -- world geometry ------------------------------------------------------------


def _strip_y(template: str) -> float:
    return _STRIP_SPACING * TEMPLATES.index(template)


def _road_features(template: str) -> list:
    """Features for one template strip; ids are prefixed by the template."""
    y0 = _strip_y(template)
    tid = template
    features: list = []
    with_intersection = template in ("stop_sign", "traffic_light", "turn_left", "turn_right")
    one_way = template in ("lane_change_left", "lane_change_right")

    def rect(x0: float, x1: float, ya: float, yb: float) -> tuple:
        return ((x0, ya), (x1, ya), (x1, yb), (x0, yb))

    if with_intersection:
        features.append(
            PolygonFeature(f"{tid}/drivable_main", rect(-40, 260, y0 - 5, y0 + 5))
        )
        features.append(
            PolygonFeature(f"{tid}/drivable_cross", rect(95, 105, y0 - 60, y0 + 60))
        )
        features.append(
            PolygonFeature(f"{tid}/intersection", rect(95, 105, y0 - 5, y0 + 5))
        )
        # main road blocks on both sides of the intersection
        features.append(LaneFeature(f"{tid}/east_a", ((-40, y0 - 1.75), (95, y0 - 1.75)), 3.5))
        features.append(LaneFeature(f"{tid}/east_b", ((105, y0 - 1.75), (260, y0 - 1.75)), 3.5))
        features.append(LaneFeature(f"{tid}/west_a", ((95, y0 + 1.75), (-40, y0 + 1.75)), 3.5))
        features.append(LaneFeature(f"{tid}/west_b", ((260, y0 + 1.75), (105, y0 + 1.75)), 3.5))
        features.append(DividerFeature(f"{tid}/div_a", ((-40, y0), (95, y0))))
        features.append(DividerFeature(f"{tid}/div_b", ((105, y0), (260, y0))))
        # cross-road exit lanes for the turn templates
        features.append(LaneFeature(f"{tid}/north", ((101.75, y0 + 5), (101.75, y0 + 60)), 3.5))
        features.append(LaneFeature(f"{tid}/south", ((98.25, y0 - 5), (98.25, y0 - 60)), 3.5))
    else:
        features.append(PolygonFeature(f"{tid}/drivable_main", rect(-40, 260, y0 - 5, y0 + 5)))
        if one_way:
            features.append(LaneFeature(f"{tid}/east_lo", ((-40, y0 - 1.75), (260, y0 - 1.75)), 3.5))
            features.append(LaneFeature(f"{tid}/east_hi", ((-40, y0 + 1.75), (260, y0 + 1.75)), 3.5))
        else:
            features.append(LaneFeature(f"{tid}/east", ((-40, y0 - 1.75), (260, y0 - 1.75)), 3.5))
            features.append(LaneFeature(f"{tid}/west", ((260, y0 + 1.75), (-40, y0 + 1.75)), 3.5))
        features.append(DividerFeature(f"{tid}/div", ((-40, y0), (260, y0))))

    if template == "stop_sign":
        features.append(
            StopAreaFeature(f"{tid}/stop", rect(89, 94, y0 - 5, y0), "stop")
        )
    if template == "traffic_light":
        features.append(TrafficLightFeature(f"{tid}/light", (97.0, y0 - 4.0), math.pi))
    if template == "crosswalk_ped":
        features.append(PolygonFeature(f"{tid}/crosswalk", rect(58, 62, y0 - 5, y0 + 5)))
    if template == "cruise":
        features.append(PolygonFeature(f"{tid}/carpark", rect(10, 30, y0 - 9, y0 - 5)))
    return features


def build_world() -> FeatureMap:
    lanes, dividers, drivable, carparks = [], [], [], []
    crosswalks, stops, lights, intersections = [], [], [], []
    for template in TEMPLATES:
        for f in _road_features(template):
            if isinstance(f, LaneFeature):
                lanes.append(f)
            elif isinstance(f, DividerFeature):
                dividers.append(f)
            elif isinstance(f, StopAreaFeature):
                stops.append(f)
            elif isinstance(f, TrafficLightFeature):
                lights.append(f)
            elif isinstance(f, PolygonFeature):
                if "drivable" in f.id:
                    drivable.append(f)
                elif "carpark" in f.id:
                    carparks.append(f)
                elif "crosswalk" in f.id:
                    crosswalks.append(f)
                elif "intersection" in f.id:
                    intersections.append(f)
    return FeatureMap(
        lanes, dividers, drivable, carparks, crosswalks, stops, lights, intersections
    )


# -- ego kinematics --------------------------------------------------------------


@dataclass
class _Ego:
    x: float
    y: float
    heading: float
    v: float


def _advance(ego: _Ego, accel: float, steering: float) -> tuple[_Ego, float]:
    """Integrate one 0.5 s step; returns the new state and the acceleration
    actually applied (clamped at standstill)."""
    v_next = max(0.0, ego.v + accel * DT)
    applied = (v_next - ego.v) / DT
    v_avg = 0.5 * (ego.v + v_next)
    yaw = 0.0 if v_avg == 0.0 else (v_avg / WHEELBASE) * math.tan(steering) * DT
    heading_mid = ego.heading + 0.5 * yaw
    return (
        _Ego(
            ego.x + v_avg * DT * math.cos(heading_mid),
            ego.y + v_avg * DT * math.sin(heading_mid),
            ego.heading + yaw,
            v_next,
        ),
        applied,
    )


# -- scripts: one per template -----------------------------------------------------
# Each script is a stateful controller: control(i, ego) -> (accel, steering,
# detections). Scripts only read their own strip's geometry.


class _Script:
    def __init__(self, template: str, policy: ScriptedPolicy, rng: random.Random):
        self.y0 = _strip_y(template)
        self.policy = policy
        self.rng = rng

    def start(self) -> _Ego:
        raise NotImplementedError

    def control(self, i: int, ego: _Ego) -> tuple[float, float, list[Detection]]:
        raise NotImplementedError


class _CruiseScript(_Script):
    def start(self) -> _Ego:
        return _Ego(0.0, self.y0 - 1.75, 0.0, 6.0)

    def control(self, i, ego):
        # gentle speed-holding pulses so Gas/Brake both appear at cruise states
        roll = self.rng.random()
        if ego.v < 5.6:
            accel = 0.8
        elif ego.v > 6.4:
            accel = -0.8
        elif roll < 0.15:
            accel = 0.7
        elif roll < 0.3:
            accel = -0.7
        else:
            accel = 0.0
        return accel, 0.0, []


class _StopAreaScript(_Script):
    """Shared by stop_sign and traffic_light: brake-to-line or run it."""

    def __init__(self, template, policy, rng, p_comply: float):
        super().__init__(template, policy, rng)
        self.comply = rng.random() < p_comply
        self.phase = "cruise"
        self.hold_frames = 0
        self.line_x = 94.0

    def start(self) -> _Ego:
        return _Ego(40.0, self.y0 - 1.75, 0.0, 7.0)

    def control(self, i, ego):
        accel = 0.0
        if self.comply:
            if self.phase == "cruise" and self.line_x - ego.x <= 35.0:
                self.phase = "brake"
            if self.phase == "brake":
                accel = -0.72
                if ego.v <= 1e-9:
                    self.phase = "hold"
            if self.phase == "hold":
                accel = 0.0
                self.hold_frames += 1
                if self.hold_frames > 3:
                    self.phase = "go"
            if self.phase == "go":
                accel = 1.2 if ego.v < 7.0 else 0.0
        return accel, 0.0, []


class _PedScript(_Script):
    """Pedestrian ahead (with or without a crosswalk feature in the strip)."""

    def __init__(self, template, policy, rng):
        super().__init__(template, policy, rng)
        self.comply = rng.random() < policy.p_brake_at_ped
        self.ped_x = 60.0
        self.phase = "cruise"

    def start(self) -> _Ego:
        return _Ego(20.0, self.y0 - 1.75, 0.0, 6.0)

    def _pedestrian(self, i: int) -> list[Detection]:
        y = self.y0 - 3.5 + 0.45 * i
        if y > self.y0 + 5.5:
            return []
        return [Detection("pedestrian_adult", (self.ped_x, y), 0.9, "moving")]

    def control(self, i, ego):
        detections = self._pedestrian(i)
        accel = 0.0
        if self.comply:
            if self.phase == "cruise" and self.ped_x - ego.x <= 18.0:
                self.phase = "brake"
            if self.phase == "brake":
                accel = -1.2
                if ego.v <= 1e-9:
                    self.phase = "hold"
            if self.phase == "hold":
                accel = 0.0
                if not detections:
                    self.phase = "go"
            if self.phase == "go":
                accel = 1.0 if ego.v < 6.0 else 0.0
        return accel, 0.0, detections


class _CyclistScript(_Script):
    def __init__(self, template, policy, rng):
        super().__init__(template, policy, rng)
        self.comply = rng.random() < policy.p_yield_two_wheel
        self.cyclist_x = 75.0
        self.cyclist_v = 4.5
        self.reacting = False

    def start(self) -> _Ego:
        return _Ego(20.0, self.y0 - 1.75, 0.0, 9.5)

    def control(self, i, ego):
        cyclist_pos = self.cyclist_x + self.cyclist_v * DT * i
        detections = [Detection("bicycle", (cyclist_pos, self.y0 - 1.75), 0.9, "with_rider")]
        gap = cyclist_pos - ego.x
        accel = 0.0
        # reaction point inside the 15 m front area so high-speed frames with
        # the cyclist visible exist before any deceleration
        if gap <= 13.0:
            self.reacting = True
        if self.reacting:
            if self.comply:
                accel = -2.0 if ego.v > self.cyclist_v else 0.0
            else:
                accel = 0.8 if ego.v < 12.0 else 0.0
        return accel, 0.0, detections


class _TurnScript(_Script):
    def __init__(self, template, policy, rng, left: bool):
        super().__init__(template, policy, rng)
        self.left = left
        self.target = math.pi / 2 if left else -math.pi / 2

    def start(self) -> _Ego:
        return _Ego(55.0, self.y0 - 1.75, 0.0, 5.0)

    def control(self, i, ego):
        sign = 1.0 if self.left else -1.0
        done = (ego.heading >= self.target) if self.left else (ego.heading <= self.target)
        if done:
            steering = 0.0
        elif ego.x >= 95.0:
            steering = sign * 0.5
        elif ego.x >= 92.0:
            steering = sign * 0.12
        else:
            steering = 0.0
        return 0.0, steering, []


class _LaneChangeScript(_Script):
    def __init__(self, template, policy, rng, left: bool):
        super().__init__(template, policy, rng)
        self.left = left
        self.sign = 1.0 if left else -1.0
        self.phase = "before"

    def start(self) -> _Ego:
        y = self.y0 - 1.75 if self.left else self.y0 + 1.75
        return _Ego(10.0, y, 0.0, 6.0)

    def control(self, i, ego):
        target_y = self.y0 + 1.75 * self.sign
        offset = (target_y - ego.y) * self.sign  # > 0 until the target lane
        steering = 0.0
        if self.phase == "before" and ego.x >= 50.0:
            self.phase = "out"
        if self.phase == "out":
            steering = self.sign * 0.12
            if offset <= 1.2:
                self.phase = "back"
        if self.phase == "back":
            steering = -self.sign * 0.12
            if (ego.heading * self.sign) <= 0.02:
                self.phase = "done"
        if self.phase == "done":
            steering = -ego.heading  # tiny correction, below the turn threshold
        return 0.0, steering, []


def _make_script(template: str, policy: ScriptedPolicy, rng: random.Random) -> _Script:
    if template == "cruise":
        return _CruiseScript(template, policy, rng)
    if template == "stop_sign":
        return _StopAreaScript(template, policy, rng, policy.p_brake_at_stop)
    if template == "traffic_light":
        return _StopAreaScript(template, policy, rng, policy.p_brake_at_light)
    if template in ("crosswalk_ped", "ped_road"):
        return _PedScript(template, policy, rng)
    if template == "cyclist":
        return _CyclistScript(template, policy, rng)
    if template == "turn_left":
        return _TurnScript(template, policy, rng, left=True)
    if template == "turn_right":
        return _TurnScript(template, policy, rng, left=False)
    if template == "lane_change_left":
        return _LaneChangeScript(template, policy, rng, left=True)
    if template == "lane_change_right":
        return _LaneChangeScript(template, policy, rng, left=False)
    raise InputError(f"unknown scenario template {template!r}")


# -- scene generation ----------------------------------------------------------


_WORLD: FeatureMap | None = None
_REGISTRY: DesireRegistry | None = None


def world_map() -> FeatureMap:
    global _WORLD
    if _WORLD is None:
        _WORLD = build_world()
    return _WORLD


def _default_registry() -> DesireRegistry:
    global _REGISTRY
    if _REGISTRY is None:
        _REGISTRY = load_builtin_registry()
    return _REGISTRY


def generate_scene(
    world_config: WorldConfig,
    policy: ScriptedPolicy,
    n_frames: int = 40,
    seed: int = 0,
    scene_id: str | None = None,
    registry: DesireRegistry | None = None,
    config: DiscretizerConfig = DEFAULT_CONFIG,
    map_ref: str = "map.json",
) -> tuple[RawScene, list[DesireEvent]]:
    """Kinematically consistent frames at 2 Hz plus the desire event log."""
    if n_frames < 1:
        raise InputError("n_frames must be >= 1")
    template = world_config.template
    # process-independent seed: tuple seeding would go through salted hash()
    digest = hashlib.sha256(f"{policy.seed}/{seed}/{template}".encode()).digest()
    rng = random.Random(int.from_bytes(digest[:8], "big"))
    script = _make_script(template, policy, rng)
    ego = script.start()
    frames = []
    for i in range(n_frames):
        accel, steering, detections = script.control(i, ego)
        ego_next, applied = _advance(ego, accel, steering)
        frames.append(
            RawFrame(
                t=round(i * DT, 3),
                ego_position=(round(ego.x, 3), round(ego.y, 3)),
                ego_heading=round(ego.heading, 6),
                ego_velocity=round(ego.v, 3),
                ego_acceleration=round(applied, 3),
                ego_steering=round(steering, 3),
                detections=tuple(detections),
            )
        )
        ego = ego_next
    scene = RawScene(
        scene_id=scene_id or f"synth-{template}-{seed:05d}",
        tags=frozenset({template, policy.name}),
        map_ref=map_ref,
        frames=tuple(frames),
    )
    events = ground_truth_events(scene, registry or _default_registry(), config)
    return scene, events


def ground_truth_events(
    scene: RawScene,
    registry: DesireRegistry,
    config: DiscretizerConfig = DEFAULT_CONFIG,
) -> list[DesireEvent]:
    """Recompute the event log from the emitted frames (not from the script),
    so it reflects exactly what the discretiser will see."""
    trajectory = discretize_scene(scene, world_map(), config)
    events = []
    for desire in registry:
        run_start: int | None = None
        fulfil_index: int | None = None
        for i, (state, action) in enumerate(trajectory.steps):
            if desire.in_region(state):
                if run_start is None:
                    run_start = i
                    fulfil_index = None
                if fulfil_index is None and action in desire.actions:
                    fulfil_index = i
            elif run_start is not None:
                events.append(
                    DesireEvent(
                        scene.scene_id, desire.name, run_start, i - 1,
                        fulfil_index is not None, fulfil_index,
                    )
                )
                run_start = None
        if run_start is not None:
            events.append(
                DesireEvent(
                    scene.scene_id, desire.name, run_start, len(trajectory.steps) - 1,
                    fulfil_index is not None, fulfil_index,
                )
            )
    return events


DEFAULT_MIX: tuple[tuple[str, int], ...] = tuple((t, 1) for t in TEMPLATES)
STOP_SIGN_MIX: tuple[tuple[str, int], ...] = (("stop_sign", 7), ("cruise", 3))


def generate_corpus(
    policy: ScriptedPolicy,
    n_scenes: int,
    seed: int = 0,
    mix: Sequence[tuple[str, int]] = DEFAULT_MIX,
    n_frames: int = 40,
    registry: DesireRegistry | None = None,
    map_ref: str = "map.json",
) -> tuple[list[RawScene], list[DesireEvent]]:
    """Deterministic corpus: templates cycle according to integer mix weights."""
    schedule: list[str] = []
    for template, weight in mix:
        schedule.extend([template] * weight)
    if not schedule:
        raise InputError("corpus mix is empty")
    registry = registry or _default_registry()
    scenes: list[RawScene] = []
    events: list[DesireEvent] = []
    for i in range(n_scenes):
        template = schedule[i % len(schedule)]
        scene, scene_events = generate_scene(
            WorldConfig(template), policy,
            n_frames=n_frames, seed=seed + i,
            scene_id=f"synth-{policy.name}-{i:05d}",
            registry=registry,
            map_ref=map_ref,
        )
        scenes.append(scene)
        events.extend(scene_events)
    return scenes, events


def events_to_jsonl(events: Iterable[DesireEvent]) -> str:
    lines = []
    for e in events:
        lines.append(
            json.dumps(
                {
                    "scene_id": e.scene_id,
                    "desire": e.desire,
                    "start": e.start,
                    "end": e.end,
                    "fulfilled": e.fulfilled,
                    "fulfil_index": e.fulfil_index,
                },
                separators=(",", ":"),
            )
        )
    return "\n".join(lines) + ("\n" if lines else "")
