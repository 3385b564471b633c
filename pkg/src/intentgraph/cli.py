"""Command-line pipeline: scenes -> trajectories -> graph -> intentions ->
metrics / comparisons / question answering / traces / synthetic corpora.

Every subcommand validates its inputs and exits nonzero with one
machine-parseable line on stderr: ``error[CODE] message``.
"""

from __future__ import annotations

import functools
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import click

from . import qa
from .desires import DesireRegistry, load_builtin_registry, load_registry
from .discretize import (
    DEFAULT_CONFIG,
    DiscretizerConfig,
    discretize_scene,
    load_raw_scene,
)
from .errors import (
    InputError,
    IntentGraphError,
    UnknownSceneError,
)
from .graph import (
    PolicyGraph,
    Trajectory,
    build_policy_graph,
    read_trajectories,
    write_trajectories,
)
from .intention import IntentionTable, compute_intention_table
from .mapdata import FeatureMap
from .metrics import cohort_metrics, metrics_report, rows_to_csv, rows_to_json
from .synthworld import (
    DEFAULT_MIX,
    POLICIES,
    STOP_SIGN_MIX,
    WorldConfig,
    events_to_jsonl,
    generate_corpus,
    world_map,
)
from .vocab import ActionLabel, DiscreteState


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fp:
            fp.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fail(code: str, message: str) -> None:
    click.echo(f"error[{code}] {message}", err=True)
    sys.exit(1)


def _guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except IntentGraphError as exc:
            _fail(exc.code, str(exc))
        except FileNotFoundError as exc:
            _fail("IO_ERROR", str(exc))

    return wrapper


def _load_graph(path: str) -> PolicyGraph:
    return PolicyGraph.from_json(Path(path).read_text())


def _load_table(path: str) -> IntentionTable:
    return IntentionTable.from_json(Path(path).read_text())


def _load_registry(path: str | None) -> DesireRegistry:
    return load_registry(path) if path else load_builtin_registry()


def _load_trajectories(path: str) -> list[Trajectory]:
    with open(path) as fp:
        return read_trajectories(fp)


def _resolve_state(
    state_arg: str, traj_path: str | None
) -> DiscreteState:
    """Inline predicate JSON, or ``scene:step`` resolved via the trajectory file."""
    state_arg = state_arg.strip()
    if state_arg.startswith("{"):
        try:
            return DiscreteState.from_mapping(json.loads(state_arg))
        except json.JSONDecodeError as exc:
            raise InputError(f"--state is not valid JSON: {exc}") from exc
    if ":" not in state_arg:
        raise InputError("--state must be inline JSON or scene:step")
    scene_id, _, step_str = state_arg.rpartition(":")
    try:
        step = int(step_str)
    except ValueError:
        raise InputError(f"step index is not an integer: {step_str!r}") from None
    if not traj_path:
        raise InputError("scene:step addressing needs --traj")
    for traj in _load_trajectories(traj_path):
        if traj.scene_id == scene_id:
            if not 0 <= step < len(traj.steps):
                raise InputError(
                    f"step {step} out of range for scene {scene_id} "
                    f"({len(traj.steps)} steps)"
                )
            return traj.steps[step][0]
    raise UnknownSceneError(f"scene not found in trajectory file: {scene_id}")


@click.group()
def main() -> None:
    """Build and query intention-aware policy graphs."""


@main.command()
@click.option("--scenes", "scenes_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--map", "map_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Shared map file; default is each scene's map_ref.")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--out", "out_path", required=True, type=click.Path())
@_guarded
def discretize(scenes_dir, map_path, config_path, out_path):
    """Discretise raw scene JSON files into a trajectory JSONL file."""
    config = DiscretizerConfig.from_file(config_path) if config_path else DEFAULT_CONFIG
    scene_files = sorted(Path(scenes_dir).glob("*.json"))
    if not scene_files:
        _fail("BAD_INPUT", f"no scene files (*.json) in {scenes_dir}")
    maps: dict[Path, FeatureMap] = {}
    trajectories = []
    for scene_file in scene_files:
        scene = load_raw_scene(scene_file)
        resolved = Path(map_path) if map_path else (scene_file.parent / scene.map_ref).resolve()
        if resolved not in maps:
            maps[resolved] = FeatureMap.from_file(resolved)
        trajectories.append(discretize_scene(scene, maps[resolved], config))
    import io

    buf = io.StringIO()
    write_trajectories(trajectories, buf)
    _atomic_write(Path(out_path), buf.getvalue())
    click.echo(f"discretised {len(trajectories)} scenes -> {out_path}")


@main.command()
@click.option("--traj", "traj_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--filter-tag", "filter_tag", default=None, help="Keep only scenes carrying this tag.")
@click.option("--out", "out_path", required=True, type=click.Path())
@_guarded
def build(traj_path, filter_tag, out_path):
    """Build a policy graph from a trajectory JSONL file."""
    trajectories = _load_trajectories(traj_path)
    if filter_tag:
        trajectories = [t for t in trajectories if filter_tag in t.tags]
    graph = build_policy_graph(trajectories)
    _atomic_write(Path(out_path), graph.to_json())
    click.echo(
        f"built graph: {len(graph.node_counts)} states, "
        f"{len(graph.edge_counts)} edges, {graph.total_visits()} visits"
    )


@main.command()
@click.option("--pg", "pg_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--desires", "desires_dir", type=click.Path(exists=True, file_okay=False), default=None)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--tol", default=1e-9, show_default=True)
@click.option("--max-iter", default=100_000, show_default=True)
@_guarded
def intents(pg_path, desires_dir, out_path, tol, max_iter):
    """Compute the intention table for every desire plus the any-aggregates."""
    graph = _load_graph(pg_path)
    registry = _load_registry(desires_dir)
    table = compute_intention_table(graph, registry, tol=tol, max_iter=max_iter)
    _atomic_write(Path(out_path), table.to_json())
    for name in sorted(table.stats):
        s = table.stats[name]
        click.echo(f"{name}: converged in {s.iterations} iterations (residual {s.residual:.3e})")


@main.command()
@click.option("--pg", "pg_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--intents", "intents_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--C", "threshold", default=0.5, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@_guarded
def metrics(pg_path, intents_path, threshold, out_path, fmt):
    """Attributed / expected intention per desire (plus any-aggregates)."""
    graph = _load_graph(pg_path)
    table = _load_table(intents_path)
    rows = metrics_report(graph, table, threshold)
    text = rows_to_csv(rows) if fmt == "csv" else rows_to_json(rows)
    _atomic_write(Path(out_path), text)
    click.echo(f"wrote {len(rows)} metric rows -> {out_path}")


@main.command()
@click.option("--traj", "traj_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--split-by", "split_by", required=True,
              help="tag:<t1>,<t2>,... builds tag / no-tag cohort pairs per listed tag.")
@click.option("--desires", "desires_dir", type=click.Path(exists=True, file_okay=False), default=None)
@click.option("--C", "threshold", default=0.5, show_default=True)
@click.option("--out", "out_path", type=click.Path(), default=None)
@_guarded
def compare(traj_path, split_by, desires_dir, threshold, out_path):
    """Tag-conditioned cohort comparison (one graph per cohort)."""
    if not split_by.startswith("tag:"):
        _fail("BAD_INPUT", "--split-by must look like tag:night,rain")
    tags = [t for t in split_by[len("tag:"):].split(",") if t]
    if not tags:
        _fail("BAD_INPUT", "--split-by lists no tags")
    trajectories = _load_trajectories(traj_path)
    registry = _load_registry(desires_dir)
    rows = []
    for tag in tags:
        rows.extend(
            cohort_metrics(
                trajectories,
                lambda t, tag=tag: tag if tag in t.tags else f"no-{tag}",
                registry,
                threshold,
                cohorts=[tag, f"no-{tag}"],
            )
        )
    text = rows_to_csv(rows)
    if out_path:
        _atomic_write(Path(out_path), text)
        click.echo(f"wrote {len(rows)} rows -> {out_path}")
    else:
        click.echo(text, nl=False)


@main.command()
@click.argument("question", type=click.Choice(["what", "why", "how"]))
@click.option("--pg", "pg_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--intents", "intents_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--desires", "desires_dir", type=click.Path(exists=True, file_okay=False), default=None)
@click.option("--state", "state_arg", required=True,
              help="Inline predicate JSON or scene:step (with --traj).")
@click.option("--traj", "traj_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--action", "action_name", default=None)
@click.option("--desire", "desire_name", default=None)
@click.option("--C", "threshold", default=0.5, show_default=True)
@click.option("--max-len", default=20, show_default=True)
@click.option("--suggest-nearest", is_flag=True,
              help="On unknown states, suggest the Hamming-nearest observed state.")
@click.option("--json", "as_json", is_flag=True, help="Structured JSON output.")
@_guarded
def ask(question, pg_path, intents_path, desires_dir, state_arg, traj_path,
        action_name, desire_name, threshold, max_len, suggest_nearest, as_json):
    """Answer a telic question (what / why / how) at a state."""
    graph = _load_graph(pg_path)
    table = _load_table(intents_path)
    registry = _load_registry(desires_dir)
    state = _resolve_state(state_arg, traj_path)

    if state not in graph.node_counts and suggest_nearest:
        nearest = min(graph.states, key=lambda s: (state.hamming(s), s.values))
        click.echo(
            "note: state never observed; nearest observed state "
            f"(Hamming {state.hamming(nearest)}): {json.dumps(nearest.to_mapping())}",
            err=True,
        )

    if question == "what":
        answers = qa.ask_what(table, state, threshold)
        if as_json:
            click.echo(json.dumps([{"desire": n, "intention": v} for n, v in answers]))
        else:
            for name, value in answers:
                click.echo(f"{name}\t{value:.4f}")
            click.echo(qa.render_what(answers))
    elif question == "why":
        if not action_name:
            _fail("BAD_INPUT", "ask why needs --action")
        action = ActionLabel.parse(action_name)
        answers = qa.ask_why(graph, table, registry, state, action, threshold)
        if as_json:
            click.echo(
                json.dumps(
                    [
                        {
                            "desire": a.desire,
                            "tier": a.tier,
                            "probability_of_increase": a.probability_of_increase,
                            "conditional_increase": a.conditional_increase,
                            "fulfils": a.fulfils,
                        }
                        for a in answers
                    ]
                )
            )
        else:
            click.echo(qa.render_why(answers, table, state, action, threshold))
    else:
        if not desire_name:
            _fail("BAD_INPUT", "ask how needs --desire")
        desire = registry.get(desire_name)
        plan = qa.ask_how(graph, table, desire, state, max_len=max_len)
        if as_json:
            if plan is None:
                click.echo(json.dumps({"plan": None}))
            else:
                click.echo(
                    json.dumps(
                        {
                            "plan": [
                                {
                                    "action": s.action.value,
                                    "removed": sorted(map(list, s.removed)),
                                    "added": sorted(map(list, s.added)),
                                    "intention_after": s.intention_after,
                                    "fulfils": s.fulfils,
                                }
                                for s in plan
                            ]
                        }
                    )
                )
        else:
            click.echo(qa.render_plan(plan))


@main.command()
@click.option("--scene", "scene_id", required=True)
@click.option("--traj", "traj_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--intents", "intents_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--desires", "desires_dir", type=click.Path(exists=True, file_okay=False), default=None)
@click.option("--min-peak", default=0.2, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@_guarded
def evolve(scene_id, traj_path, intents_path, desires_dir, min_peak, out_path):
    """Per-step intention trace for one scene (plot-ready CSV)."""
    table = _load_table(intents_path)
    registry = _load_registry(desires_dir)
    scene = next(
        (t for t in _load_trajectories(traj_path) if t.scene_id == scene_id), None
    )
    if scene is None:
        _fail("UNKNOWN_SCENE", f"scene not found in trajectory file: {scene_id}")
    kept, steps = qa.intention_trace(scene, table, registry, min_peak=min_peak)
    lines = [",".join(["step", "action", "fulfils"] + kept)]
    for step in steps:
        cells = [str(step.index), step.action.value, ";".join(sorted(step.fulfilled))]
        cells += [format(step.intentions[name], ".12g") for name in kept]
        lines.append(",".join(cells))
    _atomic_write(Path(out_path), "\n".join(lines) + "\n")
    click.echo(f"wrote trace for {scene_id} ({len(kept)} desires) -> {out_path}")


@main.command()
@click.option("--policy", "policy_name", type=click.Choice(sorted(POLICIES)), required=True)
@click.option("--scenes", "n_scenes", type=int, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--frames", type=int, default=40, show_default=True)
@click.option("--mix", type=click.Choice(["full", "stop"]), default="full", show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
@_guarded
def synth(policy_name, n_scenes, seed, frames, mix, out_dir):
    """Generate a seeded synthetic corpus (scenes, map, ground-truth events)."""
    if n_scenes < 1:
        _fail("BAD_INPUT", "--scenes must be >= 1")
    policy = POLICIES[policy_name]
    scenes, events = generate_corpus(
        policy, n_scenes, seed=seed,
        mix=DEFAULT_MIX if mix == "full" else STOP_SIGN_MIX,
        n_frames=frames,
        map_ref="../map.json",
    )
    out = Path(out_dir)
    _atomic_write(out / "map.json", world_map().to_json())
    from .discretize import raw_scene_to_json_obj

    for scene in scenes:
        _atomic_write(
            out / "scenes" / f"{scene.scene_id}.json",
            json.dumps(raw_scene_to_json_obj(scene), separators=(",", ":")),
        )
    _atomic_write(out / "events.jsonl", events_to_jsonl(events))
    click.echo(f"generated {len(scenes)} scenes -> {out_dir}")


if __name__ == "__main__":
    main()
