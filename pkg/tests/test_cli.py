"""CLI contracts: pipeline composability, formats and error codes."""

import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from intentgraph.cli import main
from intentgraph.intention import compute_intentions

from conftest import G1_I_S2


@pytest.fixture()
def runner():
    return CliRunner()


def run_ok(runner, args):
    result = runner.invoke(main, args, catch_exceptions=False)
    assert result.exit_code == 0, result.output + (result.stderr or "")
    return result


@pytest.fixture(scope="module")
def pipeline_dir(tmp_path_factory):
    """synth -> discretize -> build -> intents -> metrics, kept for reuse."""
    root = tmp_path_factory.mktemp("pipeline")
    runner = CliRunner()
    run = lambda args: runner.invoke(main, args, catch_exceptions=False)
    assert run(
        ["synth", "--policy", "compliant", "--scenes", "10", "--seed", "3",
         "--out", str(root / "corpus")]
    ).exit_code == 0
    assert run(
        ["discretize", "--scenes", str(root / "corpus" / "scenes"),
         "--out", str(root / "traj.jsonl")]
    ).exit_code == 0
    assert run(
        ["build", "--traj", str(root / "traj.jsonl"), "--out", str(root / "pg.json")]
    ).exit_code == 0
    assert run(
        ["intents", "--pg", str(root / "pg.json"), "--out", str(root / "intents.json")]
    ).exit_code == 0
    assert run(
        ["metrics", "--pg", str(root / "pg.json"), "--intents", str(root / "intents.json"),
         "--C", "0.5", "--out", str(root / "metrics.csv")]
    ).exit_code == 0
    return root


def test_pipeline_outputs_exist_and_parse(pipeline_dir):
    assert (pipeline_dir / "corpus" / "map.json").exists()
    assert (pipeline_dir / "corpus" / "events.jsonl").exists()
    graph = json.loads((pipeline_dir / "pg.json").read_text())
    assert graph["nodes"] and graph["edges"]
    table = json.loads((pipeline_dir / "intents.json").read_text())
    assert table["rows"]


def test_metrics_csv_header_contract(pipeline_dir):
    lines = (pipeline_dir / "metrics.csv").read_text().splitlines()
    assert lines[0] == "cohort,desire,kind,C,attributed,expected,n_states_attributed,visitation_mass"
    # per-desire rows plus the three aggregates
    assert len(lines) == 1 + 13 + 3


def test_compare_splits_by_tag(pipeline_dir, runner):
    result = run_ok(
        runner,
        ["compare", "--traj", str(pipeline_dir / "traj.jsonl"),
         "--split-by", "tag:stop_sign", "--C", "0.5"],
    )
    lines = result.output.splitlines()
    cohorts = {line.split(",")[0] for line in lines[1:] if line}
    assert cohorts == {"stop_sign", "no-stop_sign"}


def test_build_empty_trajectories_error_code(runner, tmp_path):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    result = runner.invoke(
        main, ["build", "--traj", str(empty), "--out", str(tmp_path / "pg.json")]
    )
    assert result.exit_code != 0
    assert "error[NO_OBSERVATIONS]" in result.stderr


def test_evolve_trace_and_unknown_scene(pipeline_dir, runner, tmp_path):
    out = tmp_path / "trace.csv"
    run_ok(
        runner,
        ["evolve", "--scene", "synth-compliant-00000",
         "--traj", str(pipeline_dir / "traj.jsonl"),
         "--intents", str(pipeline_dir / "intents.json"),
         "--min-peak", "0.2", "--out", str(out)],
    )
    header = out.read_text().splitlines()[0]
    assert header.startswith("step,action,fulfils")
    result = runner.invoke(
        main,
        ["evolve", "--scene", "nope", "--traj", str(pipeline_dir / "traj.jsonl"),
         "--intents", str(pipeline_dir / "intents.json"), "--out", str(out)],
    )
    assert result.exit_code != 0
    assert "error[UNKNOWN_SCENE]" in result.stderr


@pytest.fixture(scope="module")
def g1_files(tmp_path_factory):
    import conftest
    from intentgraph.desires import DesireSpec, PredicateClause
    from intentgraph.graph import PolicyGraph
    from intentgraph.vocab import ActionLabel

    root = tmp_path_factory.mktemp("g1")
    s0 = conftest.make_state(Velocity="Slow")
    s1 = conftest.make_state(Velocity="High")
    s2 = conftest.make_state(Velocity="Medium")
    go, gas, brake = ActionLabel.GO_STRAIGHT, ActionLabel.GAS, ActionLabel.BRAKE
    graph = PolicyGraph(
        {s0: 2, s1: 1, s2: 1},
        {(s0, go): 2, (s1, go): 1, (s2, brake): 8, (s2, gas): 2},
        {(s0, go, s1): 1, (s0, go, s2): 1, (s1, go, s1): 1, (s2, gas, s0): 2},
    )
    desire = DesireSpec(
        "d", "safe",
        (PredicateClause("Velocity", frozenset({"Medium"})),),
        frozenset({brake}),
    )
    (root / "pg.json").write_text(graph.to_json())
    (root / "intents.json").write_text(compute_intentions(graph, desire, kind="safe").to_json())
    (root / "desires").mkdir()
    (root / "desires" / "d.yaml").write_text(
        "name: d\nkind: safe\nclauses:\n"
        "  - predicate: Velocity\n    values: [Medium]\n"
        "actions:\n  values: [Brake]\n"
    )
    return root, s0, s2


def test_ask_what_on_toy_graph(g1_files, runner):
    root, s0, s2 = g1_files
    result = run_ok(
        runner,
        ["ask", "what", "--pg", str(root / "pg.json"),
         "--intents", str(root / "intents.json"),
         "--desires", str(root / "desires"),
         "--state", json.dumps(s2.to_mapping()), "--C", "0.5", "--json"],
    )
    rows = json.loads(result.output)
    assert rows[0]["desire"] == "d"
    assert rows[0]["intention"] == pytest.approx(G1_I_S2, abs=1e-8)


def test_ask_why_and_how_on_toy_graph(g1_files, runner):
    root, s0, s2 = g1_files
    why = run_ok(
        runner,
        ["ask", "why", "--pg", str(root / "pg.json"),
         "--intents", str(root / "intents.json"),
         "--desires", str(root / "desires"),
         "--state", json.dumps(s0.to_mapping()), "--action", "GoStraight", "--json"],
    )
    answers = json.loads(why.output)
    assert answers[0]["tier"] == "probabilistic_increase"
    assert answers[0]["probability_of_increase"] == pytest.approx(0.5)
    how = run_ok(
        runner,
        ["ask", "how", "--pg", str(root / "pg.json"),
         "--intents", str(root / "intents.json"),
         "--desires", str(root / "desires"),
         "--state", json.dumps(s0.to_mapping()), "--desire", "d", "--json"],
    )
    plan = json.loads(how.output)["plan"]
    assert [step["action"] for step in plan] == ["GoStraight", "Brake"]
    assert plan[-1]["fulfils"]


def test_ask_scene_step_addressing(pipeline_dir, runner):
    result = run_ok(
        runner,
        ["ask", "what", "--pg", str(pipeline_dir / "pg.json"),
         "--intents", str(pipeline_dir / "intents.json"),
         "--traj", str(pipeline_dir / "traj.jsonl"),
         "--state", "synth-compliant-00000:0", "--C", "0.1", "--json"],
    )
    assert json.loads(result.output)


def test_ask_unknown_state_suggests_nearest(g1_files, runner):
    root, s0, s2 = g1_files
    unknown = dict(s2.to_mapping())
    unknown["Velocity"] = "Stopped"
    result = runner.invoke(
        main,
        ["ask", "what", "--pg", str(root / "pg.json"),
         "--intents", str(root / "intents.json"),
         "--state", json.dumps(unknown), "--suggest-nearest"],
        catch_exceptions=False,
    )
    assert result.exit_code != 0
    assert "error[STATE_NOT_OBSERVED]" in result.stderr
    assert "nearest observed state" in result.stderr


def test_ask_why_requires_action(g1_files, runner):
    root, s0, s2 = g1_files
    result = runner.invoke(
        main,
        ["ask", "why", "--pg", str(root / "pg.json"),
         "--intents", str(root / "intents.json"),
         "--state", json.dumps(s0.to_mapping())],
    )
    assert result.exit_code != 0
    assert "error[BAD_INPUT]" in result.stderr


def test_bad_split_by_flag(pipeline_dir, runner):
    result = runner.invoke(
        main,
        ["compare", "--traj", str(pipeline_dir / "traj.jsonl"), "--split-by", "weather"],
    )
    assert result.exit_code != 0
    assert "error[BAD_INPUT]" in result.stderr
