import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from conftest import random_connected_graph
from linbandits.cli import SUMMARY_COLUMNS, TRACE_COLUMNS, main
from linbandits.config import dump_config, load_config, plan_from_document, validate_text
from linbandits.core import SpanningTrees
from linbandits.environments import PAPER_MEANS
from linbandits.errors import ConfigurationError
from linbandits.oracles import enumerate_brute_force

# (8 / 0.25 + 1 + pi^2 / 3) * 0.5, evaluated at 30 digits with mpmath
BOUND_EXAMPLE = 18.1449340668482264364724151666

Q7M4_CONFIG = {
    "instance": "q7m4",
    "policies": [{"kind": "LLR"}, {"kind": "NaiveUCB1"}],
    "horizon": 100000,
    "runs": 5,
    "seed": 0,
}


def write_json(path: Path, doc) -> Path:
    path.write_text(json.dumps(doc, indent=2) + "\n")
    return path


def read_dir(path: Path) -> dict:
    return {p.name: p.read_bytes() for p in sorted(path.iterdir())}


# --- run --------------------------------------------------------------------

def test_run_writes_one_trace_per_policy_and_run(tmp_path, capsys):
    cfg = write_json(tmp_path / "q7m4.json", Q7M4_CONFIG)
    out = tmp_path / "out"
    assert main(["run", "--config", str(cfg), "--horizon", "100000", "--runs", "5",
                 "--output", str(out)]) == 0
    names = sorted(p.name for p in out.iterdir())
    traces = [n for n in names if n.startswith("trace_")]
    assert len(traces) == 10
    assert "summary.csv" in names and "manifest.json" in names
    printed = capsys.readouterr().out
    assert "LLR" in printed and "NaiveUCB1" in printed

    lines = (out / traces[0]).read_text().splitlines()
    assert tuple(lines[0].split(",")) == TRACE_COLUMNS
    period, cum, norm, policy, run = lines[-1].split(",")
    assert int(period) == 100000 and policy == "LLR" and run == "0"
    assert float(norm) == pytest.approx(float(cum) / math.log(100000), rel=1e-12)
    summary = (out / "summary.csv").read_text().splitlines()
    assert tuple(summary[0].split(",")) == SUMMARY_COLUMNS
    assert summary[1].split(",")[:3] == ["LLR", "q7m4", "2"]


def test_same_seed_gives_byte_identical_outputs(tmp_path):
    cfg = write_json(tmp_path / "c.json", {**Q7M4_CONFIG, "horizon": 20000, "runs": 2,
                                           "output_dir": str(tmp_path / "out")})
    assert main(["run", "--config", str(cfg), "--seed", "7"]) == 0
    first = read_dir(tmp_path / "out")
    assert main(["run", "--config", str(cfg), "--seed", "7"]) == 0
    assert read_dir(tmp_path / "out") == first
    manifest = json.loads(first["manifest.json"])
    assert manifest["master_seed"] == 7
    assert "time" not in json.dumps(manifest).lower()


def test_parallel_flag_does_not_change_outputs(tmp_path):
    cfg = write_json(tmp_path / "c.json", {**Q7M4_CONFIG, "horizon": 5000, "runs": 2})
    main(["run", "--config", str(cfg), "--output", str(tmp_path / "a")])
    main(["run", "--config", str(cfg), "--output", str(tmp_path / "b"), "--parallel", "true"])
    a, b = read_dir(tmp_path / "a"), read_dir(tmp_path / "b")
    a.pop("manifest.json"), b.pop("manifest.json")
    assert a == b


def test_missing_horizon_is_a_config_error(tmp_path, capsys):
    doc = dict(Q7M4_CONFIG)
    del doc["horizon"]
    cfg = write_json(tmp_path / "c.json", doc)
    assert main(["run", "--config", str(cfg)]) == 2
    assert "horizon" in capsys.readouterr().err


def test_unknown_key_is_rejected_with_its_line(tmp_path, capsys):
    text = json.dumps(Q7M4_CONFIG, indent=2).replace('"runs"', '"repeats"')
    cfg = tmp_path / "c.json"
    cfg.write_text(text)
    assert main(["run", "--config", str(cfg)]) == 2
    err = capsys.readouterr().err
    line = next(k for k, l in enumerate(text.splitlines(), start=1) if '"repeats"' in l)
    assert f"c.json:{line}:" in err and "repeats" in err


def test_bad_policy_parameter_points_at_its_line(tmp_path, capsys):
    doc = {**Q7M4_CONFIG, "policies": [{"kind": "LLR"}, {"kind": "LLR_K", "K": 0}]}
    text = json.dumps(doc, indent=2)
    (tmp_path / "c.json").write_text(text)
    assert main(["run", "--config", str(tmp_path / "c.json")]) == 2
    err = capsys.readouterr().err
    line = next(k for k, l in enumerate(text.splitlines(), start=1) if '"K"' in l)
    assert f":{line}:" in err


def test_invalid_json_reports_line(tmp_path, capsys):
    (tmp_path / "c.json").write_text('{\n  "instance": "q7m4",\n  "horizon": ,\n}\n')
    assert main(["run", "--config", str(tmp_path / "c.json")]) == 2
    assert "c.json:3:" in capsys.readouterr().err


def test_runtime_failure_exits_with_one(tmp_path, capsys):
    # a feasible set with no spanning tree fails when the ground truth is computed
    doc = {"instance": {"environment": {"bernoulli": [0.5, 0.5]},
                        "action_set": {"type": "trees", "n_nodes": 4, "edges": [[0, 1], [2, 3]]}},
           "policies": [{"kind": "LLC"}], "horizon": 50, "runs": 1}
    cfg = write_json(tmp_path / "c.json", doc)
    assert main(["run", "--config", str(cfg), "--output", str(tmp_path / "o")]) == 1
    assert "error" in capsys.readouterr().err


def test_usage_error_exits_with_two(capsys):
    assert main(["run"]) == 2
    assert main(["frobnicate"]) == 2


def test_console_script_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "linbandits.cli", "bounds", "--N", "1", "--L",
                          "1", "--delta-min", "0.5", "--delta-max", "0.5", "--n", "1"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.splitlines()[0] == "n,theorem2"


# --- bounds ----------------------------------------------------------------------

def bounds_rows(capsys, *args):
    assert main(["bounds", *args]) == 0
    lines = capsys.readouterr().out.splitlines()
    return lines[0].split(","), [list(map(float, l.split(","))) for l in lines[1:]]


def test_bounds_example(capsys):
    head, rows = bounds_rows(capsys, "--N", "1", "--L", "1", "--a-max", "1", "--delta-min", "0.5",
                             "--delta-max", "0.5", "--n", str(math.e))
    assert head == ["n", "theorem2"]
    assert rows[0][1] == pytest.approx(BOUND_EXAMPLE, abs=1e-12)


def test_bounds_k_one_column_equals_llr_column(capsys):
    head, rows = bounds_rows(capsys, "--N", "28", "--L", "4", "--delta-min", "0.1",
                             "--delta-max", "1.6", "--K", "1", "--n", "10", "1000", "2e6")
    assert head == ["n", "theorem2", "theorem3"]
    assert all(r[1] == r[2] for r in rows)


def test_bounds_at_one_keep_constant_terms(capsys):
    head, rows = bounds_rows(capsys, "--N", "2", "--L", "1", "--delta-min", "0.2",
                             "--delta-max", "0.4", "--deltas", "0.2", "0.4", "--n", "1")
    assert head == ["n", "theorem1", "theorem2"]
    c = 1 + math.pi ** 2 / 3
    assert rows[0][1] == pytest.approx(c * 0.6, rel=1e-14)
    assert rows[0][2] == pytest.approx((2 + math.pi ** 2 / 3 * 2) * 0.4, rel=1e-14)


@pytest.mark.parametrize("flag", ["--N", "--delta-min"])
def test_bounds_reject_non_positive(flag, capsys):
    args = {"--N": "3", "--L": "1", "--delta-min": "0.1", "--delta-max": "0.2"}
    args[flag] = "0"
    assert main(["bounds", *[x for kv in args.items() for x in kv]]) == 2


# --- oracle ------------------------------------------------------------------------

def oracle_output(capsys, problem, weights, *flags):
    code = main(["oracle", str(problem), str(weights), *flags])
    return code, capsys.readouterr().out


def test_oracle_on_small_channel_matrix(tmp_path, capsys):
    prob = write_json(tmp_path / "m.json", {"type": "matching", "users": 4, "channels": 7})
    w = tmp_path / "w.txt"
    np.savetxt(w, PAPER_MEANS["q7m4"])
    code, out = oracle_output(capsys, prob, w, "--max")
    assert code == 0
    assert "objective: 3.1" in out
    assert "assignment: 0->2 1->4 2->0 3->5" in out


def test_oracle_triangle_shortest_path(tmp_path, capsys):
    prob = write_json(tmp_path / "p.json", {"type": "paths", "n_nodes": 3,
                                             "edges": [[0, 1], [1, 2], [0, 2]],
                                             "source": 0, "dest": 2})
    w = write_json(tmp_path / "w.json", [1.0, 1.0, 3.0])
    code, out = oracle_output(capsys, prob, w, "--min")
    assert code == 0
    assert "support: 0 1" in out and "objective: 2" in out


def test_oracle_spanning_tree_matches_enumeration(tmp_path, capsys):
    rng = np.random.default_rng(3)
    edges = random_connected_graph(rng, 6, 9)
    w = np.round(rng.random(len(edges)), 3)
    best = min(a.value(w) for a in enumerate_brute_force(SpanningTrees(6, edges)).arms)
    prob = write_json(tmp_path / "t.json", {"type": "trees", "n_nodes": 6,
                                             "edges": [list(e) for e in edges]})
    wf = tmp_path / "w.csv"
    wf.write_text(",".join(map(str, w)))
    code, out = oracle_output(capsys, prob, wf, "--min")
    assert code == 0
    objective = float(out.split("objective:")[1])
    assert objective == pytest.approx(best, abs=1e-9)


def test_oracle_top_k(tmp_path, capsys):
    prob = write_json(tmp_path / "e.json", {"type": "explicit", "arms": [[0], [1], [2], [3]]})
    w = write_json(tmp_path / "w.json", [0.1, 0.9, 0.5, 0.2])
    code, out = oracle_output(capsys, prob, w, "--top-k", "2")
    assert code == 0
    assert out.count("rank") == 2 and "objective: 0.9" in out and "objective: 0.5" in out


def test_oracle_infeasible_exits_with_one(tmp_path, capsys):
    prob = write_json(tmp_path / "p.json", {"type": "paths", "n_nodes": 3, "edges": [[0, 1]],
                                             "source": 0, "dest": 2})
    w = write_json(tmp_path / "w.json", [1.0])
    assert main(["oracle", str(prob), str(w), "--min"]) == 1
    assert "error" in capsys.readouterr().err


def test_oracle_dimension_mismatch_exits_with_two(tmp_path, capsys):
    prob = write_json(tmp_path / "m.json", {"type": "matching", "users": 2, "channels": 2})
    w = write_json(tmp_path / "w.json", [1.0, 2.0])
    assert oracle_output(capsys, prob, w)[0] == 2


# --- dump-config and round trip ------------------------------------------------------

def test_dump_config_round_trips_instance_tag(tmp_path, capsys):
    assert main(["dump-config", "--instance", "q9m5", "--seed", "3", "--runs", "4"]) == 0
    text = capsys.readouterr().out
    doc = validate_text(text)
    rebuilt = plan_from_document(doc).plan
    assert rebuilt.instance == "q9m5" and rebuilt.master_seed == 3 and rebuilt.n_runs == 4
    assert [p.label for p in rebuilt.policies] == ["LLR", "NaiveUCB1"]


@pytest.mark.parametrize("action_set", [
    {"type": "explicit", "arms": [[0, 1], {"1": 2.0, "2": 0.5}, [2]]},
    {"type": "matching", "users": 1, "channels": 3},
    {"type": "paths", "n_nodes": 3, "edges": [[0, 1], [1, 2], [0, 2]], "source": 0, "dest": 2,
     "algorithm": "bellman-ford", "max_support": 2},
    {"type": "trees", "n_nodes": 3, "edges": [[0, 1], [1, 2], [0, 2]], "algorithm": "prim"},
])
def test_inline_configs_round_trip(tmp_path, action_set):
    doc = {"instance": {"name": "toy", "environment": {"distributions": [
               {"type": "bernoulli", "mean": 0.2}, {"type": "uniform", "low": 0.1, "high": 0.5},
               {"type": "fixed", "value": 0.7}]}, "action_set": action_set},
           "policies": [{"kind": "LLC", "exploration_L": 2, "init_mode": "greedy"}],
           "horizon": 500, "runs": 3, "seed": 11, "checkpoints": [10, 100, 500],
           "output_dir": "x"}
    cfg = write_json(tmp_path / "c.json", doc)
    rc = load_config(cfg)
    again = tmp_path / "again.json"
    again.write_text(dump_config(rc.plan, rc.output_dir))
    rc2 = load_config(again)
    assert rc2.plan == rc.plan
    assert rc2.output_dir == "x"


def test_checkpoints_are_clipped_to_a_shorter_horizon(tmp_path):
    doc = {**Q7M4_CONFIG, "checkpoints": [10, 1000, 100000]}
    rc = load_config(write_json(tmp_path / "c.json", doc), horizon=500)
    assert rc.plan.checkpoints == (10, 500)


def test_unreadable_config(tmp_path):
    with pytest.raises(ConfigurationError):
        load_config(tmp_path / "missing.json")
