"""Command-line front end.

    linbandits run --config q7m4.json --horizon 100000 --runs 5 --output out/
    linbandits bounds --N 28 --L 4 --a-max 1 --delta-min 0.1 --delta-max 1.6 --n 1e3 1e6
    linbandits oracle problem.json weights.txt --max
    linbandits dump-config --instance q7m4 --policies LLR NaiveUCB1

Exit status: 0 success, 1 runtime failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import BoundParams, theorem1_bound, theorem2_bound, theorem3_bound
from .config import (ACTION_SET_SCHEMA, build_action_set, dump_config, load_config,
                     validate_text)
from .core import BipartiteMatching
from .errors import BanditError, ConfigurationError
from .oracles import solve_max, solve_min, solve_top_k
from .policies import PolicyConfig
from .simulation import ExperimentPlan, run_experiment, summarize

log = logging.getLogger("linbandits")

TRACE_COLUMNS = ("period", "cum_regret", "normalized_regret", "policy", "run")
SUMMARY_COLUMNS = ("policy", "instance", "checkpoint", "mean", "sd", "min", "max")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"{text} is not an unsigned 64-bit integer")
    return v


def _positive_int(text: str) -> int:
    v = int(float(text))
    if v < 1 or v != float(text):
        raise argparse.ArgumentTypeError(f"{text} is not a positive integer")
    return v


def _num(x: float) -> str:
    """Shortest round-tripping decimal; 'nan' when undefined."""
    return "nan" if math.isnan(x) else repr(float(x))


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------

def _trace_csv(trace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for t, c, z in zip(trace.checkpoints, trace.cum_regret, trace.normalized):
        w.writerow((int(t), _num(c), _num(z), trace.policy_label, trace.run_index))
    return buf.getvalue()


def _summary_csv(summary) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for r in summary.rows:
        w.writerow((r.policy, r.instance, r.checkpoint, _num(r.mean), _num(r.sd),
                    _num(r.min), _num(r.max)))
    return buf.getvalue()


def trace_filename(label: str, run: int) -> str:
    return f"trace_{label}_run{run:03d}.csv"


def write_outputs(out_dir: Path, plan, traces, config_text: str) -> list[str]:
    """Write traces, summary.csv and manifest.json; returns the file names."""
    out_dir.mkdir(parents=True, exist_ok=True)
    files = []
    for tr in traces:
        name = trace_filename(tr.policy_label, tr.run_index)
        (out_dir / name).write_text(_trace_csv(tr))
        files.append(name)
    summary = summarize(traces, plan.instance)
    (out_dir / "summary.csv").write_text(_summary_csv(summary))
    files.append("summary.csv")
    manifest = {
        "package": "linbandits",
        "version": __version__,
        "instance": plan.instance,
        "horizon": plan.horizon,
        "runs": plan.n_runs,
        "master_seed": plan.master_seed,
        "policies": [p.label for p in plan.policies],
        "run_seeds": sorted({tr.run_index: tr.run_seed for tr in traces}.items()),
        "final_mean_regret": summary.final_mean,
        "final_normalized_regret": summary.final_normalized,
        "config": json.loads(config_text),
        "files": files,
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return files + ["manifest.json"]


def cmd_run(args) -> int:
    rc = load_config(args.config, args.seed, args.horizon, args.runs)
    out_dir = Path(args.output if args.output is not None else rc.output_dir)
    traces = run_experiment(rc.plan, engine=args.engine, parallel=args.parallel)
    files = write_outputs(out_dir, rc.plan, traces, dump_config(rc.plan, str(out_dir)))
    summary = summarize(traces, rc.plan.instance)
    print(f"instance {rc.plan.instance}, horizon {rc.plan.horizon}, {rc.plan.n_runs} runs")
    print(summary.table())
    print(f"wrote {len(files)} files to {out_dir}")
    return 0


# ---------------------------------------------------------------------------
# bounds
# ---------------------------------------------------------------------------

def cmd_bounds(args) -> int:
    for name in ("N", "L", "a_max", "delta_min", "delta_max"):
        if not getattr(args, name) > 0:
            raise ConfigurationError(f"--{name.replace('_', '-')} must be positive")
    if args.K is not None and args.K < 1:
        raise ConfigurationError("--K must be >= 1")
    if args.deltas is not None and any(d <= 0 for d in args.deltas):
        raise ConfigurationError("--deltas must all be positive")
    if any(n < 1 for n in args.n):
        raise ConfigurationError("--n values must be >= 1")
    p = BoundParams(args.N, args.L, args.a_max, args.delta_min, args.delta_max, args.K)
    header = ["n"]
    if args.deltas is not None:
        header.append("theorem1")
    header.append("theorem2")
    if args.K is not None:
        header.append("theorem3")
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(header)
    for n in args.n:
        row = [_num(n)]
        if args.deltas is not None:
            row.append(_num(theorem1_bound(args.deltas, n)))
        row.append(_num(theorem2_bound(p, n)))
        if args.K is not None:
            row.append(_num(theorem3_bound(p, n)))
        w.writerow(row)
    return 0


# ---------------------------------------------------------------------------
# oracle
# ---------------------------------------------------------------------------

def _read_weights(path: Path) -> np.ndarray:
    text = path.read_text()
    try:
        if path.suffix == ".json":
            return np.asarray(json.loads(text), dtype=float).ravel()
        return np.loadtxt(io.StringIO(text.replace(",", " ")), ndmin=1).ravel()
    except (ValueError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"{path}: cannot parse weights ({exc})") from None


def cmd_oracle(args) -> int:
    path = Path(args.problem)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigurationError(f"{path}: cannot read ({exc.strerror})") from None
    problem = build_action_set(validate_text(text, str(path), ACTION_SET_SCHEMA))
    w = _read_weights(Path(args.weights))
    if w.shape[0] != problem.n_vars:
        raise ConfigurationError(f"{args.weights}: {w.shape[0]} weights for {problem.n_vars} variables")
    if args.top_k is not None:
        sols = solve_top_k(problem, w, args.top_k)
    elif args.min:
        sols = [solve_min(problem, w)]
    else:
        sols = [solve_max(problem, w)]
    for rank, sol in enumerate(sols, start=1):
        if len(sols) > 1:
            print(f"rank {rank}")
        print("support: " + " ".join(map(str, sol.arm.indices)))
        print("coefficients: " + " ".join(_num(a) for a in sol.arm.weights))
        if isinstance(problem, BipartiteMatching):
            pairs = [problem.pair(i) for i in sol.arm.indices]
            print("assignment: " + " ".join(f"{u}->{c}" for u, c in pairs))
        print(f"objective: {sol.objective:.12g}")
    return 0


# ---------------------------------------------------------------------------
# dump-config
# ---------------------------------------------------------------------------

def cmd_dump_config(args) -> int:
    if args.config is not None:
        rc = load_config(args.config, args.seed, args.horizon, args.runs)
        plan, out = rc.plan, (args.output or rc.output_dir)
    else:
        if args.instance is None:
            raise ConfigurationError("give --config or --instance")
        policies = tuple(PolicyConfig(k) for k in args.policies)
        plan = ExperimentPlan.paper(args.instance, policies,
                                    args.horizon if args.horizon is not None else 2_000_000,
                                    args.runs if args.runs is not None else 20,
                                    args.seed if args.seed is not None else 0)
        out = args.output or f"results/{plan.instance}"
    sys.stdout.write(dump_config(plan, out))
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="linbandits", description="Combinatorial bandit experiments.")
    ap.add_argument("--version", action="version", version=f"linbandits {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def overrides(p):
        p.add_argument("--seed", type=_u64, help="master seed override")
        p.add_argument("--horizon", type=_positive_int, help="horizon override")
        p.add_argument("--runs", type=_positive_int, help="replication count override")

    p = sub.add_parser("run", help="run an experiment config")
    p.add_argument("--config", required=True, help="JSON config path")
    overrides(p)
    p.add_argument("--output", help="output directory (default: config output_dir)")
    p.add_argument("--parallel", type=_bool, nargs="?", const=True, default=False,
                   help="run replications in worker processes")
    p.add_argument("--engine", choices=("auto", "python", "compiled"), default="auto")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bounds", help="tabulate regret upper bounds")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--a-max", dest="a_max", type=float, default=1.0)
    p.add_argument("--delta-min", dest="delta_min", type=float, required=True)
    p.add_argument("--delta-max", dest="delta_max", type=float, required=True)
    p.add_argument("--K", type=int)
    p.add_argument("--deltas", type=float, nargs="+", help="per-arm gaps for the UCB1 bound")
    p.add_argument("--n", type=float, nargs="+", default=[1e3, 1e4, 1e5, 1e6, 2e6])
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("oracle", help="solve one deterministic instance")
    p.add_argument("problem", help="JSON action-set description")
    p.add_argument("weights", help="weights (.json list/matrix, or whitespace/comma text)")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--max", action="store_true", help="maximize (default)")
    g.add_argument("--min", action="store_true", help="minimize")
    g.add_argument("--top-k", dest="top_k", type=_positive_int, metavar="K")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("dump-config", help="print a normalized config")
    p.add_argument("--config", help="config to normalize")
    p.add_argument("--instance", choices=("q7m4", "q9m5"))
    p.add_argument("--policies", nargs="+", default=["LLR", "NaiveUCB1"],
                   choices=("LLR", "LLC", "NaiveUCB1"))
    overrides(p)
    p.add_argument("--output", help="output_dir to record")
    p.set_defaults(func=cmd_dump_config)
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BanditError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
