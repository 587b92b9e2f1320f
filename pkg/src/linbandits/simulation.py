"""Experiment engine: replicated policy runs recorded as pseudo-regret traces.

Each period adds the expected shortfall of the played arm(s) against the
genie (``theta* - R_a`` for reward problems, ``C_a - C*`` for cost problems,
sum of the K best arms for LLR-K), so a trace is non-negative and
non-decreasing by construction.

Two interchangeable engines run a single replication: a per-period Python
loop over the policy objects, and compiled kernels for explicit arm lists and
bipartite matchings. ``engine="auto"`` uses the compiled one when it applies.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .bounds import BoundParams
from .core import (TIE_TOL, ActionSet, BipartiteMatching, ExplicitArms, GroundTruth,
                   RegretTrace)
from .environments import Environment, EnvironmentSpec, paper_instance
from .errors import BanditError, ConfigurationError, SimulationError
from .oracles import certify_ground_truth, enumerate_brute_force, solve_top_k
from .policies import PolicyConfig, make_policy


ENGINES = ("auto", "python", "compiled")


def geometric_checkpoints(horizon: int, ratio: float = 1.25, start: int = 2) -> np.ndarray:
    """Rounded powers of ``ratio`` from ``start`` up to ``horizon``, plus ``horizon``."""
    pts = set()
    x = 1.0
    while x <= horizon:
        v = int(round(x))
        if v >= start:
            pts.add(v)
        x *= ratio
    pts.add(int(horizon))
    return np.array(sorted(pts), dtype=np.int64)


def derive_seed(master_seed: int, run_index: int) -> int:
    """Independent 64-bit seed for one replication."""
    ss = np.random.SeedSequence([int(master_seed), int(run_index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class ExperimentPlan:
    environment: EnvironmentSpec
    action_set: ActionSet
    policies: tuple[PolicyConfig, ...]
    horizon: int
    n_runs: int = 20
    checkpoints: tuple[int, ...] | None = None
    master_seed: int = 0
    instance: str = "custom"
    enumerate_limit: int = 100_000

    def __post_init__(self):
        object.__setattr__(self, "policies", tuple(self.policies))
        n = self.action_set.n_vars
        if self.environment.n_vars != n:
            raise ConfigurationError(
                f"environment has {self.environment.n_vars} variables, action set has {n}")
        if not self.policies:
            raise ConfigurationError("plan needs at least one policy")
        if self.horizon < n + 1:
            raise ConfigurationError(f"horizon {self.horizon} leaves no room after {n} warm-up periods")
        if self.n_runs < 1:
            raise ConfigurationError("n_runs must be >= 1")
        if self.checkpoints is not None:
            cps = tuple(int(c) for c in self.checkpoints)
            if list(cps) != sorted(set(cps)) or cps[0] < 1 or cps[-1] > self.horizon:
                raise ConfigurationError("checkpoints must be strictly increasing within 1..horizon")
            object.__setattr__(self, "checkpoints", cps)

    @classmethod
    def paper(cls, which: str, policies, horizon: int, n_runs: int = 20, master_seed: int = 0,
              checkpoints=None) -> "ExperimentPlan":
        env, problem, _ = paper_instance(which, master_seed, enumerate_limit=None)
        return cls(env, problem, tuple(policies), horizon, n_runs,
                   None if checkpoints is None else tuple(checkpoints), master_seed, which.lower())

    @property
    def checkpoint_array(self) -> np.ndarray:
        if self.checkpoints is None:
            return geometric_checkpoints(self.horizon)
        return np.array(self.checkpoints, dtype=np.int64)


# ---------------------------------------------------------------------------
# Genie values
# ---------------------------------------------------------------------------

@dataclass
class _Genie:
    """Expected per-period value of the benchmark and of any arm."""

    truth: GroundTruth
    value: float                     # genie's expected reward (or cost) per period
    minimize: bool
    _cache: dict = field(default_factory=dict)

    def arm_value(self, arm) -> float:
        v = self._cache.get(arm)
        if v is None:
            v = self._cache[arm] = arm.value(self.truth.theta)
        return v

    def step_regret(self, arms) -> float:
        played = 0.0
        for arm in arms:
            played += self.arm_value(arm)
        d = played - self.value if self.minimize else self.value - played
        return d if d > TIE_TOL else 0.0


def _genie(cfg: PolicyConfig, plan: ExperimentPlan) -> _Genie:
    minimize = cfg.kind == "LLC"
    theta = plan.environment.means
    truth = certify_ground_truth(plan.action_set, theta, minimize, enumerate_limit=None)
    value = truth.optimal_value
    if cfg.kind == "LLR_K":
        value = 0.0
        for sol in solve_top_k(plan.action_set, theta, cfg.K):
            value += sol.arm.value(theta)
    return _Genie(truth, value, minimize)


# ---------------------------------------------------------------------------
# Engines
# ---------------------------------------------------------------------------

def _python_run(cfg, plan, seed, checkpoints, genie, record=None):
    policy = make_policy(cfg, plan.action_set, plan.enumerate_limit)
    env = Environment(plan.environment, seed)
    schedule = policy.initialize()
    out = np.empty(len(checkpoints))
    ci = 0
    cum = 0.0
    for n in range(1, plan.horizon + 1):
        try:
            arms = [schedule[n - 1][1]] if n <= len(schedule) else policy.select(n)
            obs = [env.sample(n, arm.indices) for arm in arms]
            policy.observe(arms, obs)
        except BanditError as exc:
            raise SimulationError(str(exc), n) from exc
        if record is not None:
            record.append(tuple(arm.indices for arm in arms))
        cum += genie.step_regret(arms)
        while ci < len(checkpoints) and checkpoints[ci] == n:
            out[ci] = cum
            ci += 1
    return out


def _arm_arrays(arms: ExplicitArms):
    width = max(1, max(len(a) for a in arms.arms))
    idx = np.zeros((len(arms.arms), width), dtype=np.int64)
    wts = np.zeros((len(arms.arms), width))
    lens = np.zeros(len(arms.arms), dtype=np.int64)
    for k, a in enumerate(arms.arms):
        idx[k, :len(a)] = a.indices
        wts[k, :len(a)] = a.weights
        lens[k] = len(a)
    return idx, wts, lens


def _compiled_supported(cfg: PolicyConfig, problem: ActionSet) -> bool:
    if cfg.kind == "NaiveUCB1":
        return True
    if isinstance(problem, ExplicitArms):
        return True
    return isinstance(problem, BipartiteMatching) and cfg.kind in ("LLR", "LLC")


@dataclass
class _Prepared:
    """Per-policy inputs shared by every replication."""

    cfg: PolicyConfig
    genie: _Genie
    kernel_args: tuple | None = None   # arm/initialization arrays for the compiled engine


def _prepare(cfg: PolicyConfig, plan: ExperimentPlan, compiled: bool) -> _Prepared:
    genie = _genie(cfg, plan)
    if not compiled:
        return _Prepared(cfg, genie)
    problem = plan.action_set
    if cfg.kind == "NaiveUCB1":
        arms = enumerate_brute_force(problem, plan.enumerate_limit)
        idx, wts, lens = _arm_arrays(arms)
        values = np.array([genie.arm_value(a) for a in arms.arms])
        return _Prepared(cfg, genie, (idx, wts, lens, values))
    policy = make_policy(cfg, problem, plan.enumerate_limit)
    schedule = [arm for _, arm in policy.initialize()]
    if isinstance(problem, ExplicitArms):
        idx, wts, lens = _arm_arrays(problem)
        values = np.array([genie.arm_value(a) for a in problem.arms])
        position = {id(a): k for k, a in enumerate(problem.arms)}
        init = np.array([position[id(a)] for a in schedule], dtype=np.int64)
        return _Prepared(cfg, genie, (idx, wts, lens, values, policy.L, init))
    init = np.array([problem.assignment_of(a) for a in schedule], dtype=np.int64)
    return _Prepared(cfg, genie, (policy.L, init))


def _compiled_run(prep: _Prepared, plan, seed, checkpoints):
    cfg, genie = prep.cfg, prep.genie
    kind, p1, p2 = plan.environment.arrays()
    seed = np.uint64(seed)
    horizon = int(plan.horizon)
    if cfg.kind == "NaiveUCB1":
        idx, wts, lens, values = prep.kernel_args
        return _kernels.naive_run(idx, wts, lens, values, genie.value, kind, p1, p2, seed,
                                  horizon, checkpoints, TIE_TOL)
    problem = plan.action_set
    if isinstance(problem, ExplicitArms):
        idx, wts, lens, values, L, init = prep.kernel_args
        K = cfg.K if cfg.kind == "LLR_K" else 1
        return _kernels.explicit_index_run(idx, wts, lens, values, genie.value, genie.minimize,
                                           K, L, kind, p1, p2, seed, horizon, init,
                                           checkpoints, TIE_TOL)
    L, init = prep.kernel_args
    theta = np.ascontiguousarray(genie.truth.theta, dtype=float)
    return _kernels.matching_index_run(problem.users, problem.channels, theta, genie.value,
                                       genie.minimize, L, kind, p1, p2, seed, horizon, init,
                                       checkpoints, TIE_TOL)


def _use_compiled(cfg, plan, engine) -> bool:
    if engine not in ENGINES:
        raise ConfigurationError(f"unknown engine {engine!r}; choose from {ENGINES}")
    ok = _compiled_supported(cfg, plan.action_set)
    if engine == "compiled" and not ok:
        raise ConfigurationError(
            f"no compiled kernel for {cfg.kind} on {type(plan.action_set).__name__}")
    return engine == "compiled" or (engine == "auto" and ok)


def _run_prepared(prep: _Prepared, plan: ExperimentPlan, run_index: int) -> RegretTrace:
    seed = derive_seed(plan.master_seed, run_index)
    checkpoints = plan.checkpoint_array
    if prep.kernel_args is not None:
        cum = _compiled_run(prep, plan, seed, checkpoints)
    else:
        cum = _python_run(prep.cfg, plan, seed, checkpoints, prep.genie)
    return RegretTrace(plan.horizon, checkpoints, cum, prep.cfg.label, seed, run_index)


def run_single(cfg: PolicyConfig, plan: ExperimentPlan, run_index: int,
               engine: str = "auto") -> RegretTrace:
    """One replication of one policy."""
    prep = _prepare(cfg, plan, _use_compiled(cfg, plan, engine))
    return _run_prepared(prep, plan, run_index)


def arm_sequence(cfg: PolicyConfig, plan: ExperimentPlan, run_index: int = 0) -> list[tuple]:
    """Supports of the arms played in every period of one replication (interpreted engine)."""
    seed = derive_seed(plan.master_seed, run_index)
    played: list[tuple] = []
    _python_run(cfg, plan, seed, plan.checkpoint_array, _genie(cfg, plan), played)
    return played


def _run_job(args):
    prep, plan, run_index = args
    return _run_prepared(prep, plan, run_index)


def run_experiment(plan: ExperimentPlan, engine: str = "auto", parallel: bool = False,
                   max_workers: int | None = None) -> list[RegretTrace]:
    """All replications of all policies, ordered by policy then run index.

    Every policy sees the same environment seed in a given run.
    """
    jobs = []
    for cfg in plan.policies:
        prep = _prepare(cfg, plan, _use_compiled(cfg, plan, engine))
        jobs.extend((prep, plan, r) for r in range(plan.n_runs))
    if parallel and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(_run_job, jobs))
    return [_run_job(j) for j in jobs]


# ---------------------------------------------------------------------------
# Summaries
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SummaryRow:
    policy: str
    instance: str
    checkpoint: int
    mean: float
    sd: float
    min: float
    max: float


@dataclass
class Summary:
    rows: list[SummaryRow]
    final_normalized: dict[str, float]   # mean of cum_regret / ln(horizon) per policy
    final_mean: dict[str, float]

    def table(self) -> str:
        """Final-horizon regret per policy, in the layout of a results table."""
        lines = [f"{'policy':<12}{'mean regret':>16}{'sd':>12}{'regret/ln t':>14}"]
        finals = {}
        for r in self.rows:
            finals[r.policy] = r
        for name, r in finals.items():
            lines.append(f"{name:<12}{r.mean:>16.1f}{r.sd:>12.1f}{self.final_normalized[name]:>14.1f}")
        return "\n".join(lines)


def summarize(traces: list[RegretTrace], instance: str = "custom") -> Summary:
    """Across-run statistics of cumulative regret at every checkpoint, per policy.

    ``sd`` is the sample standard deviation (0 for a single run).
    """
    by_policy: dict[str, list[RegretTrace]] = {}
    for t in traces:
        by_policy.setdefault(t.policy_label, []).append(t)
    rows, final_norm, final_mean = [], {}, {}
    for label, ts in by_policy.items():
        cps = ts[0].checkpoints
        for t in ts:
            if not np.array_equal(t.checkpoints, cps):
                raise ConfigurationError(f"traces of {label} use different checkpoints")
        mat = np.vstack([t.cum_regret for t in ts])
        mean = mat.mean(axis=0)
        sd = mat.std(axis=0, ddof=1) if len(ts) > 1 else np.zeros(len(cps))
        for k, c in enumerate(cps):
            rows.append(SummaryRow(label, instance, int(c), float(mean[k]), float(sd[k]),
                                   float(mat[:, k].min()), float(mat[:, k].max())))
        last = int(cps[-1])
        final_mean[label] = float(mean[-1])
        final_norm[label] = float(mean[-1] / math.log(last)) if last >= 2 else float("nan")
    return Summary(rows, final_norm, final_mean)


def mean_trace(traces: list[RegretTrace]) -> tuple[np.ndarray, np.ndarray]:
    """(checkpoints, mean cumulative regret) over a list of same-grid traces."""
    cps = traces[0].checkpoints
    return cps, np.mean([t.cum_regret for t in traces], axis=0)


def bound_params(problem: ActionSet, truth: GroundTruth, K: int | None = None,
                 L: int | None = None) -> BoundParams:
    """Bound parameters of an instance whose gaps are known."""
    if truth.delta_min is None:
        raise ConfigurationError("gaps unknown: certify the ground truth with enumeration")
    return BoundParams(problem.n_vars, L if L is not None else problem.L, problem.a_max,
                       truth.delta_min, truth.delta_max, K)
