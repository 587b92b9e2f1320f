"""Sequential decision policies: LLR, LLC, LLR-K and per-arm UCB1.

All four expose the same three-step protocol used by the simulator::

    schedule = policy.initialize()          # arms for the warm-up periods
    arms = policy.select(n)                 # arms to play in period n
    policy.observe(arms, observations)      # one {var: value} dict per arm

The index policies keep only an :class:`EstimatorState` (two length-N
vectors), whatever the size of the feasible set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import TIE_TOL, ActionSet, ActionVector, EstimatorState, ExplicitArms, update_estimates
from .errors import ConfigurationError, ContractViolation, InitializationIncomplete
from .oracles import covering_arm, enumerate_brute_force, solve_max, solve_min, solve_top_k

KINDS = ("LLR", "LLC", "LLR_K", "NaiveUCB1")
INIT_MODES = ("literal", "greedy")


def bonus_scale(L: int, n: int) -> float:
    """sqrt((L + 1) ln n); the exploration bonus of a variable is this over sqrt(m_i)."""
    return math.sqrt((L + 1) * math.log(n))


def _bonus(state: EstimatorState, L: int) -> np.ndarray:
    if state.n < 1:
        raise ContractViolation(f"period index must be >= 1, got {state.n}")
    if np.any(state.m == 0):
        missing = np.flatnonzero(state.m == 0)
        raise InitializationIncomplete(
            f"variables {missing[:10].tolist()} have never been observed")
    return bonus_scale(L, state.n) / np.sqrt(state.m.astype(float))


def llr_index(state: EstimatorState, L: int) -> np.ndarray:
    """Optimistic per-variable weights theta_hat + sqrt((L+1) ln n / m)."""
    return state.theta_hat + _bonus(state, L)


def llc_index(state: EstimatorState, L: int) -> np.ndarray:
    """Pessimistic (cost) weights theta_hat - sqrt((L+1) ln n / m); may be negative."""
    return state.theta_hat - _bonus(state, L)


def initialization_schedule(problem: ActionSet, mode: str = "literal") -> list[ActionVector]:
    """Warm-up arms that observe every variable at least once.

    ``literal`` plays, in period p, an arm containing variable p - 1 (N periods);
    ``greedy`` only covers variables that are still unobserved, which usually
    needs fewer periods. Either way each pick prefers arms touching many
    unobserved variables.
    """
    if mode not in INIT_MODES:
        raise ConfigurationError(f"unknown initialization mode {mode!r}")
    n = problem.n_vars
    observed = np.zeros(n, dtype=bool)
    schedule = []

    def cover(var):
        arm = covering_arm(problem, var, observed)
        if arm is None:
            raise ConfigurationError(f"dead variable {var}: no arm of the feasible set contains it")
        observed[list(arm.indices)] = True
        schedule.append(arm)

    if mode == "literal":
        for var in range(n):
            cover(var)
    else:
        while not observed.all():
            cover(int(np.argmin(observed)))
    return schedule


@dataclass(frozen=True)
class PolicyConfig:
    kind: str
    K: int | None = None
    exploration_L: int | None = None
    init_mode: str = "literal"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown policy kind {self.kind!r}; choose from {KINDS}")
        if self.kind == "LLR_K":
            if self.K is None or self.K < 1:
                raise ConfigurationError("LLR_K needs K >= 1")
        elif self.K is not None:
            raise ConfigurationError(f"K only applies to LLR_K, not {self.kind}")
        if self.exploration_L is not None and self.exploration_L < 1:
            raise ConfigurationError("exploration_L must be a positive integer")
        if self.init_mode not in INIT_MODES:
            raise ConfigurationError(f"unknown initialization mode {self.init_mode!r}")

    @property
    def label(self) -> str:
        return f"LLR_K{self.K}" if self.kind == "LLR_K" else self.kind


class IndexPolicy:
    """Shared machinery of LLR, LLC and LLR-K."""

    minimize = False
    n_select = 1

    def __init__(self, problem: ActionSet, exploration_L: int | None = None,
                 init_mode: str = "literal"):
        self.problem = problem
        self.L = int(exploration_L if exploration_L is not None else problem.L)
        self.init_mode = init_mode
        self.state = EstimatorState.zeros(problem.n_vars)

    def initialize(self) -> list[tuple[int, ActionVector]]:
        arms = initialization_schedule(self.problem, self.init_mode)
        return [(p, arm) for p, arm in enumerate(arms, start=1)]

    def index(self, n: int) -> np.ndarray:
        self.state.n = n
        return llr_index(self.state, self.L)

    def select(self, n: int) -> list[ActionVector]:
        return [solve_max(self.problem, self.index(n)).arm]

    def observe(self, arms, observations) -> None:
        for arm, obs in zip(arms, observations):
            update_estimates(self.state, arm, obs)


class LLR(IndexPolicy):
    """Reward maximization with per-variable upper confidence indices."""


class LLC(IndexPolicy):
    """Cost minimization with per-variable lower confidence indices."""

    minimize = True

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.floored_periods = 0

    def index(self, n: int) -> np.ndarray:
        self.state.n = n
        return llc_index(self.state, self.L)

    def select(self, n: int) -> list[ActionVector]:
        sol = solve_min(self.problem, self.index(n))
        self.floored_periods += sol.floored
        return [sol.arm]


class LLRK(IndexPolicy):
    """Plays the K arms with the largest optimistic values every period."""

    def __init__(self, problem: ActionSet, K: int, exploration_L: int | None = None,
                 init_mode: str = "literal"):
        super().__init__(problem, exploration_L, init_mode)
        if not isinstance(problem, ExplicitArms):
            raise ConfigurationError("LLR_K needs an explicit arm list")
        if not 1 <= K <= len(problem.arms):
            raise ConfigurationError(f"K = {K} outside 1..{len(problem.arms)}")
        self.K = K
        self.n_select = K

    def select(self, n: int) -> list[ActionVector]:
        return [s.arm for s in solve_top_k(self.problem, self.index(n), self.K)]


# ---------------------------------------------------------------------------
# Per-arm UCB1 baseline
# ---------------------------------------------------------------------------

@dataclass
class NaiveState:
    y_hat: np.ndarray
    m_arm: np.ndarray
    n: int = 0


def naive_update(state: NaiveState, arm: int, reward: float) -> NaiveState:
    """Incremental mean of the total reward collected on ``arm``."""
    if not 0 <= arm < state.y_hat.shape[0]:
        raise ContractViolation(f"arm index {arm} out of range")
    mk = state.m_arm[arm]
    state.y_hat[arm] = (state.y_hat[arm] * mk + reward) / (mk + 1)
    state.m_arm[arm] = mk + 1
    return state


class NaiveUCB1:
    """UCB1 run over the enumerated arms, ignoring their shared variables."""

    minimize = False
    n_select = 1

    def __init__(self, problem: ActionSet, enumerate_limit: int = 100_000):
        self.problem = problem
        self.arms = enumerate_brute_force(problem, enumerate_limit)
        self._position = {a.indices: k for k, a in enumerate(self.arms.arms)}
        # identity first, so repeated supports in an explicit list stay distinct arms
        self._by_id = {id(a): k for k, a in enumerate(self.arms.arms)}
        n_arms = len(self.arms.arms)
        self.state = NaiveState(np.zeros(n_arms), np.zeros(n_arms, dtype=np.int64), 0)

    def initialize(self) -> list[tuple[int, ActionVector]]:
        return [(p, arm) for p, arm in enumerate(self.arms.arms, start=1)]

    def index(self, n: int) -> np.ndarray:
        self.state.n = n
        if np.any(self.state.m_arm == 0):
            raise InitializationIncomplete("some arms have never been played")
        return self.state.y_hat + bonus_scale(1, n) / np.sqrt(self.state.m_arm.astype(float))

    def select(self, n: int) -> list[ActionVector]:
        v = self.index(n)
        k = int(np.flatnonzero(v >= v.max() - TIE_TOL)[0])
        return [self.arms.arms[k]]

    def observe(self, arms, observations) -> None:
        for arm, obs in zip(arms, observations):
            k = self._by_id.get(id(arm))
            if k is None:
                k = self._position[arm.indices]
            naive_update(self.state, k, arm.value(obs))


def make_policy(config: PolicyConfig, problem: ActionSet, enumerate_limit: int = 100_000):
    if config.kind == "NaiveUCB1":
        return NaiveUCB1(problem, enumerate_limit)
    if config.kind == "LLR_K":
        return LLRK(problem, config.K, config.exploration_L, config.init_mode)
    cls = LLC if config.kind == "LLC" else LLR
    return cls(problem, config.exploration_L, config.init_mode)
