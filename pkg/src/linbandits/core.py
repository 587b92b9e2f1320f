"""Domain types: arms, action sets, estimator state, ground truth and regret traces."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ConfigurationError, ContractViolation

# Absolute tolerance under which two objective values count as tied.
TIE_TOL = 1e-12


@dataclass(frozen=True)
class ActionVector:
    """One arm: a sparse non-negative coefficient vector over ``n_vars`` variables.

    ``indices`` is strictly increasing and ``weights[k]`` is the coefficient of
    variable ``indices[k]``. Zero coefficients are never stored, so ``indices``
    is exactly the support of the arm.
    """

    n_vars: int
    indices: tuple[int, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if len(self.indices) != len(self.weights):
            raise ContractViolation("indices and weights differ in length")
        prev = -1
        for i, a in zip(self.indices, self.weights):
            if i <= prev:
                raise ContractViolation("indices must be strictly increasing")
            if i >= self.n_vars:
                raise ContractViolation(f"index {i} out of range for {self.n_vars} variables")
            if not a > 0 or not math.isfinite(a):
                raise ContractViolation(f"coefficient of variable {i} must be positive, got {a}")
            prev = i

    @classmethod
    def from_mapping(cls, coefficients: Mapping[int, float], n_vars: int) -> "ActionVector":
        items = sorted((int(i), float(a)) for i, a in coefficients.items() if a != 0)
        for i, _ in items:
            if i < 0:
                raise ContractViolation(f"negative variable index {i}")
        return cls(n_vars, tuple(i for i, _ in items), tuple(a for _, a in items))

    @classmethod
    def from_support(cls, support: Iterable[int], n_vars: int) -> "ActionVector":
        """0/1 incidence vector with the given support."""
        idx = tuple(sorted({int(i) for i in support}))
        if idx and idx[0] < 0:
            raise ContractViolation(f"negative variable index {idx[0]}")
        return cls(n_vars, idx, (1.0,) * len(idx))

    @property
    def support(self) -> tuple[int, ...]:
        return self.indices

    @property
    def coefficients(self) -> dict[int, float]:
        return dict(zip(self.indices, self.weights))

    def dense(self) -> np.ndarray:
        out = np.zeros(self.n_vars)
        out[list(self.indices)] = self.weights
        return out

    def value(self, x: Sequence[float] | np.ndarray) -> float:
        """Sum of ``a_i * x[i]`` over the support, accumulated in index order."""
        total = 0.0
        for i, a in zip(self.indices, self.weights):
            total += a * x[i]
        return float(total)

    def __len__(self):
        return len(self.indices)


def reward_of(arm: ActionVector, realization) -> float:
    """Linear reward of ``arm`` under one realization of all N variables."""
    x = np.asarray(realization, dtype=float)
    if x.ndim != 1 or x.shape[0] != arm.n_vars:
        raise ContractViolation(
            f"realization has shape {x.shape}, expected ({arm.n_vars},)")
    return arm.value(x)


# ---------------------------------------------------------------------------
# Action sets
# ---------------------------------------------------------------------------

class ActionSet:
    """Feasible set F of arms. Subclasses describe it structurally."""

    n_vars: int
    kind: str = "abstract"

    @property
    def L(self) -> int:
        raise NotImplementedError

    @property
    def a_max(self) -> float:
        return 1.0


@dataclass(frozen=True)
class ExplicitArms(ActionSet):
    """An explicitly listed feasible set. List order is the tie-break order."""

    arms: tuple[ActionVector, ...]
    n_vars: int = field(default=-1)
    kind = "explicit"

    def __post_init__(self):
        arms = tuple(self.arms)
        if not arms:
            raise ConfigurationError("explicit action set must contain at least one arm")
        n = self.n_vars if self.n_vars >= 0 else arms[0].n_vars
        for a in arms:
            if a.n_vars != n:
                raise ConfigurationError("all arms must share the same number of variables")
        object.__setattr__(self, "arms", arms)
        object.__setattr__(self, "n_vars", n)

    @classmethod
    def from_supports(cls, supports: Iterable[Iterable[int]], n_vars: int) -> "ExplicitArms":
        return cls(tuple(ActionVector.from_support(s, n_vars) for s in supports), n_vars)

    @classmethod
    def singletons(cls, n_vars: int) -> "ExplicitArms":
        """The classic N-armed bandit: unit vectors e_0..e_{N-1}."""
        return cls.from_supports(([i] for i in range(n_vars)), n_vars)

    @property
    def L(self) -> int:
        return max(len(a) for a in self.arms)

    @property
    def a_max(self) -> float:
        return max(max(a.weights, default=0.0) for a in self.arms)

    def __len__(self):
        return len(self.arms)


@dataclass(frozen=True)
class BipartiteMatching(ActionSet):
    """Matchings of ``users`` users onto distinct ``channels`` channels.

    Variable ``i * channels + j`` is the (user i, channel j) pair, i.e. the
    users x channels matrix flattened row-major.
    """

    users: int
    channels: int
    kind = "bipartite"

    def __post_init__(self):
        if self.users < 1 or self.channels < 1:
            raise ConfigurationError("users and channels must be positive")

    @property
    def n_vars(self) -> int:
        return self.users * self.channels

    @property
    def L(self) -> int:
        return min(self.users, self.channels)

    def var(self, user: int, channel: int) -> int:
        return user * self.channels + channel

    def pair(self, var: int) -> tuple[int, int]:
        return divmod(var, self.channels)

    def arm_from_assignment(self, assignment: Sequence[int]) -> ActionVector:
        """Arm for ``assignment[i]`` = channel of user i."""
        return ActionVector.from_support(
            (i * self.channels + int(c) for i, c in enumerate(assignment)), self.n_vars)

    def assignment_of(self, arm: ActionVector) -> list[int]:
        return [j for _, j in (self.pair(v) for v in arm.indices)]


def _check_edges(n_nodes: int, edges) -> tuple[tuple[int, int], ...]:
    out = []
    for k, e in enumerate(edges):
        u, v = (int(x) for x in e)
        if not (0 <= u < n_nodes and 0 <= v < n_nodes):
            raise ConfigurationError(f"edge {k} = ({u}, {v}) references a missing node")
        out.append((u, v))
    if not out:
        raise ConfigurationError("graph has no edges")
    return tuple(out)


@dataclass(frozen=True)
class SourceDestPaths(ActionSet):
    """Simple directed paths from ``source`` to ``dest``; variable k is edge k."""

    n_nodes: int
    edges: tuple[tuple[int, int], ...]
    source: int
    dest: int
    algorithm: str = "dijkstra"
    max_support: int | None = None
    kind = "paths"

    def __post_init__(self):
        object.__setattr__(self, "edges", _check_edges(self.n_nodes, self.edges))
        if not (0 <= self.source < self.n_nodes and 0 <= self.dest < self.n_nodes):
            raise ConfigurationError("source/dest must be graph nodes")
        if self.source == self.dest:
            raise ConfigurationError("source and dest must differ")
        if self.algorithm not in ("dijkstra", "bellman-ford"):
            raise ConfigurationError(f"unknown shortest-path algorithm {self.algorithm!r}")

    @property
    def n_vars(self) -> int:
        return len(self.edges)

    @property
    def L(self) -> int:
        return self.max_support if self.max_support is not None else len(self.edges)


@dataclass(frozen=True)
class SpanningTrees(ActionSet):
    """Spanning trees of an undirected multigraph; variable k is edge k."""

    n_nodes: int
    edges: tuple[tuple[int, int], ...]
    algorithm: str = "kruskal"
    max_support: int | None = None
    kind = "trees"

    def __post_init__(self):
        object.__setattr__(self, "edges", _check_edges(self.n_nodes, self.edges))
        if self.algorithm not in ("kruskal", "prim"):
            raise ConfigurationError(f"unknown spanning-tree algorithm {self.algorithm!r}")

    @property
    def n_vars(self) -> int:
        return len(self.edges)

    @property
    def L(self) -> int:
        return self.max_support if self.max_support is not None else len(self.edges)


# ---------------------------------------------------------------------------
# Learner memory
# ---------------------------------------------------------------------------

@dataclass
class EstimatorState:
    """Per-variable sample means and observation counts; the whole memory of LLR/LLC."""

    theta_hat: np.ndarray
    m: np.ndarray
    n: int = 0

    @classmethod
    def zeros(cls, n_vars: int) -> "EstimatorState":
        return cls(np.zeros(n_vars), np.zeros(n_vars, dtype=np.int64), 0)

    @property
    def n_vars(self) -> int:
        return self.theta_hat.shape[0]

    def observe(self, index: int, value: float) -> None:
        if not 0.0 <= value <= 1.0:
            raise ContractViolation(f"observation {value} of variable {index} outside [0, 1]")
        mi = self.m[index]
        self.theta_hat[index] = (self.theta_hat[index] * mi + value) / (mi + 1)
        self.m[index] = mi + 1

    def copy(self) -> "EstimatorState":
        return EstimatorState(self.theta_hat.copy(), self.m.copy(), self.n)


def update_estimates(state: EstimatorState, arm: ActionVector,
                     observed: Mapping[int, float]) -> EstimatorState:
    """Fold one period's observations of ``arm``'s support into ``state`` (in place).

    The period counter ``state.n`` is left alone; the simulation loop owns it.
    """
    if set(observed) != set(arm.indices):
        extra = sorted(set(observed) - set(arm.indices))
        missing = sorted(set(arm.indices) - set(observed))
        raise ContractViolation(
            f"observed keys must equal the arm support (extra {extra}, missing {missing})")
    for i in arm.indices:
        v = observed[i]
        if not 0.0 <= v <= 1.0:
            raise ContractViolation(f"observation {v} of variable {i} outside [0, 1]")
    for i in arm.indices:
        state.observe(i, observed[i])
    return state


# ---------------------------------------------------------------------------
# Ground truth and regret
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GroundTruth:
    """True means plus the optimum they induce over F.

    ``delta_min``/``delta_max`` are only filled when F could be enumerated.
    For minimization problems ``optimal_value`` is the minimum cost C*.
    """

    theta: np.ndarray
    optimal_value: float
    optimal_arm: ActionVector
    minimize: bool = False
    delta_min: float | None = None
    delta_max: float | None = None

    def __post_init__(self):
        if self.delta_min is not None:
            if not (0 < self.delta_min <= self.delta_max):
                raise ContractViolation("need 0 < delta_min <= delta_max")

    def gap(self, arm: ActionVector) -> float:
        """Expected shortfall of ``arm`` against the optimum (0 for optimal arms)."""
        v = arm.value(self.theta)
        d = v - self.optimal_value if self.minimize else self.optimal_value - v
        return d if d > TIE_TOL else 0.0


@dataclass
class RegretTrace:
    """Cumulative pseudo-regret of one policy run, sampled at checkpoints."""

    horizon: int
    checkpoints: np.ndarray
    cum_regret: np.ndarray
    policy_label: str
    run_seed: int
    run_index: int = 0

    @property
    def normalized(self) -> np.ndarray:
        """cum_regret / ln(t); NaN at t = 1 where the logarithm vanishes."""
        t = np.asarray(self.checkpoints, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.asarray(self.cum_regret, dtype=float) / np.log(t)
        out[t < 2] = np.nan
        return out

    def at(self, period: int) -> float:
        k = int(np.searchsorted(self.checkpoints, period))
        if k >= len(self.checkpoints) or self.checkpoints[k] != period:
            raise KeyError(f"period {period} is not a checkpoint")
        return float(self.cum_regret[k])
