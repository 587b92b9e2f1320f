"""Seeded i.i.d. reward processes for the N unknown variables.

Draws come from a counter-based generator keyed by (seed, variable, period,
draw-within-period), so the values variable i produces never depend on which
other variables a policy happened to observe.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from . import _rng
from .core import BipartiteMatching, GroundTruth, SourceDestPaths
from .errors import ConfigurationError, ContractViolation


@dataclass(frozen=True)
class Bernoulli:
    mean: float

    def __post_init__(self):
        if not 0.0 <= self.mean <= 1.0:
            raise ConfigurationError(f"Bernoulli mean {self.mean} outside [0, 1]")


@dataclass(frozen=True)
class Uniform:
    low: float
    high: float

    def __post_init__(self):
        if not 0.0 <= self.low <= self.high <= 1.0:
            raise ConfigurationError(f"Uniform({self.low}, {self.high}) must lie inside [0, 1]")

    @property
    def mean(self) -> float:
        return (self.low + self.high) / 2


@dataclass(frozen=True)
class Fixed:
    value: float

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ConfigurationError(f"fixed value {self.value} outside [0, 1]")

    @property
    def mean(self) -> float:
        return self.value


Distribution = Union[Bernoulli, Uniform, Fixed]


@dataclass(frozen=True)
class EnvironmentSpec:
    """One distribution per variable plus the master seed."""

    distributions: tuple[Distribution, ...]
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "distributions", tuple(self.distributions))
        if not self.distributions:
            raise ConfigurationError("environment needs at least one variable")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigurationError("seed must be an unsigned 64-bit integer")

    @classmethod
    def bernoulli(cls, means: Iterable[float], seed: int = 0) -> "EnvironmentSpec":
        return cls(tuple(Bernoulli(float(p)) for p in np.ravel(means)), seed)

    @classmethod
    def fixed(cls, values: Iterable[float], seed: int = 0) -> "EnvironmentSpec":
        return cls(tuple(Fixed(float(v)) for v in np.ravel(values)), seed)

    @property
    def n_vars(self) -> int:
        return len(self.distributions)

    @property
    def means(self) -> np.ndarray:
        return np.array([d.mean for d in self.distributions])

    def with_seed(self, seed: int) -> "EnvironmentSpec":
        return EnvironmentSpec(self.distributions, seed)

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(kind code, first parameter, second parameter) per variable, for compiled code."""
        kind = np.empty(self.n_vars, dtype=np.int64)
        p1 = np.zeros(self.n_vars)
        p2 = np.zeros(self.n_vars)
        for i, d in enumerate(self.distributions):
            if isinstance(d, Bernoulli):
                kind[i], p1[i] = _rng.BERNOULLI, d.mean
            elif isinstance(d, Uniform):
                kind[i], p1[i], p2[i] = _rng.UNIFORM, d.low, d.high
            else:
                kind[i], p1[i] = _rng.FIXED, d.value
        return kind, p1, p2


class Environment:
    """Sampler for one run.

    Within a period, asking twice for the same variable (several simultaneous
    arms sharing it) yields fresh independent draws.
    """

    def __init__(self, spec: EnvironmentSpec, seed: int | None = None):
        self.spec = spec
        self.seed = int(spec.seed if seed is None else seed)
        self._useed = np.uint64(self.seed)
        self._kind, self._p1, self._p2 = spec.arrays()
        self._period = None
        self._draws: dict[int, int] = {}

    @property
    def n_vars(self) -> int:
        return self.spec.n_vars

    def draw(self, var: int, period: int, draw: int = 0) -> float:
        return _rng.draw_value(self._kind, self._p1, self._p2, self._useed, var, period, draw)

    def sample(self, period: int, support: Sequence[int]) -> dict[int, float]:
        if period != self._period:
            self._period = period
            self._draws = {}
        out = {}
        for i in support:
            i = int(i)
            if not 0 <= i < self.n_vars:
                raise ContractViolation(f"variable {i} out of range for {self.n_vars} variables")
            k = self._draws.get(i, 0)
            self._draws[i] = k + 1
            out[i] = self.draw(i, period, k)
        return out


# ---------------------------------------------------------------------------
# Channel-allocation instances (users x channels Bernoulli means)
# ---------------------------------------------------------------------------

PAPER_MEANS = {
    "q7m4": np.array([
        [0.3, 0.5, 0.9, 0.7, 0.8, 0.9, 0.6],
        [0.2, 0.2, 0.3, 0.4, 0.5, 0.4, 0.5],
        [0.8, 0.6, 0.5, 0.4, 0.7, 0.2, 0.8],
        [0.9, 0.2, 0.2, 0.8, 0.3, 0.9, 0.6],
    ]),
    "q9m5": np.array([
        [0.3, 0.5, 0.9, 0.7, 0.8, 0.9, 0.6, 0.8, 0.7],
        [0.2, 0.2, 0.3, 0.4, 0.5, 0.4, 0.5, 0.6, 0.9],
        [0.8, 0.6, 0.5, 0.4, 0.7, 0.2, 0.8, 0.2, 0.8],
        [0.9, 0.2, 0.2, 0.8, 0.3, 0.9, 0.6, 0.5, 0.4],
        [0.6, 0.7, 0.5, 0.7, 0.6, 0.8, 0.2, 0.6, 0.8],
    ]),
}

# channel of each user (0-based) in the highlighted optimal allocation
PAPER_OPTIMAL_ASSIGNMENT = {
    "q7m4": (2, 4, 0, 5),
    "q9m5": (2, 8, 6, 0, 5),
}


def paper_instance(which: str, seed: int = 0,
                   enumerate_limit: int | None = 20_000
                   ) -> tuple[EnvironmentSpec, BipartiteMatching, GroundTruth]:
    """Bernoulli channel-allocation instance ``"q7m4"`` or ``"q9m5"``.

    The optimum is recomputed by the matching oracle (and, within
    ``enumerate_limit``, by enumeration) rather than trusted from a hard-coded value.
    """
    from .oracles import certify_ground_truth

    key = which.lower()
    if key not in PAPER_MEANS:
        raise ConfigurationError(f"unknown instance {which!r}; choose from {sorted(PAPER_MEANS)}")
    means = PAPER_MEANS[key]
    problem = BipartiteMatching(*means.shape)
    env = EnvironmentSpec.bernoulli(means.ravel(), seed)
    truth = certify_ground_truth(problem, means.ravel(), enumerate_limit=enumerate_limit)
    return env, problem, truth


def random_path_instance(n_nodes: int = 10, n_edges: int = 17, seed: int = 0,
                         min_gap: float = 0.1, max_tries: int = 1000
                         ) -> tuple[EnvironmentSpec, SourceDestPaths, GroundTruth]:
    """Random acyclic digraph from node 0 to node n_nodes-1 with Bernoulli edge costs.

    Every edge lies on some source-destination path (edges only go from lower to
    higher node numbers, and each node has an edge in and out). Cost means are
    multiples of 0.1 in [0.1, 0.9], so path gaps are multiples of 0.1 too; draws
    are repeated until the cheapest path is unique with gap >= ``min_gap``
    (checked by enumerating every path).
    """
    from .oracles import certify_ground_truth

    if n_nodes < 3:
        raise ConfigurationError("need at least 3 nodes")
    if not n_nodes - 1 <= n_edges <= n_nodes * (n_nodes - 1) // 2:
        raise ConfigurationError(f"n_edges must lie in {n_nodes - 1}..{n_nodes * (n_nodes - 1) // 2}")
    for attempt in range(max_tries):
        rng = np.random.default_rng([seed, attempt])
        edges = set()
        for v in range(1, n_nodes):
            edges.add((int(rng.integers(0, v)), v))
        for u in range(n_nodes - 1):
            if not any(e[0] == u for e in edges):
                edges.add((u, int(rng.integers(u + 1, n_nodes))))
        if len(edges) > n_edges:
            continue
        while len(edges) < n_edges:
            u, v = sorted(int(x) for x in rng.choice(n_nodes, 2, replace=False))
            edges.add((u, v))
        edges = sorted(edges)
        means = rng.integers(1, 10, len(edges)) / 10
        problem = SourceDestPaths(n_nodes, tuple(edges), 0, n_nodes - 1)
        truth = certify_ground_truth(problem, means, minimize=True, enumerate_limit=100_000)
        if truth.delta_min is not None and truth.delta_min >= min_gap - 1e-9:
            return EnvironmentSpec.bernoulli(means, seed), problem, truth
    raise ConfigurationError(f"no instance with gap >= {min_gap} in {max_tries} draws")
