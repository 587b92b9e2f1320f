"""Closed-form regret upper bounds, for overlay on simulated regret curves.

They never feed back into any policy decision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation

_PI2_3 = np.pi ** 2 / 3


@dataclass(frozen=True)
class BoundParams:
    N: int
    L: int
    a_max: float
    delta_min: float
    delta_max: float
    K: int | None = None

    def __post_init__(self):
        for name in ("N", "L", "a_max", "delta_min", "delta_max"):
            if not getattr(self, name) > 0:
                raise ContractViolation(f"{name} must be positive, got {getattr(self, name)}")
        if self.delta_min > self.delta_max:
            raise ContractViolation("delta_min exceeds delta_max")
        if self.K is not None and self.K < 1:
            raise ContractViolation("K must be >= 1")


def _log_n(n):
    n = np.asarray(n, dtype=float)
    if np.any(n < 1):
        raise ContractViolation("bounds are defined for n >= 1")
    return np.log(n)


def theorem1_bound(deltas, n):
    """UCB1 over independent arms: 8 sum(ln n / D_k) + (1 + pi^2/3) sum(D_k).

    ``deltas`` are the gaps of the suboptimal arms only.
    """
    d = np.asarray(deltas, dtype=float).ravel()
    if d.size == 0 or np.any(d <= 0):
        raise ContractViolation("every gap must be positive (pass suboptimal arms only)")
    return 8.0 * _log_n(n) * np.sum(1.0 / d) + (1.0 + _PI2_3) * np.sum(d)


def _llr_bound(p: BoundParams, n, k_factor: float):
    log_term = 4.0 * p.a_max ** 2 * p.L ** 2 * (p.L + 1) * p.N * _log_n(n) / p.delta_min ** 2
    return (log_term + p.N + _PI2_3 * p.L * k_factor * p.N) * p.delta_max


def theorem2_bound(p: BoundParams, n):
    """LLR: [4 a_max^2 L^2 (L+1) N ln n / D_min^2 + N + (pi^2/3) L N] D_max."""
    return _llr_bound(p, n, 1.0)


def theorem3_bound(p: BoundParams, n, K: int | None = None):
    """LLR-K: the LLR bound with its constant term scaled by K^(2L)."""
    K = p.K if K is None else K
    if K is None or K < 1:
        raise ContractViolation("LLR-K bound needs K >= 1")
    return _llr_bound(p, n, float(K) ** (2 * p.L))
