"""Counter-based uniform draws keyed by (seed, variable, period, draw counter).

Every draw is a pure function of its key, so the stream of variable i does not
depend on which other variables were observed, and compiled and interpreted
simulation paths see exactly the same numbers.
"""

import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_TO_UNIT = 1.0 / 9007199254740992.0  # 2**-53

BERNOULLI = 0
UNIFORM = 1
FIXED = 2


@njit(cache=True)
def _mix(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True)
def unit_draw(seed, var, period, draw):
    """Uniform float in [0, 1) for one key (all arguments are non-negative ints)."""
    h = _mix(np.uint64(seed) + _GOLDEN)
    h = _mix(h + np.uint64(var) + _GOLDEN)
    h = _mix(h + np.uint64(period) + _GOLDEN)
    h = _mix(h + np.uint64(draw) + _GOLDEN)
    return float(h >> _S11) * _TO_UNIT


@njit(cache=True)
def draw_value(kind, p1, p2, seed, var, period, draw):
    """One observation of variable ``var`` from its distribution."""
    k = kind[var]
    if k == FIXED:
        return p1[var]
    u = unit_draw(seed, var, period, draw)
    if k == BERNOULLI:
        return 1.0 if u < p1[var] else 0.0
    return p1[var] + (p2[var] - p1[var]) * u
