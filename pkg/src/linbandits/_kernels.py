"""Compiled simulation loops.

Each kernel replays exactly the arithmetic of the interpreted engine in
``simulation`` (same draw keys, same update formulas, same summation order, same
tie rule), so both engines produce bit-identical traces; the test suite checks
this. They exist because runs of millions of periods are out of
reach for a per-period Python loop.
"""

import math

import numpy as np
from numba import njit

from ._matching import assign_max, assign_min
from ._rng import draw_value


@njit(cache=True)
def _gap(best, value, minimize, tol):
    d = value - best if minimize else best - value
    return d if d > tol else 0.0


@njit(cache=True)
def _observe(var, th, m, dc, kind, p1, p2, seed, period):
    x = draw_value(kind, p1, p2, seed, var, period, dc[var])
    dc[var] += 1
    mi = m[var]
    th[var] = (th[var] * mi + x) / (mi + 1)
    m[var] = mi + 1
    return x


@njit(cache=True)
def _index(th, m, L, n, minimize, w):
    c = math.sqrt((L + 1) * math.log(n))
    for i in range(th.shape[0]):
        b = c / math.sqrt(float(m[i]))
        w[i] = th[i] - b if minimize else th[i] + b


@njit(cache=True)
def explicit_index_run(arm_idx, arm_w, arm_len, arm_value, genie, minimize, K, L,
                       kind, p1, p2, seed, horizon, init_arms, checkpoints, tol):
    """LLR / LLC / LLR-K over an explicit arm list."""
    n_arms = arm_idx.shape[0]
    nv = kind.shape[0]
    th = np.zeros(nv)
    m = np.zeros(nv, dtype=np.int64)
    dc = np.zeros(nv, dtype=np.int64)
    w = np.empty(nv)
    obj = np.empty(n_arms)
    taken = np.zeros(n_arms, dtype=np.bool_)
    chosen = np.empty(K, dtype=np.int64)
    out = np.empty(checkpoints.shape[0])
    ci = 0
    cum = 0.0
    n_init = init_arms.shape[0]
    for n in range(1, horizon + 1):
        if n <= n_init:
            chosen[0] = init_arms[n - 1]
            n_play = 1
        else:
            _index(th, m, L, n, minimize, w)
            for a in range(n_arms):
                total = 0.0
                for k in range(arm_len[a]):
                    total += arm_w[a, k] * w[arm_idx[a, k]]
                obj[a] = total
                taken[a] = False
            for r in range(K):
                best = np.inf if minimize else -np.inf
                for a in range(n_arms):
                    if not taken[a]:
                        if minimize:
                            if obj[a] < best:
                                best = obj[a]
                        elif obj[a] > best:
                            best = obj[a]
                for a in range(n_arms):
                    if not taken[a]:
                        if (obj[a] <= best + tol) if minimize else (obj[a] >= best - tol):
                            chosen[r] = a
                            taken[a] = True
                            break
            n_play = K
        for i in range(nv):
            dc[i] = 0
        played = 0.0
        for r in range(n_play):
            a = chosen[r]
            for k in range(arm_len[a]):
                _observe(arm_idx[a, k], th, m, dc, kind, p1, p2, seed, n)
            played += arm_value[a]
        cum += _gap(genie, played, minimize, tol)
        while ci < checkpoints.shape[0] and checkpoints[ci] == n:
            out[ci] = cum
            ci += 1
    return out


@njit(cache=True)
def matching_index_run(users, channels, theta, best, minimize, L,
                       kind, p1, p2, seed, horizon, init_assign, checkpoints, tol):
    """LLR / LLC over user-channel matchings, solved by the Hungarian kernel."""
    nv = users * channels
    th = np.zeros(nv)
    m = np.zeros(nv, dtype=np.int64)
    dc = np.zeros(nv, dtype=np.int64)
    w = np.empty(nv)
    out = np.empty(checkpoints.shape[0])
    ci = 0
    cum = 0.0
    n_init = init_assign.shape[0]
    assign = np.empty(users, dtype=np.int64)
    for n in range(1, horizon + 1):
        if n <= n_init:
            for i in range(users):
                assign[i] = init_assign[n - 1, i]
        else:
            _index(th, m, L, n, minimize, w)
            W = w.reshape((users, channels))
            assign = assign_min(W, tol) if minimize else assign_max(W, tol)
        value = 0.0
        for i in range(users):
            var = i * channels + assign[i]
            dc[var] = 0
            _observe(var, th, m, dc, kind, p1, p2, seed, n)
            value += theta[var]
        cum += _gap(best, value, minimize, tol)
        while ci < checkpoints.shape[0] and checkpoints[ci] == n:
            out[ci] = cum
            ci += 1
    return out


# ---------------------------------------------------------------------------
# Per-arm UCB1
# ---------------------------------------------------------------------------

@njit(cache=True)
def _group_max(y, head, nxt, g):
    best = -np.inf
    j = head[g]
    while j >= 0:
        if y[j] > best:
            best = y[j]
        j = nxt[j]
    return best


@njit(cache=True)
def naive_run(arm_idx, arm_w, arm_len, arm_value, genie,
              kind, p1, p2, seed, horizon, checkpoints, tol):
    """UCB1 over an arm list.

    Arms are bucketed by play count: within a bucket the bonus is common, so
    the bucket's best index is its largest sample mean. The arg-max (lowest
    arm number within ``tol`` of the maximum) is identical to a full scan.
    """
    n_arms = arm_idx.shape[0]
    nv = kind.shape[0]
    y = np.zeros(n_arms)
    cnt = np.zeros(n_arms, dtype=np.int64)
    dc = np.zeros(nv, dtype=np.int64)
    head = np.full(horizon + 2, -1, dtype=np.int64)
    gmax = np.full(horizon + 2, -np.inf)
    nxt = np.full(n_arms, -1, dtype=np.int64)
    prv = np.full(n_arms, -1, dtype=np.int64)
    active = np.empty(n_arms, dtype=np.int64)
    n_active = 0
    gval = np.empty(n_arms)
    out = np.empty(checkpoints.shape[0])
    ci = 0
    cum = 0.0
    for n in range(1, horizon + 1):
        if n <= n_arms:
            a = n - 1
        else:
            c = math.sqrt((1 + 1) * math.log(n))
            top = -np.inf
            for q in range(n_active):
                g = active[q]
                gval[q] = gmax[g] + c / math.sqrt(float(g))
                if gval[q] > top:
                    top = gval[q]
            a = n_arms
            for q in range(n_active):
                if gval[q] >= top - tol:
                    g = active[q]
                    b = c / math.sqrt(float(g))
                    j = head[g]
                    while j >= 0:
                        if j < a and y[j] + b >= top - tol:
                            a = j
                        j = nxt[j]
        # play arm a
        for k in range(arm_len[a]):
            dc[arm_idx[a, k]] = 0
        r = 0.0
        for k in range(arm_len[a]):
            var = arm_idx[a, k]
            x = draw_value(kind, p1, p2, seed, var, n, dc[var])
            dc[var] += 1
            r += arm_w[a, k] * x
        g = cnt[a]
        if g > 0:
            # unlink from bucket g
            if prv[a] >= 0:
                nxt[prv[a]] = nxt[a]
            else:
                head[g] = nxt[a]
            if nxt[a] >= 0:
                prv[nxt[a]] = prv[a]
            if head[g] < 0:
                for q in range(n_active):
                    if active[q] == g:
                        active[q] = active[n_active - 1]
                        n_active -= 1
                        break
                gmax[g] = -np.inf
            else:
                gmax[g] = _group_max(y, head, nxt, g)
        y[a] = (y[a] * g + r) / (g + 1)
        cnt[a] = g + 1
        g += 1
        if head[g] < 0:
            active[n_active] = g
            n_active += 1
        prv[a] = -1
        nxt[a] = head[g]
        if head[g] >= 0:
            prv[head[g]] = a
        head[g] = a
        if y[a] > gmax[g]:
            gmax[g] = y[a]
        cum += _gap(genie, arm_value[a], False, tol)
        while ci < checkpoints.shape[0] and checkpoints[ci] == n:
            out[ci] = cum
            ci += 1
    return out
