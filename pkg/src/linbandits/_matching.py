"""Compiled rectangular assignment solver (Hungarian / shortest augmenting path).

``assign_min(cost, tol)`` returns, for an n x m cost matrix with n <= m, the
channel of every row in a minimum-cost assignment. Among all optimal
assignments it returns the lexicographically smallest one (row 0 gets the
smallest column it can have, then row 1, ...); ``tol`` is the absolute
tolerance that decides when two objectives tie.

The tie-break works from the optimal dual: every optimal assignment uses only
edges whose reduced cost is zero and covers every column whose potential is
negative (complementary slackness), so the lexicographic search only needs
feasibility checks on that tight subgraph.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _hungarian(cost):
    n, m = cost.shape
    inf = np.inf
    u = np.zeros(n + 1)
    v = np.zeros(m + 1)
    p = np.zeros(m + 1, dtype=np.int64)
    way = np.zeros(m + 1, dtype=np.int64)
    minv = np.empty(m + 1)
    used = np.zeros(m + 1, dtype=np.bool_)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv[:] = inf
        used[:] = False
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = inf
            j1 = 0
            for j in range(1, m + 1):
                if not used[j]:
                    cur = cost[i0 - 1, j - 1] - u[i0] - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(m + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break
    assign = np.empty(n, dtype=np.int64)
    for j in range(1, m + 1):
        if p[j] != 0:
            assign[p[j] - 1] = j - 1
    return assign, u[1:], v[1:]


@njit(cache=True)
def _augment(adj, r, col_owner, row_col):
    # BFS for an alternating path from free row r; flips it when found.
    nrows, m = adj.shape
    prev_row = np.full(m, -1, dtype=np.int64)
    seen = np.zeros(m, dtype=np.bool_)
    queue = np.empty(nrows + 1, dtype=np.int64)
    head = 0
    tail = 0
    queue[tail] = r
    tail += 1
    while head < tail:
        x = queue[head]
        head += 1
        for c in range(m):
            if adj[x, c] and not seen[c]:
                seen[c] = True
                prev_row[c] = x
                if col_owner[c] < 0:
                    # flip the path ending at free column c
                    cc = c
                    while cc >= 0:
                        xr = prev_row[cc]
                        nxt = row_col[xr]
                        row_col[xr] = cc
                        col_owner[cc] = xr
                        cc = nxt
                    return True
                queue[tail] = col_owner[c]
                tail += 1
    return False


@njit(cache=True)
def _complete(tight, required, fixed_col, n, m, out):
    """Extend the fixed rows (fixed_col[i] >= 0) to an optimal assignment.

    Returns False when no extension uses only tight edges and covers every
    required column. On success ``out`` holds the full assignment.
    """
    taken = np.zeros(m, dtype=np.bool_)
    n_free_rows = 0
    for i in range(n):
        if fixed_col[i] >= 0:
            taken[fixed_col[i]] = True
        else:
            n_free_rows += 1
    n_free_cols = 0
    for c in range(m):
        if not taken[c]:
            n_free_cols += 1
    n_dummy = n_free_cols - n_free_rows
    rows = n_free_rows + n_dummy
    adj = np.zeros((rows, m), dtype=np.bool_)
    ids = np.empty(n_free_rows, dtype=np.int64)
    k = 0
    for i in range(n):
        if fixed_col[i] < 0:
            ids[k] = i
            for c in range(m):
                adj[k, c] = tight[i, c] and not taken[c]
            k += 1
    for d in range(n_dummy):
        for c in range(m):
            adj[n_free_rows + d, c] = (not taken[c]) and (not required[c])
    col_owner = np.full(m, -1, dtype=np.int64)
    row_col = np.full(rows, -1, dtype=np.int64)
    for x in range(rows):
        if not _augment(adj, x, col_owner, row_col):
            return False
    for i in range(n):
        out[i] = fixed_col[i]
    for k in range(n_free_rows):
        out[ids[k]] = row_col[k]
    return True


@njit(cache=True)
def assign_min(cost, tol):
    n, m = cost.shape
    assign, u, v = _hungarian(cost)
    tight = np.zeros((n, m), dtype=np.bool_)
    required = np.zeros(m, dtype=np.bool_)
    for c in range(m):
        required[c] = v[c] < -tol
    ambiguous = False
    for i in range(n):
        for c in range(m):
            t = abs(cost[i, c] - u[i] - v[c]) <= tol
            tight[i, c] = t
            if t and c < assign[i]:
                ambiguous = True
    if not ambiguous:
        return assign
    fixed = np.full(n, -1, dtype=np.int64)
    trial = np.empty(n, dtype=np.int64)
    for i in range(n):
        for c in range(assign[i]):
            if not tight[i, c]:
                continue
            clash = False
            for r in range(i):
                if fixed[r] == c:
                    clash = True
                    break
            if clash:
                continue
            fixed[i] = c
            if _complete(tight, required, fixed, n, m, trial):
                for r in range(n):
                    assign[r] = trial[r]
                break
            fixed[i] = -1
        fixed[i] = assign[i]
    return assign


@njit(cache=True)
def assign_max(weight, tol):
    return assign_min(-weight, tol)
