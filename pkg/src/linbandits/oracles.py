"""Exact solvers for the deterministic linear problem max/min over F of sum a_i w_i.

One solver per action-set variant:

* explicit arm lists: a direct scan,
* bipartite matchings: Hungarian algorithm (``_matching``),
* source-destination paths: Dijkstra or Bellman-Ford,
* spanning trees: Kruskal or Prim,

plus brute-force enumeration of small structured sets, which is what the test
suite uses as the independent reference.

Ties: explicit lists and matchings return the optimal arm with the
lexicographically smallest support (within ``TIE_TOL``). Path and tree solvers
break ties by edge index inside the algorithm, which is deterministic but not
necessarily the lexicographic minimum.
"""

from __future__ import annotations

import heapq
import itertools
import logging
from dataclasses import dataclass

import numpy as np

from ._matching import assign_max, assign_min
from .core import (TIE_TOL, ActionSet, ActionVector, BipartiteMatching, ExplicitArms,
                   GroundTruth, SourceDestPaths, SpanningTrees)
from .errors import (ConfigurationError, ContractViolation, InfeasibleError, SizeLimitError,
                     UnsupportedVariantError)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class OracleSolution:
    arm: ActionVector
    objective: float
    floored: bool = False  # True when negative path weights were raised to 0


def _weights(problem: ActionSet, w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or w.shape[0] != problem.n_vars:
        raise ContractViolation(f"weight vector has shape {w.shape}, expected ({problem.n_vars},)")
    if not np.all(np.isfinite(w)):
        raise ContractViolation("weight vector has non-finite entries")
    return w


def _explicit_pick(arms, w, maximize: bool) -> int:
    values = [a.value(w) for a in arms]
    if maximize:
        best = max(values)
        return next(k for k, v in enumerate(values) if v >= best - TIE_TOL)
    best = min(values)
    return next(k for k, v in enumerate(values) if v <= best + TIE_TOL)


def _matching(problem: BipartiteMatching, w: np.ndarray, maximize: bool) -> ActionVector:
    if problem.users > problem.channels:
        raise ConfigurationError(
            f"{problem.users} users cannot be matched onto {problem.channels} channels")
    W = np.ascontiguousarray(w.reshape(problem.users, problem.channels))
    assign = assign_max(W, TIE_TOL) if maximize else assign_min(W, TIE_TOL)
    return problem.arm_from_assignment(assign)


# ---------------------------------------------------------------------------
# Shortest paths
# ---------------------------------------------------------------------------

def _out_edges(n_nodes, edges):
    adj = [[] for _ in range(n_nodes)]
    for k, (u, v) in enumerate(edges):
        adj[u].append((k, v))
    return adj


def _trace_back(pred, edges, source, dest):
    path = []
    node = dest
    while node != source:
        k = pred[node]
        path.append(k)
        node = edges[k][0]
    return path


def dijkstra(n_nodes, edges, w, source, dest) -> list[int]:
    """Edge indices of a shortest source->dest path under non-negative weights ``w``."""
    adj = _out_edges(n_nodes, edges)
    dist = [np.inf] * n_nodes
    pred = [-1] * n_nodes
    done = [False] * n_nodes
    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        if u == dest:
            break
        for k, v in adj[u]:
            nd = d + w[k]
            if nd < dist[v]:
                dist[v] = nd
                pred[v] = k
                heapq.heappush(heap, (nd, v))
    if not np.isfinite(dist[dest]):
        raise InfeasibleError(f"no path from node {source} to node {dest}")
    return _trace_back(pred, edges, source, dest)


def bellman_ford(n_nodes, edges, w, source, dest) -> list[int]:
    """Same contract as :func:`dijkstra`, by edge relaxation."""
    dist = [np.inf] * n_nodes
    pred = [-1] * n_nodes
    dist[source] = 0.0
    for _ in range(n_nodes - 1):
        changed = False
        for k, (u, v) in enumerate(edges):
            if dist[u] + w[k] < dist[v]:
                dist[v] = dist[u] + w[k]
                pred[v] = k
                changed = True
        if not changed:
            break
    if not np.isfinite(dist[dest]):
        raise InfeasibleError(f"no path from node {source} to node {dest}")
    return _trace_back(pred, edges, source, dest)


# ---------------------------------------------------------------------------
# Spanning trees
# ---------------------------------------------------------------------------

class _DisjointSets:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[max(ra, rb)] = min(ra, rb)
        return True


def kruskal(n_nodes, edges, w, maximize=False) -> list[int]:
    """Edge indices of a minimum (or maximum) spanning tree."""
    sign = -1.0 if maximize else 1.0
    order = sorted(range(len(edges)), key=lambda k: (sign * w[k], k))
    ds = _DisjointSets(n_nodes)
    tree = [k for k in order if ds.union(*edges[k])]
    if len(tree) != n_nodes - 1:
        raise InfeasibleError("graph is disconnected; no spanning tree exists")
    return sorted(tree)


def prim(n_nodes, edges, w, maximize=False) -> list[int]:
    sign = -1.0 if maximize else 1.0
    adj = [[] for _ in range(n_nodes)]
    for k, (u, v) in enumerate(edges):
        if u != v:
            adj[u].append((k, v))
            adj[v].append((k, u))
    in_tree = [False] * n_nodes
    in_tree[0] = True
    heap = [(sign * w[k], k, v) for k, v in adj[0]]
    heapq.heapify(heap)
    tree = []
    while heap and len(tree) < n_nodes - 1:
        _, k, v = heapq.heappop(heap)
        if in_tree[v]:
            continue
        in_tree[v] = True
        tree.append(k)
        for k2, v2 in adj[v]:
            if not in_tree[v2]:
                heapq.heappush(heap, (sign * w[k2], k2, v2))
    if len(tree) != n_nodes - 1:
        raise InfeasibleError("graph is disconnected; no spanning tree exists")
    return sorted(tree)


# ---------------------------------------------------------------------------
# Public oracle entry points
# ---------------------------------------------------------------------------

def _solution(arm: ActionVector, w, floored=False) -> OracleSolution:
    return OracleSolution(arm, arm.value(w), floored)


def solve_max(problem: ActionSet, w) -> OracleSolution:
    """Arm of F maximizing sum a_i w_i."""
    w = _weights(problem, w)
    if isinstance(problem, ExplicitArms):
        return _solution(problem.arms[_explicit_pick(problem.arms, w, True)], w)
    if isinstance(problem, BipartiteMatching):
        return _solution(_matching(problem, w, True), w)
    if isinstance(problem, SpanningTrees):
        alg = prim if problem.algorithm == "prim" else kruskal
        tree = alg(problem.n_nodes, problem.edges, w, maximize=True)
        return _solution(ActionVector.from_support(tree, problem.n_vars), w)
    if isinstance(problem, SourceDestPaths):
        raise UnsupportedVariantError(
            "maximizing over s-d paths is the longest-path problem; use the cost-minimizing policy")
    raise UnsupportedVariantError(f"no oracle for {type(problem).__name__}")


def solve_min(problem: ActionSet, w) -> OracleSolution:
    """Arm of F minimizing sum a_i w_i.

    Path weights below zero are raised to zero before solving; the returned
    objective is computed with the raised weights and ``floored`` is set.
    """
    w = _weights(problem, w)
    if isinstance(problem, ExplicitArms):
        return _solution(problem.arms[_explicit_pick(problem.arms, w, False)], w)
    if isinstance(problem, BipartiteMatching):
        return _solution(_matching(problem, w, False), w)
    if isinstance(problem, SpanningTrees):
        alg = prim if problem.algorithm == "prim" else kruskal
        tree = alg(problem.n_nodes, problem.edges, w)
        return _solution(ActionVector.from_support(tree, problem.n_vars), w)
    if isinstance(problem, SourceDestPaths):
        floored = bool(np.any(w < 0))
        if floored:
            log.debug("flooring %d negative edge weights at 0", int(np.sum(w < 0)))
            w = np.maximum(w, 0.0)
        alg = bellman_ford if problem.algorithm == "bellman-ford" else dijkstra
        path = alg(problem.n_nodes, problem.edges, w, problem.source, problem.dest)
        return _solution(ActionVector.from_support(path, problem.n_vars), w, floored)
    raise UnsupportedVariantError(f"no oracle for {type(problem).__name__}")


def solve(problem: ActionSet, w, minimize: bool = False) -> OracleSolution:
    return solve_min(problem, w) if minimize else solve_max(problem, w)


def solve_top_k(problem: ActionSet, w, K: int) -> list[OracleSolution]:
    """The K arms with the largest objectives, best first.

    Each pick is the first remaining arm (in list order) within ``TIE_TOL`` of
    the remaining maximum, so ``K = 1`` agrees with :func:`solve_max`.
    """
    if not isinstance(problem, ExplicitArms):
        raise UnsupportedVariantError("top-K selection is only available for explicit arm lists")
    if K < 1 or K > len(problem.arms):
        raise ConfigurationError(f"K = {K} outside 1..{len(problem.arms)}")
    w = _weights(problem, w)
    values = [a.value(w) for a in problem.arms]
    remaining = list(range(len(values)))
    picks = []
    for _ in range(K):
        best = max(values[k] for k in remaining)
        k = next(k for k in remaining if values[k] >= best - TIE_TOL)
        remaining.remove(k)
        picks.append(OracleSolution(problem.arms[k], values[k]))
    return picks


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------

def _simple_paths(n_nodes, edges, source, dest):
    adj = _out_edges(n_nodes, edges)
    on_path = [False] * n_nodes
    on_path[source] = True
    stack = [(source, iter(adj[source]))]
    edge_stack = []
    while stack:
        node, it = stack[-1]
        step = next(it, None)
        if step is None:
            stack.pop()
            on_path[node] = False
            if edge_stack:
                edge_stack.pop()
            continue
        k, v = step
        if v == dest:
            yield edge_stack + [k]
        elif not on_path[v]:
            on_path[v] = True
            edge_stack.append(k)
            stack.append((v, iter(adj[v])))


def _spanning_trees(n_nodes, edges):
    for combo in itertools.combinations(range(len(edges)), n_nodes - 1):
        ds = _DisjointSets(n_nodes)
        if all(ds.union(*edges[k]) for k in combo):
            yield list(combo)


def enumerate_brute_force(problem: ActionSet, limit: int = 100_000) -> ExplicitArms:
    """Every arm of a (small) structured set, in lexicographic support order."""
    if isinstance(problem, ExplicitArms):
        if len(problem.arms) > limit:
            raise SizeLimitError(f"{len(problem.arms)} arms exceed limit {limit}", len(problem.arms))
        return problem
    if isinstance(problem, BipartiteMatching):
        if problem.users > problem.channels:
            raise ConfigurationError(
                f"{problem.users} users cannot be matched onto {problem.channels} channels")
        gen = (problem.arm_from_assignment(p)
               for p in itertools.permutations(range(problem.channels), problem.users))
    elif isinstance(problem, SourceDestPaths):
        gen = (ActionVector.from_support(p, problem.n_vars)
               for p in _simple_paths(problem.n_nodes, problem.edges, problem.source, problem.dest))
    elif isinstance(problem, SpanningTrees):
        gen = (ActionVector.from_support(t, problem.n_vars)
               for t in _spanning_trees(problem.n_nodes, problem.edges))
    else:
        raise UnsupportedVariantError(f"cannot enumerate {type(problem).__name__}")
    arms = []
    for arm in gen:
        if len(arms) >= limit:
            raise SizeLimitError(
                f"feasible set has more than {limit} arms (stopped after {len(arms) + 1})",
                len(arms) + 1)
        arms.append(arm)
    if not arms:
        raise InfeasibleError("feasible set is empty")
    arms.sort(key=lambda a: a.indices)
    return ExplicitArms(tuple(arms), problem.n_vars)


# ---------------------------------------------------------------------------
# Initialization support and ground truth
# ---------------------------------------------------------------------------

def _path_through_edge(problem: SourceDestPaths, k: int) -> list[int] | None:
    u, v = problem.edges[k]
    s, d = problem.source, problem.dest
    if v == s or u == d or u == v:
        return None
    adj = _out_edges(problem.n_nodes, problem.edges)

    def reach(start, blocked):
        # BFS from start to d avoiding blocked nodes; returns edge list or None
        if start == d:
            return []
        pred = {start: None}
        queue = [start]
        for x in queue:
            for kk, y in adj[x]:
                if y in pred or y in blocked:
                    continue
                pred[y] = kk
                if y == d:
                    out = []
                    while y != start:
                        out.append(pred[y])
                        y = problem.edges[pred[y]][0]
                    return out[::-1]
                queue.append(y)
        return None

    # first part: simple paths s -> u that avoid v, tried in DFS order
    if u == s:
        tail = reach(v, {s})
        return None if tail is None else [k] + tail
    for head in _simple_paths(problem.n_nodes, problem.edges, s, u):
        nodes = {s} | {problem.edges[e][1] for e in head}
        if v in nodes or d in nodes:
            continue
        tail = reach(v, nodes)
        if tail is not None:
            return head + [k] + tail
    return None


def covering_arm(problem: ActionSet, var: int, observed: np.ndarray) -> ActionVector | None:
    """An arm whose support contains ``var``, preferring still-unobserved variables.

    Returns None when no arm of F contains ``var`` (a dead variable).
    """
    observed = np.asarray(observed, dtype=bool)
    if isinstance(problem, ExplicitArms):
        best, best_score = None, -1
        for a in problem.arms:
            if var in a.indices:
                score = sum(1 for i in a.indices if not observed[i])
                if score > best_score:
                    best, best_score = a, score
        return best
    if isinstance(problem, BipartiteMatching):
        w = (~observed).astype(float)
        w[var] += problem.users + 1
        return solve_max(problem, w).arm
    if isinstance(problem, SpanningTrees):
        u, v = problem.edges[var]
        if u == v:
            return None
        w = observed.astype(float)
        w[var] = -1.0
        return solve_min(problem, w).arm
    if isinstance(problem, SourceDestPaths):
        path = _path_through_edge(problem, var)
        return None if path is None else ActionVector.from_support(path, problem.n_vars)
    raise UnsupportedVariantError(f"no covering rule for {type(problem).__name__}")


def certify_ground_truth(problem: ActionSet, theta, minimize: bool = False,
                         enumerate_limit: int | None = 20_000) -> GroundTruth:
    """Optimum of the true means via the exact oracle.

    When F can be enumerated within ``enumerate_limit`` arms, the enumeration
    also supplies delta_min / delta_max and must agree with the oracle.
    """
    theta = _weights(problem, theta)
    sol = solve(problem, theta, minimize)
    dmin = dmax = None
    if enumerate_limit is not None:
        try:
            arms = enumerate_brute_force(problem, enumerate_limit).arms
        except SizeLimitError:
            arms = None
        if arms is not None:
            values = np.array([a.value(theta) for a in arms])
            brute = values.min() if minimize else values.max()
            if abs(brute - sol.objective) > 1e-9:
                raise AssertionError(
                    f"oracle optimum {sol.objective} disagrees with enumeration {brute}")
            gaps = values - sol.objective if minimize else sol.objective - values
            sub = gaps[gaps > TIE_TOL]
            if sub.size:
                dmin, dmax = float(sub.min()), float(sub.max())
    return GroundTruth(theta, sol.objective, sol.arm, minimize, dmin, dmax)


def arm_gaps(arms: ExplicitArms, truth: GroundTruth) -> np.ndarray:
    """Per-arm gap to the optimum (0 for every optimal arm)."""
    return np.array([truth.gap(a) for a in arms.arms])
