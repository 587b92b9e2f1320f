import itertools

import numpy as np
import pytest

from linbandits.core import ActionVector, ExplicitArms, SourceDestPaths, SpanningTrees


def random_digraph(rng, n_nodes, n_edges):
    """Random simple digraph (no self loops, no parallel edges) on n_nodes nodes."""
    pairs = [(u, v) for u, v in itertools.permutations(range(n_nodes), 2)]
    pick = rng.choice(len(pairs), size=min(n_edges, len(pairs)), replace=False)
    return tuple(pairs[k] for k in sorted(pick))


def random_connected_graph(rng, n_nodes, n_edges):
    """Random connected undirected graph: a random spanning tree plus extra edges."""
    order = rng.permutation(n_nodes)
    edges = {tuple(sorted((int(order[k]), int(order[rng.integers(0, k)])))) for k in range(1, n_nodes)}
    all_pairs = list(itertools.combinations(range(n_nodes), 2))
    while len(edges) < min(n_edges, len(all_pairs)):
        edges.add(all_pairs[rng.integers(0, len(all_pairs))])
    return tuple(sorted(edges))


def flow_balance(problem: SourceDestPaths, arm: ActionVector):
    out = np.zeros(problem.n_nodes, dtype=int)
    for k in arm.indices:
        u, v = problem.edges[k]
        out[u] += 1
        out[v] -= 1
    return out


def connects_all(problem: SpanningTrees, arm: ActionVector) -> bool:
    parent = list(range(problem.n_nodes))

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for k in arm.indices:
        u, v = problem.edges[k]
        parent[find(u)] = find(v)
    return len({find(x) for x in range(problem.n_nodes)}) == 1


@pytest.fixture
def triangle_paths():
    # s=0, a=1, d=2: edges s->a, a->d, s->d
    return SourceDestPaths(3, ((0, 1), (1, 2), (0, 2)), 0, 2)


@pytest.fixture
def triangle_trees():
    return SpanningTrees(3, ((0, 1), (1, 2), (0, 2)))


@pytest.fixture
def unit_arms4():
    return ExplicitArms.singletons(4)


# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
