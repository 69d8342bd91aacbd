from pathlib import Path

import numpy as np
import pytest

from randsurf._accel import HAVE_NUMBA
from randsurf.graph import LinkGraph

FIXTURES = Path(__file__).parent / "fixtures"

BACKENDS = ["numpy"] + (["numba"] if HAVE_NUMBA else [])


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


def random_graph(rng, n, density, n_dangling=1, weighted=False, self_loops=False):
    """Random digraph on nodes ``p0..p{n-1}`` with at least ``n_dangling`` sinks."""
    adj = rng.random((n, n)) < density
    if not self_loops:
        np.fill_diagonal(adj, False)
    sinks = rng.choice(n, size=n_dangling, replace=False)
    adj[sinks, :] = False
    edges = []
    for s, t in zip(*np.nonzero(adj)):
        w = float(rng.uniform(0.5, 5.0)) if weighted else 1.0
        edges.append((f"p{s}", f"p{t}", w))
    return LinkGraph.from_edges(edges, nodes=[f"p{i}" for i in range(n)])


def cycle(n):
    return LinkGraph.from_edges([(f"p{i}", f"p{(i + 1) % n}") for i in range(n)])


def star(leaves=3):
    return LinkGraph.from_edges([("hub", f"leaf{i}") for i in range(leaves)])


# one line per acceptance criterion, appended by tests/test_acceptance.py
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
