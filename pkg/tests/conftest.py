import numpy as np
import pytest

from pharmonic import graphs


@pytest.fixture(scope="session")
def tree20():
    return graphs.build_binary_tree(20)


@pytest.fixture(scope="session")
def grid132():
    return graphs.build_grid_graph(132)


@pytest.fixture(scope="session")
def grid132_center(grid132):
    center = (grid132.n - 1) // 2
    assert np.all(grid132.coords[center] == 0)
    return center


def random_graph(rng, n_interior, n_boundary, extra_edges=2):
    """Connected random graph: spanning tree plus extra edges, unit lengths,
    random densities.  Returns (graph, boundary dict)."""
    n = n_interior + n_boundary
    edges = []
    for v in range(1, n):
        parent = int(rng.integers(0, v))
        edges.append((parent, v, 1.0, float(rng.uniform(0.5, 2.0))))
    tries = 0
    added = 0
    existing = {(min(a, b), max(a, b)) for a, b, _, _ in edges}
    while added < extra_edges and tries < 20:
        tries += 1
        a, b = rng.integers(0, n, size=2)
        a, b = int(a), int(b)
        if a == b or (min(a, b), max(a, b)) in existing:
            continue
        existing.add((min(a, b), max(a, b)))
        edges.append((a, b, 1.0, float(rng.uniform(0.5, 2.0))))
        added += 1
    g = graphs.MetricGraph(n, edges)
    bdry_vertices = rng.choice(n, size=n_boundary, replace=False)
    boundary = {int(v): float(rng.uniform(0.0, 1.0)) for v in bdry_vertices}
    return g, boundary
