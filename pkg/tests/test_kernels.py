import numpy as np
import pytest

from conftest import random_graph
from pharmonic import _descent_py, kernels
from pharmonic import graphs as G


def _sweep_inputs(g, boundary, p, rng):
    indptr, adj_v, adj_e = g.adjacency
    adj_w = np.ascontiguousarray(g.mu[adj_e] / g.length[adj_e] ** p)
    free = np.ones(g.n, dtype=np.uint8)
    values = rng.normal(size=g.n)
    for v, val in boundary.items():
        free[v] = 0
        values[v] = val
    return np.ascontiguousarray(values), indptr, adj_v, adj_w, free


def test_backend_reported():
    assert kernels.BACKEND in ("cython", "python")
    assert "python" in kernels.available_backends()


@pytest.mark.parametrize("p", [1.5, 2.0, 2.3, 4.0])
def test_backends_agree(p):
    backends = kernels.available_backends()
    if "cython" not in backends:
        pytest.skip("compiled backend not built")
    rng = np.random.default_rng(42)
    for trial in range(5):
        g, boundary = random_graph(rng, 5, 3)
        values, indptr, adj_v, adj_w, free = _sweep_inputs(g, boundary, p, rng)
        v_py = values.copy()
        v_cy = values.copy()
        for _ in range(4):
            d_py = backends["python"](v_py, indptr, adj_v, adj_w, free, p)
            d_cy = backends["cython"](v_cy, indptr, adj_v, adj_w, free, p)
            np.testing.assert_allclose(v_py, v_cy, rtol=0, atol=1e-13)
            assert d_py == pytest.approx(d_cy, abs=1e-13)


def test_sweep_decreases_energy():
    rng = np.random.default_rng(9)
    g, boundary = random_graph(rng, 6, 3)
    p = 2.5
    values, indptr, adj_v, adj_w, free = _sweep_inputs(g, boundary, p, rng)
    prev = G.graph_energy(g, values, p)
    for _ in range(6):
        _descent_py.cd_sweep(values, indptr, adj_v, adj_w, free, p)
        cur = G.graph_energy(g, values, p)
        assert cur <= prev + 1e-12
        prev = cur


def test_sweep_fixes_boundary():
    rng = np.random.default_rng(13)
    g, boundary = random_graph(rng, 4, 4)
    values, indptr, adj_v, adj_w, free = _sweep_inputs(g, boundary, 1.5, rng)
    kernels.cd_sweep(values, indptr, adj_v, adj_w, free, 1.5)
    for v, val in boundary.items():
        assert values[v] == val
