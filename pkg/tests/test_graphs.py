import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pharmonic import graphs as G
from pharmonic.errors import InvalidConfig, UnknownVertex


# -- construction and validation ------------------------------------------------


def test_rejects_self_loops():
    with pytest.raises(InvalidConfig):
        G.MetricGraph(2, [(0, 0, 1.0, 1.0)])


def test_rejects_nonpositive_lengths():
    with pytest.raises(InvalidConfig):
        G.MetricGraph(2, [(0, 1, 0.0, 1.0)])
    with pytest.raises(InvalidConfig):
        G.MetricGraph(2, [(0, 1, 1.0, -1.0)])


def test_rejects_bad_vertex():
    with pytest.raises(UnknownVertex):
        G.MetricGraph(2, [(0, 5, 1.0, 1.0)])


def test_graph_metric_finite_on_component():
    g = G.build_path_graph(3)
    d = g.distances_from(0)
    assert d[-1] == pytest.approx(6.0)


# -- residuals --------------------------------------------------------------------


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_path_residual_zero(p):
    g = G.MetricGraph(3, [(0, 1, 1.0, 1.0), (1, 2, 1.0, 1.0)])
    u = np.array([0.0, 1.0, 2.0])
    assert G.p_laplacian_residual(g, u, p, 1) == 0.0


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_tree_root_residual_zero(p):
    # Root with children valued +1 and -1 over equal edge measures.
    g = G.MetricGraph(3, [(0, 1, 1.0, 1.0), (0, 2, 1.0, 1.0)])
    u = np.array([0.0, 1.0, -1.0])
    assert G.p_laplacian_residual(g, u, p, 0) == 0.0


def test_star_weighted_average():
    # Center 1 equals the weighted average of leaves (0, 0, 3) at p = 2.
    g = G.MetricGraph(
        4, [(0, 1, 1.0, 1.0), (0, 2, 1.0, 1.0), (0, 3, 1.0, 1.0)]
    )
    u = np.array([1.0, 0.0, 0.0, 3.0])
    assert G.p_laplacian_residual(g, u, 2.0, 0) == 0.0


def test_residual_unknown_vertex():
    g = G.build_path_graph(2)
    with pytest.raises(UnknownVertex):
        G.p_laplacian_residual(g, np.zeros(g.n), 2.0, 99)


def test_residuals_vectorized_matches_scalar():
    rng = np.random.default_rng(3)
    g = G.build_grid_graph(2)
    u = rng.normal(size=g.n)
    all_res = G.p_laplacian_residuals(g, u, 2.5)
    for v in range(g.n):
        assert all_res[v] == pytest.approx(
            G.p_laplacian_residual(g, u, 2.5, v), abs=1e-12
        )


# -- energy ------------------------------------------------------------------------


def test_energy_constant_zero():
    g = G.build_grid_graph(2)
    assert G.graph_energy(g, np.full(g.n, 4.2), 2.0) == 0.0


def test_energy_single_edge():
    g = G.MetricGraph(2, [(0, 1, 1.0, 1.0)])
    assert G.graph_energy(g, np.array([0.0, 2.0]), 3.0) == 8.0


def test_energy_additive_over_subsets():
    rng = np.random.default_rng(1)
    g = G.build_grid_graph(2)
    u = rng.normal(size=g.n)
    full = G.graph_energy(g, u, 2.5)
    half_a = G.graph_energy(g, u, 2.5, edge_subset=np.arange(0, g.m, 2))
    half_b = G.graph_energy(g, u, 2.5, edge_subset=np.arange(1, g.m, 2))
    assert full == pytest.approx(half_a + half_b, rel=1e-12)


@settings(max_examples=25, deadline=None)
@given(a=st.floats(-3, 3), b=st.floats(-5, 5))
def test_energy_scaling_covariance(a, b):
    g = G.build_binary_tree(4)
    u = G.paper_tree_function(g, 2.5).values
    e = G.graph_energy(g, u, 2.5)
    e_scaled = G.graph_energy(g, a * u + b, 2.5)
    assert e_scaled == pytest.approx(abs(a) ** 2.5 * e, rel=1e-9, abs=1e-12)


# -- binary tree --------------------------------------------------------------------


def test_tree_depth1_structure():
    t = G.build_binary_tree(1)
    assert t.n == 3
    np.testing.assert_allclose(t.mu, [1.0, 1.0])


def test_tree_depth2_measures():
    t = G.build_binary_tree(2)
    assert t.n == 7
    mu = {
        (int(a), int(b)): m
        for a, b, m in zip(t.edge_u, t.edge_v, t.mu)
    }
    # Ray: v0=0, v1=1, v2=3; off-ray v1'=2, v2'=4.
    assert mu[(0, 1)] == 1.0 and mu[(0, 2)] == 1.0
    assert mu[(1, 3)] == 0.5 and mu[(1, 4)] == 0.5
    assert mu[(2, 5)] == 1.0 and mu[(2, 6)] == 1.0


def test_tree_depth3_off_ray_measures():
    t = G.build_binary_tree(3)
    assert t.n == 15
    # Children edges of v2' (vertex 4) belong to the second subtree: 2^(1-2).
    mu = {
        (int(a), int(b)): m
        for a, b, m in zip(t.edge_u, t.edge_v, t.mu)
    }
    assert mu[(4, 9)] == 0.5 and mu[(4, 10)] == 0.5


def test_tree_rejects_depth_zero():
    with pytest.raises(InvalidConfig):
        G.build_binary_tree(0)


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_paper_function_values(p):
    t = G.build_binary_tree(3)
    u = G.paper_tree_function(t, p)
    ray = t.ray
    assert u.values[ray[0]] == 0.0
    assert u.values[ray[3]] == 3.0
    assert u.values[2] == -1.0  # v1'
    assert u.values[4] == 2.0  # v2'
    # One recursion step below v2' (parent gap +1, factor 2^(1/(1-p))).
    q = 2.0 ** (1.0 / (1.0 - p))
    assert u.values[9] == pytest.approx(2.0 + q, rel=1e-15)


def test_paper_function_recursion_p2():
    # At p = 2 the children of v1' sit at -1 - (1/2) * 1 = -3/2.
    t = G.build_binary_tree(2)
    u = G.paper_tree_function(t, 2.0)
    assert u.values[5] == -1.5 and u.values[6] == -1.5


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_paper_function_residuals(p):
    t = G.build_binary_tree(8)
    u = G.paper_tree_function(t, p)
    res = G.p_laplacian_residuals(t, u, p)
    assert np.abs(res[t.interior_mask()]).max() < 1e-13


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_bounded_function_values(p):
    t = G.build_binary_tree(6)
    ub = G.bounded_tree_function(t, p)
    # Ray values: 0 at the root, 1 from v1 on.
    assert ub.values[0] == 0.0
    assert ub.values[t.ray[5]] == 1.0
    # First subtree matches the unbounded function.
    u = G.paper_tree_function(t, p)
    g1 = t.subtree_level == 1
    np.testing.assert_array_equal(ub.values[g1], u.values[g1])
    # Third and deeper subtrees are constant 1.
    g3 = t.subtree_level >= 3
    assert np.all(ub.values[g3] == 1.0)


def test_bounded_function_residual_v1_p2():
    t = G.build_binary_tree(3)
    ub = G.bounded_tree_function(t, 2.0)
    assert abs(G.p_laplacian_residual(t, ub, 2.0, 1)) < 1e-12


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_bounded_function_residuals_and_bound(p):
    t = G.build_binary_tree(8)
    ub = G.bounded_tree_function(t, p)
    res = G.p_laplacian_residuals(t, ub, p)
    assert np.abs(res[t.interior_mask()]).max() < 1e-13
    e_u = G.graph_energy(t, G.paper_tree_function(t, p), p)
    e_b = G.graph_energy(t, ub, p)
    assert e_b <= 2.0 ** (p / (p - 1.0)) * e_u * (1 + 1e-12)
    assert np.abs(ub.values).max() <= 1.0 + 2.0 ** (1.0 / (p - 1.0)) * (
        1.0 + 1.0 / (2.0 ** (1.0 / (p - 1.0)) - 1.0 + 1e-300)
    ) + 10.0  # crude depth-independent cap


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
@pytest.mark.parametrize("depth", [1, 2, 3, 6, 10])
def test_tree_energy_matches_series(p, depth):
    t = G.build_binary_tree(depth)
    e = G.graph_energy(t, G.paper_tree_function(t, p), p)
    assert e == pytest.approx(G.tree_energy_partial_sum(p, depth), abs=1e-10)


def test_tree_energy_limits():
    assert G.tree_energy_limit(2.0) == pytest.approx(6.0)
    assert G.tree_energy_limit(3.0) == pytest.approx(6.0 + 2.0 * math.sqrt(2.0))


def test_bounded_sup_depth_independent():
    # The sup grows with depth but stays under the closed-form cap
    # 2^(1/(p-1)) * (1 + q/(1-q)) + 1 of the infinite tree.
    p = 2.0
    q = 2.0 ** (1.0 / (1.0 - p))
    cap = 2.0 ** (1.0 / (p - 1.0)) * (1.0 + q / (1.0 - q)) + 1.0
    sups = []
    for depth in (4, 8, 12):
        t = G.build_binary_tree(depth)
        sups.append(float(np.abs(G.bounded_tree_function(t, p).values).max()))
    assert sups == sorted(sups)
    assert all(s <= cap + 1e-12 for s in sups)


# -- strip, grid, path ----------------------------------------------------------------


def test_strip_three_rails():
    g = G.build_strip_graph(4, 2)
    ys = sorted(set(float(y) for y in g.coords[:, 1]))
    assert ys == [0.0, 0.5, 1.0]


def test_strip_mass_equals_area():
    g = G.build_strip_graph(8, 3)
    assert g.total_mass() == pytest.approx(16.0, rel=1e-12)


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_strip_comparison_energy_closed_form(p):
    # Piecewise-linear ramp over [0, n]: energy n^(1-p) / 2 on this model.
    for n in (4, 8):
        g = G.build_strip_graph(n, 2)
        v = G.strip_comparison_function(g, float(n))
        e = G.graph_energy(g, v, p)
        assert e == pytest.approx(float(n) ** (1.0 - p) / 2.0, rel=1e-12)


def test_strip_constant_zero_energy():
    g = G.build_strip_graph(4, 2)
    assert G.graph_energy(g, np.ones(g.n), 2.0) == 0.0


def test_grid_and_path_coordinates():
    g = G.build_grid_graph(2)
    assert g.n == 25 and g.m == 40
    u = G.coordinate_function(g, 1)
    assert set(np.unique(u.values)) == {-2.0, -1.0, 0.0, 1.0, 2.0}
    pg = G.build_path_graph(3)
    assert list(G.coordinate_function(pg).values) == [-3, -2, -1, 0, 1, 2, 3]


# -- file formats -----------------------------------------------------------------------


def test_edge_list_roundtrip(tmp_path):
    path = tmp_path / "graph.txt"
    path.write_text(
        "# comment line\n"
        "a b 1.0 2.0\n"
        "b c 0.5 1.0  # trailing comment\n"
    )
    g = G.read_edge_list(path)
    assert g.n == 3 and g.m == 2
    assert g.names == ["a", "b", "c"]
    assert g.length[1] == 0.5 and g.density[0] == 2.0

    roles = tmp_path / "roles.txt"
    roles.write_text("a 0.0\nc 2.5\n")
    bdry = G.read_boundary_values(roles, g)
    assert bdry == {0: 0.0, 2: 2.5}

    u = G.GraphFunction(g, np.array([0.0, 1.0, 2.5]))
    lines = G.graph_function_csv_lines(u)
    assert lines[0] == "vertex,value"
    assert lines[1] == "a,0.0"


def test_edge_list_errors(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("a b 1.0\n")
    with pytest.raises(InvalidConfig):
        G.read_edge_list(path)
    path.write_text("")
    with pytest.raises(InvalidConfig):
        G.read_edge_list(path)
