import math

import numpy as np
import pytest

from conftest import random_graph
from pharmonic import geometry as geo
from pharmonic import graphs as G
from pharmonic import quasimin as Q
from pharmonic.errors import DegenerateSupport, InsufficientRadii
from pharmonic.solver import solve_dirichlet


@pytest.fixture(scope="module")
def path40():
    return G.build_path_graph(40)


# -- quasimin_ratio ---------------------------------------------------------------


def test_solver_output_ratio_one():
    rng = np.random.default_rng(2)
    g, boundary = random_graph(rng, 6, 3)
    for p in (1.5, 2.0, 3.0):
        u = solve_dirichlet(g, p, boundary)
        sups = Q.ball_supports(g, [1.0, 2.0, 3.0], boundary=boundary)
        rep = Q.quasimin_ratio(g, u, p, sups)
        assert rep.q_estimate == pytest.approx(1.0, abs=1e-8)
        assert rep.is_p_harmonic()


def test_abs_value_infinite_ratio(path40):
    u = G.GraphFunction(path40, np.abs(path40.coords[:, 0]))
    rep = Q.quasimin_ratio(
        path40, u, 2.0, [frozenset(range(1, path40.n - 1))]
    )
    assert rep.q_estimate == math.inf


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_paper_tree_function_ratio_one(p):
    t = G.build_binary_tree(5)
    u = G.paper_tree_function(t, p)
    leaves = np.flatnonzero(~t.interior_mask())
    sups = Q.ball_supports(t, [1.0, 2.0], centers=range(0, 7), boundary=leaves)
    rep = Q.quasimin_ratio(t, u, p, sups)
    assert rep.q_estimate == pytest.approx(1.0, abs=1e-8)


def test_ratios_at_least_one():
    # Replacement energy is minimal, so every ratio is >= 1 - tol.
    rng = np.random.default_rng(8)
    g, boundary = random_graph(rng, 5, 3)
    u = G.GraphFunction(g, rng.normal(size=g.n))
    sups = Q.ball_supports(g, [1.0, 2.0])
    rep = Q.quasimin_ratio(g, u, 2.0, sups)
    for res in rep.per_support:
        assert res.ratio >= 1.0 - 1e-9


def test_nested_supports_monotone_replacement():
    rng = np.random.default_rng(12)
    g, boundary = random_graph(rng, 6, 2)
    u = G.GraphFunction(g, rng.normal(size=g.n))
    inner = frozenset(list(range(2)))
    outer = frozenset(list(range(4)))
    rep = Q.quasimin_ratio(g, u, 2.0, [inner, outer])
    by_support = {r.support: r for r in rep.per_support}
    assert (
        by_support[outer].energy_replacement
        <= by_support[outer].energy_original + 1e-12
    )


def test_degenerate_support_detected(path40):
    with pytest.raises(DegenerateSupport):
        Q.quasimin_ratio(path40, G.coordinate_function(path40), 2.0,
                         [frozenset(range(path40.n))])


# -- weak maximum principle ----------------------------------------------------------


def test_weak_max_on_solver_output():
    rng = np.random.default_rng(3)
    g, boundary = random_graph(rng, 5, 3)
    u = solve_dirichlet(g, 2.0, boundary)
    interior = [v for v in range(g.n) if v not in boundary]
    ok, witness = Q.weak_max_check(g, u, interior)
    assert ok and witness is None


def test_weak_max_detects_bump(path40):
    vals = np.zeros(path40.n)
    vals[40] = 5.0
    ok, witness = Q.weak_max_check(path40, G.GraphFunction(path40, vals), [40])
    assert not ok and witness == 40


def test_weak_max_constant(path40):
    ok, _ = Q.weak_max_check(
        path40, G.GraphFunction(path40, np.ones(path40.n)), [3, 4, 5]
    )
    assert ok


def test_weak_max_whole_component_vacuous(path40):
    ok, _ = Q.weak_max_check(
        path40, G.coordinate_function(path40), list(range(path40.n))
    )
    assert ok


# -- oscillation and Caccioppoli ------------------------------------------------------


def test_oscillation_constant_zero(path40):
    u = G.GraphFunction(path40, np.full(path40.n, 2.0))
    assert Q.oscillation_estimate_check(path40, u, geo.Ball(path40, 40, 4.0), 1.0, 2.0) == 0.0


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
@pytest.mark.parametrize("r", [2.0, 5.0, 7.5])
def test_oscillation_line_exact(path40, p, r):
    u = G.coordinate_function(path40)
    got = Q.oscillation_estimate_check(path40, u, geo.Ball(path40, 40, r), 1.0, p)
    assert got == pytest.approx(2.0 * 2.0 ** (-1.0 / p), abs=1e-12)


def test_oscillation_tree_stable():
    t = G.build_binary_tree(9)
    u = G.paper_tree_function(t, 2.0)
    v5 = int(t.ray[5])
    vals = [
        Q.oscillation_estimate_check(t, u, geo.Ball(t, v5, r), 1.0, 2.0)
        for r in (1.0, 2.0, 4.0)
    ]
    assert all(math.isfinite(v) and v > 0 for v in vals)
    assert max(vals) / min(vals) < 4.0


def test_caccioppoli_flags_constant(path40):
    u = G.GraphFunction(path40, np.zeros(path40.n))
    assert math.isnan(Q.caccioppoli_check(path40, u, geo.Ball(path40, 40, 4.0), 2.0))


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_caccioppoli_line_exact(path40, p):
    u = G.coordinate_function(path40)
    got = Q.caccioppoli_check(path40, u, geo.Ball(path40, 40, 8.0), p)
    assert got == pytest.approx(2.0 ** (-1.0 - 1.0 / p), abs=1e-12)


def test_caccioppoli_grid_solver_stable(grid132, grid132_center):
    u = solve_dirichlet(
        grid132,
        2.0,
        {
            int(i): float(grid132.coords[i, 0])
            for i in np.flatnonzero(np.abs(grid132.coords).max(axis=1) == 132)
        },
    )
    vals = [
        Q.caccioppoli_check(grid132, u, geo.Ball(grid132, grid132_center, r), 2.0)
        for r in (4.0, 8.0, 16.0)
    ]
    assert max(vals) / min(vals) < 4.0


# -- growth report ----------------------------------------------------------------------


def test_growth_report_degenerate(path40):
    u = G.GraphFunction(path40, np.full(path40.n, 1.5))
    rep = Q.growth_report(path40, u, 40, [1, 2, 4, 8], p=2.0)
    assert rep.degenerate
    assert np.all(rep.i_values == 0.0)


def test_growth_report_grid_coordinate(grid132, grid132_center):
    u = G.coordinate_function(grid132, 0)
    rep = Q.growth_report(
        grid132, u, grid132_center, [4, 8, 16, 32, 64],
        p=1.5, alpha=2.0, lam=1.0,
    )
    assert rep.i_exponent == pytest.approx(2.0, abs=0.2)
    assert rep.i_exponent >= 2.0 - 1.5 - 1e-9
    assert np.all(np.diff(rep.i_values) >= 0)
    assert np.all(np.diff(rep.osc_values) >= 0)
    ratios = rep.osc_chain_ratios
    assert np.isfinite(ratios).all()
    assert ratios.max() / ratios.min() < 4.0


def test_growth_report_tree_energy_bounded_osc_grows():
    t = G.build_binary_tree(12)
    u = G.paper_tree_function(t, 2.0)
    rep = Q.growth_report(t, u, 0, [1, 2, 4, 8], p=2.0)
    # Finite total energy: I(r) approaches the series limit.
    assert rep.i_values[-1] <= G.tree_energy_limit(2.0)
    assert rep.osc_values[-1] > rep.osc_values[0]


def test_growth_report_needs_radii(path40):
    with pytest.raises(InsufficientRadii):
        Q.growth_report(path40, G.coordinate_function(path40), 40, [4.0], p=2.0)


def test_growth_report_beta(grid132, grid132_center):
    u = G.coordinate_function(grid132, 0)
    rep = Q.growth_report(
        grid132, u, grid132_center, [4, 8, 16], p=2.0, lam_bda=2.0
    )
    assert rep.beta is not None and rep.beta > 0
    for row in rep.beta_rows:
        assert row["observed"] <= 1.0
