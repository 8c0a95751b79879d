import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pharmonic import line
from pharmonic.errors import DegenerateInterval, DomainMismatch, EmptyFamily
from pharmonic.line import (
    ap_estimate,
    classify_liouville,
    conjugate_integral,
    dirichlet_solve_line,
    halfline_growth_diagnostic,
    line_energy,
    numeric_derivative,
    p_harmonic_on_line,
    piecewise_linear,
)
from pharmonic.weights import (
    arctan_type_weight,
    constant_weight,
    exponential_weight,
    power_weight,
)


# -- conjugate_integral --------------------------------------------------------


def test_conjugate_unit_weight():
    assert conjugate_integral(constant_weight(2.0), 0.0, 1.0) == pytest.approx(
        1.0, abs=1e-13
    )


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_conjugate_arctan_weight(p):
    # Integrand is 1/(1+x^2) regardless of p; closed form is pi.
    w = arctan_type_weight(p)
    assert conjugate_integral(w, -math.inf, math.inf) == pytest.approx(
        math.pi, abs=1e-8
    )


def test_conjugate_exponential():
    # w = e^(2|x|), p = 3: integrand e^(-|x|), closed form 2.
    w = exponential_weight(3.0, 2.0, absolute=True)
    assert conjugate_integral(w, -math.inf, math.inf) == pytest.approx(
        2.0, abs=1e-8
    )


def test_conjugate_divergent_marker():
    assert conjugate_integral(constant_weight(2.0), 0.0, math.inf) == math.inf


def test_conjugate_empty_interval():
    with pytest.raises(DegenerateInterval):
        conjugate_integral(constant_weight(2.0), 1.0, 1.0)


# -- p_harmonic_on_line ---------------------------------------------------------


def test_canonical_unit_weight_is_identity():
    u = p_harmonic_on_line(constant_weight(2.0), 1.0, 0.0)
    for x in (-3.0, 0.0, 0.25, 7.0):
        assert u(x) == pytest.approx(x, abs=1e-12)


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_canonical_arctan(p):
    u = p_harmonic_on_line(arctan_type_weight(p), 1.0, 0.0)
    xs = np.linspace(-30, 30, 101)
    np.testing.assert_allclose(u.values(xs), np.arctan(xs), atol=1e-8)


def test_zero_coefficient_constant():
    u = p_harmonic_on_line(power_weight(2.0, 0.5), 0.0, 7.0)
    assert u(3.0) == 7.0
    assert u.derivative(3.0) == 0.0


def test_canonical_monotone_and_continuous():
    u = p_harmonic_on_line(arctan_type_weight(2.0), 2.0, -1.0)
    xs = np.linspace(-5, 5, 400)
    vals = u.values(xs)
    assert np.all(np.diff(vals) > 0)
    # Continuity by dense sampling: increments shrink with the mesh.
    assert np.abs(np.diff(vals)).max() < 0.1


def test_derivative_matches_finite_differences():
    u = p_harmonic_on_line(arctan_type_weight(2.0), 1.0, 0.0)
    for x in (-2.0, 0.3, 1.7):
        h = 1e-6 * (1 + abs(x))
        fd = (u(x + h) - u(x - h)) / (2 * h)
        assert fd == pytest.approx(u.derivative(x), rel=1e-6)


def test_numeric_derivative_helper():
    d = numeric_derivative(lambda x: x**2)
    assert d(3.0) == pytest.approx(6.0, rel=1e-7)


# -- line_energy -----------------------------------------------------------------


def test_energy_identity_unit():
    u = p_harmonic_on_line(constant_weight(2.0), 1.0, 0.0)
    assert line_energy(u, constant_weight(2.0), (0.0, 1.0)) == pytest.approx(
        1.0, abs=1e-12
    )


def test_energy_arctan_full_line():
    w = arctan_type_weight(2.0)
    u = p_harmonic_on_line(w, 1.0, 0.0)
    assert line_energy(u, w) == pytest.approx(math.pi, abs=1e-6)


def test_energy_constant_zero():
    w = exponential_weight(2.0, 1.0)
    u = p_harmonic_on_line(w, 0.0, 3.0)
    assert line_energy(u, w, (-2.0, 5.0)) == 0.0


@pytest.mark.parametrize("p", [1.5, 2.0, 2.7])
@pytest.mark.parametrize("a_coef", [0.5, 1.0, -2.0])
def test_energy_identity_property(p, a_coef):
    # Energy equals |a|^p times the conjugate integral (two quadrature
    # routes through the same engine cross-check in line_energy itself).
    w = arctan_type_weight(p)
    u = p_harmonic_on_line(w, a_coef, 1.0)
    e = line_energy(u, w, (-4.0, 9.0))
    ref = abs(a_coef) ** p * conjugate_integral(w, -4.0, 9.0)
    assert e == pytest.approx(ref, rel=1e-6)


# -- dirichlet_solve_line ---------------------------------------------------------


def test_dirichlet_affine():
    u = dirichlet_solve_line(constant_weight(2.0), 0.0, 1.0, 0.0, 1.0)
    for x in (0.0, 0.3, 1.0):
        assert u(x) == pytest.approx(x, abs=1e-12)


def test_dirichlet_equal_values_constant():
    u = dirichlet_solve_line(constant_weight(2.0), 0.0, 2.0, 3.0, 3.0)
    assert u(1.3) == 3.0


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_dirichlet_arctan(p):
    u = dirichlet_solve_line(arctan_type_weight(p), 0.0, 1.0, 0.0, 1.0)
    xs = np.linspace(0, 1, 41)
    np.testing.assert_allclose(
        u.values(xs), np.arctan(xs) / math.atan(1.0), atol=1e-8
    )


def test_dirichlet_degenerate():
    with pytest.raises(DegenerateInterval):
        dirichlet_solve_line(constant_weight(2.0), 1.0, 1.0, 0.0, 1.0)


@settings(max_examples=25, deadline=None)
@given(
    breaks=st.lists(st.floats(0.05, 1.95), min_size=1, max_size=4),
    vals=st.lists(st.floats(-2.0, 2.0), min_size=4, max_size=4),
)
def test_dirichlet_minimality(breaks, vals):
    # Piecewise-linear competitors with the same boundary values never
    # have smaller energy than the solver output.
    w = arctan_type_weight(2.5)
    sol = dirichlet_solve_line(w, 0.0, 2.0, 0.0, 1.0)
    e_sol = line_energy(sol, w, (0.0, 2.0))
    xs = sorted(set(round(b, 6) for b in breaks))
    xs = [x for x in xs if 0.0 < x < 2.0]
    nodes = [0.0, *xs, 2.0]
    ys = [0.0, *vals[: len(xs)], 1.0]
    v = piecewise_linear(nodes, ys)
    e_v = line_energy(v, w, (0.0, 2.0))
    assert e_v >= e_sol - 1e-9


# -- ap_estimate -------------------------------------------------------------------


def test_ap_unit_weight():
    assert ap_estimate(constant_weight(2.0), [(-3.0, 5.0), (0.0, 0.5)]) == pytest.approx(
        1.0, abs=1e-12
    )


def test_ap_absolute_value_divergent():
    assert ap_estimate(power_weight(2.0, 1.0), [(-1.0, 1.0)]) == math.inf


def test_ap_sqrt_weight():
    # avg |x|^(1/2) = 2/3, avg |x|^(-1/2) = 2 over [-1, 1]: product 4/3.
    got = ap_estimate(power_weight(2.0, 0.5), [(-1.0, 1.0)])
    assert got == pytest.approx(4.0 / 3.0, abs=1e-6)


def test_ap_at_least_one():
    w = exponential_weight(2.2, 0.7)
    for iv in [(-1.0, 1.0), (2.0, 3.5), (-4.0, -1.0)]:
        assert ap_estimate(w, [iv]) >= 1.0 - 1e-12


def test_ap_empty_family():
    with pytest.raises(EmptyFamily):
        ap_estimate(constant_weight(2.0), [])


def test_ap_unbounded_interval_rejected():
    with pytest.raises(DegenerateInterval):
        ap_estimate(constant_weight(2.0), [(0.0, math.inf)])


# -- classify_liouville -------------------------------------------------------------


def test_classify_unit_weight():
    v = classify_liouville(constant_weight(2.0))
    assert v.bounded_liouville_holds and v.positive_liouville_holds
    assert v.full_line_integral == math.inf
    assert v.witness is None


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_classify_arctan_weight(p):
    v = classify_liouville(arctan_type_weight(p))
    assert not v.bounded_liouville_holds
    assert not v.positive_liouville_holds
    assert v.full_line_integral == pytest.approx(math.pi, abs=1e-8)
    xs = np.linspace(-50, 50, 101)
    np.testing.assert_allclose(v.witness.values(xs), np.arctan(xs), atol=1e-8)


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_classify_one_sided_exponential(p):
    v = classify_liouville(exponential_weight(p, p - 1.0))
    assert v.bounded_liouville_holds
    assert not v.positive_liouville_holds
    assert v.right_integral == pytest.approx(1.0, abs=1e-8)
    assert v.left_integral == math.inf


def test_classify_verdict_logic():
    # Positive Liouville implies bounded Liouville on every tested weight.
    for w in (
        constant_weight(2.0),
        arctan_type_weight(2.0),
        exponential_weight(2.0, 1.0),
        exponential_weight(2.0, 1.0, absolute=True),
        power_weight(2.0, 2.0, quad_shift=4.0),
    ):
        v = classify_liouville(w)
        assert (not v.positive_liouville_holds) or v.bounded_liouville_holds


def test_classify_requires_full_line():
    with pytest.raises(DomainMismatch):
        classify_liouville(constant_weight(2.0, lo=0.0, hi=1.0))


def test_bounded_iff_finite_energy():
    # The canonical function is bounded exactly when its energy is finite.
    for w, finite in (
        (arctan_type_weight(2.0), True),
        (constant_weight(2.0), False),
    ):
        u = p_harmonic_on_line(w, 1.0, 0.0)
        energy = line_energy(u, w)
        conj = conjugate_integral(w, -math.inf, math.inf)
        span = abs(u(900.0) - u(-900.0))
        if finite:
            assert math.isfinite(energy) and math.isfinite(conj) and span < conj
        else:
            assert energy == math.inf and conj == math.inf and span > 100


# -- halfline growth diagnostic -------------------------------------------------------


def test_halfline_zero_function():
    w = constant_weight(2.0)
    v = p_harmonic_on_line(w, 0.0, 0.0)
    table = halfline_growth_diagnostic(v, w, [1.0, 4.0, 16.0])
    assert np.all(table[:, 1] == 0.0)


def test_halfline_identity_grows():
    # v = u = x with w = 1, p = 2: ratio x / sqrt(x) = sqrt(x).
    w = constant_weight(2.0)
    v = p_harmonic_on_line(w, 1.0, 0.0)
    table = halfline_growth_diagnostic(v, w, [1.0, 4.0, 16.0, 64.0])
    np.testing.assert_allclose(table[:, 1], np.sqrt(table[:, 0]), rtol=1e-10)
    assert np.all(np.diff(table[:, 1]) > 0)


def test_halfline_bounded_ratio_decays():
    w = constant_weight(2.0)
    v = piecewise_linear([0.0, 1.0, 1e4], [0.0, 1.0, 1.0])
    table = halfline_growth_diagnostic(v, w, [4.0, 64.0, 1024.0])
    assert np.all(np.diff(table[:, 1]) < 0)


def test_halfline_domain_mismatch():
    w = constant_weight(2.0)
    v = piecewise_linear([0.0, 1.0], [0.0, 1.0])
    with pytest.raises(DomainMismatch):
        halfline_growth_diagnostic(v, w, [4.0])


def test_quadrature_convergence_invariant():
    # Halving the tolerance changes the integral by less than its bound.
    from pharmonic.line import conjugate_quad

    w = arctan_type_weight(2.0)
    a = conjugate_quad(w, -math.inf, math.inf, rel_tol=1e-8)
    b = conjugate_quad(w, -math.inf, math.inf, rel_tol=5e-9)
    assert abs(a.value - b.value) <= a.error + b.error
