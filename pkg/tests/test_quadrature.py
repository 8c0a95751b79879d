import math

import pytest

from pharmonic import quadrature
from pharmonic.quadrature import CONVERGED, DIVERGENT, INCONCLUSIVE, integrate


def test_polynomial_exact():
    # Simpson integrates cubics exactly.
    res = integrate(lambda x: x**3 - 2 * x + 1, 0.0, 2.0)
    assert res.flag == CONVERGED
    assert res.value == pytest.approx(2.0, abs=1e-13)


def test_smooth_oscillatory():
    res = integrate(math.sin, 0.0, math.pi)
    assert res.value == pytest.approx(2.0, abs=1e-10)


def test_breakpoint_kink():
    res = integrate(abs, -1.0, 1.0, breakpoints=[0.0])
    assert res.value == pytest.approx(1.0, abs=1e-13)


def test_arctan_tail_extrapolation():
    res = integrate(lambda x: 1.0 / (1.0 + x * x), -math.inf, math.inf)
    assert res.flag == CONVERGED
    assert res.value == pytest.approx(math.pi, abs=1e-8)


def test_exponential_tail():
    res = integrate(lambda x: math.exp(-abs(x)), -math.inf, math.inf,
                    breakpoints=[0.0])
    assert res.flag == CONVERGED
    assert res.value == pytest.approx(2.0, abs=1e-8)


def test_constant_diverges():
    res = integrate(lambda x: 1.0, 0.0, math.inf)
    assert res.flag == DIVERGENT
    assert res.value == math.inf


def test_one_over_x_diverges():
    res = integrate(lambda x: 1.0 / x, 1.0, math.inf)
    assert res.flag == DIVERGENT


def test_interior_singularity_divergent():
    res = integrate(lambda x: 1.0 / abs(x), -1.0, 1.0, singular_points=[0.0])
    assert res.flag == DIVERGENT
    assert res.value == math.inf


def test_interior_singularity_integrable():
    res = integrate(
        lambda x: 1.0 / math.sqrt(abs(x)), -1.0, 1.0, singular_points=[0.0]
    )
    assert res.flag == CONVERGED
    assert res.value == pytest.approx(4.0, abs=1e-9)


def test_endpoint_singularity():
    res = integrate(lambda x: 1.0 / math.sqrt(x), 0.0, 1.0, singular_points=[0.0])
    assert res.value == pytest.approx(2.0, abs=1e-9)


def test_overflowing_tail_divergent():
    res = integrate(math.exp, 0.0, math.inf)
    assert res.flag == DIVERGENT


def test_slow_undecidable_tail_inconclusive():
    # Shell ratios drift upward through the decay threshold without ever
    # clearing a divergence run before the truncation radius.
    res = integrate(
        lambda x: 1.0 / (x * math.log(x) ** 2), 2.0, math.inf
    )
    assert res.flag == INCONCLUSIVE
    with pytest.raises(Exception):
        res.expect_decided()


def test_error_bound_honest():
    # Halving the tolerance moves the value by less than the error bound.
    f = lambda x: 1.0 / (1.0 + x * x)
    coarse = integrate(f, -math.inf, math.inf, rel_tol=1e-8)
    fine = integrate(f, -math.inf, math.inf, rel_tol=5e-9)
    assert abs(coarse.value - fine.value) <= coarse.error + fine.error


def test_empty_interval_rejected():
    with pytest.raises(ValueError):
        integrate(lambda x: 1.0, 1.0, 1.0)
