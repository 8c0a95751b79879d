"""p-harmonic functions and Liouville classification on the weighted line.

Everything here revolves around the conjugate integrand ``w^(1/(1-p))``:
its antiderivative is the canonical p-harmonic function, its integral is
(up to the factor ``|a|^p``) the energy of that function, and the
finiteness of its integral over half-lines decides which Liouville
properties the weighted line has.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from . import quadrature
from .errors import (
    DegenerateInterval,
    DomainMismatch,
    EmptyFamily,
    InternalInvariantViolation,
    ToleranceNotMet,
)
from .quadrature import CONVERGED, DIVERGENT, INCONCLUSIVE, QuadResult
from .weights import Weight

FD_STEP_SCALE = 1e-6  # central-difference step is FD_STEP_SCALE * (1 + |x|)


def numeric_derivative(value: Callable[[float], float]) -> Callable[[float], float]:
    """Central-difference derivative with step h = 1e-6 * (1 + |x|)."""

    def deriv(x: float) -> float:
        h = FD_STEP_SCALE * (1.0 + abs(x))
        return (value(x + h) - value(x - h)) / (2.0 * h)

    return deriv


@dataclass
class LineFunction:
    """A function on an interval together with its derivative.

    ``derivative_kind`` is "analytic" when the derivative is exact and
    "numeric" when it was obtained by central differencing.  ``breakpoints``
    are interior points where the derivative may jump; the energy quadrature
    splits there.
    """

    domain: tuple[float, float]
    value: Callable[[float], float]
    derivative: Callable[[float], float]
    derivative_kind: str = "analytic"
    breakpoints: tuple[float, ...] = ()
    values_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    canonical_coef: Optional[float] = None  # set for b + a * int_0^x w^(1/(1-p))

    def __call__(self, x: float) -> float:
        lo, hi = self.domain
        if x < lo or x > hi:
            raise DomainMismatch(f"x={x!r} outside domain {self.domain}")
        return self.value(x)

    def values(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        lo, hi = self.domain
        if xs.size and (xs.min() < lo or xs.max() > hi):
            raise DomainMismatch("array evaluation outside function domain")
        if self.values_fn is not None:
            return self.values_fn(xs)
        return np.array([self.value(float(x)) for x in xs.ravel()]).reshape(xs.shape)


def piecewise_linear(xs: Sequence[float], ys: Sequence[float]) -> LineFunction:
    """Edgewise-linear interpolant through (xs, ys); xs strictly increasing."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.ndim != 1 or xs.size < 2 or np.any(np.diff(xs) <= 0):
        raise DegenerateInterval("need at least two strictly increasing nodes")
    slopes = np.diff(ys) / np.diff(xs)

    def value(x: float) -> float:
        return float(np.interp(x, xs, ys))

    def deriv(x: float) -> float:
        i = min(max(bisect_left(xs, x) - 1, 0), len(slopes) - 1)
        # At a node, take the left slope; the set of nodes has measure zero.
        if x <= xs[0]:
            i = 0
        return float(slopes[i])

    return LineFunction(
        domain=(float(xs[0]), float(xs[-1])),
        value=value,
        derivative=deriv,
        breakpoints=tuple(float(x) for x in xs[1:-1]),
        values_fn=lambda q: np.interp(q, xs, ys),
    )


# -- conjugate integral ------------------------------------------------------


def conjugate_quad(
    w: Weight,
    a: float,
    b: float,
    *,
    rel_tol: float = quadrature.DEFAULT_REL_TOL,
    r_max: float = quadrature.DEFAULT_R_MAX,
) -> QuadResult:
    """Full quadrature result for the conjugate integral; see
    ``conjugate_integral`` for the plain-float wrapper."""
    if not a < b:
        raise DegenerateInterval(f"conjugate integral over [{a!r}, {b!r}]")
    w.require_domain(max(a, w.lo), min(b, w.hi))
    if math.isfinite(a) or math.isfinite(b):
        w.require_domain(
            a if math.isfinite(a) else w.lo, b if math.isfinite(b) else w.hi
        )
    return quadrature.integrate(
        w.conjugate,
        a,
        b,
        breakpoints=w.breakpoints(),
        singular_points=w.singular_points(),
        rel_tol=rel_tol,
        r_max=r_max,
    )


def conjugate_integral(
    w: Weight,
    a: float,
    b: float,
    *,
    rel_tol: float = quadrature.DEFAULT_REL_TOL,
    r_max: float = quadrature.DEFAULT_R_MAX,
) -> float:
    """Integral of w^(1/(1-p)) over (a, b); ``inf`` marks divergence.

    Improper ends are truncated at ``r_max`` with the dyadic-shell
    divergence heuristic; an undecidable tail raises ToleranceNotMet.
    """
    return conjugate_quad(w, a, b, rel_tol=rel_tol, r_max=r_max).expect_decided()


class _Cumulative:
    """Cached antiderivative x -> int_base^x w^(1/(1-p)) dt."""

    def __init__(self, w: Weight, base: float = 0.0):
        self.w = w
        self.base = float(base)
        self._xs = [self.base]
        self._vals = [0.0]

    def _integrate(self, lo: float, hi: float) -> float:
        if hi == lo:
            return 0.0
        res = quadrature.integrate(
            self.w.conjugate,
            lo,
            hi,
            breakpoints=self.w.breakpoints(),
            singular_points=self.w.singular_points(),
        )
        if res.flag == DIVERGENT:
            raise ToleranceNotMet(
                f"conjugate integral diverges inside [{lo!r}, {hi!r}]; the "
                "canonical p-harmonic function is undefined there"
            )
        return res.value

    def at(self, x: float) -> float:
        x = float(x)
        i = bisect_left(self._xs, x)
        if i < len(self._xs) and self._xs[i] == x:
            return self._vals[i]
        # Integrate from the nearest cached anchor.
        cand = []
        if i > 0:
            cand.append(i - 1)
        if i < len(self._xs):
            cand.append(i)
        j = min(cand, key=lambda k: abs(self._xs[k] - x))
        x0, v0 = self._xs[j], self._vals[j]
        if x > x0:
            v = v0 + self._integrate(x0, x)
        else:
            v = v0 - self._integrate(x, x0)
        self._xs.insert(i, x)
        self._vals.insert(i, v)
        return v

    def at_many(self, xs: np.ndarray) -> np.ndarray:
        order = np.argsort(xs, kind="stable")
        out = np.empty_like(xs, dtype=float)
        for k in order:
            out[k] = self.at(float(xs[k]))
        return out


def p_harmonic_on_line(
    w: Weight, a_coef: float, b_coef: float,
    domain: Optional[tuple[float, float]] = None,
) -> LineFunction:
    """The canonical p-harmonic function u = b + a * int_0^x w^(1/(1-p)) dt.

    Its derivative is ``a * w(x)^(1/(1-p))``; u is monotone, strictly when
    ``a != 0``.
    """
    if domain is None:
        domain = w.domain
    if a_coef == 0.0:
        return LineFunction(
            domain=domain,
            value=lambda x: b_coef,
            derivative=lambda x: 0.0,
            values_fn=lambda q: np.full_like(q, float(b_coef)),
            canonical_coef=0.0,
        )
    cum = _Cumulative(w, base=0.0)

    def value(x: float) -> float:
        return b_coef + a_coef * cum.at(x)

    def deriv(x: float) -> float:
        return a_coef * w.conjugate(x)

    return LineFunction(
        domain=domain,
        value=value,
        derivative=deriv,
        breakpoints=tuple(w.breakpoints()),
        values_fn=lambda q: b_coef + a_coef * cum.at_many(q),
        canonical_coef=float(a_coef),
    )


def line_energy(
    u: LineFunction,
    w: Weight,
    interval: Optional[tuple[float, float]] = None,
    *,
    rel_tol: float = quadrature.DEFAULT_REL_TOL,
    r_max: float = quadrature.DEFAULT_R_MAX,
) -> float:
    """The p-energy int |u'|^p w dx over the interval; ``inf`` marks
    divergence.

    For canonical functions the closed form |a|^p * conjugate_integral is
    also computed and the two routes are cross-checked.
    """
    if interval is None:
        lo = max(u.domain[0], w.lo)
        hi = min(u.domain[1], w.hi)
    else:
        lo, hi = interval
    if not lo < hi:
        raise DegenerateInterval(f"energy over [{lo!r}, {hi!r}]")
    p = w.p

    def integrand(x: float) -> float:
        d = u.derivative(x)
        if d == 0.0:
            return 0.0
        return abs(d) ** p * w(x)

    res = quadrature.integrate(
        integrand,
        lo,
        hi,
        breakpoints=sorted(set(w.breakpoints()) | set(u.breakpoints)),
        singular_points=w.singular_points(),
        rel_tol=rel_tol,
        r_max=r_max,
    )
    value = res.expect_decided()
    if u.canonical_coef is not None and u.canonical_coef != 0.0:
        ref = conjugate_quad(w, lo, hi, rel_tol=rel_tol, r_max=r_max)
        if ref.flag != INCONCLUSIVE:
            expected = abs(u.canonical_coef) ** p * ref.value
            if math.isinf(expected) != math.isinf(value):
                raise InternalInvariantViolation(
                    "energy identity violated: quadrature and conjugate "
                    f"routes disagree on finiteness ({value!r} vs {expected!r})"
                )
            if math.isfinite(expected):
                scale = max(abs(expected), 1e-12)
                if abs(value - expected) > 1e-6 * scale:
                    raise InternalInvariantViolation(
                        f"energy identity violated: {value!r} vs {expected!r}"
                    )
    return value


def dirichlet_solve_line(
    w: Weight, x0: float, x1: float, v0: float, v1: float
) -> LineFunction:
    """Two-point Dirichlet problem on [x0, x1], solved in closed form.

    Returns ``u(x) = v0 + (v1 - v0) * I(x0, x) / I(x0, x1)`` with I the
    conjugate integral; u is the unique p-energy minimizer among functions
    with these boundary values.
    """
    if x0 == x1:
        raise DegenerateInterval("x0 == x1 in dirichlet_solve_line")
    if x0 > x1:
        raise DegenerateInterval(f"x0={x0!r} must be below x1={x1!r}")
    w.require_domain(x0, x1)
    if v0 == v1:
        return LineFunction(
            domain=(x0, x1),
            value=lambda x: v0,
            derivative=lambda x: 0.0,
            values_fn=lambda q: np.full_like(q, float(v0)),
            canonical_coef=0.0,
        )
    total = conjugate_integral(w, x0, x1)
    if not math.isfinite(total) or total <= 0.0:
        raise ToleranceNotMet(
            f"conjugate integral over [{x0!r}, {x1!r}] is {total!r}; "
            "no p-harmonic interpolant"
        )
    a = (v1 - v0) / total
    cum = _Cumulative(w, base=x0)

    def value(x: float) -> float:
        return v0 + a * cum.at(x)

    def deriv(x: float) -> float:
        return a * w.conjugate(x)

    return LineFunction(
        domain=(x0, x1),
        value=value,
        derivative=deriv,
        breakpoints=tuple(b for b in w.breakpoints() if x0 < b < x1),
        values_fn=lambda q: v0 + a * cum.at_many(q),
        canonical_coef=a,
    )


def ap_estimate(w: Weight, intervals: Iterable[tuple[float, float]]) -> float:
    """Muckenhoupt-style product, maximized over an interval family.

    Returns ``max_I (avg_I w) * (avg_I w^(1/(1-p)))^(p-1)``; always >= 1 by
    Jensen's inequality, ``inf`` when a conjugate average diverges.
    """
    intervals = list(intervals)
    if not intervals:
        raise EmptyFamily("ap_estimate needs at least one interval")
    worst = 0.0
    for a, b in intervals:
        if not (math.isfinite(a) and math.isfinite(b)):
            raise DegenerateInterval(f"interval [{a!r}, {b!r}] must be bounded")
        if not a < b:
            raise DegenerateInterval(f"interval [{a!r}, {b!r}] is empty")
        w.require_domain(a, b)
        length = b - a
        w_avg = (
            quadrature.integrate(
                lambda x: w(x), a, b,
                breakpoints=w.breakpoints(),
                singular_points=w.singular_points(),
            ).expect_decided()
            / length
        )
        conj_avg_res = conjugate_quad(w, a, b)
        conj_avg = conj_avg_res.expect_decided() / length
        if math.isinf(w_avg) or math.isinf(conj_avg):
            return math.inf
        worst = max(worst, w_avg * conj_avg ** (w.p - 1.0))
    return worst


# -- Liouville classification ------------------------------------------------


@dataclass
class LiouvilleVerdict:
    """Outcome of the Liouville classification of a weighted line.

    The bounded Liouville property (every bounded quasiharmonic function is
    constant) holds exactly when the full-line conjugate integral is
    infinite; the positive Liouville property holds exactly when both
    half-line integrals are infinite.
    """

    full_line_integral: float
    left_integral: float
    right_integral: float
    bounded_liouville_holds: bool
    positive_liouville_holds: bool
    truncation_radius: float
    tail_flag: str
    witness: Optional[LineFunction] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        def enc(v: float):
            if v == math.inf:
                return "inf"
            return v

        return {
            "full_line_integral": enc(self.full_line_integral),
            "left_integral": enc(self.left_integral),
            "right_integral": enc(self.right_integral),
            "bounded_liouville_holds": self.bounded_liouville_holds,
            "positive_liouville_holds": self.positive_liouville_holds,
            "truncation_radius": self.truncation_radius,
            "tail_flag": self.tail_flag,
        }


def classify_liouville(
    w: Weight,
    *,
    r_max: float = quadrature.DEFAULT_R_MAX,
    rel_tol: float = quadrature.DEFAULT_REL_TOL,
) -> LiouvilleVerdict:
    """Decide the bounded and positive Liouville properties of (R, w dx).

    When the bounded property fails, the verdict carries the bounded
    nonconstant p-harmonic witness from ``p_harmonic_on_line``.
    """
    if w.lo != -math.inf or w.hi != math.inf:
        raise DomainMismatch(
            "classify_liouville needs a weight defined on the whole line, "
            f"got domain {w.domain}"
        )
    left = conjugate_quad(w, -math.inf, 0.0, rel_tol=rel_tol, r_max=r_max)
    right = conjugate_quad(w, 0.0, math.inf, rel_tol=rel_tol, r_max=r_max)

    flags = (left.flag, right.flag)
    if INCONCLUSIVE in flags:
        tail_flag = INCONCLUSIVE
    elif DIVERGENT in flags:
        tail_flag = DIVERGENT
    else:
        tail_flag = CONVERGED

    full = left.value + right.value
    bounded_holds = math.isinf(full)
    positive_holds = math.isinf(min(left.value, right.value))
    if positive_holds and not bounded_holds:
        raise InternalInvariantViolation(
            "positive Liouville cannot hold while bounded Liouville fails"
        )
    witness = None
    if not bounded_holds and tail_flag != INCONCLUSIVE:
        witness = p_harmonic_on_line(w, 1.0, 0.0)
    return LiouvilleVerdict(
        full_line_integral=full,
        left_integral=left.value,
        right_integral=right.value,
        bounded_liouville_holds=bounded_holds,
        positive_liouville_holds=positive_holds,
        truncation_radius=r_max,
        tail_flag=tail_flag,
        witness=witness,
    )


def halfline_growth_diagnostic(
    v: LineFunction, w: Weight, radii: Sequence[float]
) -> np.ndarray:
    """Normalized growth ratios v(x) / u(x)^(1-1/p) along the given radii.

    ``u`` is the canonical increasing p-harmonic function; a finite-energy v
    must drive the ratio to 0 when the conjugate integral diverges.
    Returns an array of rows (x, ratio).
    """
    radii = np.asarray(list(radii), dtype=float)
    if radii.size == 0 or np.any(radii <= 0):
        raise DomainMismatch("radii must be positive")
    if v.domain[0] > 0.0 or v.domain[1] < radii.max():
        raise DomainMismatch(
            f"v is defined on {v.domain}, needs (0, {radii.max()!r}]"
        )
    u = p_harmonic_on_line(w, 1.0, 0.0)
    exponent = 1.0 - 1.0 / w.p
    u_vals = u.values(radii)
    v_vals = v.values(radii)
    ratios = v_vals / np.power(u_vals, exponent)
    return np.column_stack([radii, ratios])
