"""Empirical verification of quasiminimizer inequalities on graphs.

The quasiminimizing constant is probed by replacement: on each support the
function is compared against the p-harmonic function with the same
boundary values, whose energy is minimal, so every ratio is at least 1 and
a function is certified p-harmonic on the tested family when the worst
ratio is 1 up to tolerance.  The oscillation and reverse (Caccioppoli)
estimates and the energy growth laws are reported as measured constants;
the cited asymptotic statements about infinite spaces are checked here
only in the finite-truncation sense.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DegenerateSupport,
    InsufficientRadii,
    InvalidConfig,
    ZeroRadius,
)
from .geometry import (
    Ball,
    SpacePoint,
    ball_energy,
    ball_extrema,
    edge_coverage,
    point_distances,
)
from .graphs import GraphFunction, MetricGraph, graph_energy
from .solver import solve_dirichlet

RATIO_SLACK = 1e-9  # replacement energies below this count as zero


# -- quasiminimizing ratio -----------------------------------------------------


@dataclass
class SupportResult:
    support: frozenset
    energy_original: float
    energy_replacement: float
    ratio: float


@dataclass
class QuasiminReport:
    """Worst-case replacement ratio over a family of supports."""

    q_estimate: float
    worst_support: Optional[frozenset]
    per_support: list[SupportResult]

    def is_p_harmonic(self, tol: float = 1e-8) -> bool:
        return self.q_estimate <= 1.0 + tol


def _support_problem(g: MetricGraph, support: frozenset):
    """Edges touching the support and the boundary vertices around it."""
    s_mask = np.zeros(g.n, dtype=bool)
    s_mask[list(support)] = True
    edge_mask = s_mask[g.edge_u] | s_mask[g.edge_v]
    touched = np.unique(
        np.concatenate([g.edge_u[edge_mask], g.edge_v[edge_mask]])
    )
    boundary = touched[~s_mask[touched]]
    return edge_mask, touched, boundary


def quasimin_ratio(
    g: MetricGraph,
    u,
    p: float,
    supports: Sequence,
    tol: float = 1e-10,
) -> QuasiminReport:
    """Energy of u versus its p-harmonic replacement on each support.

    For support S the replacement solves the Dirichlet problem on the
    edges touching S with boundary values u; the ratio is 1 when both
    energies vanish and an infinite marker when only the replacement
    energy does.
    """
    vals = u.values if isinstance(u, GraphFunction) else np.asarray(u, float)
    results = []
    for support in supports:
        support = frozenset(int(v) for v in support)
        if not support:
            raise DegenerateSupport("empty support")
        for v in support:
            g.check_vertex(v)
        edge_mask, touched, boundary = _support_problem(g, support)
        if len(boundary) == 0:
            raise DegenerateSupport(
                f"support {sorted(support)[:8]}... has no complement boundary"
            )
        # Solve on the induced subgraph: touched vertices, touching edges.
        sub_index = -np.ones(g.n, dtype=np.int64)
        sub_index[touched] = np.arange(len(touched))
        sub_edges = np.column_stack(
            [
                sub_index[g.edge_u[edge_mask]],
                sub_index[g.edge_v[edge_mask]],
                g.length[edge_mask],
                g.density[edge_mask],
            ]
        )
        sub = MetricGraph(len(touched), sub_edges)
        bvals = {int(sub_index[v]): float(vals[v]) for v in boundary}
        h = solve_dirichlet(sub, p, bvals, tol=tol)
        e_orig = graph_energy(g, vals, p, edge_subset=np.flatnonzero(edge_mask))
        e_rep = graph_energy(sub, h, p)
        if e_rep <= RATIO_SLACK * max(1.0, e_orig):
            ratio = 1.0 if e_orig <= RATIO_SLACK else math.inf
        else:
            ratio = e_orig / e_rep
        results.append(SupportResult(support, e_orig, e_rep, ratio))
    if not results:
        raise DegenerateSupport("no supports supplied")
    worst = max(results, key=lambda r: r.ratio)
    return QuasiminReport(worst.ratio, worst.support, results)


def ball_supports(
    g: MetricGraph,
    radii: Sequence[float],
    centers: Optional[Sequence[int]] = None,
    boundary: Optional[Sequence[int]] = None,
) -> list[frozenset]:
    """All distinct metric-ball supports with a nonempty complement boundary.

    Vertices listed in ``boundary`` are never part of a support (they stay
    fixed), matching the solver's notion of interior.
    """
    if centers is None:
        centers = range(g.n)
    fixed = np.zeros(g.n, dtype=bool)
    if boundary is not None:
        fixed[list(boundary)] = True
    seen = set()
    out = []
    for c in centers:
        dists = g.distances_from(int(c))
        for r in radii:
            inside = np.flatnonzero((dists < r) & ~fixed)
            if len(inside) == 0:
                continue
            support = frozenset(int(v) for v in inside)
            if support in seen:
                continue
            seen.add(support)
            _, _, bdry = _support_problem(g, support)
            if len(bdry) == 0:
                continue
            out.append(support)
    return out


# -- weak maximum principle -----------------------------------------------------


def weak_max_check(
    g: MetricGraph, u, region: Sequence[int], tol: float = 1e-12
) -> tuple[bool, Optional[int]]:
    """Check sup over a region against sup over its boundary.

    True when no region vertex exceeds the boundary maximum by more than
    ``tol``; otherwise returns False together with a violating vertex.
    Regions without boundary (whole components) pass vacuously.
    """
    vals = u.values if isinstance(u, GraphFunction) else np.asarray(u, float)
    region = [g.check_vertex(v) for v in region]
    if not region:
        raise DegenerateSupport("empty region")
    _, _, boundary = _support_problem(g, frozenset(region))
    if len(boundary) == 0:
        return True, None
    bound = float(vals[boundary].max())
    worst = max(region, key=lambda v: vals[v])
    if vals[worst] > bound + tol:
        return False, int(worst)
    return True, None


# -- oscillation and Caccioppoli constants --------------------------------------


def oscillation_estimate_check(
    space: MetricGraph, u, ball: Ball, lam: float, p: float
) -> float:
    """Measured constant of the oscillation-energy estimate on one ball.

    Returns ``osc_B u * mu(B)^(1/p) / (r_B * (int_{2 lam B} g^p dmu)^(1/p))``
    with the 0/0 case reported as 0; for quasiharmonic functions this stays
    bounded over scales.
    """
    if ball.radius <= 0:
        raise ZeroRadius("oscillation estimate needs a positive radius")
    vals = u.values if isinstance(u, GraphFunction) else np.asarray(u, float)
    dists = point_distances(space, ball.center)
    lo, hi = ball_extrema(space, vals, dists, ball.radius)
    osc = hi - lo
    mass = float(
        (space.mu * edge_coverage(space, dists, ball.radius, ball.center)).sum()
    )
    energy = ball_energy(
        space, vals, dists, 2.0 * lam * ball.radius, p, ball.center
    )
    if energy <= 0.0:
        return 0.0 if osc <= 0.0 else math.inf
    return osc * mass ** (1.0 / p) / (ball.radius * energy ** (1.0 / p))


def caccioppoli_check(space: MetricGraph, u, ball: Ball, p: float) -> float:
    """Measured constant of the reverse (interior-energy) estimate.

    Returns ``(int_{B/2} g^p dmu)^(1/p) * r_B / (mu(B)^(1/p) * osc_B u)``;
    0/0 is flagged as nan and a positive numerator over zero oscillation as
    an infinite marker.
    """
    if ball.radius <= 0:
        raise ZeroRadius("caccioppoli estimate needs a positive radius")
    vals = u.values if isinstance(u, GraphFunction) else np.asarray(u, float)
    dists = point_distances(space, ball.center)
    lo, hi = ball_extrema(space, vals, dists, ball.radius)
    osc = hi - lo
    mass = float(
        (space.mu * edge_coverage(space, dists, ball.radius, ball.center)).sum()
    )
    inner = ball_energy(space, vals, dists, ball.radius / 2.0, p, ball.center)
    if osc <= 0.0:
        return math.nan if inner <= 0.0 else math.inf
    return inner ** (1.0 / p) * ball.radius / (mass ** (1.0 / p) * osc)


# -- growth report ---------------------------------------------------------------


@dataclass
class GrowthReport:
    """Energy and oscillation of u over a nested family of balls.

    ``i_values`` is the ball energy I(r), ``osc_values`` the oscillation;
    both are nondecreasing.  When a volume-growth exponent alpha is given,
    ``alpha_ratios`` tabulates I(r) * r^(p - alpha) (bounded below for
    nonconstant quasiharmonic u) and ``osc_chain_ratios`` the quantity
    osc(r)^p / (r^(p - alpha) I(2 lam r)).  When an annulus constant can be
    measured, ``beta`` is the implied polynomial energy-growth rate
    log(1 + C^-p) / log(4 Lambda^2) and ``beta_rows`` compares observed
    energy ratios against it.
    """

    radii: np.ndarray
    i_values: np.ndarray
    osc_values: np.ndarray
    c_emp: np.ndarray
    degenerate: bool
    i_exponent: Optional[float] = None
    osc_exponent: Optional[float] = None
    alpha: Optional[float] = None
    alpha_ratios: Optional[np.ndarray] = None
    osc_chain_ratios: Optional[np.ndarray] = None
    annulus_constant: Optional[float] = None
    beta: Optional[float] = None
    beta_rows: Optional[list] = None
    lam: float = 1.0
    p: float = 2.0

    def csv_rows(self) -> list[str]:
        lines = ["r,i_energy,oscillation,c_emp"]
        for r, iv, ov, ce in zip(self.radii, self.i_values, self.osc_values, self.c_emp):
            lines.append(f"{float(r)!r},{float(iv)!r},{float(ov)!r},{float(ce)!r}")
        return lines

    def to_dict(self) -> dict:
        def enc(x):
            if x is None:
                return None
            if isinstance(x, float) and math.isinf(x):
                return "inf"
            return x

        return {
            "radii": [float(v) for v in self.radii],
            "i_energy": [float(v) for v in self.i_values],
            "oscillation": [float(v) for v in self.osc_values],
            "c_emp": [enc(float(c)) for c in self.c_emp],
            "degenerate": self.degenerate,
            "i_exponent": enc(self.i_exponent),
            "osc_exponent": enc(self.osc_exponent),
            "alpha": enc(self.alpha),
            "alpha_ratios": None
            if self.alpha_ratios is None
            else [enc(float(v)) for v in self.alpha_ratios],
            "osc_chain_ratios": None
            if self.osc_chain_ratios is None
            else [enc(float(v)) for v in self.osc_chain_ratios],
            "annulus_constant": enc(self.annulus_constant),
            "beta": enc(self.beta),
            "beta_rows": self.beta_rows,
            "lam": self.lam,
            "p": self.p,
        }

    def to_text(self) -> str:
        head = f"{'r':>10} {'I(r)':>14} {'osc(r)':>14} {'C_emp':>12}"
        rows = [head, "-" * len(head)]
        for r, iv, ov, ce in zip(self.radii, self.i_values, self.osc_values, self.c_emp):
            rows.append(f"{r:>10.4g} {iv:>14.6g} {ov:>14.6g} {ce:>12.4g}")
        if self.degenerate:
            rows.append("degenerate: zero energy at every radius")
        if self.i_exponent is not None:
            rows.append(f"fitted I(r) exponent: {self.i_exponent:.4f}")
        if self.osc_exponent is not None:
            rows.append(f"fitted osc(r) exponent: {self.osc_exponent:.4f}")
        if self.beta is not None:
            rows.append(
                f"annulus constant {self.annulus_constant:.4g} "
                f"implies beta {self.beta:.4g}"
            )
        return "\n".join(rows)


def _loglog_slope(x: np.ndarray, y: np.ndarray) -> Optional[float]:
    mask = (x > 0) & (y > 0)
    if mask.sum() < 2:
        return None
    lx = np.log(x[mask])
    ly = np.log(y[mask])
    lx = lx - lx.mean()
    return float((lx * (ly - ly.mean())).sum() / (lx * lx).sum())


def growth_report(
    space: MetricGraph,
    u,
    x0: SpacePoint,
    radii: Sequence[float],
    p: float,
    alpha: Optional[float] = None,
    lam: float = 1.0,
    lam_bda: Optional[float] = None,
) -> GrowthReport:
    """Tabulate energy and oscillation growth of u around x0.

    Radii should be dyadic.  ``alpha`` enables the volume-growth
    comparisons; ``lam_bda`` enables the annulus-based rate estimate.
    """
    radii = np.asarray(sorted(float(r) for r in radii))
    if len(radii) < 2:
        raise InsufficientRadii("growth_report needs at least 2 radii")
    if radii[0] <= 0:
        raise ZeroRadius("radii must be positive")
    if not p > 1.0:
        raise InvalidConfig("p must exceed 1")
    vals = u.values if isinstance(u, GraphFunction) else np.asarray(u, float)
    dists = point_distances(space, x0)

    def energy_at(r: float) -> float:
        return ball_energy(space, vals, dists, r, p, x0)

    i_vals = np.array([energy_at(r) for r in radii])
    osc_vals = np.empty(len(radii))
    mass_vals = np.empty(len(radii))
    for k, r in enumerate(radii):
        lo, hi = ball_extrema(space, vals, dists, r)
        osc_vals[k] = hi - lo
        mass_vals[k] = float(
            (space.mu * edge_coverage(space, dists, r, x0)).sum()
        )
    e2lam = np.array([energy_at(2.0 * lam * r) for r in radii])
    with np.errstate(divide="ignore", invalid="ignore"):
        c_emp = np.where(
            e2lam > 0,
            osc_vals * mass_vals ** (1.0 / p) / (radii * e2lam ** (1.0 / p)),
            np.where(osc_vals > 0, np.inf, 0.0),
        )

    degenerate = bool(np.all(i_vals <= 0))
    report = GrowthReport(
        radii=radii,
        i_values=i_vals,
        osc_values=osc_vals,
        c_emp=c_emp,
        degenerate=degenerate,
        lam=lam,
        p=p,
    )
    if degenerate:
        return report
    report.i_exponent = _loglog_slope(radii, i_vals)
    report.osc_exponent = _loglog_slope(radii, osc_vals)

    if alpha is not None:
        report.alpha = float(alpha)
        report.alpha_ratios = i_vals * radii ** (p - alpha)
        with np.errstate(divide="ignore", invalid="ignore"):
            report.osc_chain_ratios = np.where(
                e2lam > 0,
                osc_vals**p / (radii ** (p - alpha) * e2lam),
                np.where(osc_vals > 0, np.inf, 0.0),
            )

    if lam_bda is not None and lam_bda > 1.0:
        # Measured constant of the annulus energy estimate
        # I(r/2)^(1/p) <= C (I(2 Lambda r) - I(r/(2 Lambda)))^(1/p).
        consts = []
        for r in radii:
            inner = energy_at(r / 2.0)
            outer = energy_at(2.0 * lam_bda * r) - energy_at(r / (2.0 * lam_bda))
            if inner > 0 and outer > 0:
                consts.append((inner / outer) ** (1.0 / p))
        if consts:
            c_meas = max(consts)
            report.annulus_constant = c_meas
            report.beta = math.log(1.0 + c_meas**-p) / math.log(
                4.0 * lam_bda**2
            )
            rows = []
            for r_small, r_big in zip(radii[:-1], radii[1:]):
                i_small = energy_at(r_small)
                i_big = energy_at(r_big)
                if i_big > 0:
                    rows.append(
                        {
                            "r": float(r_small),
                            "R": float(r_big),
                            "observed": i_small / i_big,
                            "bound": (r_small / r_big) ** report.beta,
                        }
                    )
            report.beta_rows = rows
    return report
