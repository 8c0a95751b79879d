"""Metric-measure audits on metric graphs: balls, doubling, volume growth,
and annular chain construction.

Balls are open, carry their center and radius, and weigh partial edges
linearly by density.  The chain machinery follows the discrete recipe: a
greedy maximal separated net of the annulus, doubled balls around the net
points, and a breadth-first path through their intersection graph.  Every
returned chain can be re-validated against the containment and
intersection requirements it is supposed to satisfy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import dijkstra as _dijkstra

from .errors import (
    EmptyAnnulus,
    EmptyFamily,
    InsufficientRadii,
    InternalInvariantViolation,
    InvalidConfig,
    UnknownCenter,
    ZeroRadius,
)
from .graphs import GraphFunction, MetricGraph

#: A point of the metric graph: a vertex index or (edge index, fraction).
SpacePoint = Union[int, tuple]

_SLACK = 1e-9


# -- distances and ball geometry ----------------------------------------------


def point_distances(space: MetricGraph, center: SpacePoint) -> np.ndarray:
    """Graph distances from a vertex or edge point to every vertex."""
    if isinstance(center, tuple):
        try:
            eid, frac = center
            eid = int(eid)
            frac = float(frac)
        except (TypeError, ValueError):
            raise UnknownCenter(f"bad edge point {center!r}") from None
        if not 0 <= eid < space.m or not 0.0 <= frac <= 1.0:
            raise UnknownCenter(f"bad edge point {center!r}")
        a, b = int(space.edge_u[eid]), int(space.edge_v[eid])
        ln = float(space.length[eid])
        rows = space.distances_from([a, b])
        return np.minimum(rows[0] + frac * ln, rows[1] + (1.0 - frac) * ln)
    try:
        center = space.check_vertex(center)
    except Exception as exc:
        raise UnknownCenter(str(exc)) from None
    return space.distances_from(center)


def _own_edge_interval(center: SpacePoint, eid: int, ln: float, r: float):
    if not isinstance(center, tuple) or int(center[0]) != eid:
        return None
    t = float(center[1])
    half = r / ln
    return (max(0.0, t - half), min(1.0, t + half))


def edge_coverage(
    space: MetricGraph,
    dists: np.ndarray,
    r: float,
    center: Optional[SpacePoint] = None,
) -> np.ndarray:
    """Covered length fraction of each edge inside the open ball B(center, r).

    ``dists`` are the vertex distances from the center.  The portion of an
    edge reachable through either endpoint is a pair of end intervals whose
    union length caps at 1; an edge carrying the center itself additionally
    covers a middle interval.
    """
    fa = np.clip((r - dists[space.edge_u]) / space.length, 0.0, 1.0)
    fb = np.clip((r - dists[space.edge_v]) / space.length, 0.0, 1.0)
    cover = np.minimum(1.0, fa + fb)
    if isinstance(center, tuple):
        eid = int(center[0])
        iv = _own_edge_interval(center, eid, float(space.length[eid]), r)
        if iv is not None:
            # Merge the middle interval with the two end intervals.
            pieces = []
            if fa[eid] > 0:
                pieces.append((0.0, float(fa[eid])))
            if fb[eid] > 0:
                pieces.append((1.0 - float(fb[eid]), 1.0))
            if iv[1] > iv[0]:
                pieces.append(iv)
            pieces.sort()
            total = 0.0
            cur_lo, cur_hi = None, None
            for lo, hi in pieces:
                if cur_lo is None:
                    cur_lo, cur_hi = lo, hi
                elif lo <= cur_hi:
                    cur_hi = max(cur_hi, hi)
                else:
                    total += cur_hi - cur_lo
                    cur_lo, cur_hi = lo, hi
            if cur_lo is not None:
                total += cur_hi - cur_lo
            cover[eid] = min(1.0, total)
    return cover


def ball_mass(space: MetricGraph, center: SpacePoint, r: float) -> float:
    """Measure of the open ball B(center, r), partial edges counted linearly."""
    if r <= 0:
        raise ZeroRadius(f"ball radius must be positive, got {r!r}")
    dists = point_distances(space, center)
    cover = edge_coverage(space, dists, r, center)
    return float((space.mu * cover).sum())


def ball_extrema(
    space: MetricGraph, values: np.ndarray, dists: np.ndarray, r: float
) -> tuple[float, float]:
    """(inf, sup) of an edgewise-linear function over the closure of B_r.

    The extrema sit at vertices inside the ball or at the points where the
    radius cuts an edge; the cut values are the linear interpolants there.
    """
    candidates = []
    inside = dists < r
    if inside.any():
        vals_in = values[inside]
        candidates.append((float(vals_in.min()), float(vals_in.max())))
    for ends, other in (
        (space.edge_u, space.edge_v),
        (space.edge_v, space.edge_u),
    ):
        f = (r - dists[ends]) / space.length
        cut = f > 0
        if cut.any():
            t = np.minimum(f[cut], 1.0)
            va = values[ends[cut]]
            vb = values[other[cut]]
            vals_cut = va + (vb - va) * t
            candidates.append((float(vals_cut.min()), float(vals_cut.max())))
    if not candidates:
        raise EmptyAnnulus(f"ball of radius {r!r} contains no points")
    lo = min(c[0] for c in candidates)
    hi = max(c[1] for c in candidates)
    return lo, hi


def ball_energy(
    space: MetricGraph,
    values: np.ndarray,
    dists: np.ndarray,
    r: float,
    p: float,
    center: Optional[SpacePoint] = None,
) -> float:
    """p-energy of an edgewise-linear function over B_r (partial edges)."""
    cover = edge_coverage(space, dists, r, center)
    grad = np.abs(values[space.edge_v] - values[space.edge_u]) / space.length
    return float((space.mu * cover * grad**p).sum())


@dataclass(frozen=True)
class Ball:
    """An open metric ball with a predetermined center and radius."""

    space: MetricGraph
    center: SpacePoint
    radius: float

    def mass(self) -> float:
        return ball_mass(self.space, self.center, self.radius)


# -- doubling and volume growth -----------------------------------------------


@dataclass
class DoublingReport:
    """Max of mass(2B) / mass(B) over a family, with the per-ball ratios."""

    max_ratio: float
    ratios: np.ndarray
    radii: np.ndarray
    increasing_trend: bool

    def __float__(self) -> float:
        return self.max_ratio


def doubling_report(space: MetricGraph, ball_family: Sequence[Ball]) -> DoublingReport:
    """Doubling ratios mu(2B)/mu(B) over a ball family."""
    balls = list(ball_family)
    if not balls:
        raise EmptyFamily("doubling_report needs at least one ball")
    ratios = []
    radii = []
    for ball in balls:
        dists = point_distances(space, ball.center)
        m1 = float((space.mu * edge_coverage(space, dists, ball.radius, ball.center)).sum())
        m2 = float((space.mu * edge_coverage(space, dists, 2.0 * ball.radius, ball.center)).sum())
        if m1 <= 0:
            raise ZeroRadius(f"ball {ball!r} has zero mass")
        ratios.append(m2 / m1)
        radii.append(ball.radius)
    ratios = np.array(ratios)
    radii = np.array(radii)
    order = np.argsort(radii, kind="stable")
    rs = ratios[order]
    half = len(rs) // 2
    increasing = bool(
        len(rs) >= 4 and rs[half:].mean() > rs[:half].mean() + 0.25
    )
    return DoublingReport(float(ratios.max()), ratios, radii, increasing)


@dataclass
class GrowthExponents:
    """Volume growth diagnostics from log-log mass-versus-radius data.

    ``sigma`` and ``s`` are the smallest and largest two-point slopes (the
    mass-bound exponent window); the alpha candidates are least-squares
    slopes, all of which lie inside [sigma, s].
    """

    sigma: float
    s: float
    alpha_candidates: list[float]
    fit_quality: float
    superpolynomial: bool
    radii: np.ndarray = field(default=None, repr=False)
    masses: np.ndarray = field(default=None, repr=False)

    @property
    def alpha(self) -> float:
        return self.alpha_candidates[0]


def _lsq_slope(logr: np.ndarray, logm: np.ndarray) -> tuple[float, float]:
    x = logr - logr.mean()
    y = logm - logm.mean()
    denom = float((x * x).sum())
    slope = float((x * y).sum()) / denom
    resid = y - slope * x
    ss_tot = float((y * y).sum())
    r2 = 1.0 - float((resid * resid).sum()) / ss_tot if ss_tot > 0 else 1.0
    return slope, r2


def volume_growth_fit(
    space: MetricGraph, x0: SpacePoint, radii: Sequence[float]
) -> GrowthExponents:
    """Fit growth exponents of r -> mass(B(x0, r)) on a log-log scale."""
    radii = np.asarray(sorted(float(r) for r in radii))
    if len(radii) < 4:
        raise InsufficientRadii("volume_growth_fit needs at least 4 radii")
    if radii[0] <= 0 or np.any(np.diff(radii) <= 0):
        raise InvalidConfig("radii must be positive and strictly increasing")
    dists = point_distances(space, x0)
    masses = np.array(
        [float((space.mu * edge_coverage(space, dists, r, x0)).sum()) for r in radii]
    )
    if np.any(masses <= 0):
        raise ZeroRadius("a ball in the radius family has zero mass")
    logr = np.log(radii)
    logm = np.log(masses)
    slopes = np.diff(logm) / np.diff(logr)
    sigma = float(slopes.min())
    s = float(slopes.max())

    # Largest run of consecutive radius doublings.
    ratio = radii[1:] / radii[:-1]
    dyadic = np.abs(ratio - 2.0) <= 1e-9
    best_lo, best_len = 0, 0
    run_lo, run_len = 0, 0
    for i, ok in enumerate(dyadic):
        if ok:
            if run_len == 0:
                run_lo = i
            run_len += 1
            if run_len > best_len:
                best_lo, best_len = run_lo, run_len
        else:
            run_len = 0
    if best_len >= 2:
        sl = slice(best_lo, best_lo + best_len + 1)
        alpha_dyadic, r2 = _lsq_slope(logr[sl], logm[sl])
    else:
        alpha_dyadic, r2 = _lsq_slope(logr, logm)
    alpha_all, _ = _lsq_slope(logr, logm)
    candidates = [alpha_dyadic]
    if abs(alpha_all - alpha_dyadic) > 1e-12:
        candidates.append(alpha_all)

    half = len(slopes) // 2
    superpoly = bool(
        len(slopes) >= 4
        and slopes[half:].mean() > slopes[:half].mean() + 0.5
        and np.all(np.diff(slopes) > -0.1)
    )
    return GrowthExponents(
        sigma=sigma,
        s=s,
        alpha_candidates=candidates,
        fit_quality=r2,
        superpolynomial=superpoly,
        radii=radii,
        masses=masses,
    )


# -- sampled space for net construction ---------------------------------------


class _SampledSpace:
    """Vertices plus edge-subdivision nodes within a horizon around x0.

    Subdivision keeps the shortest-path metric exact while giving the net
    a point set of resolution at most ``resolution``.  Node ids list the
    kept vertices first (original order), then subdivision points in
    (edge, step) order, so greedy traversals are deterministic.
    """

    def __init__(self, g: MetricGraph, x0: int, horizon: float, resolution: float):
        self.graph = g
        self.x0 = g.check_vertex(x0)
        d0 = g.distances_from(self.x0)
        lmax = float(g.length.max()) if g.m else 0.0
        keep_v = d0 <= horizon + lmax + _SLACK
        keep_e = keep_v[g.edge_u] & keep_v[g.edge_v]

        v_ids = np.flatnonzero(keep_v)
        self._v_ids = v_ids
        self.node_of_vertex = -np.ones(g.n, dtype=np.int64)
        self.node_of_vertex[v_ids] = np.arange(len(v_ids))

        nodes_d0 = [d0[v_ids]]
        node_edge = [np.full(len(v_ids), -1, dtype=np.int64)]
        node_frac = [np.zeros(len(v_ids))]

        rows, cols, lens = [], [], []
        next_id = len(v_ids)
        self._edge_nodes: dict[int, tuple[int, int]] = {}
        for eid in np.flatnonzero(keep_e):
            a, b = int(g.edge_u[eid]), int(g.edge_v[eid])
            ln = float(g.length[eid])
            k = max(1, int(math.ceil(ln / resolution)))
            na, nb = int(self.node_of_vertex[a]), int(self.node_of_vertex[b])
            if k == 1:
                chain = [na, nb]
            else:
                interior = np.arange(next_id, next_id + k - 1)
                self._edge_nodes[int(eid)] = (next_id, k)
                fr = np.arange(1, k) / k
                node_edge.append(np.full(k - 1, eid, dtype=np.int64))
                node_frac.append(fr)
                nodes_d0.append(
                    np.minimum(d0[a] + fr * ln, d0[b] + (1.0 - fr) * ln)
                )
                next_id += k - 1
                chain = [na, *interior.tolist(), nb]
            seg = ln / k
            for u, v in zip(chain[:-1], chain[1:]):
                rows.append(u)
                cols.append(v)
                lens.append(seg)

        self.n_nodes = next_id
        self.d0 = np.concatenate(nodes_d0)
        self.node_edge = np.concatenate(node_edge)
        self.node_frac = np.concatenate(node_frac)
        rows = np.array(rows, dtype=np.int64)
        cols = np.array(cols, dtype=np.int64)
        lens = np.array(lens)
        self.csr = sp.coo_matrix(
            (np.concatenate([lens, lens]),
             (np.concatenate([rows, cols]), np.concatenate([cols, rows]))),
            shape=(self.n_nodes, self.n_nodes),
        ).tocsr()

    def distances(self, sources, limit: float = np.inf) -> np.ndarray:
        return _dijkstra(self.csr, directed=False, indices=sources, limit=limit)

    def node_for_point(self, point: SpacePoint) -> int:
        """Map a vertex or edge point to its nearest sampled node."""
        if isinstance(point, tuple):
            eid = int(point[0])
            frac = float(point[1])
            if not 0 <= eid < self.graph.m or not 0.0 <= frac <= 1.0:
                raise UnknownCenter(f"bad edge point {point!r}")
            if eid in self._edge_nodes:
                start, k = self._edge_nodes[eid]
                step = round(frac * k)
                if step <= 0:
                    return self._vertex_node(int(self.graph.edge_u[eid]))
                if step >= k:
                    return self._vertex_node(int(self.graph.edge_v[eid]))
                return start + step - 1
            if frac <= 0.5:
                return self._vertex_node(int(self.graph.edge_u[eid]))
            return self._vertex_node(int(self.graph.edge_v[eid]))
        return self._vertex_node(int(point))

    def _vertex_node(self, v: int) -> int:
        v = self.graph.check_vertex(v)
        node = int(self.node_of_vertex[v])
        if node < 0:
            raise UnknownCenter(f"vertex {v} lies outside the sampled horizon")
        return node

    def point_of_node(self, node: int) -> SpacePoint:
        if self.node_edge[node] < 0:
            return int(self._v_ids[node])
        return (int(self.node_edge[node]), float(self.node_frac[node]))


# -- annular chains ------------------------------------------------------------


@dataclass
class ChainOfBalls:
    """A finite chain of overlapping balls joining x to y inside an annulus.

    Ball radii are ``2 * delta * r``; centers lie in the annulus between
    ``r / Lambda`` and ``Lambda * r``; the chain length is at most the net
    size ``n0``.
    """

    balls: list[Ball]
    x: SpacePoint
    y: SpacePoint
    r: float
    lam_bda: float
    delta: float
    n0: int
    _net: "AnnulusNet" = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return len(self.balls)

    def validate(self) -> None:
        """Re-check every invariant the chain is supposed to satisfy."""
        net = self._net
        if net is None:
            raise InternalInvariantViolation("chain lost its net context")
        rr, lb, de = self.r, self.lam_bda, self.delta
        ball_r = 2.0 * de * rr
        if self.n > self.n0:
            raise InternalInvariantViolation(f"chain length {self.n} > N0 {self.n0}")
        nodes = [net.space.node_for_point(b.center) for b in self.balls]
        d0 = net.space.d0
        for nd in nodes:
            if not (rr / lb - _SLACK <= d0[nd] <= lb * rr + _SLACK):
                raise InternalInvariantViolation(
                    f"ball center at distance {d0[nd]!r} leaves the annulus"
                )
        xn = net.space.node_for_point(self.x)
        yn = net.space.node_for_point(self.y)
        dx = net.space.distances(nodes[0])
        if not dx[xn] < ball_r + _SLACK:
            raise InternalInvariantViolation("x is not inside the first ball")
        dy = net.space.distances(nodes[-1])
        if not dy[yn] < ball_r + _SLACK:
            raise InternalInvariantViolation("y is not inside the last ball")
        tau_r = rr / (2.0 * lb)  # tau * ball_r with tau = 1/(4 delta Lambda)
        for i, nd in enumerate(nodes):
            drow = net.space.distances(
                nd, limit=max(2.0 * ball_r, tau_r) * (1 + 1e-12)
            )
            if i + 1 < len(nodes) and drow[nodes[i + 1]] >= 2.0 * ball_r:
                raise InternalInvariantViolation(
                    "consecutive balls do not intersect"
                )
            inside = drow < tau_r
            if inside.any():
                dz = d0[inside]
                if dz.min() < tau_r - _SLACK or dz.max() >= 2.0 * lb * rr + _SLACK:
                    raise InternalInvariantViolation(
                        "a tau-scaled ball leaves the enlarged annulus"
                    )


@dataclass
class ChainSearchFailure:
    """Returned when no chain of balls joins x to y; a value, not an error."""

    reason: str
    n0: int


class AnnulusNet:
    """Greedy maximal separated net of an annulus plus its ball-intersection
    graph; reusable across endpoint pairs at the same radius."""

    def __init__(
        self,
        g: MetricGraph,
        x0: int,
        r: float,
        lam_bda: float,
        delta: float,
    ):
        if r <= 0:
            raise ZeroRadius("annulus radius must be positive")
        if lam_bda <= 1.0:
            raise InvalidConfig("Lambda must exceed 1")
        if delta <= 0.0:
            raise InvalidConfig("delta must be positive")
        self.graph = g
        self.x0 = x0
        self.r = float(r)
        self.lam_bda = float(lam_bda)
        self.delta = float(delta)
        self.sep = delta * r
        self.ball_radius = 2.0 * delta * r
        resolution = max(self.sep / 2.0, 1e-12)
        tau_r = r / (2.0 * lam_bda)
        horizon = lam_bda * r + max(2.0 * self.ball_radius, tau_r) + 2.0 * resolution
        self.space = _SampledSpace(g, x0, horizon, resolution)

        d0 = self.space.d0
        in_annulus = (d0 >= r / lam_bda - _SLACK) & (d0 <= lam_bda * r + _SLACK)
        candidates = np.flatnonzero(in_annulus)
        if len(candidates) == 0:
            raise EmptyAnnulus(
                f"annulus between {r / lam_bda!r} and {lam_bda * r!r} "
                "contains no sample points"
            )
        # Deterministic greedy order: by distance to x0, then node id.
        order = candidates[np.lexsort((candidates, d0[candidates]))]
        blocked = np.zeros(self.space.n_nodes, dtype=bool)
        net: list[int] = []
        for node in order:
            if blocked[node]:
                continue
            net.append(int(node))
            drow = self.space.distances(int(node), limit=self.sep * (1 + 1e-12))
            blocked |= drow < self.sep
        self.net_nodes = np.array(net, dtype=np.int64)
        self.n0 = len(net)
        self.candidates = candidates

        # Doubled balls intersect iff their centers sit closer than twice
        # the ball radius (the graph is geodesic).
        cut = 2.0 * self.ball_radius
        self._adj: list[np.ndarray] = []
        chunk = 256
        rows = []
        for lo in range(0, self.n0, chunk):
            sub = self.net_nodes[lo:lo + chunk]
            dmat = np.atleast_2d(
                self.space.distances(sub, limit=cut * (1 + 1e-12))
            )
            rows.append(dmat[:, self.net_nodes])
        dmat_net = np.vstack(rows) if rows else np.empty((0, self.n0))
        for i in range(self.n0):
            nb = np.flatnonzero(dmat_net[i] < cut)
            self._adj.append(nb[nb != i])

    def containing_balls(self, node: int) -> np.ndarray:
        drow = self.space.distances(
            int(node), limit=self.ball_radius * (1 + 1e-12)
        )
        return np.flatnonzero(drow[self.net_nodes] < self.ball_radius)

    def find_chain(self, x: SpacePoint, y: SpacePoint):
        xn = self.space.node_for_point(x)
        yn = self.space.node_for_point(y)
        start = self.containing_balls(xn)
        goal = set(self.containing_balls(yn).tolist())
        if len(start) == 0 or not goal:
            return ChainSearchFailure(
                "an endpoint is not covered by any net ball", self.n0
            )
        prev = -np.ones(self.n0, dtype=np.int64)
        seen = np.zeros(self.n0, dtype=bool)
        queue = list(start)
        seen[start] = True
        hit = -1
        qi = 0
        while qi < len(queue):
            cur = queue[qi]
            qi += 1
            if cur in goal:
                hit = cur
                break
            for nb in self._adj[cur]:
                if not seen[nb]:
                    seen[nb] = True
                    prev[nb] = cur
                    queue.append(int(nb))
        if hit < 0:
            return ChainSearchFailure(
                "the annulus intersection graph has no path between the "
                "endpoint balls",
                self.n0,
            )
        path = []
        cur = hit
        while cur >= 0:
            path.append(cur)
            cur = int(prev[cur])
        path.reverse()
        balls = [
            Ball(self.graph, self.space.point_of_node(int(self.net_nodes[i])),
                 self.ball_radius)
            for i in path
        ]
        return ChainOfBalls(
            balls=balls,
            x=x,
            y=y,
            r=self.r,
            lam_bda=self.lam_bda,
            delta=self.delta,
            n0=self.n0,
            _net=self,
        )


def annular_chain(
    space: MetricGraph,
    x0: int,
    r: float,
    lam_bda: float,
    delta: float,
    x: SpacePoint,
    y: SpacePoint,
    *,
    net: Optional[AnnulusNet] = None,
):
    """Try to join x and y by a chain of balls inside the annulus at x0.

    Returns a ChainOfBalls or a ChainSearchFailure value.  x and y must lie
    in the closed annulus between ``r / Lambda`` and ``Lambda * r``.
    """
    if net is None:
        net = AnnulusNet(space, x0, r, lam_bda, delta)
    d0 = net.space.d0
    for label, pt in (("x", x), ("y", y)):
        nd = net.space.node_for_point(pt)
        if not (r / lam_bda - _SLACK <= d0[nd] <= lam_bda * r + _SLACK):
            raise EmptyAnnulus(
                f"endpoint {label} at distance {d0[nd]!r} is outside the "
                f"closed annulus [{r / lam_bda!r}, {lam_bda * r!r}]"
            )
    return net.find_chain(x, y)


# -- chainability audit --------------------------------------------------------


@dataclass
class ChainabilityRow:
    r: float
    chainable: bool
    n_max: int
    n0: int
    doubling_ratio: float
    mass: float


def default_delta(lam_bda: float, lam: float = 1.0) -> float:
    """The separation parameter matching the chain-definition step bound."""
    return 1.0 / (8.0 * lam * lam_bda)


def chainability_audit(
    space: MetricGraph,
    x0: int,
    radii: Sequence[float],
    lam_bda: float = 2.0,
    delta: Optional[float] = None,
    lam: float = 1.0,
    max_points: int = 4,
    validate: bool = False,
) -> list[ChainabilityRow]:
    """Test sequential annular chainability at each radius.

    For each radius the sphere is sampled (points within one sampling step
    of distance r), up to ``max_points`` spread points are selected, and
    every pair is joined through the shared annulus net.  A radius counts
    as chainable only if every tested pair admits a chain.
    """
    if delta is None:
        delta = default_delta(lam_bda, lam)
    rows = []
    for r in radii:
        r = float(r)
        dists = point_distances(space, x0)
        mass_r = float((space.mu * edge_coverage(space, dists, r)).sum())
        mass_2r = float((space.mu * edge_coverage(space, dists, 2.0 * r)).sum())
        doubling = mass_2r / mass_r if mass_r > 0 else math.inf
        try:
            net = AnnulusNet(space, x0, r, lam_bda, delta)
        except EmptyAnnulus:
            rows.append(ChainabilityRow(r, False, 0, 0, doubling, mass_r))
            continue
        d0 = net.space.d0
        step = max(net.sep / 2.0, 1e-12)
        near = np.abs(d0 - r) <= step / 2.0 + _SLACK
        sphere = np.flatnonzero(near)
        if len(sphere) == 0:
            gap = np.abs(d0 - r)
            sphere = np.flatnonzero(gap <= gap.min() + step)
        order = sphere[np.lexsort((sphere, d0[sphere]))]
        if len(order) > max_points:
            pick = np.unique(
                np.round(np.linspace(0, len(order) - 1, max_points)).astype(int)
            )
            order = order[pick]
        points = [net.space.point_of_node(int(nd)) for nd in order]
        chainable = True
        n_max = 0
        for i in range(len(points)):
            for j in range(i + 1, len(points)):
                result = net.find_chain(points[i], points[j])
                if isinstance(result, ChainSearchFailure):
                    chainable = False
                else:
                    n_max = max(n_max, result.n)
                    if validate:
                        result.validate()
            if not chainable:
                break
        rows.append(
            ChainabilityRow(r, chainable, n_max, net.n0, doubling, mass_r)
        )
    return rows
