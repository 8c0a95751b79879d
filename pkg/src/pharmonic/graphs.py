"""Finite weighted metric graphs and the discrete p-harmonic machinery.

A metric graph has unit-parameterized edges with a length and a constant
measure density; functions live on vertices and are extended linearly
along edges, so the upper gradient is ``|u(b) - u(a)| / length`` per edge.
The vertex residual implemented here is the exact first-order condition of
the edgewise p-energy; on unit-length edges it reduces to the classical
weighted vertex balance equation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components as _csgraph_components
from scipy.sparse.csgraph import dijkstra as _dijkstra

from .errors import InvalidConfig, UnknownVertex


def _floor_log2(m: np.ndarray) -> np.ndarray:
    """Exact floor(log2(m)) for positive int64 arrays."""
    powers = np.left_shift(np.int64(1), np.arange(63, dtype=np.int64))
    return np.searchsorted(powers, m, side="right").astype(np.int64) - 1


class MetricGraph:
    """Vertices plus weighted edges (a, b, length, density).

    The edge measure is ``length * density``; the graph metric is the
    shortest-path distance with edge lengths.  Instances are immutable
    after construction.
    """

    def __init__(
        self,
        n_vertices: int,
        edges=None,
        names: Optional[Sequence[str]] = None,
        coords: Optional[np.ndarray] = None,
        _arrays: Optional[tuple] = None,
    ):
        self.n = int(n_vertices)
        if _arrays is not None:
            eu, ev, length, density = _arrays
            self.edge_u = np.ascontiguousarray(eu, dtype=np.int64)
            self.edge_v = np.ascontiguousarray(ev, dtype=np.int64)
            self.length = np.ascontiguousarray(length, dtype=float)
            self.density = np.ascontiguousarray(density, dtype=float)
        else:
            edges = np.atleast_2d(np.asarray(edges, dtype=float))
            if edges.size == 0:
                edges = edges.reshape(0, 4)
            if edges.shape[1] != 4:
                raise InvalidConfig("edges must be rows (a, b, length, density)")
            self.edge_u = edges[:, 0].astype(np.int64)
            self.edge_v = edges[:, 1].astype(np.int64)
            self.length = edges[:, 2].copy()
            self.density = edges[:, 3].copy()
        if np.any(self.edge_u == self.edge_v):
            raise InvalidConfig("self-loops are not allowed")
        for arr in (self.edge_u, self.edge_v):
            if arr.size and (arr.min() < 0 or arr.max() >= self.n):
                raise UnknownVertex("edge endpoint out of range")
        if np.any(self.length <= 0) or np.any(self.density <= 0):
            raise InvalidConfig("edge lengths and densities must be positive")
        self.mu = self.length * self.density
        self.m = len(self.length)
        self.names = list(names) if names is not None else None
        self.coords = None if coords is None else np.asarray(coords, dtype=float)
        self._adj = None
        self._csr = None

    # -- topology ----------------------------------------------------------

    @property
    def adjacency(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """CSR-style (indptr, neighbor_vertex, edge_id), both directions."""
        if self._adj is None:
            ends = np.concatenate([self.edge_u, self.edge_v])
            other = np.concatenate([self.edge_v, self.edge_u])
            eid = np.concatenate([np.arange(self.m), np.arange(self.m)])
            order = np.lexsort((other, ends))
            ends, other, eid = ends[order], other[order], eid[order]
            indptr = np.zeros(self.n + 1, dtype=np.int64)
            np.add.at(indptr, ends + 1, 1)
            indptr = np.cumsum(indptr)
            self._adj = (indptr, other.astype(np.int64), eid.astype(np.int64))
        return self._adj

    def csr_lengths(self) -> sp.csr_matrix:
        """Symmetric sparse length matrix; parallel edges keep the minimum."""
        if self._csr is None:
            a = np.minimum(self.edge_u, self.edge_v)
            b = np.maximum(self.edge_u, self.edge_v)
            order = np.lexsort((b, a))
            a, b, ln = a[order], b[order], self.length[order]
            if len(a):
                new = np.ones(len(a), dtype=bool)
                new[1:] = (a[1:] != a[:-1]) | (b[1:] != b[:-1])
                starts = np.flatnonzero(new)
                ln = np.minimum.reduceat(ln, starts)
                a, b = a[starts], b[starts]
            mat = sp.coo_matrix(
                (np.concatenate([ln, ln]),
                 (np.concatenate([a, b]), np.concatenate([b, a]))),
                shape=(self.n, self.n),
            )
            self._csr = mat.tocsr()
        return self._csr

    def distances_from(self, sources, limit: float = np.inf) -> np.ndarray:
        """Shortest-path distances from one or more source vertices."""
        return _dijkstra(
            self.csr_lengths(), directed=False, indices=sources, limit=limit
        )

    def connected_components(self) -> tuple[int, np.ndarray]:
        return _csgraph_components(self.csr_lengths(), directed=False)

    def neighbors(self, v: int) -> np.ndarray:
        indptr, adj_v, _ = self.adjacency
        return adj_v[indptr[v]:indptr[v + 1]]

    def check_vertex(self, v: int) -> int:
        v = int(v)
        if not 0 <= v < self.n:
            raise UnknownVertex(f"vertex {v} out of range (n={self.n})")
        return v

    def total_mass(self) -> float:
        return float(self.mu.sum())

    def index_of(self, name: str) -> int:
        if self.names is None:
            raise UnknownVertex("graph has no vertex names")
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownVertex(f"no vertex named {name!r}") from None


@dataclass
class GraphFunction:
    """Vertex values, extended linearly along each edge."""

    graph: MetricGraph
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.graph.n,):
            raise InvalidConfig(
                f"expected {self.graph.n} vertex values, got {self.values.shape}"
            )

    def __getitem__(self, v: int) -> float:
        return float(self.values[v])

    def edge_gradients(self) -> np.ndarray:
        g = self.graph
        return np.abs(self.values[g.edge_v] - self.values[g.edge_u]) / g.length


def _as_values(g: MetricGraph, u) -> np.ndarray:
    if isinstance(u, GraphFunction):
        return u.values
    arr = np.asarray(u, dtype=float)
    if arr.shape != (g.n,):
        raise InvalidConfig(f"expected {g.n} vertex values")
    return arr


def graph_energy(g: MetricGraph, u, p: float, edge_subset=None) -> float:
    """Total p-energy: sum over edges of mu_e * (|du| / length)^p."""
    vals = _as_values(g, u)
    d = vals[g.edge_v] - vals[g.edge_u]
    grad = np.abs(d) / g.length
    contrib = g.mu * grad**p
    if edge_subset is not None:
        contrib = contrib[np.asarray(edge_subset)]
    return float(contrib.sum())


def p_laplacian_residuals(g: MetricGraph, u, p: float) -> np.ndarray:
    """First-order-condition residual of the p-energy at every vertex.

    The residual at a is ``sum_b c_e * g_e^(p-1) * sign(u(b) - u(a))`` over
    incident edges, with ``c_e`` the edge density and ``g_e`` the edge
    gradient; it vanishes exactly when u is p-harmonic at a.  On unit
    edges this is the classical vertex balance equation.
    """
    vals = _as_values(g, u)
    d = vals[g.edge_v] - vals[g.edge_u]
    w = g.mu / g.length**p
    flux = w * np.sign(d) * np.abs(d) ** (p - 1.0)
    res = np.bincount(g.edge_u, weights=flux, minlength=g.n)
    res -= np.bincount(g.edge_v, weights=flux, minlength=g.n)
    return res


def p_laplacian_residual(g: MetricGraph, u, p: float, vertex: int) -> float:
    """Residual at a single vertex; see ``p_laplacian_residuals``."""
    vertex = g.check_vertex(vertex)
    vals = _as_values(g, u)
    indptr, adj_v, adj_e = g.adjacency
    sl = slice(indptr[vertex], indptr[vertex + 1])
    nb = adj_v[sl]
    eid = adj_e[sl]
    d = vals[nb] - vals[vertex]
    w = g.mu[eid] / g.length[eid] ** p
    return float(np.sum(w * np.sign(d) * np.abs(d) ** (p - 1.0)))


# -- binary tree of the weighted-tree example --------------------------------


class RootedBinaryTree(MetricGraph):
    """Truncated rooted binary tree with the dyadic edge-measure rule.

    The distinguished ray is ``v_0, v_1, ...`` with ``v_j`` at heap index
    ``2^j - 1``; the off-ray child of ``v_(j-1)`` is ``v'_j`` at heap index
    ``2^j``.  Edge ``[v_(j-1), v_j]`` has measure ``2^(1-j)`` and every edge
    of the subtree hanging at ``v'_j`` has measure ``2^(1-j)`` as well.
    """

    def __init__(self, depth: int):
        if depth < 1:
            raise InvalidConfig("tree depth must be >= 1")
        J = int(depth)
        n = 2 ** (J + 1) - 1
        m = np.arange(1, n + 1, dtype=np.int64)
        d = _floor_log2(m)
        r = m - np.left_shift(np.int64(1), d)
        on_ray = r == 0
        inner = np.zeros(n, dtype=np.int64)
        inner[~on_ray] = _floor_log2(r[~on_ray])
        departure = np.where(on_ray, 0, d - inner)

        child = np.arange(1, n, dtype=np.int64)  # vertex indices 1..n-1
        parent = (child - 1) // 2
        j_edge = np.where(on_ray[child], d[child], departure[child])
        mu = np.power(2.0, 1.0 - j_edge.astype(float))
        super().__init__(
            n, _arrays=(parent, child, np.ones(n - 1), mu)
        )
        self.depth_limit = J
        self.vertex_depth = d
        self.on_ray = on_ray
        self.subtree_level = departure  # 0 on the ray, j inside G_j
        self.inner_depth = inner  # depth below the subtree root v'_j
        self.ray = (np.left_shift(np.int64(1), np.arange(J + 1)) - 1).astype(np.int64)

    def interior_mask(self) -> np.ndarray:
        """Vertices strictly above the truncation depth."""
        return self.vertex_depth < self.depth_limit


def build_binary_tree(depth: int) -> RootedBinaryTree:
    return RootedBinaryTree(depth)


def _gap_cumsum(p: float, J: int) -> np.ndarray:
    """G[t] = sum_{i=1..t} q^i with q = 2^(1/(1-p)); G[0] = 0.

    For p in {1.5, 2} the powers are exact dyadics, so consecutive
    differences of the returned sums are exact and deep-tree residuals
    cancel to machine zero.
    """
    q = 2.0 ** (1.0 / (1.0 - p))
    return np.concatenate([[0.0], np.cumsum(q ** np.arange(1, J + 1, dtype=float))])


def paper_tree_function(t: RootedBinaryTree, p: float) -> GraphFunction:
    """The unbounded finite-energy p-harmonic function of the tree example.

    Ray values are ``u(v_j) = j``; ``u(v'_1) = -1`` and ``u(v'_j) = j`` for
    ``j >= 2``; below each subtree root the increments shrink by the factor
    ``2^(1/(1-p))`` per level, which makes every interior vertex balance.
    """
    if not p > 1.0:
        raise InvalidConfig("p must exceed 1")
    G = _gap_cumsum(p, t.depth_limit)
    base = np.where(t.subtree_level == 1, -1.0, t.subtree_level.astype(float))
    sign = np.where(t.subtree_level == 1, -1.0, 1.0)
    u = np.where(
        t.on_ray,
        t.vertex_depth.astype(float),
        base + sign * G[t.inner_depth],
    )
    return GraphFunction(t, u)


def bounded_tree_function(t: RootedBinaryTree, p: float) -> GraphFunction:
    """The bounded nonconstant p-harmonic modification of the tree function.

    Equal to 0 at the root, 1 along the rest of the ray, the unbounded
    function on the first subtree, an affine rescaling of it on the second,
    and constant 1 on all deeper subtrees.
    """
    if not p > 1.0:
        raise InvalidConfig("p must exceed 1")
    G = _gap_cumsum(p, t.depth_limit)
    factor = 2.0 ** (1.0 / (p - 1.0))
    vals = np.ones(t.n)
    vals[t.ray[0]] = 0.0
    g1 = t.subtree_level == 1
    g2 = t.subtree_level == 2
    vals[g1] = -1.0 - G[t.inner_depth[g1]]
    vals[g2] = factor * (1.0 + G[t.inner_depth[g2]]) + 1.0
    return GraphFunction(t, vals)


def tree_energy_partial_sum(p: float, depth: int) -> float:
    """Closed-form p-energy of the paper tree function on a depth-J tree.

    Derived by summing the geometric gradient decay over the edges actually
    present: ray and attachment edges contribute ``2 * (2 - 2^(1-J))`` and
    the subtrees contribute the truncated double geometric series.
    """
    J = int(depth)
    total = 4.0 - 2.0 ** (2 - J)
    for k in range(1, J):
        total += 2.0 ** (k / (1.0 - p)) * (2.0 - 2.0 ** (1 - (J - k)))
    return total


def tree_energy_limit(p: float) -> float:
    """Depth-infinity limit 4 + 2 * sum_k 2^(k/(1-p)) of the tree energy."""
    z = 2.0 ** (1.0 / (1.0 - p))
    return 4.0 + 2.0 * z / (1.0 - z)


# -- lattice-style generators -------------------------------------------------


def build_path_graph(half_length: int, spacing: float = 1.0) -> MetricGraph:
    """Path with vertices at -L..L times spacing; a desk model of the line."""
    if half_length < 1:
        raise InvalidConfig("half_length must be >= 1")
    n = 2 * half_length + 1
    idx = np.arange(n - 1, dtype=float)
    edges = np.column_stack(
        [idx, idx + 1, np.full(n - 1, spacing), np.ones(n - 1)]
    )
    coords = np.column_stack(
        [(np.arange(n) - half_length) * spacing, np.zeros(n)]
    )
    return MetricGraph(n, edges, coords=coords)


def build_grid_graph(radius: int) -> MetricGraph:
    """Unit grid on the square [-R, R]^2 with unit lengths and densities."""
    if radius < 1:
        raise InvalidConfig("radius must be >= 1")
    side = 2 * radius + 1
    ii, jj = np.meshgrid(np.arange(side), np.arange(side), indexing="ij")
    idx = (ii * side + jj).astype(float)
    right = np.column_stack(
        [idx[:-1, :].ravel(), idx[1:, :].ravel()]
    )
    up = np.column_stack(
        [idx[:, :-1].ravel(), idx[:, 1:].ravel()]
    )
    pairs = np.vstack([right, up])
    ones = np.ones(len(pairs))
    edges = np.column_stack([pairs, ones, ones])
    coords = np.column_stack(
        [ii.ravel() - radius, jj.ravel() - radius]
    ).astype(float)
    return MetricGraph(side * side, edges, coords=coords)


def build_strip_graph(n_len: int, n_wid: int) -> MetricGraph:
    """Grid model of the strip [-n_len, n_len] x [0, 1], spacing 1/n_wid.

    Edge densities are half the transverse width of the slab each edge
    represents, so the total mass equals the strip area exactly (each
    orientation carries half).
    """
    if n_len < 2 or n_wid < 2:
        raise InvalidConfig("need n_len >= 2 and n_wid >= 2")
    h = 1.0 / n_wid
    nx = 2 * n_len * n_wid + 1
    ny = n_wid + 1
    ii, jj = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    idx = (ii * ny + jj).astype(float)

    # Horizontal edges: half-width slabs at the top and bottom rows.
    h_u = idx[:-1, :].ravel()
    h_v = idx[1:, :].ravel()
    h_row = jj[:-1, :].ravel()
    h_den = np.where((h_row == 0) | (h_row == n_wid), h / 2.0, h) / 2.0
    # Vertical edges: half-width slabs at the extreme columns.
    v_u = idx[:, :-1].ravel()
    v_v = idx[:, 1:].ravel()
    v_col = ii[:, :-1].ravel()
    v_den = np.where((v_col == 0) | (v_col == nx - 1), h / 2.0, h) / 2.0

    us = np.concatenate([h_u, v_u])
    vs = np.concatenate([h_v, v_v])
    dens = np.concatenate([h_den, v_den])
    lens = np.full(len(us), h)
    edges = np.column_stack([us, vs, lens, dens])
    coords = np.column_stack(
        [(ii.ravel() - n_len * n_wid) * h, jj.ravel() * h]
    )
    return MetricGraph(nx * ny, edges, coords=coords)


def coordinate_function(g: MetricGraph, axis: int = 0) -> GraphFunction:
    """u = coordinate along the given axis; needs a graph with coordinates."""
    if g.coords is None:
        raise InvalidConfig("graph has no coordinates")
    return GraphFunction(g, g.coords[:, axis].copy())


def strip_comparison_function(g: MetricGraph, n: float, t_scale: float = 1.0) -> GraphFunction:
    """The piecewise-linear comparison function T * clamp(x / n, 0, 1)."""
    if g.coords is None:
        raise InvalidConfig("graph has no coordinates")
    x = g.coords[:, 0]
    return GraphFunction(g, t_scale * np.clip(x / n, 0.0, 1.0))


# -- file formats --------------------------------------------------------------


def read_edge_list(path) -> MetricGraph:
    """Edge list format: lines ``a b length density``, '#' comments.

    Vertex names are arbitrary tokens, indexed in order of first appearance.
    """
    names: list[str] = []
    index: dict[str, int] = {}
    rows = []
    for ln_no, raw in enumerate(Path(path).read_text().splitlines(), 1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        parts = stripped.split()
        if len(parts) != 4:
            raise InvalidConfig(
                f"{path}:{ln_no}: expected 'a b length density', got {raw!r}"
            )
        a, b, ln, den = parts
        for tok in (a, b):
            if tok not in index:
                index[tok] = len(names)
                names.append(tok)
        try:
            rows.append((index[a], index[b], float(ln), float(den)))
        except ValueError:
            raise InvalidConfig(f"{path}:{ln_no}: bad numeric field in {raw!r}") from None
    if not rows:
        raise InvalidConfig(f"{path}: no edges found")
    return MetricGraph(len(names), rows, names=names)


def read_boundary_values(path, g: MetricGraph) -> dict[int, float]:
    """Role file: lines ``vertex value`` flag boundary vertices."""
    out: dict[int, float] = {}
    for ln_no, raw in enumerate(Path(path).read_text().splitlines(), 1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        parts = stripped.split()
        if len(parts) != 2:
            raise InvalidConfig(
                f"{path}:{ln_no}: expected 'vertex value', got {raw!r}"
            )
        name, val = parts
        if g.names is not None and name in g.names:
            vi = g.index_of(name)
        else:
            try:
                vi = g.check_vertex(int(name))
            except ValueError:
                raise UnknownVertex(f"{path}:{ln_no}: unknown vertex {name!r}") from None
        try:
            out[vi] = float(val)
        except ValueError:
            raise InvalidConfig(f"{path}:{ln_no}: bad value {val!r}") from None
    return out


def graph_function_csv_lines(u: GraphFunction) -> list[str]:
    g = u.graph
    lines = ["vertex,value"]
    for i in range(g.n):
        name = g.names[i] if g.names is not None else str(i)
        lines.append(f"{name},{float(u.values[i])!r}")
    return lines
