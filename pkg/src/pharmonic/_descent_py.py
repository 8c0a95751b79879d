"""Pure-Python cyclic coordinate-descent sweep.

Fallback for the compiled extension in ``_descent.pyx``; the two must stay
behaviourally identical.  Each free vertex solves its strictly convex 1-D
subproblem ``min_t sum_e w_e |t - u_b|^p`` by safeguarded Newton on the
monotone derivative, with bisection fallback and a final snap onto exact
neighbor values (which kills the kink term for p < 2).
"""

from __future__ import annotations

import math

_SNAP = 64.0 * 2.2e-16


def _solve_vertex(nb_vals, nb_w, p: float, t0: float) -> float:
    deg = len(nb_vals)
    lo = min(nb_vals)
    hi = max(nb_vals)
    if lo == hi:
        return lo
    if p == 2.0:
        sw = 0.0
        swv = 0.0
        for k in range(deg):
            sw += nb_w[k]
            swv += nb_w[k] * nb_vals[k]
        return swv / sw

    pm1 = p - 1.0
    pm2 = p - 2.0

    def g(t: float) -> float:
        acc = 0.0
        for k in range(deg):
            d = t - nb_vals[k]
            if d > 0.0:
                acc += nb_w[k] * d**pm1
            elif d < 0.0:
                acc -= nb_w[k] * (-d) ** pm1
        return acc

    t = t0 if lo < t0 < hi else 0.5 * (lo + hi)
    step_m1 = math.inf
    step_m2 = math.inf
    for _ in range(128):
        gt = g(t)
        if gt == 0.0:
            break
        if gt > 0.0:
            hi = t
        else:
            lo = t
        gp = 0.0
        for k in range(deg):
            d = t - nb_vals[k]
            if d != 0.0:
                gp += nb_w[k] * abs(d) ** pm2
        gp *= pm1
        if gp > 0.0 and math.isfinite(gp):
            tn = t - gt / gp
        else:
            tn = 0.5 * (lo + hi)
        if not lo < tn < hi:
            tn = 0.5 * (lo + hi)
        # Newton can ping-pong across a p < 2 kink with barely shrinking
        # steps; force bisection unless the step halves every other round.
        if abs(tn - t) > 0.5 * step_m2:
            tn = 0.5 * (lo + hi)
        step_m2 = step_m1
        step_m1 = abs(tn - t)
        if step_m1 <= 1e-16 * (1.0 + abs(tn)) or hi - lo <= 1e-16 * (1.0 + abs(t)):
            t = tn
            break
        t = tn

    # Snap to a kink if the root effectively sits on a neighbor value;
    # evaluating exactly there zeroes the singular term (matters for p < 2).
    best = t
    best_g = abs(g(t))
    for k in range(deg):
        v = nb_vals[k]
        if v != t and abs(t - v) <= _SNAP * (1.0 + abs(v)):
            gv = abs(g(v))
            if gv < best_g:
                best, best_g = v, gv
    return best


def cd_sweep(values, indptr, adj_v, adj_w, free_mask, p: float) -> float:
    """One cyclic coordinate-descent sweep in vertex-index order.

    Updates ``values`` in place at free vertices and returns the largest
    absolute vertex change.
    """
    n = len(values)
    max_delta = 0.0
    for i in range(n):
        if not free_mask[i]:
            continue
        start = indptr[i]
        stop = indptr[i + 1]
        if stop == start:
            continue
        nb_vals = [values[adj_v[k]] for k in range(start, stop)]
        nb_w = [adj_w[k] for k in range(start, stop)]
        new = _solve_vertex(nb_vals, nb_w, p, values[i])
        delta = abs(new - values[i])
        if delta > max_delta:
            max_delta = delta
        values[i] = new
    return max_delta
