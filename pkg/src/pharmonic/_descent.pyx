# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled cyclic coordinate-descent sweep; see _descent_py for the
reference implementation the two must match."""

from libc.math cimport fabs, pow, isfinite, INFINITY

cdef double _SNAP = 64.0 * 2.2e-16


cdef double _g(double t, double[::1] values, long[::1] adj_v,
               double[::1] adj_w, Py_ssize_t start, Py_ssize_t stop,
               double pm1) noexcept:
    cdef double acc = 0.0
    cdef double d
    cdef Py_ssize_t k
    for k in range(start, stop):
        d = t - values[adj_v[k]]
        if d > 0.0:
            acc += adj_w[k] * pow(d, pm1)
        elif d < 0.0:
            acc -= adj_w[k] * pow(-d, pm1)
    return acc


cdef double _solve_vertex(double[::1] values, long[::1] adj_v,
                          double[::1] adj_w, Py_ssize_t start,
                          Py_ssize_t stop, double p, double t0) noexcept:
    cdef double lo = values[adj_v[start]]
    cdef double hi = lo
    cdef double v, sw, swv, t, gt, gp, tn, d, best, best_g, gv
    cdef double step_m1, step_m2
    cdef double pm1 = p - 1.0
    cdef double pm2 = p - 2.0
    cdef Py_ssize_t k
    cdef int it

    for k in range(start, stop):
        v = values[adj_v[k]]
        if v < lo:
            lo = v
        if v > hi:
            hi = v
    if lo == hi:
        return lo
    if p == 2.0:
        sw = 0.0
        swv = 0.0
        for k in range(start, stop):
            sw += adj_w[k]
            swv += adj_w[k] * values[adj_v[k]]
        return swv / sw

    t = t0 if (lo < t0 and t0 < hi) else 0.5 * (lo + hi)
    step_m1 = INFINITY
    step_m2 = INFINITY
    for it in range(128):
        gt = _g(t, values, adj_v, adj_w, start, stop, pm1)
        if gt == 0.0:
            break
        if gt > 0.0:
            hi = t
        else:
            lo = t
        gp = 0.0
        for k in range(start, stop):
            d = t - values[adj_v[k]]
            if d != 0.0:
                gp += adj_w[k] * pow(fabs(d), pm2)
        gp *= pm1
        if gp > 0.0 and isfinite(gp):
            tn = t - gt / gp
        else:
            tn = 0.5 * (lo + hi)
        if not (lo < tn and tn < hi):
            tn = 0.5 * (lo + hi)
        # Newton can ping-pong across a p < 2 kink with barely shrinking
        # steps; force bisection unless the step halves every other round.
        if fabs(tn - t) > 0.5 * step_m2:
            tn = 0.5 * (lo + hi)
        step_m2 = step_m1
        step_m1 = fabs(tn - t)
        if step_m1 <= 1e-16 * (1.0 + fabs(tn)) or hi - lo <= 1e-16 * (1.0 + fabs(t)):
            t = tn
            break
        t = tn

    best = t
    best_g = fabs(_g(t, values, adj_v, adj_w, start, stop, pm1))
    for k in range(start, stop):
        v = values[adj_v[k]]
        if v != t and fabs(t - v) <= _SNAP * (1.0 + fabs(v)):
            gv = fabs(_g(v, values, adj_v, adj_w, start, stop, pm1))
            if gv < best_g:
                best = v
                best_g = gv
    return best


def cd_sweep(double[::1] values, long[::1] indptr, long[::1] adj_v,
             double[::1] adj_w, unsigned char[::1] free_mask, double p):
    """One cyclic coordinate-descent sweep in vertex-index order.

    Updates ``values`` in place at free vertices and returns the largest
    absolute vertex change.
    """
    cdef Py_ssize_t n = values.shape[0]
    cdef Py_ssize_t i, start, stop
    cdef double max_delta = 0.0
    cdef double new, delta
    for i in range(n):
        if not free_mask[i]:
            continue
        start = indptr[i]
        stop = indptr[i + 1]
        if stop == start:
            continue
        new = _solve_vertex(values, adj_v, adj_w, start, stop, p, values[i])
        delta = fabs(new - values[i])
        if delta > max_delta:
            max_delta = delta
        values[i] = new
    return max_delta
