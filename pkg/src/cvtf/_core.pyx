# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: knapsack-simplex LP vertex scan, Frank-Wolfe quadratic
minimization with away steps, and exhaustive lattice search.

Semantics (tie-breaking included) mirror cvtf._core_py exactly; the parity
test suite holds the two backends together.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "compiled"

cdef double _FEAS_TOL = 1e-12
cdef double _WEIGHT_EPS = 1e-15
cdef int _RESYNC_EVERY = 64


cdef int _lp_vertex_c(const double* g, const double* w, int d, double cap,
                      int* out_i, int* out_j, double* out_theta) noexcept nogil:
    cdef double best_val = 1e308
    cdef int found = 0
    cdef int i, j
    cdef double theta, val
    for i in range(d):
        if w[i] <= cap + _FEAS_TOL and g[i] < best_val:
            best_val = g[i]
            out_i[0] = i
            out_j[0] = i
            out_theta[0] = 1.0
            found = 1
        for j in range(i + 1, d):
            if w[i] == w[j]:
                continue
            theta = (w[j] - cap) / (w[j] - w[i])
            if theta <= _WEIGHT_EPS or theta >= 1.0 - _WEIGHT_EPS:
                continue
            val = theta * g[i] + (1.0 - theta) * g[j]
            if val < best_val:
                best_val = val
                out_i[0] = i
                out_j[0] = j
                out_theta[0] = theta
                found = 1
    return found


def lp_vertex(g, w, double cap):
    """Exact minimizer of <g, p> over the polytope; returns (i, j, theta)."""
    cdef cnp.ndarray[double, ndim=1] g_arr = np.ascontiguousarray(g, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] w_arr = np.ascontiguousarray(w, dtype=np.float64)
    cdef int i = 0, j = 0
    cdef double theta = 0.0
    if not _lp_vertex_c(<double*> g_arr.data, <double*> w_arr.data,
                        g_arr.shape[0], cap, &i, &j, &theta):
        raise ValueError("empty feasible set (no vertex found)")
    return i, j, theta


cdef inline double _atom_dot_g(int atom_id, int d, const double* g, const double* w,
                               double cap, const double* x0) noexcept nogil:
    cdef int i, j
    cdef double theta
    if atom_id == d * d:
        theta = 0.0
        for i in range(d):
            theta += g[i] * x0[i]
        return theta
    i = atom_id // d
    j = atom_id % d
    if i == j:
        return g[i]
    theta = (w[j] - cap) / (w[j] - w[i])
    return theta * g[i] + (1.0 - theta) * g[j]


cdef inline void _atom_add(int atom_id, int d, const double* w, double cap,
                           const double* x0, double scale, double* out) noexcept nogil:
    cdef int i, j
    cdef double theta
    if atom_id == d * d:
        for i in range(d):
            out[i] += scale * x0[i]
        return
    i = atom_id // d
    j = atom_id % d
    if i == j:
        out[i] += scale
        return
    theta = (w[j] - cap) / (w[j] - w[i])
    out[i] += scale * theta
    out[j] += scale * (1.0 - theta)


def fw_minimize(Q, w, double cap, x0, int max_iter, double tol, bint away_steps):
    """Minimize x^T Q x over the polytope by Frank-Wolfe with exact line
    search and optional away steps; returns (x, value, gap, iters, converged)."""
    cdef cnp.ndarray[double, ndim=2] Q_arr = np.ascontiguousarray(Q, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] w_arr = np.ascontiguousarray(w, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] x0_arr = np.ascontiguousarray(x0, dtype=np.float64).copy()
    cdef int d = x0_arr.shape[0]
    cdef int anchor = d * d

    cdef cnp.ndarray[double, ndim=1] x_arr = x0_arr.copy()
    cdef cnp.ndarray[double, ndim=1] g_arr = np.zeros(d)
    cdef cnp.ndarray[double, ndim=1] dir_arr = np.zeros(d)
    cdef cnp.ndarray[double, ndim=1] weight_arr = np.zeros(d * d + 1)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] active_arr = np.zeros(d * d + 1, dtype=np.int64)

    cdef double* Qp = <double*> Q_arr.data
    cdef double* wp = <double*> w_arr.data
    cdef double* x0p = <double*> x0_arr.data
    cdef double* xp = <double*> x_arr.data
    cdef double* gp = <double*> g_arr.data
    cdef double* dp = <double*> dir_arr.data
    cdef double* wt = <double*> weight_arr.data
    cdef cnp.int64_t* active = <cnp.int64_t*> active_arr.data

    cdef int n_active = 1
    active[0] = anchor
    wt[anchor] = 1.0

    cdef double gap = 1e308
    cdef bint converged = False
    cdef int iters = 0
    cdef int it, a, k, r, c
    cdef int s_i = 0, s_j = 0, s_id = 0
    cdef double s_theta = 0.0, s_val, gx, acc
    cdef int v_id, v_pos, best_pos
    cdef double v_val, alpha_v, val
    cdef bint use_away, found_s
    cdef double slope, curv, gamma, gamma_max

    for it in range(1, max_iter + 1):
        iters = it
        # g = 2 Q x
        for r in range(d):
            acc = 0.0
            for c in range(d):
                acc += Qp[r * d + c] * xp[c]
            gp[r] = 2.0 * acc
        found_s = _lp_vertex_c(gp, wp, d, cap, &s_i, &s_j, &s_theta)
        if not found_s:
            raise ValueError("empty feasible set (no vertex found)")
        s_id = s_i * d + s_j
        s_val = s_theta * gp[s_i] + (1.0 - s_theta) * gp[s_j]
        gx = 0.0
        for r in range(d):
            gx += gp[r] * xp[r]
        gap = gx - s_val
        if gap <= tol:
            converged = True
            break

        use_away = False
        v_id = -1
        v_pos = -1
        alpha_v = 0.0
        if away_steps and n_active > 0:
            v_val = -1e308
            for k in range(n_active):
                a = <int> active[k]
                val = _atom_dot_g(a, d, gp, wp, cap, x0p)
                if val > v_val or (val == v_val and a < v_id):
                    v_val = val
                    v_id = a
                    v_pos = k
            alpha_v = wt[v_id]
            if v_val - gx > gap and alpha_v < 1.0 - _WEIGHT_EPS:
                use_away = True

        if use_away:
            for r in range(d):
                dp[r] = xp[r]
            _atom_add(v_id, d, wp, cap, x0p, -1.0, dp)
            gamma_max = alpha_v / (1.0 - alpha_v)
        else:
            for r in range(d):
                dp[r] = -xp[r]
            _atom_add(s_id, d, wp, cap, x0p, 1.0, dp)
            gamma_max = 1.0

        slope = 0.0
        for r in range(d):
            slope += gp[r] * dp[r]
        curv = 0.0
        for r in range(d):
            acc = 0.0
            for c in range(d):
                acc += Qp[r * d + c] * dp[c]
            curv += dp[r] * acc
        if curv > 0.0:
            gamma = -slope / (2.0 * curv)
            if gamma < 0.0:
                gamma = 0.0
            if gamma > gamma_max:
                gamma = gamma_max
        else:
            gamma = gamma_max if slope < 0.0 else 0.0
        if gamma <= 0.0:
            converged = gap <= tol
            break

        if use_away:
            for k in range(n_active):
                wt[active[k]] *= 1.0 + gamma
            wt[v_id] -= gamma
            if wt[v_id] <= _WEIGHT_EPS:
                wt[v_id] = 0.0
                active[v_pos] = active[n_active - 1]
                n_active -= 1
        else:
            if gamma >= 1.0:
                for k in range(n_active):
                    wt[active[k]] = 0.0
                n_active = 1
                active[0] = s_id
                wt[s_id] = 1.0
            else:
                for k in range(n_active):
                    wt[active[k]] *= 1.0 - gamma
                if wt[s_id] == 0.0:
                    active[n_active] = s_id
                    n_active += 1
                wt[s_id] += gamma
        for r in range(d):
            xp[r] += gamma * dp[r]

        if it % _RESYNC_EVERY == 0:
            for r in range(d):
                xp[r] = 0.0
            for k in range(n_active):
                _atom_add(<int> active[k], d, wp, cap, x0p, wt[active[k]], xp)

    cdef double value = 0.0
    for r in range(d):
        acc = 0.0
        for c in range(d):
            acc += Qp[r * d + c] * xp[c]
        value += xp[r] * acc
    return x_arr, value, gap, iters, converged


def lattice_minimize(Q, w, double cap, long n_ticks):
    """Exhaustive lattice search over p = k/N, sum k = N, w.p <= cap.

    Returns (x, value, n_feasible); matches the fallback's enumeration order.
    """
    cdef cnp.ndarray[double, ndim=2] Q_arr = np.ascontiguousarray(Q, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] w_arr = np.ascontiguousarray(w, dtype=np.float64)
    cdef int d = Q_arr.shape[0]
    cdef cnp.ndarray[double, ndim=1] vacuum = np.zeros(d)
    vacuum[0] = 1.0
    if n_ticks < 1:
        return vacuum, float(vacuum @ (Q_arr @ vacuum)), 1

    cdef long N = n_ticks
    cdef double cap_ticks = cap * N + 1e-9
    cdef cnp.ndarray[cnp.int64_t, ndim=1] k_arr = np.zeros(d, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] best_arr = np.zeros(d, dtype=np.int64)
    cdef cnp.int64_t* kp = <cnp.int64_t*> k_arr.data
    cdef cnp.int64_t* bp = <cnp.int64_t*> best_arr.data
    cdef double* Qp = <double*> Q_arr.data
    cdef double* wp = <double*> w_arr.data
    cdef double best_val = 1e308
    cdef long n_feasible = 0
    cdef bint have_best = False

    n_feasible = _lattice_recurse(0, N, 0.0, d, N, cap_ticks, Qp, wp, kp, bp,
                                  &best_val, &have_best)
    if not have_best:
        return vacuum, float(vacuum @ (Q_arr @ vacuum)), 0
    cdef cnp.ndarray[double, ndim=1] x = best_arr.astype(np.float64) / N
    return x, best_val, n_feasible


cdef long _lattice_recurse(int idx, long remaining, double energy, int d, long N,
                           double cap_ticks, const double* Q, const double* w,
                           cnp.int64_t* k, cnp.int64_t* best,
                           double* best_val, bint* have_best) noexcept nogil:
    cdef long count = 0
    cdef long t
    cdef int r, c
    cdef double val, acc, pr
    if energy > cap_ticks:
        return 0
    if idx == d - 1:
        if energy + remaining * w[idx] <= cap_ticks:
            k[idx] = remaining
            val = 0.0
            for r in range(d):
                if k[r] == 0:
                    continue
                acc = 0.0
                for c in range(d):
                    if k[c] != 0:
                        acc += Q[r * d + c] * k[c]
                val += k[r] * acc
            val /= <double> (N * N)
            if val < best_val[0]:
                best_val[0] = val
                for r in range(d):
                    best[r] = k[r]
                have_best[0] = True
            k[idx] = 0
            return 1
        return 0
    for t in range(remaining + 1):
        k[idx] = t
        count += _lattice_recurse(idx + 1, remaining - t, energy + t * w[idx], d, N,
                                  cap_ticks, Q, w, k, best, best_val, have_best)
    k[idx] = 0
    return count
