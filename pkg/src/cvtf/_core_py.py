"""Pure-Python/numpy fallback for the hot kernels in cvtf._core.

Both backends implement the same three entry points with identical semantics
(tie-breaking included); tests/test_backend_parity.py holds them together.

Polytope: {x >= 0, sum x = 1, w.x <= cap} for a non-negative weight vector w
with w[0] = 0 (vacuum always feasible). Its vertices are singletons e_i with
w_i <= cap and two-point mixtures theta*e_i + (1-theta)*e_j saturating the
cap. Atoms are identified by flat ids: i*d + j for the (i, j) vertex (i == j
means singleton), d*d for the start-point anchor.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"

_FEAS_TOL = 1e-12
_WEIGHT_EPS = 1e-15
_RESYNC_EVERY = 64


def lp_vertex(g, w, cap):
    """Exact minimizer of <g, p> over the polytope.

    Returns (i, j, theta): the vertex theta*e_i + (1-theta)*e_j, with i == j
    and theta = 1 for singletons. Ties break to the lowest (i, j) pair.
    """
    g = np.asarray(g, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    d = g.shape[0]
    best_val = np.inf
    best = None
    for i in range(d):
        if w[i] <= cap + _FEAS_TOL and g[i] < best_val:
            best_val = g[i]
            best = (i, i, 1.0)
        for j in range(i + 1, d):
            if w[i] == w[j]:
                continue
            theta = (w[j] - cap) / (w[j] - w[i])
            if not (_WEIGHT_EPS < theta < 1.0 - _WEIGHT_EPS):
                continue
            val = theta * g[i] + (1.0 - theta) * g[j]
            if val < best_val:
                best_val = val
                best = (i, j, theta)
    if best is None:
        raise ValueError("empty feasible set (no vertex found)")
    return best


def _atom_vector(atom_id, d, w, cap, x0):
    if atom_id == d * d:
        return x0
    i, j = divmod(atom_id, d)
    vec = np.zeros(d)
    if i == j:
        vec[i] = 1.0
    else:
        theta = (w[j] - cap) / (w[j] - w[i])
        vec[i] = theta
        vec[j] = 1.0 - theta
    return vec


def fw_minimize(Q, w, cap, x0, max_iter, tol, away_steps):
    """Minimize x^T Q x (Q symmetric PSD) over the polytope by Frank-Wolfe
    with exact line search, optionally with away steps.

    Returns (x, value, gap, iterations, converged). The gap is the final
    linear-minimization duality gap, an optimality certificate for convex Q.
    """
    Q = np.asarray(Q, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    x0 = np.asarray(x0, dtype=np.float64)
    d = x0.shape[0]
    anchor = d * d

    x = x0.copy()
    weights = {anchor: 1.0}
    gap = np.inf
    converged = False
    iters = 0

    for iters in range(1, max_iter + 1):
        g = 2.0 * (Q @ x)
        i, j, theta = lp_vertex(g, w, cap)
        s_id = i * d + j
        s_val = theta * g[i] + (1.0 - theta) * g[j]
        gx = float(g @ x)
        gap = gx - s_val
        if gap <= tol:
            converged = True
            break

        s_vec = _atom_vector(s_id, d, w, cap, x0)
        use_away = False
        if away_steps and weights:
            v_id = max(
                weights,
                key=lambda a: (float(g @ _atom_vector(a, d, w, cap, x0)), -a),
            )
            v_vec = _atom_vector(v_id, d, w, cap, x0)
            v_val = float(g @ v_vec)
            alpha_v = weights[v_id]
            # away direction only usable while some weight remains to shed
            if v_val - gx > gap and alpha_v < 1.0 - _WEIGHT_EPS:
                use_away = True

        if use_away:
            direction = x - v_vec
            gamma_max = alpha_v / (1.0 - alpha_v)
        else:
            direction = s_vec - x
            gamma_max = 1.0

        slope = float(g @ direction)
        curv = float(direction @ (Q @ direction))
        if curv > 0.0:
            gamma = min(max(-slope / (2.0 * curv), 0.0), gamma_max)
        else:
            gamma = gamma_max if slope < 0.0 else 0.0
        if gamma <= 0.0:
            converged = gap <= tol
            break

        if use_away:
            for a in list(weights):
                weights[a] *= 1.0 + gamma
            weights[v_id] -= gamma
            if weights[v_id] <= _WEIGHT_EPS:
                del weights[v_id]
        else:
            if gamma >= 1.0:
                weights = {s_id: 1.0}
            else:
                for a in list(weights):
                    weights[a] *= 1.0 - gamma
                weights[s_id] = weights.get(s_id, 0.0) + gamma
        x = x + gamma * direction

        if iters % _RESYNC_EVERY == 0:
            x = np.zeros(d)
            for a, wt in weights.items():
                x += wt * _atom_vector(a, d, w, cap, x0)

    value = float(x @ (Q @ x))
    return x, value, float(gap), iters, converged


def lattice_minimize(Q, w, cap, n_ticks):
    """Exhaustive search over lattice points k/N (sum k = N) meeting the cap.

    Enumerates compositions in ascending lexicographic order of
    (k_0, ..., k_{d-1}) and keeps the strictly best value. Returns
    (x, value, n_feasible). n_ticks = N; N < 1 degenerates to the vacuum point.
    """
    Q = np.asarray(Q, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    d = Q.shape[0]
    vacuum = np.zeros(d)
    vacuum[0] = 1.0
    if n_ticks < 1:
        return vacuum, float(vacuum @ (Q @ vacuum)), 1

    N = int(n_ticks)
    cap_ticks = cap * N + 1e-9
    best_val = np.inf
    best_k = None
    n_feasible = 0
    k = np.zeros(d, dtype=np.int64)

    def recurse(idx, remaining, energy):
        nonlocal best_val, best_k, n_feasible
        if energy > cap_ticks:
            return
        if idx == d - 1:
            add = remaining * w[idx]
            if energy + add <= cap_ticks:
                k[idx] = remaining
                n_feasible += 1
                p = k / N
                val = float(p @ (Q @ p))
                if val < best_val:
                    best_val = val
                    best_k = k.copy()
                k[idx] = 0
            return
        for t in range(remaining + 1):
            k[idx] = t
            recurse(idx + 1, remaining - t, energy + t * w[idx])
        k[idx] = 0

    recurse(0, N, 0.0)
    if best_k is None:
        return vacuum, float(vacuum @ (Q @ vacuum)), 0
    x = best_k / N
    return x, best_val, n_feasible
