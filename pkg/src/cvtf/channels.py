"""Fock-basis action of the pure-loss channel, quantum-limited amplifier, and
additive-noise channel, plus the closed-form overlap traces of loss images.

The additive-noise channel with parameter xi >= 0 is the composition
amplifier(gain 1/eta) o loss(eta) with eta = 1/(1+xi). The amplifier matrix
elements used here are pinned by the adjoint identity
Tr[X * amp(Y)] = eta * Tr[loss(X) * Y] and by the thermal output on vacuum
(diagonal xi^n/(1+xi)^(n+1)); both are enforced by tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CvtfError, DimensionTooSmall, OutOfRange, ToleranceUnreachable

#: exact integer binomials are used up to this row; log-gamma above
_EXACT_BINOM_MAX = 30


def log_binom(n: int, k: int) -> float:
    """log C(n, k); -inf outside the triangle."""
    if k < 0 or k > n:
        return -math.inf
    if n <= _EXACT_BINOM_MAX:
        return math.log(math.comb(n, k))
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def binom_coeff(n: int, k: int) -> float:
    """C(n, k) as a float; exact integers below row 30, log-gamma above."""
    if k < 0 or k > n:
        return 0.0
    if n <= _EXACT_BINOM_MAX:
        return float(math.comb(n, k))
    return math.exp(log_binom(n, k))


@dataclass(frozen=True)
class ChannelParams:
    """Additive-noise parameter xi >= 0 with derived transmissivity eta."""

    xi: float

    def __post_init__(self):
        if not np.isfinite(self.xi) or self.xi < 0:
            raise OutOfRange(f"noise parameter must be finite and >= 0, got {self.xi}")

    @property
    def eta(self) -> float:
        return 1.0 / (1.0 + self.xi)

    @property
    def gain(self) -> float:
        return 1.0 + self.xi


def _loss_coeffs(k: int, n_out: int, eta: float) -> np.ndarray:
    """<j| L_k |j+k> for j = 0..n_out-1: sqrt(C(j+k,k)) eta^(j/2) (1-eta)^(k/2)."""
    j = np.arange(n_out)
    logs = np.array([log_binom(jj + k, k) for jj in j])
    out = np.exp(0.5 * logs + 0.5 * j * math.log(eta))
    if k > 0:
        out = out * (1.0 - eta) ** (k / 2.0)
    return out


def _amp_coeffs(j: int, n_in: int, gain: float) -> np.ndarray:
    """<n+j| A_j |n> for n = 0..n_in-1: sqrt(C(n+j,j)) G^(-(n+1)/2) (1-1/G)^(j/2)."""
    n = np.arange(n_in)
    if gain == 1.0:
        return np.where(n >= 0, 1.0, 0.0) if j == 0 else np.zeros(n_in)
    logs = np.array([log_binom(nn + j, j) for nn in n])
    log_amp = 0.5 * logs - 0.5 * (n + 1) * math.log(gain) + 0.5 * j * math.log(1.0 - 1.0 / gain)
    return np.exp(log_amp)


def apply_loss_terms(mat: np.ndarray, eta: float) -> np.ndarray:
    """Linear extension of the pure-loss channel to an arbitrary square matrix.

    Output dimension equals the input dimension (loss never raises photon
    number); callers pad afterwards if needed.
    """
    mat = np.asarray(mat, dtype=np.complex128)
    d = mat.shape[-1]
    out = np.zeros_like(mat)
    for k in range(d):
        c = _loss_coeffs(k, d - k, eta)
        out[..., : d - k, : d - k] += c[:, None] * c[None, :] * mat[..., k:, k:]
    return out


def apply_amplifier_terms(mat: np.ndarray, gain: float, j_max: int, out_dim: int) -> np.ndarray:
    """Linear extension of the amplifier truncated to Kraus terms j = 0..j_max."""
    mat = np.asarray(mat, dtype=np.complex128)
    d = mat.shape[-1]
    if out_dim < d:
        raise DimensionTooSmall(f"out_dim {out_dim} < input dimension {d}")
    out = np.zeros(mat.shape[:-2] + (out_dim, out_dim), dtype=np.complex128)
    for j in range(min(j_max, out_dim - 1) + 1):
        n_len = min(d, out_dim - j)
        a = _amp_coeffs(j, n_len, gain)
        out[..., j : j + n_len, j : j + n_len] += a[:, None] * a[None, :] * mat[..., :n_len, :n_len]
    return out


def amplifier_term_count(gain: float, diag_weights: np.ndarray, deficit_tol: float,
                         j_cap: int | None = None) -> int:
    """Smallest J with trace deficit 1 - sum_{j<=J} sum_n a_j[n]^2 w_n <= deficit_tol.

    diag_weights are the diagonal entries of the (unit-trace) input state;
    tiny negative rounding is clipped.
    """
    if deficit_tol <= 0:
        raise OutOfRange("deficit_tol must be > 0")
    w = np.clip(np.asarray(diag_weights, dtype=np.float64), 0.0, None)
    n_in = w.shape[0]
    if gain == 1.0:
        return 0
    acc = 0.0
    j = 0
    hard_cap = j_cap if j_cap is not None else 200_000
    while True:
        a = _amp_coeffs(j, n_in, gain)
        acc += float(a @ (a * w))
        if 1.0 - acc <= deficit_tol:
            return j
        j += 1
        if j > hard_cap:
            raise ToleranceUnreachable(
                f"deficit {1.0 - acc:.3e} > {deficit_tol} after {hard_cap} amplifier terms"
            )


def apply_pure_loss(rho: np.ndarray, eta: float, out_dim: int) -> np.ndarray:
    """Pure-loss channel at transmissivity eta on a density matrix; trace exact."""
    if not (0.0 < eta <= 1.0):
        raise OutOfRange(f"transmissivity must lie in (0, 1], got {eta}")
    rho = np.asarray(rho, dtype=np.complex128)
    d = rho.shape[0]
    if out_dim < d:
        raise DimensionTooSmall(f"out_dim {out_dim} < input dimension {d}")
    out = np.zeros((out_dim, out_dim), dtype=np.complex128)
    out[:d, :d] = apply_loss_terms(rho, eta)
    return out


def apply_amplifier(rho: np.ndarray, gain: float, out_dim: int,
                    deficit_tol: float = 1e-12) -> np.ndarray:
    """Quantum-limited amplifier at the given gain >= 1.

    Kraus terms are summed adaptively until the cumulative trace deficit on
    this input drops below deficit_tol.
    """
    if gain < 1.0:
        raise OutOfRange(f"gain must be >= 1, got {gain}")
    rho = np.asarray(rho, dtype=np.complex128)
    d = rho.shape[0]
    if out_dim < d:
        raise DimensionTooSmall(f"out_dim {out_dim} < input dimension {d}")
    diag = np.real(np.diagonal(rho))
    j_max = amplifier_term_count(gain, diag, deficit_tol, j_cap=None)
    support = int(np.max(np.nonzero(np.clip(diag, 0, None) > 0)[0])) if np.any(diag > 0) else 0
    if support + j_max >= out_dim:
        # re-check reachability within out_dim: each n only fits j <= out_dim-1-n
        acc = 0.0
        w = np.clip(diag, 0.0, None)
        for j in range(out_dim):
            n_len = min(d, out_dim - j)
            a = _amp_coeffs(j, n_len, gain)
            acc += float(a @ (a * w[:n_len]))
        if 1.0 - acc > deficit_tol:
            raise ToleranceUnreachable(
                f"need out_dim >= {support + j_max + 1} for deficit {deficit_tol}, got {out_dim}"
            )
        j_max = out_dim - 1
    return apply_amplifier_terms(rho, gain, j_max, out_dim)


def apply_additive_noise(rho: np.ndarray, params: ChannelParams, out_dim: int,
                         deficit_tol: float = 1e-12) -> np.ndarray:
    """Additive-noise channel: amplifier(1/eta) after loss(eta), eta = 1/(1+xi)."""
    lossy = apply_pure_loss(rho, params.eta, np.asarray(rho).shape[0])
    return apply_amplifier(lossy, params.gain, out_dim, deficit_tol)


def overlap_trace(m: int, m_prime: int, xi: float) -> float:
    """Tr[loss(|m><m'|) loss(|m'><m|)] at eta = 1/(1+xi), in closed form:
    sum_k C(m,k) C(m',k) xi^(2k) / (1+xi)^(m+m')."""
    if m < 0 or m_prime < 0:
        raise OutOfRange("Fock indices must be non-negative")
    if xi < 0:
        raise OutOfRange(f"noise parameter must be >= 0, got {xi}")
    total = 0.0
    for k in range(min(m, m_prime) + 1):
        term = binom_coeff(m, k) * binom_coeff(m_prime, k)
        total += term if k == 0 else term * xi ** (2 * k)
    return total / (1.0 + xi) ** (m + m_prime)


def overlap_trace_matrix(M: int, xi: float) -> np.ndarray:
    """(M+1)x(M+1) symmetric matrix of overlap traces."""
    T = np.empty((M + 1, M + 1))
    for m in range(M + 1):
        for mp in range(m, M + 1):
            T[m, mp] = T[mp, m] = overlap_trace(m, mp, xi)
    return T
