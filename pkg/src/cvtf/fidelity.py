"""Fidelity evaluators.

Three independent routes to the same quantities are kept deliberately
separate so they can certify each other:

* closed-form quadratic functionals in the input probabilities
  (:func:`exact_uni_fidelity`, :func:`exact_bi_fidelity`, the rank-two
  :func:`lower_bound_uni`),
* a Kraus-composition oracle that pushes the actual state through the
  loss/amplifier machinery (:func:`kraus_oracle_uni`, :func:`kraus_oracle_bi`),
* Gaussian covariance-determinant formulas for the coherent and two-mode
  squeezed vacuum baselines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import channels
from .channels import ChannelParams, amplifier_term_count, apply_amplifier_terms, apply_loss_terms
from .errors import DimensionMismatch, OutOfRange, SingularSum, ToleranceUnreachable
from .fock import BipartiteSpectrum, SchmidtSpectrum, make_schmidt_spectrum


class FidelityMethod(Enum):
    CLOSED_FORM = "closed-form"
    FUNCTIONAL = "functional"
    KRAUS_ORACLE = "kraus-oracle"
    GAUSSIAN_FORMULA = "gaussian-formula"


@dataclass(frozen=True)
class FidelityValue:
    value: float
    method: FidelityMethod

    def __post_init__(self):
        if not -1e-10 <= self.value <= 1.0 + 1e-10:
            raise OutOfRange(f"fidelity {self.value} outside [0, 1] (with 1e-10 slack)")


def _clamp01(x: float) -> float:
    """Clamp to [0, 1] after a +-1e-10 sanity window; outside the window is a bug."""
    if x < -1e-10 or x > 1.0 + 1e-10:
        raise OutOfRange(f"fidelity value {x} outside [0, 1] beyond roundoff")
    return min(max(x, 0.0), 1.0)


def fidelity_pure_vs_mixed(psi: np.ndarray, rho: np.ndarray) -> float:
    """<psi|rho|psi> for a unit vector psi; clamped to [0, 1]."""
    psi = np.asarray(psi, dtype=np.complex128)
    rho = np.asarray(rho, dtype=np.complex128)
    if psi.ndim != 1 or rho.shape != (psi.shape[0], psi.shape[0]):
        raise DimensionMismatch(f"shapes {psi.shape} and {rho.shape} are incompatible")
    return _clamp01(float(np.real(psi.conj() @ (rho @ psi))))


def sine_distance(F: float) -> float:
    """sqrt(1 - F) for F in [0, 1]."""
    if not 0.0 <= F <= 1.0:
        raise OutOfRange(f"fidelity must lie in [0, 1], got {F}")
    return math.sqrt(1.0 - F)


def uni_response_matrix(M: int, xi: float) -> np.ndarray:
    """B[k, n] = C(n, k) (1-eta)^k eta^(n-k), the loss response of diag inputs.

    The exact twin-Fock fidelity is eta * ||B p||^2.
    """
    eta = 1.0 / (1.0 + xi)
    B = np.zeros((M + 1, M + 1))
    for k in range(M + 1):
        for n in range(k, M + 1):
            B[k, n] = channels.binom_coeff(n, k) * (1.0 - eta) ** k * eta ** (n - k)
    return B


def exact_uni_probs(p: np.ndarray, xi: float) -> float:
    """Exact fidelity functional on a raw probability vector (no clamping)."""
    p = np.asarray(p, dtype=np.float64)
    eta = 1.0 / (1.0 + xi)
    s = uni_response_matrix(p.shape[0] - 1, xi) @ p
    return float(eta * (s @ s))


def exact_uni_fidelity(spectrum: SchmidtSpectrum, xi: float) -> float:
    """Fidelity between identity and additive-noise outputs on a twin-Fock input.

    Exact for finite-support spectra:
    eta * sum_k [ sum_{n>=k} p_n C(n,k) (1-eta)^k eta^(n-k) ]^2.
    """
    return _clamp01(exact_uni_probs(spectrum.probs, xi))


def lower_bound_uni(spectrum: SchmidtSpectrum, xi: float) -> float:
    """Rank-two lower bound on the exact functional; tight iff support <= {0,1}."""
    p = spectrum.probs
    eta = 1.0 / (1.0 + xi)
    weights = eta ** np.arange(p.shape[0])
    s0 = float(p @ weights)
    s1 = float(xi * (p[1:] @ weights[1:]))
    return _clamp01(eta * (s0 * s0 + s1 * s1))


def bi_quadratic_matrices(M: int, xi: float, xi_prime: float):
    """Per-mode overlap-trace matrices entering the bidirectional functional."""
    return channels.overlap_trace_matrix(M, xi), channels.overlap_trace_matrix(M, xi_prime)


def exact_bi_probs(P: np.ndarray, xi: float, xi_prime: float) -> float:
    """Bidirectional fidelity functional on a raw probability grid (no clamping)."""
    P = np.asarray(P, dtype=np.float64)
    T_a, T_b = bi_quadratic_matrices(P.shape[0] - 1, xi, xi_prime)
    pref = 1.0 / ((1.0 + xi) * (1.0 + xi_prime))
    return float(pref * np.sum(P * (T_a @ P @ T_b.T)))


def exact_bi_fidelity(grid: BipartiteSpectrum, xi: float, xi_prime: float) -> float:
    """Fidelity between SWAP and a product of additive-noise channels on a
    twin-Fock grid input; exact for finite-support grids."""
    return _clamp01(exact_bi_probs(grid.probs, xi, xi_prime))


def _oracle_mode_dim(d_in: int, gain: float, diag_weights: np.ndarray, deficit_tol: float,
                     oracle_dim: int | None) -> tuple[int, int]:
    """Amplifier term count and padded mode dimension for an oracle evaluation."""
    j_max = amplifier_term_count(gain, diag_weights, deficit_tol)
    needed = d_in + j_max
    if oracle_dim is None:
        return j_max, needed
    if oracle_dim < needed:
        raise ToleranceUnreachable(
            f"oracle_dim {oracle_dim} < {needed} required for deficit {deficit_tol}"
        )
    return j_max, oracle_dim


def kraus_oracle_uni(spectrum: SchmidtSpectrum, xi: float, oracle_dim: int | None = None,
                     deficit_tol: float = 1e-12) -> float:
    """Independent fidelity evaluation through the channel machinery.

    Builds rho_RA = |psi><psi| for psi = sum sqrt(p_n)|n>|n>, applies the
    additive-noise channel blockwise to the mode factor (reference factor kept
    at its natural M+1 dimension), and returns <psi|sigma|psi>.
    """
    p = spectrum.probs
    d_in = p.shape[0]
    params = ChannelParams(xi)
    amps = np.sqrt(p)

    # blocks B[r, r'] = amps_r amps_r' |r><r'| on the mode factor
    stack = np.zeros((d_in * d_in, d_in, d_in), dtype=np.complex128)
    for r in range(d_in):
        for rp in range(d_in):
            stack[r * d_in + rp, r, rp] = amps[r] * amps[rp]

    lossy = apply_loss_terms(stack, params.eta)
    loss_diag = apply_loss_terms(np.diag(p.astype(np.complex128)), params.eta)
    j_max, d_a = _oracle_mode_dim(d_in, params.gain, np.real(np.diagonal(loss_diag)),
                                  deficit_tol, oracle_dim)
    blocks = apply_amplifier_terms(lossy, params.gain, j_max, d_a)

    sigma = np.zeros((d_in * d_a, d_in * d_a), dtype=np.complex128)
    for r in range(d_in):
        for rp in range(d_in):
            sigma[r * d_a : (r + 1) * d_a, rp * d_a : (rp + 1) * d_a] = blocks[r * d_in + rp]

    psi = np.zeros(d_in * d_a, dtype=np.complex128)
    for r in range(d_in):
        psi[r * d_a + r] = amps[r]
    return fidelity_pure_vs_mixed(psi, sigma)


def channel_unit_images(M: int, xi: float, deficit_tol: float = 1e-12,
                        oracle_dim: int | None = None) -> np.ndarray:
    """U[m, m'] = <m| T(|m><m'|) |m'> for the additive-noise channel, computed
    through the loss/amplifier Kraus machinery (not the closed form)."""
    params = ChannelParams(xi)
    d_in = M + 1
    worst = np.zeros(d_in)
    worst[M] = 1.0  # highest Fock level has the slowest amplifier tail
    j_max, d_a = _oracle_mode_dim(d_in, params.gain, worst, deficit_tol, oracle_dim)

    stack = np.zeros((d_in * d_in, d_in, d_in), dtype=np.complex128)
    for m in range(d_in):
        for mp in range(d_in):
            stack[m * d_in + mp, m, mp] = 1.0
    out = apply_amplifier_terms(apply_loss_terms(stack, params.eta), params.gain, j_max, d_a)
    U = np.empty((d_in, d_in))
    for m in range(d_in):
        for mp in range(d_in):
            U[m, mp] = np.real(out[m * d_in + mp, m, mp])
    return U


def kraus_oracle_bi(grid: BipartiteSpectrum, xi: float, xi_prime: float,
                    oracle_dim: int | None = None, deficit_tol: float = 1e-12) -> float:
    """Independent bidirectional fidelity evaluation through the channel machinery.

    Contracts <psi| (I x T x T')(|psi><psi|) |psi> exactly using channel images
    of the Fock matrix units on each mode; equivalent to materializing the
    output state of the padded tripartite input, without its memory footprint.
    """
    P = grid.probs
    U_a = channel_unit_images(grid.M, xi, deficit_tol, oracle_dim)
    U_b = channel_unit_images(grid.M, xi_prime, deficit_tol, oracle_dim)
    return _clamp01(float(np.sum(P * (U_a @ P @ U_b.T))))


def gaussian_fidelity_det(V1: np.ndarray, V2: np.ndarray) -> float:
    """Gaussian fidelity 2^N / sqrt(det(V1 + V2)) for zero-mean covariances.

    Valid when at least one of the states is pure and the means coincide
    (caller's responsibility). Vacuum covariance convention: identity.
    """
    V1 = np.asarray(V1, dtype=np.float64)
    V2 = np.asarray(V2, dtype=np.float64)
    if V1.shape != V2.shape or V1.ndim != 2 or V1.shape[0] != V1.shape[1] or V1.shape[0] % 2:
        raise DimensionMismatch(f"covariances must be equal even-dim square, got {V1.shape}, {V2.shape}")
    n_modes = V1.shape[0] // 2
    det = float(np.linalg.det(V1 + V2))
    if det <= 0.0:
        raise SingularSum(f"det(V1 + V2) = {det} <= 0")
    return 2.0**n_modes / math.sqrt(det)


def coherent_fidelity(xi: float) -> float:
    """Identity-vs-additive-noise fidelity for a coherent-state input: 1/(1+xi)."""
    if xi < 0:
        raise OutOfRange(f"noise parameter must be >= 0, got {xi}")
    return 1.0 / (1.0 + xi)


def tmsv_fidelity(E: float, xi: float) -> float:
    """Identity-vs-additive-noise fidelity for a TMSV input with mean photon
    number E: 1/(1 + (2E+1) xi)."""
    if xi < 0 or E < 0:
        raise OutOfRange("E and xi must be >= 0")
    return 1.0 / (1.0 + (2.0 * E + 1.0) * xi)


def tmsv_covariance(nbar: float) -> np.ndarray:
    """4x4 covariance of the two-mode squeezed vacuum with mean photon nbar."""
    c = 2.0 * nbar + 1.0
    s = 2.0 * math.sqrt(nbar * (nbar + 1.0))
    sz = np.diag([1.0, -1.0])
    V = np.zeros((4, 4))
    V[:2, :2] = c * np.eye(2)
    V[2:, 2:] = c * np.eye(2)
    V[:2, 2:] = s * sz
    V[2:, :2] = s * sz
    return V


def tmsv_output_covariance(nbar: float, xi: float) -> np.ndarray:
    """Covariance after the additive-noise channel acts on the second mode."""
    V = tmsv_covariance(nbar)
    V[2:, 2:] += 2.0 * xi * np.eye(2)
    return V


def tmsv_spectrum(nbar: float, M: int) -> SchmidtSpectrum:
    """Truncated, renormalized TMSV probability vector p_n ~ nbar^n/(nbar+1)^(n+1)."""
    if nbar < 0:
        raise OutOfRange(f"nbar must be >= 0, got {nbar}")
    n = np.arange(M + 1, dtype=np.float64)
    if nbar == 0:
        raw = np.where(n == 0, 1.0, 0.0)
    else:
        raw = np.exp(n * math.log(nbar / (nbar + 1.0)) - math.log(nbar + 1.0))
    return make_schmidt_spectrum(raw / raw.sum())
