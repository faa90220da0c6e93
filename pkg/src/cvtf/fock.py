"""Truncated Fock-space state representations and their basic statistics.

Probability space is canonical: spectra hold p_n (or p_{m,n}); amplitudes
sqrt(p) are derived on demand. Grids are stored dense with truncation index
M <= 64.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import CvtfError, DimensionTooSmall, NegativeEntry, NotNormalized, OutOfRange

#: entries below this are rejected; entries in [NEG_FLOOR, 0) are clipped to 0
NEG_FLOOR = -1e-12
#: inputs whose sum deviates from 1 by at least this are rejected
INPUT_NORM_TOL = 1e-9
#: internal normalization tolerance after construction
NORM_TOL = 1e-12
#: hard cap on the truncation index
MAX_TRUNCATION = 64


@dataclass(frozen=True)
class EnergyBudget:
    """Mean-photon-number budget E >= 0 (the bidirectional budget is 2E)."""

    E: float

    def __post_init__(self):
        if not np.isfinite(self.E) or self.E < 0:
            raise OutOfRange(f"energy budget must be a finite non-negative real, got {self.E}")


def _validated_probs(raw, ndim):
    arr = np.asarray(raw, dtype=np.float64)
    if arr.ndim != ndim or arr.size == 0:
        raise CvtfError(f"expected a non-empty {ndim}-D array, got shape {arr.shape}")
    if ndim == 2 and arr.shape[0] != arr.shape[1]:
        raise CvtfError(f"bipartite grid must be square, got shape {arr.shape}")
    if arr.shape[0] - 1 > MAX_TRUNCATION:
        raise OutOfRange(f"truncation index {arr.shape[0] - 1} exceeds cap {MAX_TRUNCATION}")
    if np.any(arr < NEG_FLOOR):
        worst = float(arr.min())
        raise NegativeEntry(f"entry {worst} below floor {NEG_FLOOR}")
    arr = np.clip(arr, 0.0, None)
    total = float(arr.sum())
    if abs(total - 1.0) >= INPUT_NORM_TOL:
        raise NotNormalized(f"entries sum to {total}, deviating from 1 by >= {INPUT_NORM_TOL}")
    arr = arr / total
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SchmidtSpectrum:
    """Probability vector p_0..p_M of a twin-Fock superposition input."""

    probs: np.ndarray

    @property
    def M(self) -> int:
        return self.probs.shape[0] - 1

    def to_json(self) -> str:
        return json.dumps(list(self.probs))

    @classmethod
    def from_json(cls, text: str) -> "SchmidtSpectrum":
        return make_schmidt_spectrum(json.loads(text))


@dataclass(frozen=True)
class BipartiteSpectrum:
    """Probability grid p_{m,n} over Fock pairs of the bidirectional input."""

    probs: np.ndarray

    @property
    def M(self) -> int:
        return self.probs.shape[0] - 1

    def to_json(self) -> str:
        return json.dumps([list(row) for row in self.probs])

    @classmethod
    def from_json(cls, text: str) -> "BipartiteSpectrum":
        return make_bipartite_spectrum(json.loads(text))


def make_schmidt_spectrum(raw) -> SchmidtSpectrum:
    """Validate a raw probability vector.

    Normalizes only if the sum deviates from 1 by less than 1e-9; rejects
    otherwise. Entries in [-1e-12, 0) are clipped to zero.
    """
    return SchmidtSpectrum(_validated_probs(raw, ndim=1))


def make_bipartite_spectrum(raw) -> BipartiteSpectrum:
    """Validate a raw probability grid (square, indexed by Fock pairs)."""
    return BipartiteSpectrum(_validated_probs(raw, ndim=2))


def mean_photon(spectrum: SchmidtSpectrum) -> float:
    """Mean photon number sum_n n*p_n of the channel-input marginal."""
    p = spectrum.probs
    return float(np.arange(p.shape[0]) @ p)


def mean_total_photon(grid: BipartiteSpectrum) -> float:
    """Total mean photon number sum_{m,n} (m+n)*p_{m,n} over both modes."""
    p = grid.probs
    idx = np.arange(p.shape[0])
    return float(np.einsum("mn,m->", p, idx) + np.einsum("mn,n->", p, idx))


def reduced_density(spectrum: SchmidtSpectrum) -> np.ndarray:
    """Channel-input marginal of the twin-Fock state: diag(p_0..p_M)."""
    return np.diag(spectrum.probs).astype(np.complex128)


def pure_state_vector(spectrum, out_dim: int) -> np.ndarray:
    """Amplitude vector of the twin-Fock superposition, each mode padded to out_dim.

    For a :class:`SchmidtSpectrum` the result lives in C^(out_dim^2) with
    amplitude sqrt(p_n) at |n>|n>; for a :class:`BipartiteSpectrum` in
    C^(out_dim^4) with amplitude sqrt(p_{m,n}) at |m,n>|m,n>. Unit norm.
    """
    if out_dim < spectrum.probs.shape[0]:
        raise DimensionTooSmall(
            f"out_dim {out_dim} < required {spectrum.probs.shape[0]} per mode"
        )
    amps = np.sqrt(spectrum.probs)
    if isinstance(spectrum, SchmidtSpectrum):
        vec = np.zeros(out_dim * out_dim, dtype=np.complex128)
        for n, a in enumerate(amps):
            vec[n * out_dim + n] = a
        return vec
    if isinstance(spectrum, BipartiteSpectrum):
        d = out_dim
        vec = np.zeros(d**4, dtype=np.complex128)
        for m in range(amps.shape[0]):
            for n in range(amps.shape[1]):
                if amps[m, n] != 0.0:
                    vec[((m * d + n) * d + m) * d + n] = amps[m, n]
        return vec
    raise CvtfError(f"unsupported spectrum type {type(spectrum).__name__}")


def validate_density_matrix(rho: np.ndarray, trunc_deficit: float = 0.0) -> None:
    """Check Hermiticity (1e-12), spectrum floor (-1e-10), and trace window.

    The trace must lie in [1 - trunc_deficit, 1] up to 1e-12 slack, where
    trunc_deficit is the declared truncation deficit of the matrix.
    """
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise CvtfError(f"density matrix must be square, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > 1e-12:
        raise CvtfError("matrix is not Hermitian within 1e-12")
    eigs = np.linalg.eigvalsh(rho)
    if eigs.min() < -1e-10:
        raise CvtfError(f"matrix has eigenvalue {eigs.min()} below -1e-10")
    tr = float(np.real(np.trace(rho)))
    if not (1.0 - trunc_deficit - 1e-12 <= tr <= 1.0 + 1e-12):
        raise CvtfError(f"trace {tr} outside [1 - {trunc_deficit}, 1]")
