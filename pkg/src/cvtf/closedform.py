"""Closed-form optimal inputs, their fidelities, regime guards, truncation
sandwich bounds, and the sub-multiplicativity gap.

The asymmetric-noise split weight is obtained by minimizing the restricted
quadratic q(x) = eta*eta' * (c + b x + a x^2) over x in [0, 2E] (x is the
weight of the |1,0> twin-Fock component). A previously tabulated three-case
branch form for this weight is retained as ``split_rule="tabulated"`` for
comparison only: its branch conditions contradict the quadratic it summarizes
(and direct minimization), so the default is the quadratic minimizer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import OutOfRange, RegimeViolation
from .fidelity import exact_bi_fidelity
from .fock import (
    BipartiteSpectrum,
    EnergyBudget,
    SchmidtSpectrum,
    make_bipartite_spectrum,
    make_schmidt_spectrum,
)

#: slack accepted on regime-boundary comparisons
BOUNDARY_TOL = 1e-12


class RegimeClause(Enum):
    UNI_SMALL_E = "uni-small-E"
    BI_EQUAL_NOISE = "bi-equal-noise"
    BI_ASYM_NOISE = "bi-asym-noise"


@dataclass(frozen=True)
class RegimeVerdict:
    valid: bool
    bound: float
    clause: RegimeClause


@dataclass(frozen=True)
class OptimalSolution:
    spectrum: SchmidtSpectrum | BipartiteSpectrum
    fidelity: float
    regime: RegimeVerdict
    p_split: float | None = None
    source: str = "closed-form"
    unique: bool = True


@dataclass(frozen=True)
class FidelityBounds:
    lower: float
    upper: float
    M: int
    floored: bool = False

    def __post_init__(self):
        if self.lower > self.upper:
            raise OutOfRange(f"lower bound {self.lower} exceeds upper {self.upper}")


def uni_regime_bound(xi: float) -> float:
    """Validity threshold on E for the unidirectional closed form."""
    return (1.0 + xi) / (1.0 + 3.0 * xi)


def bi_equal_regime_bound(xi: float) -> float:
    """Validity threshold on 2E for the equal-noise bidirectional closed form."""
    return (1.0 + xi) / (2.0 + 3.0 * xi)


def bi_asym_regime_bounds(xi: float, xi_prime: float) -> tuple[float, float]:
    """Both thresholds on 2E for the asymmetric closed form (xi_prime >= 1)."""
    first = (xi_prime**2 - 1.0) / (xi_prime * (3.0 * xi_prime - 1.0))
    second = math.inf if xi == 0 else (1.0 + xi) / (2.0 * xi)
    return first, second


def uni_closed_value(E: float, xi: float) -> float:
    """(1/(1+xi)) [1 - 2 u E + 2 u^2 E^2] with u = xi/(1+xi)."""
    u = xi / (1.0 + xi)
    return (1.0 - 2.0 * u * E + 2.0 * u * u * E * E) / (1.0 + xi)


def bi_equal_closed_value(E: float, xi: float) -> float:
    """(1/(1+xi)^2) [1 - 4 u E + 6 u^2 E^2] with u = xi/(1+xi)."""
    u = xi / (1.0 + xi)
    return (1.0 - 4.0 * u * E + 6.0 * u * u * E * E) / (1.0 + xi) ** 2


def _check_params(E: float, xi: float, xi_prime: float | None = None) -> None:
    EnergyBudget(E)
    if not np.isfinite(xi) or xi < 0:
        raise OutOfRange(f"noise parameter must be finite and >= 0, got {xi}")
    if xi_prime is not None and (not np.isfinite(xi_prime) or xi_prime < 0):
        raise OutOfRange(f"noise parameter must be finite and >= 0, got {xi_prime}")


def optimal_uni(E: float, xi: float) -> OptimalSolution:
    """Optimal twin-Fock input {p_0 = 1-E, p_1 = E} and its fidelity.

    Valid for E <= (1+xi)/(1+3xi). At xi = 0 every input is optimal (fidelity
    1); the canonical saturating state is returned with unique=False.
    """
    _check_params(E, xi)
    bound = uni_regime_bound(xi)
    if E > bound + BOUNDARY_TOL:
        raise RegimeViolation(
            f"E = {E} exceeds the validity threshold {bound:.6g}", thresholds=(bound,)
        )
    spectrum = make_schmidt_spectrum([1.0] if E == 0 else [1.0 - E, E])
    return OptimalSolution(
        spectrum=spectrum,
        fidelity=uni_closed_value(E, xi),
        regime=RegimeVerdict(True, bound, RegimeClause.UNI_SMALL_E),
        unique=(xi > 0),
    )


def optimal_bi_equal(E: float, xi: float) -> OptimalSolution:
    """Optimal grid {p_00 = 1-2E, p_01 = p_10 = E} for equal noise.

    Valid for 2E <= (1+xi)/(2+3xi).
    """
    _check_params(E, xi)
    bound = bi_equal_regime_bound(xi)
    if 2.0 * E > bound + BOUNDARY_TOL:
        raise RegimeViolation(
            f"2E = {2 * E} exceeds the validity threshold {bound:.6g}", thresholds=(bound,)
        )
    grid = make_bipartite_spectrum([[1.0 - 2.0 * E, E], [E, 0.0]])
    return OptimalSolution(
        spectrum=grid,
        fidelity=bi_equal_closed_value(E, xi),
        regime=RegimeVerdict(True, bound, RegimeClause.BI_EQUAL_NOISE),
        p_split=E,
        unique=(xi > 0),
    )


def asym_split_quadratic(E: float, xi: float, xi_prime: float) -> tuple[float, float, float]:
    """Coefficients (a, b, c) of the restricted asymmetric fidelity
    eta*eta' * (c + b x + a x^2), where x is the |1,0> weight of the family
    {p_00 = 1-2E, p_01 = 2E-x, p_10 = x}."""
    eta = 1.0 / (1.0 + xi)
    etap = 1.0 / (1.0 + xi_prime)
    a = 2.0 * ((eta - etap) ** 2 + (1.0 - eta) * (1.0 - etap))
    b = 2.0 * (eta - etap) + 4.0 * E * (1.0 - etap) * (2.0 * etap - 1.0 - eta)
    c = 1.0 - 4.0 * (1.0 - etap) * E + 8.0 * (1.0 - etap) ** 2 * E * E
    return a, b, c


def split_weight(E: float, xi: float, xi_prime: float) -> float:
    """Minimizing |1,0> weight: clip(-b/(2a), 0, 2E) for the quadratic above.

    Reduces to E at xi = xi_prime. The degenerate a = 0 case (xi = xi' = 0,
    constant objective) returns the symmetric split E.
    """
    a, b, _ = asym_split_quadratic(E, xi, xi_prime)
    if a == 0.0:
        return E
    return float(np.clip(-b / (2.0 * a), 0.0, 2.0 * E))


def split_weight_tabulated(E: float, xi: float, xi_prime: float) -> float:
    """Tabulated three-case branch form of the split weight (comparison only).

    Known defect: its branch selection routes the excitation through the
    noiseless direction in cases where direct minimization of the quadratic
    (and the grid/Kraus evaluators) proves the noisy route strictly better;
    it is also discontinuous at its first branch boundary. Use
    :func:`split_weight` for the actual optimum.
    """
    two_e = 2.0 * E
    if two_e < (xi - xi_prime) * (1.0 + xi_prime) / (xi_prime**2 * (1.0 + xi)):
        return 0.0
    denom2 = xi**2 * (1.0 + xi_prime) ** 2 + (xi - xi_prime) ** 2
    if two_e < (xi_prime - xi) * (1.0 + xi) * (1.0 + xi_prime) / denom2:
        return two_e
    num = (xi - xi_prime) * (1.0 + xi) * (1.0 + xi_prime) + two_e * xi_prime**2 * (1.0 + xi) ** 2
    den = 2.0 * ((xi - xi_prime) ** 2 + xi * xi_prime * (1.0 + xi) * (1.0 + xi_prime))
    return num / den


def asym_closed_value(E: float, xi: float, xi_prime: float,
                      split_rule: str = "quadratic") -> float:
    """Closed expression eta*eta'*(c + b x + a x^2) at the chosen split weight.

    For an interior split this is eta*eta'*(4ac - b^2)/(4a). Cross-checked
    against the grid evaluator in tests; the evaluator is authoritative.
    """
    x = (split_weight if split_rule == "quadratic" else split_weight_tabulated)(E, xi, xi_prime)
    a, b, c = asym_split_quadratic(E, xi, xi_prime)
    eta = 1.0 / (1.0 + xi)
    etap = 1.0 / (1.0 + xi_prime)
    return eta * etap * (c + b * x + a * x * x)


def optimal_bi_asym(E: float, xi: float, xi_prime: float,
                    split_rule: str = "quadratic") -> OptimalSolution:
    """Optimal grid {p_00 = 1-2E, p_01 = 2E-x, p_10 = x} for asymmetric noise.

    Valid for xi_prime >= 1 and 2E <= min of the two thresholds. The fidelity
    is evaluated by exact_bi_fidelity on the grid (authoritative value).
    """
    _check_params(E, xi, xi_prime)
    if xi_prime < 1.0:
        raise RegimeViolation(
            f"xi_prime = {xi_prime} < 1 is outside the asymmetric closed-form regime",
            thresholds=bi_asym_regime_bounds(max(xi, 0.0), max(xi_prime, 1.0)),
        )
    bounds = bi_asym_regime_bounds(xi, xi_prime)
    if 2.0 * E > min(bounds) + BOUNDARY_TOL:
        raise RegimeViolation(
            f"2E = {2 * E} exceeds the validity thresholds min{bounds}", thresholds=bounds
        )
    if split_rule not in ("quadratic", "tabulated"):
        raise OutOfRange(f"unknown split_rule {split_rule!r}")
    x = (split_weight if split_rule == "quadratic" else split_weight_tabulated)(E, xi, xi_prime)
    grid = make_bipartite_spectrum([[1.0 - 2.0 * E, 2.0 * E - x], [x, 0.0]])
    return OptimalSolution(
        spectrum=grid,
        fidelity=exact_bi_fidelity(grid, xi, xi_prime),
        regime=RegimeVerdict(True, min(bounds), RegimeClause.BI_ASYM_NOISE),
        p_split=x,
        unique=(xi > 0 or xi_prime > 0),
    )


def sandwich_uni(E: float, xi: float, M: int) -> FidelityBounds:
    """Truncation sandwich: the closed form is the M-independent upper bound;
    lower = 1 - [2 sqrt(E/(M+1)) + sqrt(1-upper)]^2, floored at 0."""
    if M < 0:
        raise OutOfRange(f"M must be >= 0, got {M}")
    upper = optimal_uni(E, xi).fidelity
    bracket = 2.0 * math.sqrt(E / (M + 1.0)) + math.sqrt(1.0 - upper)
    lower = 1.0 - bracket * bracket
    return FidelityBounds(max(lower, 0.0), upper, M, floored=lower < 0.0)


def sandwich_bi(E: float, xi: float, xi_prime: float, M: int) -> FidelityBounds:
    """Bidirectional truncation sandwich;
    lower = 1 - [2 sqrt(1-(1-2E/(M+1))^2) + sqrt(1-upper)]^2, floored at 0."""
    if M < 0:
        raise OutOfRange(f"M must be >= 0, got {M}")
    if xi == xi_prime:
        upper = optimal_bi_equal(E, xi).fidelity
    else:
        upper = optimal_bi_asym(E, xi, xi_prime).fidelity
    inner = 1.0 - 2.0 * E / (M + 1.0)
    bracket = 2.0 * math.sqrt(max(1.0 - inner * inner, 0.0)) + math.sqrt(1.0 - upper)
    lower = 1.0 - bracket * bracket
    return FidelityBounds(max(lower, 0.0), upper, M, floored=lower < 0.0)


def submult_gap(E: float, xi: float) -> float:
    """Gap between the squared single-channel optimum and the joint optimum:
    strictly positive for E > 0 in the joint regime."""
    uni = optimal_uni(E, xi)
    bi = optimal_bi_equal(E, xi)
    return uni.fidelity**2 - bi.fidelity
