"""Selection of the complex integration line x + iy.

A WKB-type ansatz psi = exp(G(x)) at large x gives

    G(x) ~ +/- exp(i pi (2 + alpha) / 4) * 2 e^{(alpha+beta) x / 2}
           / (2^{(alpha+beta)/2} (alpha + beta)),

so shifting the line by iy rotates the phase of the exponent to

    theta = pi (alpha + 2) / 4 + y (alpha + beta) / 2.

Each family of eigenstates is labeled by the real reference exponent
alpha_R in {2, 6, 10, ...} (where the potential is real and confining)
together with the sign choice in G.  The optimal shift puts the line on
the fastest-decay (anti-Stokes) path of that family; the admissible
window is bounded by the neighboring Stokes lines theta_ref +/- pi/2.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .potential import PotentialParams

__all__ = [
    "FamilySelector",
    "ContourSpec",
    "ContourDomainError",
    "asymptotic_phase",
    "optimal_shift",
    "asymptotic_g",
]


class ContourDomainError(ValueError):
    """Raised when a family/alpha combination admits no PT-consistent shift."""


@dataclass(frozen=True)
class FamilySelector:
    """Eigenstate family label: reference exponent alpha_R = 2 + 4N and branch sign."""

    alpha_R: float = 2.0
    branch_sign: int = +1

    def __post_init__(self) -> None:
        if self.alpha_R % 4.0 != 2.0:
            raise ValueError(f"alpha_R must be 2 mod 4, got {self.alpha_R}")
        if self.branch_sign not in (+1, -1):
            raise ValueError(f"branch_sign must be +1 or -1, got {self.branch_sign}")


@dataclass(frozen=True)
class ContourSpec:
    """A horizontal integration line Im z = y with its admissible window and phase."""

    y: float
    y_plus: float
    y_minus: float
    theta: float

    def __post_init__(self) -> None:
        if not (self.y_minus - 1e-12 <= self.y <= self.y_plus + 1e-12):
            raise ValueError(
                f"shift y={self.y} outside window [{self.y_minus}, {self.y_plus}]"
            )


def asymptotic_phase(params: PotentialParams, y: float) -> float:
    """Phase angle theta of the WKB exponent G on the line Im z = y."""
    return math.pi * (params.alpha + 2.0) / 4.0 + y * params.growth_rate / 2.0


def optimal_shift(params: PotentialParams, family: FamilySelector) -> ContourSpec:
    """Optimal imaginary shift and admissible window for the given family.

    For alpha below the family reference the shift is clamped to the real
    axis (y = 0): there the PT branch requires y <= 0 while the formula
    would give y > 0, and real-axis integration is admissible.
    """
    a, s = params.alpha, params.growth_rate
    a_r = family.alpha_R
    half = math.pi / (2.0 * s)
    if family.branch_sign == +1:
        y = (a_r - a) * half
        y_plus = (a_r + 2.0 - a) * half
        y_minus = (a_r - 2.0 - a) * half
        if y_minus > 1e-15:
            raise ContourDomainError(
                f"family alpha_R={a_r} (+ branch) admits no PT-consistent shift "
                f"(y <= 0) at alpha={a}; use the minus-sign branch"
            )
        if a < a_r:
            y = 0.0
            y_plus = min(y_plus, 0.0)
    else:
        y = -(a + a_r) * half
        y_plus = y + 2.0 * half
        y_minus = y - 2.0 * half
    return ContourSpec(y=y, y_plus=y_plus, y_minus=y_minus,
                       theta=asymptotic_phase(params, y))


def asymptotic_g(params: PotentialParams, family: FamilySelector, x: float | complex) -> complex:
    """Leading-order WKB exponent G(x) at large x, with the family's branch sign."""
    s = params.growth_rate
    prefactor = family.branch_sign * cmath.exp(1j * math.pi * (2.0 + params.alpha) / 4.0)
    return prefactor * 2.0 * cmath.exp(s * x / 2.0) / (2.0 ** (s / 2.0) * s)
