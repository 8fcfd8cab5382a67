"""Branch-correct evaluation of V(z) = -(i sinh z)^a cosh^b z.

The potential has a branch point at z = 0.  The branch is fixed so that on
the positive real axis

    V(x) = exp(i pi (2 + a) / 2) sinh^a(x) cosh^b(x),

and the value for Re z < 0 is obtained from the PT reflection
V(-conj(z)) = conj(V(z)).  Off the real axis (Re z >= 0) the powers are
realized through exp(a * log(sinh z)) with the logarithm's argument
continued from the positive real axis, so the PT pairing holds exactly
rather than to rounding.

For Re z < 0 only the values on the axis itself (just below the cut) are
forced by the definition; the PT reflection used here is one consistent
off-axis realization of that choice and is the one assumed throughout the
package.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "PotentialParams",
    "ComplexSample",
    "PotentialDomainError",
    "eval_potential",
    "eval_potential_line",
    "table1_signs",
    "effective_potential",
]

_COSH_ZERO_CLEARANCE = 1e-6


class PotentialDomainError(ValueError):
    """Raised for parameter or coordinate values outside the potential's domain."""


@dataclass(frozen=True)
class PotentialParams:
    """Exponent pair (alpha, beta) of the potential -(i sinh z)^alpha cosh^beta z."""

    alpha: float
    beta: float = 0.0

    def __post_init__(self) -> None:
        if self.alpha < 0:
            raise PotentialDomainError(f"alpha must be >= 0, got {self.alpha}")
        if self.alpha + self.beta <= 0:
            raise PotentialDomainError(
                f"alpha + beta must be > 0 for a confining potential, "
                f"got {self.alpha + self.beta}"
            )

    @property
    def growth_rate(self) -> float:
        """Exponential growth rate alpha + beta of |V| at large |Re z|."""
        return self.alpha + self.beta


@dataclass(frozen=True)
class ComplexSample:
    """A potential sample: coordinate z = x + iy and value v = V(z)."""

    z: complex
    v: complex


def _cosh_zero_distance(x: float, y: float) -> float:
    """Distance from x + iy to the nearest zero of cosh (at i(pi/2 + k pi))."""
    k = round((y - math.pi / 2.0) / math.pi)
    return math.hypot(x, y - (math.pi / 2.0 + k * math.pi))


def _continued_logs(x: float, y: float) -> tuple[complex, complex]:
    """log(sinh z) and log(cosh z) at z = x + iy (x >= 0), arguments continued
    from the positive real axis along the vertical segment through x."""
    # sinh(z + i m pi) = (-1)^m sinh z; for |Im| <= pi/2 and x >= 0 both sinh
    # and cosh lie in the closed right half plane, where the principal log is
    # the continuation from the positive real axis.  arg(sinh(x+iy)) and
    # arg(cosh(x+iy)) are increasing in y (x > 0), gaining exactly pi per
    # half-period, which the m*pi correction reproduces.
    m = round(y / math.pi)
    zr = complex(x, y - m * math.pi)
    phase = 1j * (m * math.pi)
    return cmath.log(cmath.sinh(zr)) + phase, cmath.log(cmath.cosh(zr)) + phase


def eval_potential(params: PotentialParams, z: complex) -> complex:
    """Evaluate V(z) on the PT-symmetric branch.

    Re z >= 0 uses the continued-argument powers anchored on the positive
    real axis; Re z < 0 is defined by conj(V(-conj(z))).
    """
    z = complex(z)
    if z.real < 0.0:
        return eval_potential(params, -z.conjugate()).conjugate()
    x, y = z.real, z.imag
    if params.beta != 0.0 and _cosh_zero_distance(x, y) < _COSH_ZERO_CLEARANCE:
        raise PotentialDomainError(
            f"z = {z} lies within {_COSH_ZERO_CLEARANCE} of a zero of cosh; "
            "the contour is too close to a singularity of cosh^beta"
        )
    if x == 0.0 and y == 0.0:
        if params.alpha > 0.0:
            return 0.0j  # limit value; the phase alone is undefined at z = 0
        return -cmath.exp(params.beta * cmath.log(cmath.cosh(0.0)))
    log_sinh, log_cosh = _continued_logs(x, y)
    exponent = 1j * math.pi * (2.0 + params.alpha) / 2.0
    if params.alpha != 0.0:
        exponent += params.alpha * log_sinh
    if params.beta != 0.0:
        exponent += params.beta * log_cosh
    return cmath.exp(exponent)


def eval_potential_line(
    params: PotentialParams, xs: np.ndarray, y: float
) -> np.ndarray:
    """Vectorized V(x + iy) over an array of real abscissas at fixed shift y.

    Agrees with eval_potential pointwise; used to build grids quickly.
    """
    xs = np.asarray(xs, dtype=float)
    out = np.empty(xs.shape, dtype=complex)
    pos = xs >= 0.0
    out[pos] = _eval_halfline(params, xs[pos], y)
    # PT reflection: V(x + iy) = conj(V(-x + iy)) for x < 0
    out[~pos] = np.conj(_eval_halfline(params, -xs[~pos], y))
    return out


def _eval_halfline(params: PotentialParams, xs: np.ndarray, y: float) -> np.ndarray:
    if xs.size == 0:
        return np.empty(0, dtype=complex)
    m = round(y / math.pi)
    zr = xs + 1j * (y - m * math.pi)
    phase = 1j * (m * math.pi)
    exponent = np.full(xs.shape, 1j * math.pi * (2.0 + params.alpha) / 2.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        if params.alpha != 0.0:
            exponent = exponent + params.alpha * (np.log(np.sinh(zr)) + phase)
        if params.beta != 0.0:
            if _cosh_zero_distance(float(np.min(np.abs(xs))), y) < _COSH_ZERO_CLEARANCE:
                raise PotentialDomainError(
                    "contour passes too close to a zero of cosh"
                )
            exponent = exponent + params.beta * (np.log(np.cosh(zr)) + phase)
    out = np.exp(exponent)
    if params.alpha > 0.0 and y == 0.0:
        out[xs == 0.0] = 0.0
    return out


def table1_signs(alpha: float) -> tuple[int, int]:
    """Sign pattern (sign Re V, sign Im V) for x > 0, periodic in alpha with period 4.

    Returns -1, 0 or +1 per component, with exact zeros at integer alpha.
    """
    if alpha < 0:
        raise PotentialDomainError(f"alpha must be >= 0, got {alpha}")
    # phase of V on the positive real axis, in units of pi/2, reduced mod 4
    q = (2.0 + alpha) % 4.0
    k = round(q)
    if abs(q - k) < 1e-12:
        return [(1, 0), (0, 1), (-1, 0), (0, -1)][k % 4]
    phi = 0.5 * math.pi * q
    return (int(math.copysign(1.0, math.cos(phi))), int(math.copysign(1.0, math.sin(phi))))


def effective_potential(
    params: PotentialParams, y: float, xs: Sequence[float]
) -> list[ComplexSample]:
    """Samples of the effective potential V(x + iy) along a shifted line."""
    xs = np.asarray(xs, dtype=float)
    if xs.size > 1 and not np.all(np.diff(xs) > 0):
        raise ValueError("xs must be strictly increasing")
    values = eval_potential_line(params, xs, y)
    return [ComplexSample(z=complex(x, y), v=complex(v)) for x, v in zip(xs, values)]
