"""Finite-difference discretization of H = -d^2/dx^2 + V on a shifted line.

The interval [-x_max, x_max] is discretized with n interior points and
Dirichlet ends, giving a symmetric (not Hermitian) tridiagonal matrix

    H_kk     = 2/h^2 + V(x_k + iy),
    H_k,k+1  = -1/h^2.

The symmetric grid (x_min = -x_max) is what makes the characteristic
determinant real for real E: the diagonal satisfies
diag[k] = conj(diag[n-1-k]).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .potential import PotentialParams, eval_potential_line

__all__ = ["GridSpec", "TridiagonalOperator", "build_hamiltonian"]


@dataclass(frozen=True)
class GridSpec:
    """Uniform symmetric grid on [-x_max, x_max] with n interior points, shifted by iy."""

    x_max: float
    n: int
    y: float = 0.0

    def __post_init__(self) -> None:
        if self.x_max <= 0:
            raise ValueError(f"x_max must be > 0, got {self.x_max}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")

    @property
    def h(self) -> float:
        return 2.0 * self.x_max / (self.n + 1)

    def points(self) -> np.ndarray:
        """Interior grid abscissas x_k = -x_max + k h, k = 1..n."""
        return -self.x_max + self.h * np.arange(1, self.n + 1)


@dataclass(frozen=True)
class TridiagonalOperator:
    """Symmetric tridiagonal discretization of H along the contour Im z = grid.y."""

    diag: np.ndarray = field(repr=False)
    off: float
    grid: GridSpec
    params: PotentialParams | None = None

    @property
    def n(self) -> int:
        return len(self.diag)

    def pt_symmetry_defect(self) -> float:
        """Max relative deviation from diag[k] = conj(diag[n-1-k])."""
        scale = float(np.max(np.abs(self.diag)))
        return float(np.max(np.abs(self.diag - np.conj(self.diag[::-1])))) / scale

    def dense(self) -> np.ndarray:
        """Dense matrix form; for oracles and small-n checks only."""
        m = np.diag(self.diag)
        idx = np.arange(self.n - 1)
        m[idx, idx + 1] = self.off
        m[idx + 1, idx] = self.off
        return m


def build_hamiltonian(params: PotentialParams, grid: GridSpec) -> TridiagonalOperator:
    """Assemble the tridiagonal operator for V_{alpha,beta} on the given grid."""
    h = grid.h
    v = eval_potential_line(params, grid.points(), grid.y)
    diag = 2.0 / h**2 + v
    diag.setflags(write=False)
    return TridiagonalOperator(diag=diag, off=-1.0 / h**2, grid=grid, params=params)


def default_x_max(params: PotentialParams, decay_margin: float = 30.0) -> float:
    """Half-width at which the WKB decay exponent exceeds the requested margin.

    |Re G(x_max)| > margin makes the Dirichlet truncation error negligible
    against the h^2 discretization error.
    """
    s = params.growth_rate
    # |G| ~ 2 e^{s x / 2} / (2^{s/2} s); solve |G| = margin for x
    x = (2.0 / s) * math.log(decay_margin * s * 2.0 ** (s / 2.0) / 2.0)
    return max(8.0, math.ceil(x))
