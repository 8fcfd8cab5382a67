"""High-precision Riccati-Pade eigenvalue solver.

The non-Hermitian problem is mapped to a real one by rotating the
coordinate: x = iq turns -(i sinh x)^a cosh^b x into [-sin q]^a cos^b q
(for beta = 0 the alternative x = i(u + pi/2) gives [-cos u]^a, which is
even for every integer a).  Both maps flip the sign of the whole
Hamiltonian, so the eigenparameter of the rotated equation is eps = -E.

With w(q) the rotated potential and eps the rotated eigenvalue, the
regularized logarithmic derivative of the wavefunction has a Taylor
expansion whose coefficients f_j follow from a quadratic recurrence:

  even w, f = psi'/psi = sum f_n q^{2n+1} (s = 0 even states, s = 1 odd):
      (2n + 1 + 2s) f_n = v_n - eps d_{n0} - sum_{k<n} f_k f_{n-1-k}

  general w, f = -psi'/psi = sum f_n q^n with f_0 = -psi'(0)/psi(0) free:
      (n + 1) f_{n+1} = sum_{k<=n} f_k f_{n-k} - v_n + eps d_{n0}

Physical eigenvalues make Hankel determinants of the coefficient sequence
vanish.  For a symmetric problem there is one determinant in one unknown,

    H_D^d(eps) = det[f_{i+j+d}],  i, j = 0..D-1,

built from the odd-power coefficients f_n of f = sum f_n q^{2n+1}.  For a
nonsymmetric problem the full Taylor sequence f = sum f_n q^n splits into
its even- and odd-indexed halves and each half supplies one determinant,

    det[f_{2(i+j+d)}] = 0   and   det[f_{2(i+j+d)+1}] = 0,

a pair of conditions in the pair of unknowns (eps, f_0).  All arithmetic
is mpmath at the problem's decimal precision; the series coefficients
themselves are exact rationals.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction

import mpmath as mp

from .potential import PotentialParams

__all__ = [
    "RpmProblem",
    "RpmResult",
    "RpmDomainError",
    "RpmConvergenceError",
    "transform_iq",
    "transform_u",
    "riccati_coefficients",
    "hankel_matrix",
    "hankel_root",
    "convergence_table",
]

# The coordinate rotations send H to -H, so the Riccati eigenparameter of the
# rotated equation is the negative of the physical energy (frozen against the
# published D=2 ground-state value for alpha=2, beta=0).
_ENERGY_SIGN = -1


class RpmDomainError(ValueError):
    """Parameters outside the method's domain (non-integer exponents, beta != 0)."""


class RpmConvergenceError(RuntimeError):
    """Newton iteration on the Hankel determinant(s) failed to converge."""


@dataclass(frozen=True)
class RpmProblem:
    """A rotated-potential series prepared for Hankel-determinant quantization.

    potential_series holds v_j as exact rationals: coefficient of q^{2j}
    for a symmetric problem, of q^j otherwise.
    """

    kind: str  # "symmetric" | "nonsymmetric"
    potential_series: tuple[Fraction, ...] = field(repr=False)
    precision: int = 80
    hankel_dim: int = 8
    shift_d: int = 0
    s_index: int = 0  # 0 for even states, 1 for odd (symmetric kind only)

    def __post_init__(self) -> None:
        if self.kind not in ("symmetric", "nonsymmetric"):
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.precision < 60:
            raise ValueError(f"precision must be >= 60 digits, got {self.precision}")
        if len(self.potential_series) < 2 * self.hankel_dim + 2:
            raise ValueError(
                f"series too short: need >= {2 * self.hankel_dim + 2} coefficients, "
                f"got {len(self.potential_series)}"
            )


@dataclass(frozen=True)
class RpmResult:
    """A converged Hankel root: physical energy, optional f_0, digit estimate."""

    energy: mp.mpf
    f0: mp.mpf | None = None
    converged_digits: int = 0

    @property
    def log_derivative(self) -> mp.mpf | None:
        """The tabulated central log-derivative (q-coordinate -psi'(0)/psi(0))."""
        return None if self.f0 is None else self.f0


# ---------------------------------------------------------------------------
# power series of the rotated potentials (exact rational arithmetic)


def _poly_mul(p: list[Fraction], q: list[Fraction], n_terms: int) -> list[Fraction]:
    out = [Fraction(0)] * n_terms
    for i, a in enumerate(p):
        if a == 0 or i >= n_terms:
            continue
        for j, b in enumerate(q):
            if i + j >= n_terms:
                break
            out[i + j] += a * b
    return out


def _poly_pow(p: list[Fraction], k: int, n_terms: int) -> list[Fraction]:
    out = [Fraction(0)] * n_terms
    out[0] = Fraction(1)
    for _ in range(k):
        out = _poly_mul(out, p, n_terms)
    return out


def _sin_series(n_terms: int) -> list[Fraction]:
    out = [Fraction(0)] * n_terms
    fact = 1
    for k in range(1, n_terms):
        fact *= k
        if k % 2 == 1:
            out[k] = Fraction((-1) ** ((k - 1) // 2), fact)
    return out


def _cos_series(n_terms: int) -> list[Fraction]:
    out = [Fraction(0)] * n_terms
    fact = 1
    for k in range(n_terms):
        if k > 0:
            fact *= k
        if k % 2 == 0:
            out[k] = Fraction((-1) ** (k // 2), fact)
    return out


def _as_int_exponent(value: float, name: str) -> int:
    k = round(value)
    if abs(value - k) > 1e-12 or k < 0:
        raise RpmDomainError(
            f"{name} must be a non-negative integer for the series transform, got {value}"
        )
    return k


def transform_iq(
    params: PotentialParams,
    precision: int = 80,
    hankel_dim: int = 8,
    shift_d: int = 0,
) -> RpmProblem:
    """Series of the x = iq rotation: [-sin q]^alpha cos^beta q about q = 0."""
    a = _as_int_exponent(params.alpha, "alpha")
    b = _as_int_exponent(params.beta, "beta")
    n_terms = 4 * hankel_dim + 12
    minus_sin = [-c for c in _sin_series(n_terms)]
    series = _poly_pow(minus_sin, a, n_terms)
    if b:
        series = _poly_mul(series, _poly_pow(_cos_series(n_terms), b, n_terms), n_terms)
    if a % 2 == 0:
        assert all(c == 0 for c in series[1::2])
        coeffs = tuple(series[0::2])
        kind = "symmetric"
    else:
        coeffs = tuple(series)
        kind = "nonsymmetric"
    return RpmProblem(
        kind=kind,
        potential_series=coeffs,
        precision=precision,
        hankel_dim=hankel_dim,
        shift_d=shift_d,
    )


def transform_u(
    params: PotentialParams,
    precision: int = 80,
    hankel_dim: int = 8,
    shift_d: int = 0,
) -> RpmProblem:
    """Series of the x = i(u + pi/2) rotation: [-cos u]^alpha, beta = 0 only.

    Even in u for every integer alpha, so the one-determinant symmetric
    machinery applies even to odd alpha.
    """
    if params.beta != 0.0:
        raise RpmDomainError("the u-rotation applies only to beta = 0")
    a = _as_int_exponent(params.alpha, "alpha")
    n_terms = 4 * hankel_dim + 12
    minus_cos = [-c for c in _cos_series(n_terms)]
    series = _poly_pow(minus_cos, a, n_terms)
    assert all(c == 0 for c in series[1::2])
    return RpmProblem(
        kind="symmetric",
        potential_series=tuple(series[0::2]),
        precision=precision,
        hankel_dim=hankel_dim,
        shift_d=shift_d,
    )


# ---------------------------------------------------------------------------
# Riccati coefficients and Hankel determinants


def riccati_coefficients(problem: RpmProblem, eps, f0=None, order: int | None = None):
    """Taylor coefficients f_0..f_order of the logarithmic derivative at (eps, f0).

    eps is the rotated-equation eigenparameter; f0 is required for (and
    only for) nonsymmetric problems.
    """
    if order is None:
        order = _default_order(problem)
    v = problem.potential_series
    needed = order if problem.kind == "symmetric" else max(order - 1, 0)
    if needed >= len(v):
        raise ValueError(
            f"order {order} needs {needed + 1} potential coefficients, have {len(v)}"
        )
    eps = mp.mpf(eps) if not isinstance(eps, mp.mpf) else eps
    vv = [mp.mpf(c.numerator) / mp.mpf(c.denominator) for c in v[: needed + 1]]
    if problem.kind == "symmetric":
        if f0 is not None:
            raise ValueError("f0 is determined by the recurrence for symmetric problems")
        s = problem.s_index
        f = []
        for n in range(order + 1):
            acc = vv[n] - (eps if n == 0 else 0)
            for k in range(n):
                acc -= f[k] * f[n - 1 - k]
            f.append(acc / (2 * n + 1 + 2 * s))
        return f
    if f0 is None:
        raise ValueError("nonsymmetric problems need the free coefficient f0")
    f = [mp.mpf(f0) if not isinstance(f0, mp.mpf) else f0]
    for n in range(order):
        acc = -vv[n] + (eps if n == 0 else 0)
        for k in range(n + 1):
            acc += f[k] * f[n - k]
        f.append(acc / (n + 1))
    return f


def _default_order(problem: RpmProblem) -> int:
    d, dim = problem.shift_d, problem.hankel_dim
    if problem.kind == "symmetric":
        return 2 * dim - 2 + d
    return 2 * (2 * dim - 2 + d) + 1


def hankel_matrix(coeffs, dim: int, shift_d: int) -> mp.matrix:
    """The symmetric dim x dim Hankel matrix [f_{i+j+d}]."""
    m = mp.matrix(dim)
    for i in range(dim):
        for j in range(dim):
            m[i, j] = coeffs[i + j + shift_d]
    return m


def _hankel_det(problem: RpmProblem, eps, f0=None, parity: int = 0):
    """H_D of the coefficient sequence: the whole sequence for a symmetric
    problem, its even (parity=0) or odd (parity=1) half otherwise."""
    coeffs = riccati_coefficients(problem, eps, f0)
    if problem.kind == "nonsymmetric":
        coeffs = coeffs[parity::2]
    return mp.det(hankel_matrix(coeffs, problem.hankel_dim, problem.shift_d))


def hankel_root(problem: RpmProblem, seed_e, seed_f0=None, max_iter: int = 200) -> RpmResult:
    """Refine a Hankel-determinant root from seeds near a physical eigenvalue.

    Symmetric: damped Newton on H_D(eps) = 0.  Nonsymmetric: 2-d Newton on
    the even/odd determinant pair in (eps, f0) with a finite-difference
    Jacobian.  Seeds are in physical-energy units (and the q-coordinate
    f_0 = -psi'(0)/psi(0)).
    """
    with mp.workdps(problem.precision + 15):
        # a step below 10^(-dps/2) means full working precision for a simple
        # root (quadratic convergence) and ~dps/2 digits for a multiple one
        tol = mp.mpf(10) ** (-(mp.mp.dps // 2))
        if problem.kind == "symmetric":
            eps = _ENERGY_SIGN * mp.mpf(seed_e)
            eps = _newton_1d(lambda t: _hankel_det(problem, t), eps, tol, max_iter)
            return RpmResult(energy=+(_ENERGY_SIGN * eps))
        if seed_f0 is None:
            raise ValueError("nonsymmetric problems need an f0 seed")
        vec = mp.matrix([_ENERGY_SIGN * mp.mpf(seed_e), mp.mpf(seed_f0)])

        def system(v):
            return mp.matrix(
                [
                    _hankel_det(problem, v[0], v[1], parity=0),
                    _hankel_det(problem, v[0], v[1], parity=1),
                ]
            )

        vec = _newton_2d(system, vec, tol, max_iter)
        return RpmResult(energy=+(_ENERGY_SIGN * vec[0]), f0=+vec[1])


def _newton_1d(fn, x, tol, max_iter):
    """Damped Newton with a central-difference derivative.

    Eigenvalues of exactly solvable potentials are multiple Hankel roots
    (all entries vanish together), where plain Newton degrades to linear
    convergence; a stable ratio r of consecutive raw steps signals
    multiplicity 1/(1-r) and the step is amplified accordingly.
    """
    fx = fn(x)
    if fx == 0:
        return x
    raw_prev = None
    for _ in range(max_iter):
        h = mp.mpf(10) ** (-mp.mp.dps // 3) * max(abs(x), mp.mpf(1))
        dfx = (fn(x + h) - fn(x - h)) / (2 * h)
        if dfx == 0:
            raise RpmConvergenceError("vanishing Hankel derivative")
        raw = -fx / dfx
        if abs(raw) <= tol * max(abs(x), mp.mpf(1)):
            return x + raw  # seeded at (or already converged to) the root
        step = raw
        if raw_prev is not None and raw_prev != 0:
            r = raw / raw_prev
            if mp.mpf("0.2") < r < mp.mpf("0.95"):
                step = raw / (1 - r)
        raw_prev = raw
        # damping: halve the step until the residual decreases
        for _ in range(60):
            x_new = x + step
            f_new = fn(x_new)
            if abs(f_new) < abs(fx) or f_new == 0:
                break
            step /= 2
        else:
            raise RpmConvergenceError("damped Newton stalled")
        moved = abs(x_new - x)
        x, fx = x_new, f_new
        if fx == 0 or moved <= tol * max(abs(x), mp.mpf(1)):
            return x
    raise RpmConvergenceError(f"no convergence after {max_iter} iterations")


def _newton_2d(fn, x, tol, max_iter):
    fx = fn(x)

    def norm(v):
        return abs(v[0]) + abs(v[1])

    for _ in range(max_iter):
        jac = mp.matrix(2, 2)
        for j in range(2):
            h = mp.mpf(10) ** (-mp.mp.dps // 3) * max(abs(x[j]), mp.mpf(1))
            xp, xm = mp.matrix(x), mp.matrix(x)
            xp[j] += h
            xm[j] -= h
            col = (fn(xp) - fn(xm)) / (2 * h)
            jac[0, j], jac[1, j] = col[0], col[1]
        try:
            step = -mp.lu_solve(jac, fx)
        except ZeroDivisionError as exc:
            raise RpmConvergenceError("singular Jacobian near coincident roots") from exc
        if norm(step) <= tol * max(norm(x), mp.mpf(1)):
            return x + step  # seeded at (or already converged to) the root
        for _ in range(40):
            x_new = x + step
            f_new = fn(x_new)
            if norm(f_new) <= norm(fx):
                break
            step = step / 2
        else:
            raise RpmConvergenceError("damped Newton stalled")
        moved = norm(x_new - x)
        x, fx = x_new, f_new
        if moved <= tol * max(norm(x), mp.mpf(1)):
            return x
    raise RpmConvergenceError(f"no convergence after {max_iter} iterations")


def _matching_digits(a, b) -> int:
    """Leading significant digits on which a and b agree."""
    if a == b:
        return mp.mp.dps
    diff = abs(a - b)
    scale = max(abs(a), abs(b))
    if diff == 0 or scale == 0:
        return mp.mp.dps
    return max(0, int(mp.floor(-mp.log10(diff / scale))))


def convergence_table(
    problem: RpmProblem,
    d_min: int,
    d_max: int,
    seed_e,
    seed_f0=None,
) -> list[tuple[int, RpmResult | None]]:
    """Hankel solves for D = d_min..d_max, reported against the converged limit.

    Determinant roots cluster ever more tightly around the eigenvalue as D
    grows, so a fixed seed cannot select the physical root at every
    dimension.  A first chained pass (each D seeded by the previous result)
    climbs to the converged eigenvalue; a second pass re-solves every
    dimension seeded at that limit, which picks the cluster root the
    eigenvalue sequence actually follows.  A dimension where Newton fails
    is reported as (D, None).
    """
    e, f0 = seed_e, seed_f0
    for d in range(d_min, d_max + 1):
        try:
            res = hankel_root(replace(problem, hankel_dim=d), e, f0)
        except RpmConvergenceError:
            continue
        e = res.energy
        if res.f0 is not None:
            f0 = res.f0
    rows: list[tuple[int, RpmResult | None]] = []
    prev_energy = None
    for d in range(d_min, d_max + 1):
        sub = replace(problem, hankel_dim=d)
        try:
            res = hankel_root(sub, e, f0)
        except RpmConvergenceError:
            rows.append((d, None))
            continue
        with mp.workdps(problem.precision + 15):
            digits = 0 if prev_energy is None else _matching_digits(res.energy, prev_energy)
        rows.append((d, RpmResult(energy=res.energy, f0=res.f0, converged_digits=digits)))
        prev_energy = res.energy
    return rows
