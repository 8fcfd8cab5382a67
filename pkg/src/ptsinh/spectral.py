"""Characteristic-determinant eigenvalue machinery.

D_N(E) = det(H - E I) is evaluated through the three-point recurrence

    D_n = (H_nn - E) D_{n-1} - H_{n,n-1}^2 D_{n-2},   D_0 = 1, D_1 = H_11 - E,

renormalized into mantissa * 2^exponent form every few steps (D_n grows
like (2/h^2)^n).  On a PT-symmetric grid D_N is real for real E even
though the intermediate D_n are complex, so real eigenvalues are sign
changes of Re D_N and plain bisection applies.  On top of that sit the
inverse mode (solve for alpha at fixed E), inverse-iteration
eigenvectors, and continuation sweeps that follow levels through a
parameter range and record merge/reappearance events.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import solve_banded

from .contour import ContourDomainError, FamilySelector, optimal_shift
from .discretization import GridSpec, TridiagonalOperator, build_hamiltonian
from .potential import PotentialParams

__all__ = [
    "ScaledDeterminant",
    "WaveFunction",
    "LevelTrack",
    "TrackEvent",
    "NoSignChangeError",
    "StepCollapseError",
    "EigenvectorError",
    "det_n",
    "find_real_eigenvalues",
    "solve_alpha_for_energy",
    "eigenvector",
    "continuation_sweep",
    "special_level",
]

_RESCALE_EVERY = 8
_REALITY_TOL = 1e-10


class NoSignChangeError(ValueError):
    """The supplied bracket does not straddle a sign change."""


class StepCollapseError(RuntimeError):
    """Adaptive refinement near a turning point collapsed without resolving it."""


class EigenvectorError(RuntimeError):
    """Inverse iteration failed to converge (E is not a root at this resolution)."""


@dataclass(frozen=True)
class ScaledDeterminant:
    """Overflow-safe determinant value mantissa * 2^exponent, |mantissa| in [1, 2)."""

    mantissa: complex
    exponent: int

    @property
    def sign(self) -> int:
        """Sign of the (real) determinant; the 2^exponent scale is positive."""
        return int(np.sign(self.mantissa.real))

    @property
    def imag_ratio(self) -> float:
        """|Im|/|mantissa|; a PT-symmetric grid keeps this at rounding level."""
        return abs(self.mantissa.imag) / abs(self.mantissa)

    def is_real(self, tol: float = _REALITY_TOL) -> bool:
        return self.imag_ratio <= tol

    def log2_abs(self) -> float:
        return math.log2(abs(self.mantissa)) + self.exponent


def _det_batch(op: TridiagonalOperator, energies: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Scaled determinant recurrence, vectorized over a batch of energies.

    Returns (mantissa, exponent) arrays with |mantissa| in [1, 2).
    """
    e = np.asarray(energies, dtype=float)
    diag = op.diag
    off2 = op.off * op.off
    d_prev = np.ones(e.shape, dtype=complex)
    d_curr = diag[0] - e
    exponent = np.zeros(e.shape, dtype=np.int64)
    for k in range(1, op.n):
        d_prev, d_curr = d_curr, (diag[k] - e) * d_curr - off2 * d_prev
        if k % _RESCALE_EVERY == 0:
            mag = np.abs(d_curr)
            _, ex = np.frexp(np.where(mag > 0.0, mag, 1.0))
            scale = np.ldexp(1.0, -ex)
            d_curr = d_curr * scale
            d_prev = d_prev * scale
            exponent += ex
    mag = np.abs(d_curr)
    _, ex = np.frexp(np.where(mag > 0.0, mag, 1.0))
    mantissa = d_curr * np.ldexp(1.0, -(ex - 1))
    return mantissa, exponent + ex - 1


def det_n(op: TridiagonalOperator, e: float) -> ScaledDeterminant:
    """Scaled characteristic determinant D_N(E) = det(H - E I)."""
    mantissa, exponent = _det_batch(op, np.array([float(e)]))
    return ScaledDeterminant(mantissa=complex(mantissa[0]), exponent=int(exponent[0]))


def _det_signs(op: TridiagonalOperator, energies: np.ndarray) -> np.ndarray:
    mantissa, _ = _det_batch(op, energies)
    return np.sign(mantissa.real)


def _bisect_batch(
    op: TridiagonalOperator,
    lo: np.ndarray,
    hi: np.ndarray,
    s_lo: np.ndarray,
    rtol: float,
) -> np.ndarray:
    """Bisection of sign changes of Re D_N, run in lockstep over all brackets."""
    lo = lo.copy()
    hi = hi.copy()
    s_lo = s_lo.copy()
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.all(hi - lo <= rtol * np.maximum(1.0, np.abs(mid))):
            break
        s_mid = _det_signs(op, mid)
        exact = s_mid == 0
        same = (s_mid == s_lo) & ~exact
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
        hi = np.where(~same, mid, hi)
        lo = np.where(exact, mid, lo)
        hi = np.where(exact, mid, hi)
    return 0.5 * (lo + hi)


def find_real_eigenvalues(
    op: TridiagonalOperator,
    e_min: float,
    e_max: float,
    scan_step: float = 0.05,
    rtol: float = 1e-12,
    localized_only: bool = True,
    edge_fraction: float = 0.15,
    edge_mass_tol: float = 1e-6,
) -> list[float]:
    """All real E in [e_min, e_max] where Re D_N changes sign, refined by bisection.

    With localized_only (default) the roots are post-filtered down to
    genuine bound states: a Dirichlet box over a potential whose real part
    is unbounded below (the real axis at alpha = 4N) also quantizes
    non-normalizable continuum solutions.  Those artifacts move O(1) when
    the grid is halved while physical eigenvalues move O(h^2), so each
    root must (a) persist on the half-resolution grid and (b) have an
    eigenvector with negligible mass near the grid ends.
    """
    if not e_min < e_max:
        raise ValueError(f"need e_min < e_max, got [{e_min}, {e_max}]")
    if scan_step <= 0:
        raise ValueError(f"scan_step must be > 0, got {scan_step}")
    n_pts = int(math.ceil((e_max - e_min) / scan_step)) + 1
    grid = np.linspace(e_min, e_max, n_pts)
    signs = _det_signs(op, grid)
    flip = signs[:-1] * signs[1:] < 0
    if not np.any(flip):
        return []
    idx = np.nonzero(flip)[0]
    roots = _bisect_batch(op, grid[idx], grid[idx + 1], signs[idx], rtol)
    result = sorted(float(r) for r in roots)
    if localized_only:
        if op.params is None:
            raise ValueError(
                "localized_only requires an operator built by build_hamiltonian "
                "(potential parameters are needed to rebuild at half resolution)"
            )
        op_half = build_hamiltonian(op.params, replace(op.grid, n=max(op.n // 2, 50)))
        kept = []
        for r in result:
            if not _persists_on_grid(op_half, r):
                continue
            try:
                psi = eigenvector(op, r)
            except EigenvectorError:
                continue
            if psi.edge_mass(edge_fraction) <= edge_mass_tol:
                kept.append(r)
        result = kept
    return result


def _persists_on_grid(op: TridiagonalOperator, e: float, rel_window: float = 0.02) -> bool:
    """True if Re D_N changes sign within a small window of e on this grid."""
    delta = rel_window * max(1.0, abs(e))
    grid = np.linspace(e - delta, e + delta, 41)
    signs = _det_signs(op, grid)
    return bool(np.any(signs[:-1] * signs[1:] < 0))


def solve_alpha_for_energy(
    beta: float,
    family: FamilySelector,
    grid: GridSpec,
    e: float,
    alpha_bracket: tuple[float, float],
    xtol: float = 1e-10,
    use_optimal_shift: bool = True,
) -> float:
    """Inverse mode: the alpha at which E is an eigenvalue, by bisection in alpha.

    The contour shift is recomputed from the family at every trial alpha
    when use_optimal_shift is set; otherwise grid.y is kept fixed.
    """
    a_lo, a_hi = alpha_bracket
    if not a_lo < a_hi:
        raise ValueError(f"bad alpha bracket {alpha_bracket}")

    def det_sign(a: float) -> int:
        params = PotentialParams(a, beta)
        y = optimal_shift(params, family).y if use_optimal_shift else grid.y
        op = build_hamiltonian(params, replace(grid, y=y))
        return det_n(op, e).sign

    s_lo = det_sign(a_lo)
    if s_lo * det_sign(a_hi) > 0:
        raise NoSignChangeError(
            f"Re D_N(E={e}) does not change sign on alpha bracket {alpha_bracket}"
        )
    while a_hi - a_lo > xtol:
        mid = 0.5 * (a_lo + a_hi)
        s_mid = det_sign(mid)
        if s_mid == 0:
            return mid
        if s_mid == s_lo:
            a_lo = mid
        else:
            a_hi = mid
    return 0.5 * (a_lo + a_hi)


@dataclass(frozen=True)
class WaveFunction:
    """Normalized eigenvector on the contour, phase-fixed to the PT-canonical form."""

    grid: GridSpec
    values: np.ndarray = field(repr=False)
    energy: float

    def edge_mass(self, fraction: float = 0.15) -> float:
        """Probability mass in the outer `fraction` of the grid on each side."""
        k = max(1, int(len(self.values) * fraction))
        mass = np.abs(self.values) ** 2
        return float((mass[:k].sum() + mass[-k:].sum()) / mass.sum())

    def parity_defect(self) -> float:
        """Max deviation from conj(psi(-x)) = psi(x), relative to the peak amplitude."""
        defect = np.max(np.abs(self.values - np.conj(self.values[::-1])))
        return float(defect / np.max(np.abs(self.values)))

    def log_derivative_center(self) -> complex:
        """i psi'(0)/psi(0) by central differences; requires odd n (x=0 on grid)."""
        n = len(self.values)
        if n % 2 == 0:
            raise ValueError("central log-derivative needs an odd point count")
        c = n // 2
        dpsi = (self.values[c + 1] - self.values[c - 1]) / (2.0 * self.grid.h)
        return complex(1j * dpsi / self.values[c])


def eigenvector(
    op: TridiagonalOperator,
    e: float,
    max_iter: int = 50,
    residual_tol: float = 1e-5,
) -> WaveFunction:
    """Eigenvector for determinant root e, by inverse iteration on the tridiagonal."""
    n = op.n
    h = op.grid.h
    # shifted system (H - e I) in solve_banded layout; a tiny diagonal nudge
    # keeps the factorization well defined when e is (numerically) exact
    nudge = 1e-12 * (2.0 / h**2)
    ab = np.zeros((3, n), dtype=complex)
    ab[0, 1:] = op.off
    ab[1, :] = op.diag - e + nudge
    ab[2, :-1] = op.off
    xs = op.grid.points()
    v = np.exp(-0.5 * xs**2).astype(complex)  # smooth, even start
    v /= np.linalg.norm(v)
    converged = False
    for _ in range(max_iter):
        w = solve_banded((1, 1), ab, v)
        w /= np.linalg.norm(w)
        # residual of the eigen-equation at the candidate vector
        hv = op.diag * w
        hv[:-1] += op.off * w[1:]
        hv[1:] += op.off * w[:-1]
        if np.linalg.norm(hv - e * w) <= residual_tol * max(1.0, abs(e)):
            v = w
            converged = True
            break
        v = w
    if not converged:
        raise EigenvectorError(
            f"inverse iteration did not converge at E={e}; "
            "not a determinant root at this grid resolution"
        )
    # PT phase fix: conj(v reversed) = c v with |c| = 1; rotating by
    # exp(i arg(c) / 2) makes Re psi even and Im psi odd
    k = int(np.argmax(np.abs(v)))
    c = np.conj(v[::-1])[k] / v[k]
    v = v * np.exp(0.5j * np.angle(c))
    center = n // 2
    window = v[max(0, center - 2): center + 3]
    if np.real(window[np.argmax(np.abs(window))]) < 0:
        v = -v
    v = v / math.sqrt(float(np.sum(np.abs(v) ** 2) * h))
    v.setflags(write=False)
    return WaveFunction(grid=op.grid, values=v, energy=float(e))


# ---------------------------------------------------------------------------
# continuation sweeps


@dataclass(frozen=True)
class TrackEvent:
    """A level-tracking event: pair merge, pair reappearance, or window exit."""

    kind: str  # "merge" | "reappear" | "left_window"
    alpha: float
    partner: int | None = None


@dataclass
class LevelTrack:
    """One eigenvalue followed through an alpha sweep."""

    family: FamilySelector
    level_index: int  # 1-based ordering by energy at the reference alpha
    points: list[tuple[float, float]] = field(default_factory=list)
    events: list[TrackEvent] = field(default_factory=list)

    @property
    def alphas(self) -> np.ndarray:
        return np.array([a for a, _ in self.points])

    @property
    def energies(self) -> np.ndarray:
        return np.array([e for _, e in self.points])

    def energy_at(self, alpha: float, tol: float = 1e-9) -> float | None:
        for a, e in self.points:
            if abs(a - alpha) <= tol:
                return e
        return None

    def merge_events(self) -> list[TrackEvent]:
        return [ev for ev in self.events if ev.kind == "merge"]


def _predict(track: LevelTrack, alpha: float) -> float:
    pts = track.points
    if len(pts) >= 2:
        (a0, e0), (a1, e1) = pts[-2], pts[-1]
        if a1 != a0:
            return e1 + (e1 - e0) * (alpha - a1) / (a1 - a0)
    return pts[-1][1]


_EVENT_BIAS = 0.1  # keeps zero-gap events from beating plain matching


def _match_step(
    order: list[int],
    pred_list: list[float],
    last_list: list[float],
    pool: list[float],
    e_max: float,
    margin: float,
) -> tuple[list[int], list[float], list, tuple]:
    """Order-preserving alignment of predicted track energies with found roots.

    Solved globally by dynamic programming over (track suffix, root suffix)
    with these moves: match a track to a root (cost = prediction error);
    drop an adjacent track pair as merged (cost = their energy gap — merge
    partners must have approached each other); drop an adjacent root pair
    as newly appeared; let leftover topmost tracks/roots cross the window
    top (cheap only near e_max).  Returns the matched tracks and roots plus
    the merge, pair-appearance and top-entry records.
    """
    np_, nr = len(order), len(pool)
    inf = math.inf
    cost = {(np_, nr): 0.0}
    move: dict[tuple[int, int], tuple] = {}

    def top_cost(x: float) -> float:
        return max(0.0, (e_max - margin) - x) + _EVENT_BIAS

    for i in range(np_, -1, -1):
        for j in range(nr, -1, -1):
            if (i, j) == (np_, nr):
                continue
            best, best_move = inf, None
            if i < np_ and j < nr:
                c = abs(pred_list[i] - pool[j]) + cost[(i + 1, j + 1)]
                if c < best:
                    best, best_move = c, ("match", i, j)
            if i + 1 < np_:
                c = 0.5 * abs(last_list[i + 1] - last_list[i]) + _EVENT_BIAS
                c += cost[(i + 2, j)]
                if c < best:
                    best, best_move = c, ("merge", i, j)
            if j + 1 < nr:
                c = 0.5 * (pool[j + 1] - pool[j]) + _EVENT_BIAS + cost[(i, j + 2)]
                if c < best:
                    best, best_move = c, ("pair_in", i, j)
            if i < np_ and j == nr:  # order-preserving: only topmost tracks can exit
                c = top_cost(pred_list[i]) + cost[(i + 1, j)]
                if c < best:
                    best, best_move = c, ("exit_top", i, j)
            if j < nr and i == np_:
                c = top_cost(pool[j]) + cost[(i, j + 1)]
                if c < best:
                    best, best_move = c, ("enter_top", i, j)
            cost[(i, j)] = best
            move[(i, j)] = best_move

    matched_tracks: list[int] = []
    matched_roots: list[float] = []
    lost_pairs: list[tuple[int, int]] = []
    new_pairs: list[tuple[float, float]] = []
    entered: list[float] = []
    i = j = 0
    while (i, j) != (np_, nr):
        kind, i0, j0 = move[(i, j)]
        if kind == "match":
            matched_tracks.append(order[i0])
            matched_roots.append(pool[j0])
            i, j = i0 + 1, j0 + 1
        elif kind == "merge":
            lost_pairs.append((order[i0], order[i0 + 1]))
            i = i0 + 2
        elif kind == "pair_in":
            new_pairs.append((pool[j0], pool[j0 + 1]))
            j = j0 + 2
        elif kind == "exit_top":
            lost_pairs.append((order[i0], -1))  # -1: left through the top
            i = i0 + 1
        else:  # enter_top
            entered.append(pool[j0])
            j = j0 + 1
    return matched_tracks, matched_roots, lost_pairs, (new_pairs, entered)


def _local_root_count(
    op: TridiagonalOperator, e_lo: float, e_hi: float, min_step: float = 1e-6
) -> int:
    """Number of sign changes of Re D_N in [e_lo, e_hi], with adaptive refinement.

    Used to pin merge/reappearance points: just before a merge the two
    roots are arbitrarily close, so the scan step is refined until either
    a pair is found or the step collapses below min_step.
    """
    step = (e_hi - e_lo) / 40.0
    while True:
        n_pts = int(math.ceil((e_hi - e_lo) / step)) + 1
        grid = np.linspace(e_lo, e_hi, min(n_pts, 20001))
        signs = _det_signs(op, grid)
        count = int(np.sum(signs[:-1] * signs[1:] < 0))
        if count >= 2 or step <= min_step:
            return count
        step /= 10.0


def _refine_event(
    make_op,
    a_present: float,
    a_absent: float,
    e_center: float,
    e_halfwidth: float,
    atol: float = 5e-4,
) -> float:
    """Bisection in alpha for the point where a root pair (dis)appears."""
    lo, hi = a_present, a_absent
    for _ in range(60):
        if abs(hi - lo) <= atol:
            break
        if abs(hi - lo) < 1e-6:
            raise StepCollapseError("alpha refinement collapsed below 1e-6")
        mid = 0.5 * (lo + hi)
        count = _local_root_count(
            make_op(mid), e_center - e_halfwidth, e_center + e_halfwidth
        )
        if count >= 2:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def continuation_sweep(
    family: FamilySelector,
    beta: float,
    alpha_from: float,
    alpha_to: float,
    alpha_step: float,
    levels: int,
    x_max: float = 9.0,
    n: int = 1200,
    e_min: float = 0.0,
    e_max: float | None = None,
    scan_step: float = 0.05,
    root_rtol: float = 1e-9,
    boundary_margin: float = 1.0,
) -> list[LevelTrack]:
    """Follow eigenvalues from the family reference alpha through an alpha range.

    The contour shift is recomputed per alpha from the family's optimal
    (PT-clamped) value; x_max is held fixed for comparability.  Every real
    root inside [e_min, e_max] is tracked — partial tracking cannot tell a
    merge with an untracked neighbour from a matching failure.  Tracks
    record merge events when an adjacent pair of levels simultaneously
    leaves the real axis, and reappearance events when the pair returns.
    The first `levels` tracks are the levels ordered by energy at the
    reference alpha; roots that later drift in through the window top get
    fresh indices in order of appearance.
    """
    if abs(alpha_from - family.alpha_R) > 1e-9:
        raise ValueError(
            f"sweep must start at the family reference alpha_R={family.alpha_R}"
        )
    if alpha_step <= 0:
        raise ValueError("alpha_step must be > 0")
    direction = 1.0 if alpha_to > alpha_from else -1.0
    n_steps = int(round(abs(alpha_to - alpha_from) / alpha_step))
    alphas = alpha_from + direction * alpha_step * np.arange(n_steps + 1)

    def make_op(alpha: float) -> TridiagonalOperator:
        params = PotentialParams(alpha, beta)
        y = optimal_shift(params, family).y
        return build_hamiltonian(params, GridSpec(x_max, n, y))

    def roots_at(op, lo, hi):
        return find_real_eigenvalues(op, lo, hi, scan_step, root_rtol)

    op0 = make_op(alpha_from)
    hi = e_max if e_max is not None else 10.0
    roots0 = roots_at(op0, e_min, hi)
    if e_max is None:
        while len(roots0) < levels + 1:
            hi *= 2.0
            roots0 = roots_at(op0, e_min, hi)
        e_max = 0.5 * (roots0[levels - 1] + roots0[levels]) if len(roots0) > levels \
            else roots0[levels - 1] + boundary_margin
        roots0 = [r for r in roots0 if r <= e_max]
    if len(roots0) < levels:
        raise ValueError(
            f"only {len(roots0)} levels below e_max={e_max} at the reference alpha"
        )

    tracks = [
        LevelTrack(family=family, level_index=i + 1, points=[(float(alpha_from), r)])
        for i, r in enumerate(roots0)
    ]
    active = list(range(len(tracks)))
    pending: list[dict] = []  # merged pairs awaiting reappearance
    min_dalpha = max(alpha_step / 16.0, 5e-4)

    def advance(a_prev: float, a: float) -> None:
        """Match tracks to the roots at alpha = a, splitting the interval when
        more than one event falls inside it (one event per substep keeps the
        order-cost matching unambiguous)."""
        op = make_op(a)
        roots = roots_at(op, e_min, e_max)

        preds = {i: _predict(tracks[i], a) for i in active}
        order = sorted(active, key=lambda i: preds[i])
        pred_list = [preds[i] for i in order]
        last_list = [tracks[i].points[-1][1] for i in order]
        order, pool, lost, (new_pairs, entered) = _match_step(
            order, pred_list, last_list, list(roots), e_max, boundary_margin
        )

        n_events = len(lost) + len(new_pairs) + len(entered)
        if n_events > 1 and abs(a - a_prev) > min_dalpha:
            mid = 0.5 * (a_prev + a)
            advance(a_prev, mid)
            advance(mid, a)
            return

        for i, r in zip(order, pool):
            tracks[i].points.append((a, float(r)))

        for i, j in lost:
            if j < 0:  # drifted out through the window top
                tracks[i].events.append(TrackEvent("left_window", a))
                active.remove(i)
                continue
            e_i = tracks[i].points[-1][1]
            e_j = tracks[j].points[-1][1]
            center = 0.5 * (e_i + e_j)
            halfwidth = max(1.0, 2.0 * abs(e_j - e_i))
            alpha_ev = _refine_event(make_op, a_prev, a, center, halfwidth)
            li, lj = tracks[i].level_index, tracks[j].level_index
            tracks[i].events.append(TrackEvent("merge", alpha_ev, partner=lj))
            tracks[j].events.append(TrackEvent("merge", alpha_ev, partner=li))
            active.remove(i)
            active.remove(j)
            pending.append({"pair": (i, j), "e": center})

        for r_lo, r_hi in new_pairs:
            center = 0.5 * (r_lo + r_hi)
            rec = min(pending, key=lambda p: abs(p["e"] - center)) if pending else None
            if rec is None or abs(rec["e"] - center) > 0.35 * max(1.0, e_max - e_min):
                # an unrelated pair descending into the window: new tracks
                for r in (r_lo, r_hi):
                    tracks.append(LevelTrack(family=family, level_index=len(tracks) + 1,
                                             points=[(a, float(r))]))
                    active.append(len(tracks) - 1)
                continue
            pending.remove(rec)
            i, j = rec["pair"]
            halfwidth = max(1.0, 2.0 * (r_hi - r_lo))
            alpha_ev = _refine_event(make_op, a, a_prev, center, halfwidth)
            li, lj = tracks[i].level_index, tracks[j].level_index
            tracks[i].events.append(TrackEvent("reappear", alpha_ev, partner=lj))
            tracks[j].events.append(TrackEvent("reappear", alpha_ev, partner=li))
            tracks[i].points.append((a, float(r_lo)))
            tracks[j].points.append((a, float(r_hi)))
            active.extend([i, j])

        for r in entered:
            tracks.append(LevelTrack(family=family, level_index=len(tracks) + 1,
                                     points=[(a, float(r))]))
            active.append(len(tracks) - 1)

    for a_prev, a in zip(alphas[:-1], alphas[1:]):
        advance(float(a_prev), float(a))

    return tracks


def special_level(tracks: list[LevelTrack]) -> int | None:
    """Level index (lower member) of the merge event at the smallest alpha."""
    best: tuple[float, int] | None = None
    for t in tracks:
        for ev in t.merge_events():
            lower = min(t.level_index, ev.partner)
            if best is None or ev.alpha < best[0]:
                best = (ev.alpha, lower)
    return None if best is None else best[1]
