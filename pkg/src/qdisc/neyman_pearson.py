"""Neyman-Pearson discrimination: Lagrange operator, ROC sweeps and characteristic functions.

For a multiplier gamma >= 0 the optimal test projects onto the strictly
positive eigenspace of rho1 - gamma rho0. Sweeping gamma traces the
deterministic-PVM ROC curve. ``roc_point`` and ``roc_sweep`` do this by
brute-force diagonalization and serve as the reference for the closed
forms below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from qdisc.core import (
    BELL_VECTORS,
    DEFAULT_TOL,
    BinaryPVM,
    DomainError,
    as_operator,
    bell_weights,
    bloch_vector,
    check_same_dim,
    eig_hermitian,
    _eig_checked,
)


@dataclass(frozen=True)
class RocPoint:
    p10: float
    p11: float
    gamma: Optional[float] = None
    regime: Optional[str] = None


@dataclass(frozen=True)
class RocCurve:
    """ROC points sorted by false-alarm probability."""

    points: tuple[RocPoint, ...]

    @property
    def p10(self) -> np.ndarray:
        return np.array([pt.p10 for pt in self.points])

    @property
    def p11(self) -> np.ndarray:
        return np.array([pt.p11 for pt in self.points])

    @property
    def gammas(self) -> np.ndarray:
        return np.array([np.nan if pt.gamma is None else pt.gamma for pt in self.points])

    def __len__(self) -> int:
        return len(self.points)

    def is_monotone(self, atol: float = DEFAULT_TOL) -> bool:
        return bool(np.all(np.diff(self.p11) >= -atol)) and bool(np.all(np.diff(self.p10) >= 0))

    def p11_at(self, p10: float, randomized: bool = False) -> float:
        """Best detection probability with false alarm at most ``p10``.

        With ``randomized=False`` only the deterministic points are used,
        giving a step function. ``randomized=True`` allows mixing adjacent
        tests, i.e. the upper concave envelope through (0, 0) and (1, 1).
        """
        xs = self.p10
        ys = self.p11
        if not randomized:
            ok = xs <= p10 + 1e-12
            return float(ys[ok].max()) if ok.any() else 0.0
        hx, hy = _upper_hull(np.r_[0.0, xs, 1.0], np.r_[0.0, ys, 1.0])
        return float(np.interp(p10, hx, hy))


def _upper_hull(xs: np.ndarray, ys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    pts = sorted(zip(xs, ys))
    hull: list[tuple[float, float]] = []
    for x, y in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1) >= 0:
                hull.pop()
            else:
                break
        hull.append((x, y))
    hx, hy = zip(*hull)
    return np.array(hx), np.array(hy)


# --- reference engine ------------------------------------------------------


def lagrange_operator(rho0, rho1, gamma: float) -> np.ndarray:
    """rho1 - gamma rho0."""
    if not gamma >= 0:
        raise DomainError(f"Lagrange multiplier must be nonnegative, got {gamma!r}")
    rho0 = as_operator(rho0, "rho0")
    rho1 = as_operator(rho1, "rho1")
    check_same_dim(rho0, rho1)
    return rho1 - gamma * rho0


def _positive_vectors(m: np.ndarray, tol: float) -> np.ndarray:
    w, v = _eig_checked(m)
    return v[:, w > tol]


def _positive_projector(m: np.ndarray, tol: float) -> np.ndarray:
    vp = _positive_vectors(m, tol)
    return vp @ vp.conj().T


def np_measurement(rho0, rho1, gamma: float, tol: float = DEFAULT_TOL) -> BinaryPVM:
    return BinaryPVM.from_pi1(_positive_projector(lagrange_operator(rho0, rho1, gamma), tol))


def _point(rho0: np.ndarray, rho1: np.ndarray, gamma: float, tol: float) -> RocPoint:
    vp = _positive_vectors(rho1 - gamma * rho0, tol)
    vh = vp.conj().T
    return RocPoint(
        float(np.einsum("ij,ji->", vh, rho0 @ vp).real),
        float(np.einsum("ij,ji->", vh, rho1 @ vp).real),
        gamma,
    )


def roc_point(rho0, rho1, gamma: float, tol: float = DEFAULT_TOL) -> RocPoint:
    """False-alarm and detection probabilities of the optimal test at ``gamma``."""
    lagrange_operator(rho0, rho1, gamma)
    return _point(np.asarray(rho0, dtype=complex), np.asarray(rho1, dtype=complex), float(gamma), tol)


def default_gamma_grid(
    n: int = 512, lo: float = 1e-4, hi: float = 1e4, critical: Iterable[float] = ()
) -> np.ndarray:
    """Log-spaced multipliers plus any known critical values, inserted exactly."""
    extra = [g for g in critical if math.isfinite(g) and g >= 0]
    return np.unique(np.r_[np.geomspace(lo, hi, n), extra])


def roc_sweep(rho0, rho1, gamma_grid: Optional[Sequence[float]] = None, tol: float = DEFAULT_TOL) -> RocCurve:
    """Reference ROC curve from optimal tests at each multiplier in the grid."""
    grid = default_gamma_grid() if gamma_grid is None else np.asarray(gamma_grid, dtype=float)
    if grid.size == 0:
        raise DomainError("gamma grid is empty")
    if np.any(grid < 0) or not np.all(np.isfinite(grid)):
        raise DomainError("gamma grid must be finite and nonnegative")
    rho0 = as_operator(rho0, "rho0")
    rho1 = as_operator(rho1, "rho1")
    check_same_dim(rho0, rho1)
    pts = sorted((_point(rho0, rho1, float(g), tol) for g in grid), key=lambda pt: (pt.p10, pt.p11))
    kept: list[RocPoint] = []
    for pt in pts:
        if kept and abs(pt.p10 - kept[-1].p10) <= 1e-12 and abs(pt.p11 - kept[-1].p11) <= 1e-12:
            continue
        kept.append(pt)
    return RocCurve(tuple(kept))


def _infinite_gamma_point(rho0: np.ndarray, rho1: np.ndarray, tol: float) -> RocPoint:
    # gamma -> infinity: test restricted to the kernel of rho0
    ed = eig_hermitian(rho0)
    dim = rho0.shape[0]
    ker = np.zeros((dim, dim), dtype=complex)
    for k, w in enumerate(ed.eigenvalues):
        if w <= tol:
            ker += ed.projector(k)
    pi1 = _positive_projector(ker @ rho1 @ ker, tol)
    return RocPoint(float(np.vdot(pi1, rho0).real), float(np.vdot(pi1, rho1).real), math.inf)


def np_full_detection_p10(rho0, rho1, tol: float = DEFAULT_TOL) -> float:
    """False alarm of the gamma = 0 test, the least false alarm with p11 = 1."""
    return _point(as_operator(rho0, "rho0"), as_operator(rho1, "rho1"), 0.0, tol).p10


def np_optimal_p11(rho0, rho1, p10: float, tol: float = DEFAULT_TOL, slack: float = 1e-12) -> float:
    """Largest p11 reachable by an optimal deterministic test with false alarm <= ``p10``.

    Finds the smallest multiplier whose test meets the false-alarm budget.
    The false-alarm probability is nonincreasing in gamma, so a bracketing
    root finder on log(gamma) locates it.
    """
    rho0 = as_operator(rho0, "rho0")
    rho1 = as_operator(rho1, "rho1")
    if p10 >= 1.0:
        return 1.0
    first = _point(rho0, rho1, 0.0, tol)
    if first.p10 <= p10 + slack:
        return first.p11
    limit = _infinite_gamma_point(rho0, rho1, tol)
    if p10 <= slack:
        return limit.p11

    def excess(u: float) -> float:
        return _point(rho0, rho1, math.exp(u), tol).p10 - p10 - slack

    hi = 0.0
    while excess(hi) > 0:
        hi += 4.0
        if hi > 40.0:
            return limit.p11
    lo = hi - 4.0
    while excess(lo) <= 0:
        lo -= 8.0
        if lo < -700.0:
            # budget met for every gamma > 0 but not at gamma = 0
            return _point(rho0, rho1, math.exp(lo + 8.0), tol).p11
    if hi - lo > 1e-13:
        u = brentq(excess, lo, hi, xtol=1e-13, rtol=4 * np.finfo(float).eps)
        step = 1e-13
        while excess(u) > 0 and u < hi:
            u = min(u + step, hi)
            step *= 4
    else:
        u = hi
    return _point(rho0, rho1, math.exp(u), tol).p11


# --- pure and mixed single-qubit closed forms --------------------------------


def p11_pure(kappa2: float, p10: float) -> float:
    """Detection probability of the optimal test for two pure states."""
    if not (0.0 <= kappa2 <= 1.0):
        raise DomainError(f"squared overlap {kappa2!r} outside [0, 1]")
    if not (0.0 <= p10 <= 1.0):
        raise DomainError(f"false-alarm probability {p10!r} outside [0, 1]")
    if p10 > kappa2:
        return 1.0
    return (math.sqrt(p10 * kappa2) + math.sqrt((1 - p10) * (1 - kappa2))) ** 2


def mixed_kappa2(r2: float, r1_2: float, lam: float) -> float:
    """1 - (1 - r1^2/r^2) sin^2(lam); the normalized overlap of the Bloch directions."""
    if not r2 > 0:
        raise DomainError("r^2 must be positive")
    return 1.0 - (1.0 - r1_2 / r2) * math.sin(lam) ** 2


def critical_gammas_mixed(r2: float, kappa2: float) -> tuple[float, float]:
    """Multipliers bounding the window in which the test is a rank-one projector."""
    if not (0.0 < r2 < 1.0):
        raise DomainError(f"r^2 = {r2!r} must lie strictly between 0 and 1")
    a = math.sqrt(max(0.0, r2 * (1.0 - kappa2)))
    b = math.sqrt(max(0.0, 1.0 - kappa2 * r2))
    scale = 2.0 * a / (1.0 - r2)
    return 1.0 + scale * (a - b), 1.0 + scale * (a + b)


def _mixed_window_point(r2: float, kappa2: float, gamma: float) -> tuple[float, float]:
    f = 0.5 * (1.0 + gamma)
    root = math.sqrt(f * f - gamma * kappa2)
    r = math.sqrt(r2)
    p11 = 0.5 * (1.0 + (f - gamma * kappa2) * r / root)
    p10 = 0.5 * (1.0 - (f - kappa2) * r / root)
    return p10, p11


def _check_mixed(r2: float, r1_2: float) -> None:
    if not (0.0 < r2 < 1.0):
        raise DomainError(f"r^2 = {r2!r} must lie strictly between 0 and 1 (mixed state)")
    if not (0.0 <= r1_2 <= r2 + 1e-12):
        raise DomainError(f"r1^2 = {r1_2!r} must lie in [0, r^2]")


def np_mixed_parametric(r: Sequence[float], lam: float, gamma: float) -> RocPoint:
    """Optimal (p10, p11) at multiplier ``gamma`` for a mixed qubit preparation.

    Inside the window [gamma_-, gamma_+) the closed-form parametric
    expressions apply; outside it the test is trivial and the point is
    flagged ``accept_all`` (1, 1) or ``reject_all`` (0, 0).
    """
    v = bloch_vector(r)
    r2 = float(v @ v)
    _check_mixed(r2, float(v[0]) ** 2)
    if not gamma >= 0:
        raise DomainError(f"Lagrange multiplier must be nonnegative, got {gamma!r}")
    kappa2 = mixed_kappa2(r2, float(v[0]) ** 2, lam)
    g_minus, g_plus = critical_gammas_mixed(r2, kappa2)
    if gamma < g_minus:
        return RocPoint(1.0, 1.0, gamma, "accept_all")
    if gamma >= g_plus:
        return RocPoint(0.0, 0.0, gamma, "reject_all")
    p10, p11 = _mixed_window_point(r2, kappa2, gamma)
    return RocPoint(p10, p11, gamma, "window")


def mixed_breakpoints(r2: float, kappa2: float) -> dict[str, float]:
    """Critical multipliers and the ROC points at the window edges."""
    g_minus, g_plus = critical_gammas_mixed(r2, kappa2)
    lo10, lo11 = _mixed_window_point(r2, kappa2, g_plus)
    hi10, hi11 = _mixed_window_point(r2, kappa2, g_minus)
    return {
        "gamma_minus": g_minus,
        "gamma_plus": g_plus,
        "p10_gamma_plus": lo10,
        "p11_gamma_plus": lo11,
        "p10_gamma_minus": hi10,
        "p11_gamma_minus": hi11,
    }


def p11_star(r2: float, kappa2: float, p10: float) -> float:
    """Middle branch of the mixed-state characteristic function."""
    rad = kappa2 * (1.0 - kappa2) * (r2 - (2 * p10 - 1) ** 2)
    return p10 * kappa2 + (1 - p10) * (1 - kappa2) + math.sqrt(max(0.0, rad))


def characteristic_mixed(r2: float, r1_2: float, lam: float, p10: float) -> float:
    """Deterministic-test characteristic function p11(p10) for a mixed qubit.

    Zero up to p10(gamma_+), the middle branch inside the window, the
    plateau p11(gamma_-) after it and 1 at p10 = 1.
    """
    _check_mixed(r2, r1_2)
    return characteristic_mixed_kappa(r2, mixed_kappa2(r2, r1_2, lam), p10)


def characteristic_mixed_kappa(r2: float, kappa2: float, p10: float) -> float:
    """``characteristic_mixed`` parameterized directly by the overlap ``kappa2``."""
    _check_mixed(r2, 0.0)
    if not (0.0 <= kappa2 <= 1.0):
        raise DomainError(f"squared overlap {kappa2!r} outside [0, 1]")
    if not (0.0 <= p10 <= 1.0):
        raise DomainError(f"false-alarm probability {p10!r} outside [0, 1]")
    if p10 >= 1.0:
        return 1.0
    if kappa2 >= 1.0 - 1e-15:
        return 0.0
    bp = mixed_breakpoints(r2, kappa2)
    if p10 <= bp["p10_gamma_plus"]:
        return 0.0
    if p10 < bp["p10_gamma_minus"]:
        return p11_star(r2, kappa2, p10)
    return bp["p11_gamma_minus"]


# --- Bell-diagonal two-qubit closed forms -----------------------------------

# Bases in which the two invariant blocks take their printed form.
PLUS_BASIS = np.column_stack([BELL_VECTORS["phi+"], -BELL_VECTORS["psi+"]])
MINUS_BASIS = np.column_stack([BELL_VECTORS["psi-"], BELL_VECTORS["phi-"]])


@dataclass(frozen=True)
class BlockPair:
    """The two 2x2 blocks of the Lagrange operator for a Bell-diagonal state.

    ``plus`` acts on span{phi+, psi+} in the basis (phi+, -psi+); ``minus``
    acts on span{psi-, phi-} in the basis (psi-, phi-).
    """

    plus: np.ndarray
    minus: np.ndarray

    def direct_sum(self) -> np.ndarray:
        """The 4x4 operator in the computational basis."""
        return (
            PLUS_BASIS @ self.plus @ PLUS_BASIS.conj().T
            + MINUS_BASIS @ self.minus @ MINUS_BASIS.conj().T
        )


def _block(pa: float, pb: float, lam: float, gamma: float) -> np.ndarray:
    c2 = math.cos(lam) ** 2
    s2 = math.sin(lam) ** 2
    off = 1j * math.sin(lam) * math.cos(lam) * (pa - pb)
    return np.array(
        [[pa * (c2 - gamma) + pb * s2, off], [off.conjugate(), pb * (c2 - gamma) + pa * s2]],
        dtype=complex,
    )


def gamma_blocks(p: Sequence[float], lam: float, gamma: float) -> BlockPair:
    p0, p1, p2, p3 = bell_weights(p)
    if not gamma >= 0:
        raise DomainError(f"Lagrange multiplier must be nonnegative, got {gamma!r}")
    return BlockPair(_block(p0, p1, lam, gamma), _block(p2, p3, lam, gamma))


class CriticalGammas(NamedTuple):
    xi: float
    gamma_minus: float
    gamma_plus: float
    degenerate: bool = False


def xi_and_critical_gammas(pa: float, pb: float, lam: float) -> CriticalGammas:
    """Block parameter Xi and the roots of the block determinant in gamma.

    When one weight vanishes the determinant is linear in gamma; the block
    is then flagged degenerate and the window is [0, inf), or [0, 1) when
    sin(lam) = 0. A block with no weight has an empty window.
    """
    if pa < 0 or pb < 0:
        raise DomainError("block weights must be nonnegative")
    s2 = math.sin(lam) ** 2
    if pa * pb > 0:
        xi = (pa - pb) ** 2 * s2 / (2 * pa * pb)
        root = math.sqrt(xi * (xi + 2))
        return CriticalGammas(xi, 1 + xi - root, 1 + xi + root)
    if pa + pb == 0:
        return CriticalGammas(0.0, 0.0, 0.0, True)
    if s2 == 0:
        return CriticalGammas(0.0, 0.0, 1.0, True)
    return CriticalGammas(math.inf, 0.0, math.inf, True)


def _block_contribution(pa: float, pb: float, lam: float, gamma: float) -> tuple[float, float, str]:
    crit = xi_and_critical_gammas(pa, pb, lam)
    total = pa + pb
    if gamma < crit.gamma_minus:
        return total, total, "accept"
    if gamma >= crit.gamma_plus:
        return 0.0, 0.0, "reject"
    c = math.cos(2 * lam)
    d = math.sqrt(gamma * gamma - 2 * gamma * c + 1)
    diff = abs(pa - pb)
    return 0.5 * (total + diff * (c - gamma) / d), 0.5 * (total + diff * (1 - gamma * c) / d), "window"


def characteristic_bell_diagonal(p: Sequence[float], lam: float, gamma: float) -> RocPoint:
    """Optimal (p10, p11) at multiplier ``gamma`` for a Bell-diagonal preparation.

    Each block contributes all of its weight (gamma below its window),
    nothing (above it) or its rank-one window expression. ``regime`` reads
    ``"<plus block>|<minus block>"``.
    """
    p0, p1, p2, p3 = bell_weights(p)
    if not gamma >= 0:
        raise DomainError(f"Lagrange multiplier must be nonnegative, got {gamma!r}")
    a10, a11, ra = _block_contribution(p0, p1, lam, gamma)
    b10, b11, rb = _block_contribution(p2, p3, lam, gamma)
    return RocPoint(min(1.0, a10 + b10), min(1.0, a11 + b11), gamma, f"{ra}|{rb}")


def bell_diagonal_row(p: Sequence[float], lam: float, gamma: float) -> int:
    """Which of the five pieces of the characteristic function applies (1 to 5).

    Rows are ordered by increasing gamma: both blocks accepted; wide block
    in its window with the narrow one accepted; both in their windows;
    wide in window with narrow rejected; both rejected.
    """
    p0, p1, p2, p3 = bell_weights(p)
    plus = xi_and_critical_gammas(p0, p1, lam)
    minus = xi_and_critical_gammas(p2, p3, lam)
    wide, narrow = ((p0, p1), (p2, p3)) if plus.xi >= minus.xi else ((p2, p3), (p0, p1))
    rw = _block_contribution(*wide, lam, gamma)[2]
    rn = _block_contribution(*narrow, lam, gamma)[2]
    # a block without weight contributes nothing, so its label is free
    if sum(narrow) == 0:
        rn = "accept" if rw == "accept" else "reject"
    if sum(wide) == 0:
        rw = rn
    table = {
        ("accept", "accept"): 1,
        ("window", "accept"): 2,
        ("window", "window"): 3,
        ("window", "reject"): 4,
        ("reject", "reject"): 5,
    }
    return table.get((rw, rn), 0)
