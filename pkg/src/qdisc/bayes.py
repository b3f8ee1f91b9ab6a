"""Minimum-error (Bayes) discrimination between an unperturbed and a perturbed state.

``helstrom_pe`` is the reference computation: it diagonalizes the
characteristic operator directly. Every closed form in this module is
expected to agree with it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Union

import numpy as np

from qdisc.core import (
    DEFAULT_TOL,
    BinaryPVM,
    ContractViolation,
    DomainError,
    InvalidStateError,
    as_operator,
    bell_weights,
    bloch_vector,
    check_same_dim,
    eig_hermitian,
    pure_state,
)


@dataclass(frozen=True)
class Priors:
    """Prior probabilities of the unperturbed (z0) and perturbed (z1) hypotheses."""

    z0: float = 0.5
    z1: float = 0.5

    def __post_init__(self):
        for z in (self.z0, self.z1):
            if not (0.0 <= z <= 1.0) or not math.isfinite(z):
                raise InvalidStateError(f"prior {z!r} outside [0, 1]")
        if abs(self.z0 + self.z1 - 1) > 1e-12:
            raise InvalidStateError(f"priors sum to {self.z0 + self.z1!r}, not 1")

    @classmethod
    def from_z0(cls, z0: float) -> "Priors":
        return cls(z0, 1.0 - z0)

    def swapped(self) -> "Priors":
        return Priors(self.z1, self.z0)

    @property
    def product(self) -> float:
        return self.z0 * self.z1

    @property
    def is_equal(self) -> bool:
        return abs(self.z0 - self.z1) <= 1e-12


PriorsLike = Union[Priors, Sequence[float], None]


def as_priors(z: PriorsLike) -> Priors:
    if z is None:
        return Priors()
    if isinstance(z, Priors):
        return z
    z0, z1 = z
    return Priors(float(z0), float(z1))


class Regime(str, Enum):
    MEASURE = "measure"
    ALWAYS_GUESS_H0 = "always_guess_H0"
    ALWAYS_GUESS_H1 = "always_guess_H1"


@dataclass(frozen=True)
class BayesResult:
    pe: float
    pvm: BinaryPVM
    regime: Regime


def characteristic_operator(rho0, rho1, priors: PriorsLike = None) -> np.ndarray:
    """z1 rho1 - z0 rho0."""
    z = as_priors(priors)
    rho0 = as_operator(rho0, "rho0")
    rho1 = as_operator(rho1, "rho1")
    check_same_dim(rho0, rho1)
    return z.z1 * rho1 - z.z0 * rho0


def helstrom_pe(rho0, rho1, priors: PriorsLike = None, tol: float = DEFAULT_TOL) -> BayesResult:
    """Minimum error probability and the measurement attaining it.

    The error probability is (1 - ||z1 rho1 - z0 rho0||_1) / 2 and the
    optimal PVM projects onto the strictly positive eigenspace of the
    characteristic operator.
    """
    lam_op = characteristic_operator(rho0, rho1, priors)
    ed = eig_hermitian(lam_op)
    w = ed.eigenvalues
    dim = w.shape[0]
    pi1 = np.zeros((dim, dim), dtype=complex)
    for k in range(dim):
        if w[k] > tol:
            pi1 += ed.projector(k)
    pe = 0.5 * (1.0 - float(np.abs(w).sum()))
    if not (w > tol).any():
        regime = Regime.ALWAYS_GUESS_H0
    elif not (w < -tol).any():
        regime = Regime.ALWAYS_GUESS_H1
    else:
        regime = Regime.MEASURE
    return BayesResult(max(pe, 0.0), BinaryPVM.from_pi1(pi1), regime)


def error_probability(rho0, rho1, pvm: BinaryPVM, priors: PriorsLike = None) -> float:
    """z1 - Tr[Lambda pi1] for an arbitrary binary measurement."""
    z = as_priors(priors)
    lam_op = characteristic_operator(rho0, rho1, z)
    return z.z1 - float(np.trace(lam_op @ pvm.pi1).real)


def pe_pure_overlap(kappa2: float, priors: PriorsLike = None) -> float:
    """Helstrom bound for two pure states with squared overlap ``kappa2``."""
    if not (0.0 <= kappa2 <= 1.0):
        raise DomainError(f"squared overlap {kappa2!r} outside [0, 1]")
    z = as_priors(priors)
    return 0.5 * (1.0 - math.sqrt((z.z1 - z.z0) ** 2 + 4.0 * z.product * (1.0 - kappa2)))


def pe_single_qubit(
    r: Sequence[float], lam: float, priors: PriorsLike = None, axis: int = 1, formula: str = "exact"
) -> float:
    """Closed-form error probability for a qubit with Bloch vector ``r``.

    ``axis`` selects the generator; the component of ``r`` along it plays
    the role of r1. The radical sqrt(r^2 - 4 z0 z1 [r^2 - (r^2 - r1^2) sin^2 lam])
    is the length of z1 r' - z0 r. With unequal priors the trace norm is
    the larger of that length and |z1 - z0|, so ``formula="exact"`` takes
    the maximum; ``formula="as_printed"`` keeps the bare radical, which is
    only right when it dominates (e.g. equal priors).
    """
    if axis not in (1, 2, 3):
        raise DomainError(f"generator axis must be 1, 2 or 3, got {axis!r}")
    if formula not in ("exact", "as_printed"):
        raise DomainError(f"unknown formula variant {formula!r}")
    v = bloch_vector(r)
    z = as_priors(priors)
    r2 = float(v @ v)
    rk2 = float(v[axis - 1]) ** 2
    # r^2 (1 - 4 z0 z1) written as r^2 (z1 - z0)^2 to avoid cancellation near equal priors
    rad = r2 * (z.z1 - z.z0) ** 2 + 4.0 * z.product * (r2 - rk2) * math.sin(lam) ** 2
    if rad < -1e-12:
        raise ContractViolation(f"negative radicand {rad!r}")
    norm = math.sqrt(max(rad, 0.0))
    if formula == "exact":
        norm = max(norm, abs(z.z1 - z.z0))
    return 0.5 * (1.0 - norm)


def pe_single_qubit_purity(mu: float, r1: float, lam: float) -> float:
    """Equal-prior error probability written with the purity mu = Tr[rho^2]."""
    if not (0.5 <= mu <= 1.0):
        raise DomainError(f"qubit purity {mu!r} outside [1/2, 1]")
    if r1 * r1 > 2 * mu - 1 + 1e-12:
        raise DomainError(f"r1^2 = {r1 * r1!r} exceeds 2 mu - 1 = {2 * mu - 1!r}")
    rad = max(0.0, (2 * mu - 1 - r1 * r1)) * math.sin(lam) ** 2
    return 0.5 * (1.0 - math.sqrt(rad))


def pe_two_qubit_singlet(lam: float, priors: PriorsLike = None) -> float:
    z = as_priors(priors)
    return 0.5 * (1.0 - math.sqrt((z.z1 - z.z0) ** 2 + 4.0 * z.product * math.sin(lam) ** 2))


def two_qubit_state(amplitudes: Sequence[complex]) -> np.ndarray:
    """Pure two-qubit state a0|00> + a1|01> + a2|10> + a3|11>, renormalized."""
    if len(amplitudes) != 4:
        raise InvalidStateError("a two-qubit state needs four amplitudes")
    return pure_state(amplitudes)


def check_optimal_class(amplitudes: Sequence[complex], axis: int = 1, atol: float = DEFAULT_TOL) -> bool:
    """True if the state attains the singlet error probability for generator ``axis``.

    For axes 1 and 2 the condition is a0 a2* + a1 a3* = 0, i.e. the
    perturbed qubit's reduced state has no coherence in the sigma_3 basis.
    Axis 3 instead needs balanced populations |a0|^2 + |a1|^2 = |a2|^2 + |a3|^2.
    Amplitudes are normalized first.
    """
    if axis not in (1, 2, 3):
        raise DomainError(f"generator axis must be 1, 2 or 3, got {axis!r}")
    a = np.asarray(amplitudes, dtype=complex)
    if a.shape != (4,):
        raise InvalidStateError("a two-qubit state needs four amplitudes")
    n = float(np.linalg.norm(a))
    if not math.isfinite(n) or n == 0.0:
        raise InvalidStateError("amplitudes cannot be normalized")
    a = a / n
    if axis == 3:
        return abs(abs(a[0]) ** 2 + abs(a[1]) ** 2 - abs(a[2]) ** 2 - abs(a[3]) ** 2) <= atol
    return abs(a[0] * a[2].conjugate() + a[1] * a[3].conjugate()) <= atol


def pe_bell_diagonal(p: Sequence[float], lam: float, formula: str = "corrected") -> float:
    """Equal-prior error probability for a Bell-diagonal preparation.

    ``formula="corrected"`` uses |p0 - p1| + |p2 - p3|, which follows from
    the two invariant 2x2 blocks of the characteristic operator.
    ``formula="as_printed"`` uses |p0 - p1| + |p1 - p3| as it appears in the
    literature; it disagrees with the exact value in general.
    """
    p0, p1, p2, p3 = bell_weights(p)
    if formula == "corrected":
        contrast = abs(p0 - p1) + abs(p2 - p3)
    elif formula == "as_printed":
        contrast = abs(p0 - p1) + abs(p1 - p3)
    else:
        raise DomainError(f"unknown formula variant {formula!r}")
    return 0.5 * (1.0 - contrast * abs(math.sin(lam)))
