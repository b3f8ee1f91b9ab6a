"""Minimum detectable perturbation.

lambda_min is the smallest rotation amplitude for which an optimal
Neyman-Pearson test at a fixed false-alarm level meets a detection
criterion: absolute (p11 >= 1/2) or relative (p11 >= delta p10).
Closed forms cover pure, mixed and two-qubit preparations; the numeric
solver root-finds on lambda using the brute-force NP engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.optimize import brentq

from qdisc.core import (
    DEFAULT_TOL,
    DomainError,
    as_operator,
    bell_state,
    bloch_to_density,
    perturb,
    pure_state,
)
from qdisc.neyman_pearson import np_full_detection_p10, np_optimal_p11

HALF_PI = 0.5 * math.pi


class _NotDetectableType:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "NotDetectable"

    def __bool__(self) -> bool:
        return False


NotDetectable = _NotDetectableType()


class CriterionKind(str, Enum):
    ABSOLUTE = "absolute"
    RELATIVE = "relative"


@dataclass(frozen=True)
class DetectionCriterion:
    kind: CriterionKind = CriterionKind.ABSOLUTE
    delta: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", CriterionKind(self.kind))
        if self.kind is CriterionKind.RELATIVE:
            if self.delta is None or not self.delta > 1 or not math.isfinite(self.delta):
                raise DomainError(f"relative criterion needs delta > 1, got {self.delta!r}")

    @classmethod
    def absolute(cls) -> "DetectionCriterion":
        return cls(CriterionKind.ABSOLUTE)

    @classmethod
    def relative(cls, delta: float) -> "DetectionCriterion":
        return cls(CriterionKind.RELATIVE, float(delta))

    def threshold(self, p10: float) -> float:
        """Detection probability the criterion requires at false alarm ``p10``."""
        return 0.5 if self.kind is CriterionKind.ABSOLUTE else self.delta * p10


@dataclass(frozen=True)
class LambdaMinResult:
    lambda_min: Union[float, _NotDetectableType]
    constraint_ok: bool = True
    closed_form_applicable: bool = True
    method: str = "closed_form"
    resolution: float = 0.0

    @property
    def detectable(self) -> bool:
        return self.lambda_min is not NotDetectable

    def as_float(self) -> float:
        """lambda_min, with NaN standing in for NotDetectable."""
        return float(self.lambda_min) if self.detectable else math.nan


@dataclass(frozen=True)
class Scenario:
    """A preparation rho0 and the generator axis of the perturbation."""

    rho0: np.ndarray = field(repr=False)
    axis: int = 1
    label: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "rho0", as_operator(self.rho0, "rho0"))
        if self.axis not in (1, 2, 3):
            raise DomainError(f"generator axis must be 1, 2 or 3, got {self.axis!r}")

    def pair(self, lam: float) -> tuple[np.ndarray, np.ndarray]:
        return self.rho0, perturb(self.rho0, lam, self.axis)

    @classmethod
    def qubit(cls, r: Sequence[float], axis: int = 1) -> "Scenario":
        return cls(bloch_to_density(r), axis, "qubit")

    @classmethod
    def pure_qubit(cls, r1: float) -> "Scenario":
        if r1 * r1 > 1:
            raise DomainError(f"|r1| = {abs(r1)!r} exceeds 1")
        return cls(bloch_to_density((r1, 0.0, math.sqrt(max(0.0, 1 - r1 * r1)))), 1, "pure_qubit")

    @classmethod
    def mixed_qubit(cls, r2: float, r1: float) -> "Scenario":
        _check_mixed_args(r2, r1)
        return cls(bloch_to_density((r1, 0.0, math.sqrt(max(0.0, r2 - r1 * r1)))), 1, "mixed_qubit")

    @classmethod
    def two_qubit(cls, amplitudes: Sequence[complex]) -> "Scenario":
        return cls(pure_state(amplitudes), 1, "two_qubit")

    @classmethod
    def bell(cls, label: str = "psi-") -> "Scenario":
        return cls(bell_state(label), 1, f"bell:{label}")


def _check_p10(p10: float) -> float:
    p10 = float(p10)
    if not (0.0 <= p10 <= 1.0):
        raise DomainError(f"false-alarm probability {p10!r} outside [0, 1]")
    return p10


def _check_mixed_args(r2: float, r1: float) -> None:
    if not (0.0 < r2 <= 1.0):
        raise DomainError(f"r^2 = {r2!r} must lie in (0, 1]")
    if r1 * r1 > r2 + 1e-12:
        raise DomainError(f"r1^2 = {r1 * r1!r} exceeds r^2 = {r2!r}")


def _from_alpha(alpha: float, transverse: float, atol: float = 1e-12) -> LambdaMinResult:
    """Turn a required 1 - |kappa|^2 into lambda_min given the transverse weight.

    ``transverse`` is the fraction of the Bloch vector (or of the state)
    orthogonal to the generator; the overlap drop is transverse * sin^2(lam).
    """
    if alpha <= 0:
        return LambdaMinResult(0.0)
    if transverse <= 0 or alpha > transverse + atol:
        return LambdaMinResult(NotDetectable, constraint_ok=False)
    s2 = min(1.0, alpha / transverse)
    return LambdaMinResult(math.asin(math.sqrt(s2)))


def absolute_alpha(p10: float) -> float:
    """Smallest 1 - |kappa|^2 giving p11 >= 1/2 for pure states at false alarm p10."""
    return max(0.0, 0.5 - math.sqrt(p10 * (1 - p10))) if p10 <= 0.5 else 0.0


def lambda_min_pure_absolute(r1: float, p10: float) -> LambdaMinResult:
    """Pure qubit, absolute criterion.

    sin^2 lambda_min = [1/2 - sqrt(p10 (1 - p10))] / (1 - r1^2), and 0 for
    p10 >= 1/2. Preparations with r1^2 > 1/2 + sqrt(p10(1 - p10)) cannot
    reach the criterion.
    """
    p10 = _check_p10(p10)
    if r1 * r1 > 1 + 1e-12:
        raise DomainError(f"|r1| = {abs(r1)!r} exceeds 1")
    return _from_alpha(absolute_alpha(p10), 1.0 - r1 * r1)


def relative_alpha(p10: float, delta: float) -> Optional[float]:
    """Smallest 1 - |kappa|^2 giving p11 >= delta p10, or None off the real domain."""
    if delta * p10 > 1 + 1e-12:
        return None
    return p10 * (math.sqrt(max(0.0, 1 - delta * p10)) - math.sqrt(delta * (1 - p10))) ** 2


def lambda_min_pure_relative(r1: float, p10: float, delta: float) -> LambdaMinResult:
    """Pure qubit, relative criterion p11 / p10 >= delta.

    Where delta p10 > 1 the closed form has no real value; the numeric
    solver is used instead and ``closed_form_applicable`` is False.
    """
    crit = DetectionCriterion.relative(delta)
    p10 = _check_p10(p10)
    if r1 * r1 > 1 + 1e-12:
        raise DomainError(f"|r1| = {abs(r1)!r} exceeds 1")
    alpha = relative_alpha(p10, crit.delta)
    if alpha is None:
        # unreachability here comes from delta p10 > 1, not from the preparation
        res = lambda_min_numeric(Scenario.pure_qubit(r1), crit, p10)
        return LambdaMinResult(res.lambda_min, True, False, "oracle_fallback", res.resolution)
    return _from_alpha(alpha, 1.0 - r1 * r1)


def mixed_alpha(r2: float, p10: float, formula: str = "corrected") -> Optional[float]:
    """Smallest 1 - |kappa|^2 giving p11 >= 1/2 for a mixed qubit, or None if unreachable.

    ``"corrected"`` is 1/2 - (1/2) sqrt((r^2 - 1 + 4 p10 (1 - p10)) / r^2),
    which reduces to the pure-state value at r^2 = 1. ``"as_printed"``
    drops the inner factor 1/2 and does not.
    """
    rad = (r2 - 1 + 4 * p10 * (1 - p10)) / r2
    if rad < 0:
        return None
    if formula == "corrected":
        return 0.5 - 0.5 * math.sqrt(rad)
    if formula == "as_printed":
        return 0.5 - math.sqrt(rad)
    raise DomainError(f"unknown formula variant {formula!r}")


def lambda_min_mixed(r2: float, r1: float, p10: float, formula: str = "corrected") -> LambdaMinResult:
    """Mixed qubit with |r|^2 = r2 and generator component r1, absolute criterion."""
    _check_mixed_args(r2, r1)
    p10 = _check_p10(p10)
    alpha = mixed_alpha(r2, p10, formula)
    if alpha is None:
        return LambdaMinResult(NotDetectable)
    return _from_alpha(alpha, 1.0 - min(1.0, r1 * r1 / r2))


def lambda_min_two_qubit(p10: float) -> LambdaMinResult:
    """Two-qubit pure states in the optimal class; independent of the preparation."""
    p10 = _check_p10(p10)
    return LambdaMinResult(math.asin(math.sqrt(absolute_alpha(p10))))


# --- numeric solver -----------------------------------------------------------


def criterion_gap(
    scenario: Scenario, criterion: DetectionCriterion, p10: float, lam: float, tol: float = DEFAULT_TOL
) -> float:
    """Optimal p11 at false alarm ``p10`` minus the criterion's threshold."""
    rho0, rho1 = scenario.pair(lam)
    need = criterion.threshold(p10)
    if abs(need - 1.0) <= 1e-12:
        # p11 = 1 is reached only by the full-detection test; its false-alarm
        # margin is a far better conditioned gap than 1 - p11
        return p10 - np_full_detection_p10(rho0, rho1, tol)
    return np_optimal_p11(rho0, rho1, p10, tol) - need


def _first_crossing(gap: Callable[[float], float], grid: np.ndarray, eps: float) -> tuple[Optional[float], str, float]:
    ok = [gap(x) >= -eps for x in grid]
    if not any(ok):
        return None, "numeric", float(grid[1] - grid[0])
    first = ok.index(True)
    if not all(ok[first:]):
        # non-monotone predicate: fall back to a fine scan
        fine = np.linspace(0.0, HALF_PI, 2049)
        hits = [x for x in fine if gap(x) >= -eps]
        return (float(hits[0]) if hits else None), "grid_scan", float(fine[1] - fine[0])
    if first == 0:
        return 0.0, "numeric", 0.0
    a, b = float(grid[first - 1]), float(grid[first])
    root = brentq(lambda x: gap(x) + eps, a, b, xtol=1e-13, rtol=4 * np.finfo(float).eps, maxiter=200)
    return float(root), "numeric", 1e-13


def lambda_min_numeric(
    scenario: Scenario,
    criterion: DetectionCriterion,
    p10: float,
    tol: float = DEFAULT_TOL,
    coarse: int = 9,
    eps: float = 1e-14,
) -> LambdaMinResult:
    """lambda_min by root finding on the optimal detection probability.

    The predicate is first evaluated on a coarse grid over [0, pi/2]; if it
    switches on exactly once the crossing is refined with a bracketing
    root finder, otherwise a fine grid scan is used and its step reported
    as the resolution.
    """
    p10 = _check_p10(p10)
    if coarse < 3:
        raise DomainError("coarse grid needs at least three points")
    grid = np.linspace(0.0, HALF_PI, coarse)
    lam, method, res = _first_crossing(lambda x: criterion_gap(scenario, criterion, p10, x, tol), grid, eps)
    if lam is None:
        return LambdaMinResult(NotDetectable, closed_form_applicable=False, method=method, resolution=res)
    return LambdaMinResult(lam, closed_form_applicable=False, method=method, resolution=res)
