"""Closed form versus brute-force oracle report.

Each check evaluates one closed form on a parameter grid, compares it with
the diagonalization-based reference and records the largest deviation.
Closed forms are looked up on their modules at call time, so replacing one
(for instance in a mutation test) changes the report.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

from qdisc import bayes, min_detect, neyman_pearson, noise
from qdisc.core import (
    BELL_VECTORS,
    DEFAULT_TOL,
    bell_diagonal,
    bell_state,
    bloch_to_density,
    overlap,
    perturb,
    pure_state,
)

PASS = "PASS"
FAIL = "FAIL"
EXPECTED = "EXPECTED-DEVIATION"

COLUMNS = ["name", "max_delta", "tolerance", "status", "worst_params"]


@dataclass(frozen=True)
class Check:
    name: str
    tolerance: float
    run: Callable[[int, float], Iterable[tuple[float, str]]]
    expected_deviation: bool = False
    note: str = ""


@dataclass(frozen=True)
class CheckResult:
    name: str
    max_delta: float
    tolerance: float
    status: str
    worst_params: str

    def as_row(self) -> dict:
        return {
            "name": self.name,
            "max_delta": self.max_delta,
            "tolerance": self.tolerance,
            "status": self.status,
            "worst_params": self.worst_params,
        }


def _fmt(**kw) -> str:
    parts = []
    for k, v in kw.items():
        if isinstance(v, float):
            v = f"{v:.6g}"
        elif isinstance(v, (tuple, list, np.ndarray)):
            v = "(" + ";".join(f"{float(x):.6g}" for x in v) + ")"
        parts.append(f"{k}={v}")
    return " ".join(parts)


def _random_bloch(rng: np.random.Generator, pure: bool = False) -> np.ndarray:
    v = rng.normal(size=3)
    v /= np.linalg.norm(v)
    return v if pure else v * rng.uniform(0.05, 0.999) ** (1 / 3)


def _lambdas(n: int) -> np.ndarray:
    return np.linspace(-math.pi, math.pi, max(n, 3))


def _bell_weight_grid(n: int, rng: np.random.Generator) -> list[tuple[float, ...]]:
    ws = [(0.1, 0.2, 0.1, 0.6), (0.25, 0.25, 0.25, 0.25), (1.0, 0.0, 0.0, 0.0), (0.0, 0.3, 0.7, 0.0)]
    ws += [tuple(w) for w in rng.dirichlet(np.ones(4), size=n)]
    return ws


# --- Bayes -------------------------------------------------------------------


def _single_qubit(n: int, tol: float):
    rng = np.random.default_rng(1)
    for _ in range(n * n):
        r = _random_bloch(rng)
        lam = rng.uniform(-math.pi, math.pi)
        z0 = rng.uniform(0, 1)
        axis = int(rng.integers(1, 4))
        rho = bloch_to_density(r)
        ref = bayes.helstrom_pe(rho, perturb(rho, lam, axis), (z0, 1 - z0), tol).pe
        yield abs(bayes.pe_single_qubit(r, lam, (z0, 1 - z0), axis) - ref), _fmt(r=r, lam=lam, z0=z0, axis=axis)


def _single_qubit_purity(n: int, tol: float):
    rng = np.random.default_rng(2)
    for _ in range(n * n):
        r = _random_bloch(rng)
        lam = rng.uniform(-math.pi, math.pi)
        rho = bloch_to_density(r)
        mu = 0.5 * (1 + float(r @ r))
        ref = bayes.helstrom_pe(rho, perturb(rho, lam), None, tol).pe
        yield abs(bayes.pe_single_qubit_purity(mu, float(r[0]), lam) - ref), _fmt(r=r, lam=lam)


def _pure_overlap(n: int, tol: float):
    rng = np.random.default_rng(3)
    for k in range(n * n):
        dim = 2 if k % 2 else 4
        ket = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        lam = rng.uniform(-math.pi, math.pi)
        z0 = rng.uniform(0, 1)
        rho = pure_state(ket)
        rho1 = perturb(rho, lam)
        ref = bayes.helstrom_pe(rho, rho1, (z0, 1 - z0), tol).pe
        kappa2 = min(1.0, max(0.0, overlap(rho, rho1)))
        yield abs(bayes.pe_pure_overlap(kappa2, (z0, 1 - z0)) - ref), _fmt(dim=dim, lam=lam, z0=z0)


def _singlet(n: int, tol: float):
    rho = bell_state("psi-")
    for lam in _lambdas(n):
        for z0 in np.linspace(0.05, 0.95, n):
            ref = bayes.helstrom_pe(rho, perturb(rho, lam), (z0, 1 - z0), tol).pe
            yield abs(bayes.pe_two_qubit_singlet(lam, (z0, 1 - z0)) - ref), _fmt(lam=lam, z0=z0)


def _bell_diagonal(formula: str):
    def run(n: int, tol: float):
        rng = np.random.default_rng(4)
        for w in _bell_weight_grid(n, rng):
            rho = bell_diagonal(w)
            for lam in _lambdas(n):
                ref = bayes.helstrom_pe(rho, perturb(rho, lam), None, tol).pe
                yield abs(bayes.pe_bell_diagonal(w, lam, formula) - ref), _fmt(p=w, lam=lam)

    return run


# --- noise -------------------------------------------------------------------


def _noisy(label: str):
    def run(n: int, tol: float):
        probs = np.linspace(0.0, 1.0, max(n, 2))
        pairs = [(p,) for p in probs] if label == "depolarizing" else [(p, q) for p in probs for q in probs[::2]]
        for params in pairs:
            for lam in _lambdas(n):
                ref = noise.pipeline_pe(label, params, lam)
                yield abs(noise.pe_noisy(label, params, lam) - ref), _fmt(params=params, lam=lam)

    return run


def _phase_flip_weights(n: int, tol: float):
    phi_p, phi_m = BELL_VECTORS["phi+"], BELL_VECTORS["phi-"]
    for p in np.linspace(0, 1, n):
        for q in np.linspace(0, 1, n):
            rho = noise.apply_channel(bell_state("phi+"), noise.phase_flip_channel(p, q))
            w0, w3 = noise.phase_flip_weights(p, q)
            d = max(abs(w0 - np.vdot(phi_p, rho @ phi_p).real), abs(w3 - np.vdot(phi_m, rho @ phi_m).real))
            yield d, _fmt(p=p, q=q)


# --- Neyman-Pearson ------------------------------------------------------------


def _gamma_points(n: int) -> np.ndarray:
    return neyman_pearson.default_gamma_grid(max(8 * n, 16))


def _p11_pure(n: int, tol: float):
    rho0 = bloch_to_density((0.0, 0.0, 1.0))
    for kappa2 in np.linspace(0.05, 0.95, n):
        lam = math.asin(math.sqrt(1 - kappa2))
        curve = neyman_pearson.roc_sweep(rho0, perturb(rho0, lam), tol=tol)
        for pt in curve.points:
            yield abs(neyman_pearson.p11_pure(kappa2, pt.p10) - pt.p11), _fmt(kappa2=kappa2, p10=pt.p10)


def _np_mixed_parametric(n: int, tol: float):
    rng = np.random.default_rng(5)
    for _ in range(n):
        r = _random_bloch(rng)
        lam = rng.uniform(-math.pi, math.pi)
        rho0 = bloch_to_density(r)
        rho1 = perturb(rho0, lam)
        for g in _gamma_points(n):
            ref = neyman_pearson.roc_point(rho0, rho1, float(g), tol)
            pt = neyman_pearson.np_mixed_parametric(r, lam, float(g))
            yield max(abs(pt.p10 - ref.p10), abs(pt.p11 - ref.p11)), _fmt(r=r, lam=lam, gamma=float(g))


def _characteristic_mixed(n: int, tol: float):
    for r2 in np.linspace(0.2, 0.95, max(2, n // 3)):
        for r1 in (0.0, 0.3):
            for lam in (0.3, math.asin(math.sqrt(0.2)), 1.2):
                rho0 = bloch_to_density((r1, 0.0, math.sqrt(r2 - r1 * r1)))
                rho1 = perturb(rho0, lam)
                for x in np.linspace(0, 1, n):
                    ref = neyman_pearson.np_optimal_p11(rho0, rho1, float(x), tol)
                    cf = neyman_pearson.characteristic_mixed(r2, r1 * r1, lam, float(x))
                    yield abs(cf - ref), _fmt(r2=r2, r1=r1, lam=lam, p10=float(x))


def _characteristic_bell(n: int, tol: float):
    rng = np.random.default_rng(6)
    for w in _bell_weight_grid(max(1, n // 5), rng):
        for lam in (0.3, math.pi / 4, 1.2):
            rho0 = bell_diagonal(w)
            rho1 = perturb(rho0, lam)
            crit = [g for pa, pb in ((w[0], w[1]), (w[2], w[3])) for g in neyman_pearson.xi_and_critical_gammas(pa, pb, lam)[1:3]]
            for g in neyman_pearson.default_gamma_grid(max(8 * n, 16), critical=crit):
                ref = neyman_pearson.roc_point(rho0, rho1, float(g), tol)
                pt = neyman_pearson.characteristic_bell_diagonal(w, lam, float(g))
                yield max(abs(pt.p10 - ref.p10), abs(pt.p11 - ref.p11)), _fmt(p=w, lam=lam, gamma=float(g))


def _gamma_blocks(n: int, tol: float):
    rng = np.random.default_rng(7)
    for w in _bell_weight_grid(n, rng):
        rho0 = bell_diagonal(w)
        for lam in _lambdas(n):
            rho1 = perturb(rho0, lam)
            for g in (0.0, 0.5, 1.0, 3.0):
                full = neyman_pearson.lagrange_operator(rho0, rho1, g)
                blocks = neyman_pearson.gamma_blocks(w, lam, g).direct_sum()
                yield float(np.abs(blocks - full).max()), _fmt(p=w, lam=lam, gamma=g)


# --- minimum detectable perturbation ---------------------------------------


def _lambda_delta(closed: min_detect.LambdaMinResult, oracle: min_detect.LambdaMinResult) -> float:
    if closed.detectable != oracle.detectable:
        return math.inf
    if not closed.detectable:
        return 0.0
    return abs(float(closed.lambda_min) - float(oracle.lambda_min))


def _p10_grid(n: int, hi: float = 0.5) -> np.ndarray:
    return np.linspace(0.0, hi, max(n, 2))


def _lm_pure_absolute(n: int, tol: float):
    crit = min_detect.DetectionCriterion.absolute()
    for r1 in (0.0, 0.5, 0.8):
        for x in _p10_grid(n):
            cf = min_detect.lambda_min_pure_absolute(r1, float(x))
            ref = min_detect.lambda_min_numeric(min_detect.Scenario.pure_qubit(r1), crit, float(x), tol)
            yield _lambda_delta(cf, ref), _fmt(r1=r1, p10=float(x))


def _lm_pure_relative(n: int, tol: float):
    for delta in (2.0, 4.0):
        crit = min_detect.DetectionCriterion.relative(delta)
        for r1 in (0.0, 0.5):
            for x in _p10_grid(n, 1.0 / delta):
                cf = min_detect.lambda_min_pure_relative(r1, float(x), delta)
                ref = min_detect.lambda_min_numeric(min_detect.Scenario.pure_qubit(r1), crit, float(x), tol)
                yield _lambda_delta(cf, ref), _fmt(r1=r1, p10=float(x), delta=delta)


@functools.lru_cache(maxsize=512)
def _mixed_oracle(r2: float, r1: float, p10: float, tol: float) -> min_detect.LambdaMinResult:
    # shared by both formula variants of the mixed check
    crit = min_detect.DetectionCriterion.absolute()
    return min_detect.lambda_min_numeric(min_detect.Scenario.mixed_qubit(r2, r1), crit, p10, tol)


def _lm_mixed(formula: str):
    def run(n: int, tol: float):
        for r2, r1 in ((0.8, 0.0), (0.9, 0.5), (0.6, 0.3)):
            for x in _p10_grid(n):
                cf = min_detect.lambda_min_mixed(r2, r1, float(x), formula)
                ref = _mixed_oracle(r2, r1, float(x), tol)
                yield _lambda_delta(cf, ref), _fmt(r2=r2, r1=r1, p10=float(x))

    return run


def _lm_two_qubit(n: int, tol: float):
    crit = min_detect.DetectionCriterion.absolute()
    scn = min_detect.Scenario.bell("psi-")
    for x in _p10_grid(n):
        cf = min_detect.lambda_min_two_qubit(float(x))
        ref = min_detect.lambda_min_numeric(scn, crit, float(x), tol)
        yield _lambda_delta(cf, ref), _fmt(p10=float(x))


def _unevaluable(n: int, tol: float):
    return iter(())


CHECKS: tuple[Check, ...] = (
    Check("pe_single_qubit", 1e-9, _single_qubit),
    Check("pe_single_qubit_purity", 1e-9, _single_qubit_purity),
    Check("pe_pure_overlap", 1e-9, _pure_overlap),
    Check("pe_two_qubit_singlet", 1e-10, _singlet),
    Check("pe_bell_diagonal[corrected]", 1e-10, _bell_diagonal("corrected")),
    Check("pe_bell_diagonal[as_printed]", 1e-10, _bell_diagonal("as_printed"), True),
    Check("pe_noisy[bit_flip]", 1e-10, _noisy("bit_flip")),
    Check("pe_noisy[phase_flip]", 1e-10, _noisy("phase_flip")),
    Check("pe_noisy[bit_phase_flip]", 1e-10, _noisy("bit_phase_flip")),
    Check("pe_noisy[depolarizing]", 1e-10, _noisy("depolarizing")),
    Check("phase_flip_weights[completeness]", 1e-12, _phase_flip_weights),
    Check(
        "phase_flip_weights[as_printed]",
        1e-12,
        _unevaluable,
        True,
        "printed weight uses an undefined symbol a; not evaluable",
    ),
    Check("p11_pure", 1e-6, _p11_pure),
    Check("np_mixed_parametric", 1e-9, _np_mixed_parametric),
    Check("characteristic_mixed", 1e-6, _characteristic_mixed),
    Check("characteristic_bell_diagonal", 1e-9, _characteristic_bell),
    Check("gamma_blocks", 1e-10, _gamma_blocks),
    Check("lambda_min_pure_absolute", 1e-6, _lm_pure_absolute),
    Check("lambda_min_pure_relative", 1e-6, _lm_pure_relative),
    Check("lambda_min_mixed[corrected]", 1e-6, _lm_mixed("corrected")),
    Check("lambda_min_mixed[as_printed]", 1e-6, _lm_mixed("as_printed"), True),
    Check("lambda_min_two_qubit", 1e-6, _lm_two_qubit),
)


def run_check(check: Check, grid: int, tol: float = DEFAULT_TOL) -> CheckResult:
    worst, where = 0.0, ""
    seen = False
    try:
        for delta, params in check.run(grid, tol):
            seen = True
            if not delta <= worst:  # also catches NaN
                worst, where = delta, params
                if math.isnan(delta):
                    break
    except Exception as exc:  # a crashing closed form is a failed check
        return CheckResult(check.name, math.nan, check.tolerance, FAIL, f"error: {exc}")
    if not seen:
        status = EXPECTED if check.expected_deviation else FAIL
        return CheckResult(check.name, math.nan, check.tolerance, status, check.note)
    if worst <= check.tolerance:
        status = PASS
    else:
        status = EXPECTED if check.expected_deviation else FAIL
    return CheckResult(check.name, worst, check.tolerance, status, where)


def run_all(grid: int = 25, tol: float = DEFAULT_TOL, only: Optional[Iterable[str]] = None) -> list[CheckResult]:
    if grid < 2:
        raise ValueError("grid density must be at least 2")
    names = None if only is None else set(only)
    if names is not None and (unknown := names - {c.name for c in CHECKS}):
        raise ValueError(f"unknown check(s): {', '.join(sorted(unknown))}")
    return [run_check(c, grid, tol) for c in CHECKS if names is None or c.name in names]
