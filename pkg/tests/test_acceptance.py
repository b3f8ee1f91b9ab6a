"""Acceptance gate. Each test carries an ``acceptance`` marker; the terminal
summary prints one PASS/FAIL line per criterion."""

import itertools
import math
import time

import numpy as np
import pytest
from scipy.optimize import brentq

from conftest import random_density, random_hermitian
from qdisc import bayes, min_detect as md, neyman_pearson as nps, noise, verify
from qdisc.core import (
    bell_diagonal,
    bell_state,
    bloch_to_density,
    eig_hermitian,
    perturb,
    positive_part_projector,
)

ac = pytest.mark.acceptance
FIG7 = (0.1, 0.2, 0.1, 0.6)


# --- AC1 ------------------------------------------------------------------------


@ac("AC1", "Helstrom consistency, 1e4 random qubit scenarios")
def test_ac1_single_qubit_closed_form(rng):
    n = 10_000
    r = rng.normal(size=(n, 3))
    r *= (rng.uniform(size=n) ** (1 / 3) / np.linalg.norm(r, axis=1))[:, None]
    lams = rng.uniform(-math.pi, math.pi, n)
    z0 = rng.uniform(0, 1, n)
    axes = rng.integers(1, 4, n)
    t0 = time.perf_counter()
    worst = 0.0
    for v, lam, z, k in zip(r, lams, z0, axes):
        rho0 = bloch_to_density(v)
        oracle = bayes.helstrom_pe(rho0, perturb(rho0, lam, int(k)), (z, 1 - z)).pe
        worst = max(worst, abs(bayes.pe_single_qubit(v, lam, (z, 1 - z), int(k)) - oracle))
    elapsed = time.perf_counter() - t0
    assert worst <= 1e-9
    assert elapsed < 2.0, f"{elapsed:.2f} s"


# --- AC2 ------------------------------------------------------------------------


@ac("AC2", "optimal-preparation bound and singlet")
def test_ac2_optimal_bound():
    singlet = bell_state("psi-")
    pure = bloch_to_density((0.0, 0.0, 1.0))
    for lam in np.linspace(-math.pi, math.pi, 100):
        want = 0.5 * (1 - abs(math.sin(lam)))
        assert abs(bayes.pe_single_qubit((0, 0, 1), lam) - want) <= 1e-12
        assert abs(bayes.helstrom_pe(pure, perturb(pure, lam)).pe - want) <= 1e-12
        assert abs(bayes.pe_two_qubit_singlet(lam, (0.5, 0.5)) - want) <= 1e-12
        assert abs(bayes.helstrom_pe(singlet, perturb(singlet, lam)).pe - want) <= 1e-12


# --- AC3 ------------------------------------------------------------------------


@ac("AC3", "Bell-diagonal corrected vs printed variant")
def test_ac3_bell_diagonal(rng):
    weights = rng.dirichlet(np.ones(4), 999).tolist() + [list(FIG7)]
    lams = rng.uniform(0, math.pi, 1000)
    lams[-1] = math.pi / 4
    worst_corr = worst_print = 0.0
    for w, lam in zip(weights, lams):
        rho0 = bell_diagonal(w)
        oracle = bayes.helstrom_pe(rho0, perturb(rho0, lam)).pe
        worst_corr = max(worst_corr, abs(bayes.pe_bell_diagonal(w, lam, "corrected") - oracle))
        worst_print = max(worst_print, abs(bayes.pe_bell_diagonal(w, lam, "as_printed") - oracle))
    assert worst_corr <= 1e-10
    assert worst_print >= 1e-3
    rows = {r.name: r for r in verify.run_all(10, only=["pe_bell_diagonal[corrected]", "pe_bell_diagonal[as_printed]"])}
    assert rows["pe_bell_diagonal[corrected]"].status == verify.PASS
    assert rows["pe_bell_diagonal[as_printed]"].status == verify.EXPECTED


# --- AC4 ------------------------------------------------------------------------


@ac("AC4", "noise closed forms vs channel pipeline")
def test_ac4_noise():
    t0 = time.perf_counter()
    grid = np.linspace(0, 1, 10)
    lams = np.linspace(0, math.pi, 10)
    for label in ("bit_flip", "phase_flip", "bit_phase_flip"):
        by_lam = {}
        for p, q, lam in itertools.product(grid, grid, lams):
            oracle = noise.pipeline_pe(label, (p, q), lam)
            assert abs(noise.pe_noisy(label, (p, q), lam) - oracle) <= 1e-10, (label, p, q, lam)
            by_lam.setdefault(lam, []).append(oracle)
        if label == "phase_flip":
            assert all(max(v) - min(v) <= 1e-12 for v in by_lam.values())
    for p, lam in itertools.product(np.linspace(0, 1, 32), np.linspace(0, math.pi, 32)):
        assert abs(noise.pe_noisy("depolarizing", (p,), lam) - noise.pipeline_pe("depolarizing", (p,), lam)) <= 1e-10
    elapsed = time.perf_counter() - t0
    assert elapsed < 5.0, f"{elapsed:.2f} s"


# --- AC5 ------------------------------------------------------------------------


@ac("AC5", "pure-state NP ROC vs 512-point sweep")
@pytest.mark.parametrize("kappa2", [0.25, 0.5, 0.75, 0.9])
def test_ac5_pure_roc(kappa2):
    lam = math.acos(math.sqrt(kappa2))
    rho0 = bloch_to_density((0.0, 0.0, 1.0))
    curve = nps.roc_sweep(rho0, perturb(rho0, lam), nps.default_gamma_grid(512))
    assert curve.is_monotone()
    err = max(abs(nps.p11_pure(kappa2, min(1.0, max(0.0, x))) - y) for x, y in zip(curve.p10, curve.p11))
    assert err <= 1e-6


# --- AC6 ------------------------------------------------------------------------


def _rank(rho0, rho1, gamma):
    return positive_part_projector(nps.lagrange_operator(rho0, rho1, gamma)).rank


def _rank_change(rho0, rho1, lo, hi):
    """Bisect log(gamma) for the point where the positive-part rank drops."""
    r_lo = _rank(rho0, rho1, lo)
    a, b = math.log(lo), math.log(hi)
    while b - a > 1e-14:
        mid = 0.5 * (a + b)
        if _rank(rho0, rho1, math.exp(mid)) == r_lo:
            a = mid
        else:
            b = mid
    return math.exp(0.5 * (a + b))


@ac("AC6", "mixed-state breakpoints and middle branch")
def test_ac6_fig6():
    r2, kappa2 = 0.8, 0.8
    lam = math.asin(math.sqrt(1 - kappa2))  # r1 = 0
    r = math.sqrt(r2)
    rho0 = bloch_to_density((0.0, 0.0, r))
    rho1 = perturb(rho0, lam)
    g_minus = _rank_change(rho0, rho1, 1e-3, 1.0)
    g_plus = _rank_change(rho0, rho1, 1.0, 1e3)
    bp = nps.mixed_breakpoints(r2, kappa2)
    assert abs(bp["gamma_minus"] - g_minus) <= 1e-6
    assert abs(bp["gamma_plus"] - g_plus) <= 1e-6
    inside_plus = nps.roc_point(rho0, rho1, g_plus * (1 - 1e-9))
    inside_minus = nps.roc_point(rho0, rho1, g_minus * (1 + 1e-9))
    assert abs(bp["p10_gamma_plus"] - inside_plus.p10) <= 1e-6
    assert abs(bp["p10_gamma_minus"] - inside_minus.p10) <= 1e-6
    assert abs(bp["p11_gamma_minus"] - inside_minus.p11) <= 1e-6
    for x in np.linspace(bp["p10_gamma_plus"], bp["p10_gamma_minus"], 52)[1:-1]:
        cf = nps.characteristic_mixed(r2, 0.0, lam, x)
        assert abs(cf - nps.p11_star(r2, kappa2, x)) <= 1e-9
        assert abs(cf - nps.np_optimal_p11(rho0, rho1, x)) <= 1e-9


# --- AC7 ------------------------------------------------------------------------


@ac("AC7", "Bell-diagonal characteristic function, all five rows")
def test_ac7_fig7():
    lam = math.pi / 4
    rho0 = bell_diagonal(FIG7)
    rho1 = perturb(rho0, lam)
    crit = [g for pa, pb in ((FIG7[0], FIG7[1]), (FIG7[2], FIG7[3])) for g in nps.xi_and_critical_gammas(pa, pb, lam)[1:3]]
    grid = nps.default_gamma_grid(512, critical=crit)
    assert len(grid) >= 512
    rows = set()
    for g in grid:
        cf = nps.characteristic_bell_diagonal(FIG7, lam, float(g))
        pt = nps.roc_point(rho0, rho1, float(g))
        assert abs(cf.p10 - pt.p10) <= 1e-9 and abs(cf.p11 - pt.p11) <= 1e-9, g
        rows.add(nps.bell_diagonal_row(FIG7, lam, float(g)))
    assert rows == {1, 2, 3, 4, 5}


# --- AC8 ------------------------------------------------------------------------

ABS = md.DetectionCriterion.absolute()


def _agree(cf, oracle):
    if not cf.detectable:
        return not oracle.detectable
    return oracle.detectable and abs(cf.lambda_min - oracle.lambda_min) <= 1e-6


@ac("AC8", "lambda_min landmarks")
def test_ac8_landmarks():
    assert abs(md.lambda_min_pure_absolute(0, 0).lambda_min - math.pi / 4) <= 1e-12
    assert abs(md.lambda_min_pure_absolute(0, 0.5).lambda_min) <= 1e-12
    for x in np.linspace(0, 1, 201):
        assert abs(md.lambda_min_two_qubit(x).lambda_min - md.lambda_min_pure_absolute(0, x).lambda_min) <= 1e-12


@ac("AC8", "lambda_min closed forms vs numeric oracle")
@pytest.mark.parametrize("solver", ["pure_absolute", "pure_relative", "mixed", "two_qubit"])
def test_ac8_oracle(solver):
    bad = []
    if solver == "pure_absolute":
        cases = [(r1, x) for r1 in np.linspace(0, 0.9, 10) for x in np.linspace(0, 0.6, 20)]
        for r1, x in cases:
            if not _agree(md.lambda_min_pure_absolute(r1, x), md.lambda_min_numeric(md.Scenario.pure_qubit(r1), ABS, x)):
                bad.append((r1, x))
    elif solver == "pure_relative":
        # only points inside the closed form's real domain are comparisons
        cases = [
            (r1, d, x)
            for r1 in (0.0, 0.3, 0.6, 0.8)
            for d in (2.0, 4.0)
            for x in np.linspace(0, 1 / d, 30)
        ]
        for r1, d, x in cases:
            crit = md.DetectionCriterion.relative(d)
            cf = md.lambda_min_pure_relative(r1, x, d)
            assert cf.closed_form_applicable
            if not _agree(cf, md.lambda_min_numeric(md.Scenario.pure_qubit(r1), crit, x)):
                bad.append((r1, d, x))
    elif solver == "mixed":
        cases = [(r2, f, x) for r2 in (0.5, 0.8, 0.95, 1.0) for f in (0.0, 0.3, 0.6, 0.8, 0.95) for x in np.linspace(0, 0.5, 10)]
        for r2, f, x in cases:
            r1 = f * math.sqrt(r2)
            if not _agree(md.lambda_min_mixed(r2, r1, x), md.lambda_min_numeric(md.Scenario.mixed_qubit(r2, r1), ABS, x)):
                bad.append((r2, r1, x))
    else:
        states = [md.Scenario.bell("psi-"), md.Scenario.bell("phi+"), md.Scenario.two_qubit((0.6, 0, 0, 0.8j)), md.Scenario.two_qubit((0, 1, 1j, 0))]
        cases = [(s, x) for s in states for x in np.linspace(0, 0.6, 50)]
        for s, x in cases:
            if not _agree(md.lambda_min_two_qubit(x), md.lambda_min_numeric(s, ABS, x)):
                bad.append((s.label, x))
    assert len(cases) >= 200
    assert not bad, bad[:5]


# --- AC9 ------------------------------------------------------------------------


@ac("AC9", "PVM, ROC, channel and eigensolver invariants")
def test_ac9_properties(rng):
    for dim in (2, 4):
        for _ in range(100):
            rho0, rho1 = random_density(rng, dim, rng.integers(1, dim + 1)), random_density(rng, dim)
            z = rng.uniform()
            bayes.helstrom_pe(rho0, rho1, (z, 1 - z)).pvm.check(1e-10)
            nps.np_measurement(rho0, rho1, float(rng.exponential())).check(1e-10)
    for dim in (2, 4):
        for _ in range(20):
            rho0, rho1 = random_density(rng, dim), random_density(rng, dim, 1)
            curve = nps.roc_sweep(rho0, rho1, nps.default_gamma_grid(64))
            assert curve.is_monotone()
            assert np.all(curve.p11 >= curve.p10 - 1e-10)
    for p, q in itertools.product(np.linspace(0, 1, 7), repeat=2):
        for label in ("bit_flip", "phase_flip", "bit_phase_flip"):
            assert noise.make_channel(label, (p, q)).completeness_error() <= 1e-12
        assert noise.make_channel("depolarizing", (p,)).completeness_error() <= 1e-12
    worst = 0.0
    for i in range(10_000):
        dim = 2 if i % 2 else 4
        m = random_hermitian(rng, dim, scale=10.0 ** rng.uniform(-3, 3))
        dec = eig_hermitian(m)
        worst = max(worst, float(np.abs(dec.reconstruct() - m).max() / max(1.0, np.abs(m).max())))
        assert np.all(np.diff(dec.eigenvalues) <= 0)
    assert worst <= 1e-10
