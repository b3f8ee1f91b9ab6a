import math

import numpy as np
import pytest

from qdisc import min_detect as md
from qdisc.core import DomainError
from qdisc.neyman_pearson import characteristic_mixed, np_optimal_p11, p11_pure

ABS = md.DetectionCriterion.absolute()


def value(res):
    assert res.detectable
    return float(res.lambda_min)


class TestCriterion:
    def test_relative_needs_delta_above_one(self):
        with pytest.raises(DomainError):
            md.DetectionCriterion.relative(1.0)
        with pytest.raises(DomainError):
            md.DetectionCriterion("relative")
        assert md.DetectionCriterion.relative(4).threshold(0.1) == pytest.approx(0.4)
        assert ABS.threshold(0.3) == 0.5

    def test_not_detectable_sentinel(self):
        r = md.LambdaMinResult(md.NotDetectable)
        assert not r.detectable and math.isnan(r.as_float())
        assert repr(md.NotDetectable) == "NotDetectable"


class TestPureAbsolute:
    def test_landmarks(self):
        assert value(md.lambda_min_pure_absolute(0, 0)) == pytest.approx(math.pi / 4, abs=1e-12)
        assert value(md.lambda_min_pure_absolute(0, 0.5)) == pytest.approx(0.0, abs=1e-12)
        assert value(md.lambda_min_pure_absolute(0.3, 0.7)) == 0.0

    def test_boundary_detection_probability_is_half(self):
        for r1 in (0.0, 0.4, 0.7):
            for x in (0.0, 0.05, 0.2, 0.45):
                lam = value(md.lambda_min_pure_absolute(r1, x))
                kappa2 = 1 - (1 - r1 * r1) * math.sin(lam) ** 2
                assert p11_pure(kappa2, x) == pytest.approx(0.5, abs=1e-8)

    def test_reference_point_against_oracle(self):
        cf = value(md.lambda_min_pure_absolute(0.5, 0.1))
        ref = value(md.lambda_min_numeric(md.Scenario.pure_qubit(0.5), ABS, 0.1))
        assert cf == pytest.approx(ref, abs=1e-6)

    def test_monotone(self):
        xs = np.linspace(0, 0.5, 30)
        lams = [value(md.lambda_min_pure_absolute(0.3, x)) for x in xs]
        assert np.all(np.diff(lams) <= 1e-15)
        rs = np.linspace(0, 0.7, 30)
        lams = [value(md.lambda_min_pure_absolute(r, 0.1)) for r in rs]
        assert np.all(np.diff(lams) >= -1e-15)

    def test_constraint(self):
        x = 0.1
        limit = 0.5 + math.sqrt(x * (1 - x))
        sat = md.lambda_min_pure_absolute(math.sqrt(limit), x)
        assert sat.constraint_ok and value(sat) == pytest.approx(math.pi / 2, abs=1e-5)
        bad = md.lambda_min_pure_absolute(math.sqrt(limit) + 0.01, x)
        assert not bad.detectable and not bad.constraint_ok
        oracle = md.lambda_min_numeric(md.Scenario.pure_qubit(math.sqrt(limit) + 0.01), ABS, x)
        assert not oracle.detectable

    def test_generator_eigenstate(self):
        assert not md.lambda_min_pure_absolute(1.0, 0.1).detectable
        assert not md.lambda_min_numeric(md.Scenario.pure_qubit(1.0), ABS, 0.1).detectable


class TestPureRelative:
    def test_zero_false_alarm(self):
        assert value(md.lambda_min_pure_relative(0, 0.0, 4)) == 0.0

    def test_reference_point(self):
        crit = md.DetectionCriterion.relative(4)
        cf = md.lambda_min_pure_relative(0, 0.05, 4)
        assert cf.closed_form_applicable
        assert value(cf) == pytest.approx(value(md.lambda_min_numeric(md.Scenario.pure_qubit(0), crit, 0.05)), abs=1e-6)
        lam = value(cf)
        assert p11_pure(1 - math.sin(lam) ** 2, 0.05) == pytest.approx(0.2, abs=1e-10)

    def test_inside_real_domain(self):
        # 1 - delta p10 = 0.2 > 0: the closed form applies
        res = md.lambda_min_pure_relative(0, 0.2, 4)
        assert res.closed_form_applicable
        ref = md.lambda_min_numeric(md.Scenario.pure_qubit(0), md.DetectionCriterion.relative(4), 0.2)
        assert value(res) == pytest.approx(value(ref), abs=1e-6)

    def test_outside_real_domain_falls_back(self):
        res = md.lambda_min_pure_relative(0, 0.3, 4)
        assert not res.closed_form_applicable
        assert res.method == "oracle_fallback"
        assert not res.detectable

    def test_invalid_delta(self):
        with pytest.raises(DomainError):
            md.lambda_min_pure_relative(0, 0.1, 0.5)


class TestMixed:
    def test_pure_limit(self):
        for x in np.linspace(0, 0.5, 11):
            assert value(md.lambda_min_mixed(1.0, 0.0, x)) == pytest.approx(value(md.lambda_min_pure_absolute(0, x)), abs=1e-12)
        # any mixedness closes p10 = 0, so the near-pure limit starts just above it
        for x in np.linspace(0.01, 0.5, 11):
            assert value(md.lambda_min_mixed(1 - 1e-9, 0.0, x)) == pytest.approx(value(md.lambda_min_pure_absolute(0, x)), abs=1e-6)

    def test_unreachable_plateau(self):
        assert not md.lambda_min_mixed(0.8, 0.0, 0.0).detectable
        assert not md.lambda_min_numeric(md.Scenario.mixed_qubit(0.8, 0.0), ABS, 0.0).detectable

    def test_reference_point(self):
        cf = value(md.lambda_min_mixed(0.8, 0.0, 0.4))
        ref = value(md.lambda_min_numeric(md.Scenario.mixed_qubit(0.8, 0.0), ABS, 0.4))
        assert cf == pytest.approx(ref, abs=1e-6)
        assert characteristic_mixed(0.8, 0.0, cf, 0.4) == pytest.approx(0.5, abs=1e-8)

    def test_printed_variant_disagrees(self):
        cf = value(md.lambda_min_mixed(0.8, 0.0, 0.4))
        printed = md.lambda_min_mixed(0.8, 0.0, 0.4, formula="as_printed")
        assert abs(printed.as_float() - cf) > 1e-2

    def test_saturated_constraint(self):
        r2, x = 0.9, 0.3
        alpha = md.mixed_alpha(r2, x)
        r1 = math.sqrt(r2 * (1 - alpha))
        res = md.lambda_min_mixed(r2, r1, x)
        assert value(res) == pytest.approx(math.pi / 2, abs=1e-5)
        assert not md.lambda_min_mixed(r2, min(math.sqrt(r2), r1 + 0.02), x).detectable

    def test_domain(self):
        with pytest.raises(DomainError):
            md.lambda_min_mixed(0.5, 0.8, 0.1)
        with pytest.raises(DomainError):
            md.lambda_min_mixed(0.0, 0.0, 0.1)


class TestTwoQubit:
    def test_range(self):
        assert value(md.lambda_min_two_qubit(0.0)) == pytest.approx(math.pi / 4, abs=1e-12)
        assert value(md.lambda_min_two_qubit(0.5)) == pytest.approx(0.0, abs=1e-12)

    def test_equals_pure_qubit(self):
        for x in np.linspace(0, 1, 41):
            assert value(md.lambda_min_two_qubit(x)) == pytest.approx(value(md.lambda_min_pure_absolute(0, x)), abs=1e-12)

    def test_against_oracle(self):
        x = 0.25
        cf = value(md.lambda_min_two_qubit(x))
        assert cf == pytest.approx(math.asin(math.sqrt(0.5 - math.sqrt(3) / 4)), abs=1e-12)
        ref = value(md.lambda_min_numeric(md.Scenario.bell("psi-"), ABS, x))
        assert cf == pytest.approx(ref, abs=1e-6)


class TestNumeric:
    def test_pure_landmark(self):
        assert value(md.lambda_min_numeric(md.Scenario.pure_qubit(0), ABS, 0.0)) == pytest.approx(math.pi / 4, abs=1e-8)

    def test_bracket_invariant(self):
        scn = md.Scenario.mixed_qubit(0.9, 0.2)
        for x in (0.1, 0.3):
            lam = value(md.lambda_min_numeric(scn, ABS, x))
            assert md.criterion_gap(scn, ABS, x, lam + 1e-6) >= 0
            assert md.criterion_gap(scn, ABS, x, lam - 1e-6) < 0

    def test_non_monotone_predicate_uses_grid_scan(self):
        # satisfied on a middle band only
        gap = lambda lam: 1.0 if 0.5 < lam < 0.6 else -1.0
        lam, method, res = md._first_crossing(gap, np.linspace(0, md.HALF_PI, 9), 0.0)
        assert method == "grid_scan"
        assert lam == pytest.approx(0.5, abs=res)
        gap2 = lambda lam: 1.0 if (lam < 0.1 or lam > 1.0) else -1.0
        lam2, method2, _ = md._first_crossing(gap2, np.linspace(0, md.HALF_PI, 9), 0.0)
        assert method2 == "grid_scan" and lam2 == 0.0

    def test_never_satisfied(self):
        res = md.lambda_min_numeric(md.Scenario.qubit((0.0, 0.0, 0.1)), ABS, 0.1)
        assert not res.detectable

    def test_inputs_validated(self):
        with pytest.raises(DomainError):
            md.lambda_min_numeric(md.Scenario.pure_qubit(0), ABS, 1.5)
        with pytest.raises(DomainError):
            md.Scenario(np.eye(2) / 2, axis=5)

    def test_optimal_p11_agrees_with_pure_closed_form(self):
        scn = md.Scenario.pure_qubit(0.2)
        rho0, rho1 = scn.pair(0.6)
        kappa2 = 1 - (1 - 0.04) * math.sin(0.6) ** 2
        for x in (0.0, 0.1, 0.5, 0.9):
            assert np_optimal_p11(rho0, rho1, x) == pytest.approx(p11_pure(kappa2, x), abs=1e-9)
