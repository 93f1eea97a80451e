"""Pointwise economics: demand mapping, profit pieces, waste identities."""

import numpy as np
import pytest

from qrdro.core_model import (
    ModelParams,
    Policy,
    demand,
    fulfilled_demand,
    profit,
    profit_by_cases,
    second_stage_quantity,
    total_waste,
    wtc_integrand,
)

PAPER = ModelParams(p=0.6, c=0.1, c_m=0.15, delta=0.1, support_lo=0.0, support_hi=1.0)
POL = Policy(0.3, 0.2)


def _random_params(rng):
    while True:
        p = rng.uniform(0.1, 0.9)
        c = rng.uniform(0.0, 0.4)
        c_m = rng.uniform(0.0, 0.4)
        delta = rng.uniform(0.0, 0.4)
        if p > c + delta + c_m + 1e-3:
            return ModelParams(p, c, c_m, delta, 0.0, rng.uniform(0.5, 2.0))


def _random_policy(rng, params):
    lo, hi = params.policy_box()
    x = rng.uniform(lo, hi)
    return Policy(x, rng.uniform(lo, x))


class TestValidation:
    def test_profitability_condition_enforced(self):
        with pytest.raises(ValueError, match="p > c \\+ delta \\+ c_m"):
            ModelParams(p=0.3, c=0.1, c_m=0.15, delta=0.1)

    def test_price_range_enforced(self):
        with pytest.raises(ValueError, match="0 < p < 1"):
            ModelParams(p=1.2, c=0.1, c_m=0.15, delta=0.1)

    def test_support_ordering_enforced(self):
        with pytest.raises(ValueError, match="support"):
            ModelParams(p=0.6, c=0.1, c_m=0.15, delta=0.1, support_lo=1.0, support_hi=0.5)

    def test_policy_ordering_enforced(self):
        with pytest.raises(ValueError, match="exceed fabric"):
            Policy(0.1, 0.2)


class TestDemand:
    def test_examples(self):
        assert demand(PAPER, 0.625) == pytest.approx(0.25, abs=1e-12)
        assert demand(PAPER, 0.0) == 0.0
        assert demand(PAPER, 1.0) == pytest.approx(0.4, abs=1e-12)

    def test_negative_market_size_rejected(self):
        with pytest.raises(ValueError, match="nonnegative"):
            demand(PAPER, -0.1)


class TestSecondStage:
    def test_examples(self):
        assert second_stage_quantity(PAPER, POL, 0.625) == pytest.approx(0.05, abs=1e-12)
        assert second_stage_quantity(PAPER, Policy(0.25, 0.25), 0.9) == 0.0
        assert second_stage_quantity(PAPER, POL, 1.0) == pytest.approx(0.1, abs=1e-12)

    def test_bounds(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            params = _random_params(rng)
            pol = _random_policy(rng, params)
            qd = second_stage_quantity(params, pol, rng.uniform(0.0, params.support_hi))
            assert -1e-15 <= qd <= pol.x - pol.q + 1e-15


class TestProfit:
    def test_examples(self):
        assert profit(PAPER, POL, 0.625) == pytest.approx(0.075, abs=1e-12)
        assert profit(PAPER, POL, 0.25) == pytest.approx(-0.005, abs=1e-12)
        assert profit(PAPER, POL, 1.0) == pytest.approx(0.095, abs=1e-12)

    def test_min_form_equals_case_split(self):
        rng = np.random.default_rng(11)
        for _ in range(500):
            params = _random_params(rng)
            pol = _random_policy(rng, params)
            y = rng.uniform(0.0, 1.2 * params.support_hi)
            assert profit(params, pol, y) == pytest.approx(
                profit_by_cases(params, pol, y), abs=1e-12
            )

    def test_concave_in_market_size(self):
        rng = np.random.default_rng(13)
        for _ in range(300):
            params = _random_params(rng)
            pol = _random_policy(rng, params)
            y1, y2 = rng.uniform(0.0, params.support_hi, 2)
            t = rng.random()
            mid = profit(params, pol, t * y1 + (1 - t) * y2)
            chord = t * profit(params, pol, y1) + (1 - t) * profit(params, pol, y2)
            assert mid >= chord - 1e-12

    def test_jointly_concave_in_policy(self):
        rng = np.random.default_rng(17)
        for _ in range(300):
            params = _random_params(rng)
            a, b = _random_policy(rng, params), _random_policy(rng, params)
            y = rng.uniform(0.0, params.support_hi)
            t = rng.random()
            mid_pol = Policy(t * a.x + (1 - t) * b.x, t * a.q + (1 - t) * b.q)
            mid = profit(params, mid_pol, y)
            chord = t * profit(params, a, y) + (1 - t) * profit(params, b, y)
            assert mid >= chord - 1e-12


class TestWasteAccounting:
    def test_fulfilled_examples(self):
        assert fulfilled_demand(PAPER, 0.3, 1.0) == pytest.approx(0.3, abs=1e-12)
        assert fulfilled_demand(PAPER, 0.3, 0.0) == 0.0
        assert fulfilled_demand(PAPER, 0.3, 0.5) == pytest.approx(0.2, abs=1e-12)

    def test_waste_examples(self):
        assert total_waste(PAPER, 0.3, 0.5) == pytest.approx(0.1, abs=1e-12)
        assert total_waste(PAPER, 0.3, 0.8) == 0.0
        assert total_waste(PAPER, 0.3, 0.0) == pytest.approx(0.3, abs=1e-12)

    def test_waste_identity(self):
        # unsold goods plus unused fabric equals (x - d)^+, exactly
        rng = np.random.default_rng(19)
        for _ in range(500):
            params = _random_params(rng)
            pol = _random_policy(rng, params)
            y = rng.uniform(0.0, 1.5 * params.support_hi)
            d = demand(params, y)
            qd = second_stage_quantity(params, pol, y)
            parts = max(pol.q - d, 0.0) + max(pol.x - pol.q - qd, 0.0)
            assert parts == pytest.approx(total_waste(params, pol.x, y), abs=1e-12)

    def test_fulfilled_identity(self):
        rng = np.random.default_rng(23)
        for _ in range(500):
            params = _random_params(rng)
            pol = _random_policy(rng, params)
            y = rng.uniform(0.0, 1.5 * params.support_hi)
            d = demand(params, y)
            qd = second_stage_quantity(params, pol, y)
            assert min(d, pol.q + qd) == pytest.approx(
                fulfilled_demand(params, pol.x, y), abs=1e-15
            )


class TestWtcIntegrand:
    def test_examples(self):
        assert wtc_integrand(PAPER, 0.3, 0.3, 1.0) == pytest.approx(-0.09, abs=1e-12)
        assert wtc_integrand(PAPER, 0.3, 0.3, 0.25) == pytest.approx(0.17, abs=1e-12)
        # kink: tau = 0 and demand exactly at the fabric level
        assert wtc_integrand(PAPER, 0.3, 0.0, 0.75) == pytest.approx(0.0, abs=1e-12)

    def test_rearranged_form(self):
        # integrand equals (x - d)^+ + tau * max(-d, -x) pointwise
        rng = np.random.default_rng(29)
        for _ in range(500):
            params = _random_params(rng)
            x = rng.uniform(0.0, params.policy_box()[1])
            tau = rng.uniform(0.0, 1.0)
            y = rng.uniform(0.0, 1.5 * params.support_hi)
            d = demand(params, y)
            expected = max(x - d, 0.0) + tau * max(-d, -x)
            assert wtc_integrand(params, x, tau, y) == pytest.approx(expected, abs=1e-12)

    def test_negative_tau_rejected(self):
        with pytest.raises(ValueError, match="nonnegative"):
            wtc_integrand(PAPER, 0.3, -0.1, 0.5)
