import math

import pytest
from review_pricing.learning import (
    effective_stop_prior,
    false_negative_ratio,
    net_dislike_budget,
    sell_forever_bounds,
    symmetric_sell_forever_given_good,
)
from review_pricing.model import ReviewCount, dislike_update, posterior, static_threshold
from review_pricing.series_solver import stopping_prior
from review_pricing.simulator import PricingPolicy, SimConfig, TrueQuality, estimate_sell_forever, run


class TestNetDislikeBudget:
    """Tests for the net_dislike_budget function."""

    def test_budget(self, symmetric_params):
        """Test m_real = log_1.5(17/3) and m_int = 5 between 0.5 and 0.15."""
        m_real, m_int = net_dislike_budget(0.5, 0.15, symmetric_params)
        assert m_real == pytest.approx(math.log(17 / 3) / math.log(1.5))
        assert round(m_real, 2) == 4.28
        assert m_int == 5

    def test_budget_by_iteration(self, symmetric_params):
        """Test m_int by applying dislikes one at a time."""
        x, steps = 0.5, 0
        while x >= 0.15:
            x = dislike_update(x, symmetric_params)
            steps += 1
        assert steps == net_dislike_budget(0.5, 0.15, symmetric_params)[1]

    def test_invalid(self, symmetric_params):
        """Test range validation."""
        with pytest.raises(ValueError):
            net_dislike_budget(0.1, 0.15, symmetric_params)
        with pytest.raises(ValueError):
            net_dislike_budget(0.5, 0.0, symmetric_params)


class TestSellForever:
    """Tests for the sell_forever_bounds function."""

    def test_bounds_ordering(self, symmetric_params):
        """Test lower <= exact <= upper in the symmetric case."""
        report = sell_forever_bounds(0.5, 0.3, symmetric_params)
        assert report.lower == pytest.approx(2 / 7)
        assert report.lower <= report.exact_symmetric <= report.upper
        assert report.given_good_lower == pytest.approx(report.lower / 0.5)
        assert report.m_int == 3

    def test_exact_uses_effective_stop_prior(self, symmetric_params):
        """Test that the exact value is the martingale identity at the prior where the walk stops."""
        report = sell_forever_bounds(0.5, 0.3, symmetric_params)
        y = posterior(0.5, ReviewCount(0, 3), symmetric_params)
        assert report.effective_stop_prior == pytest.approx(y)
        assert effective_stop_prior(0.5, 0.3, symmetric_params) == pytest.approx(y)
        assert report.exact_symmetric == pytest.approx((0.5 - y) / (1 - y))

    def test_general_has_no_exact(self, general_params):
        """Test that only bounds are reported when q != 1 - p."""
        report = sell_forever_bounds(0.5, 0.2, general_params)
        assert report.exact_symmetric is None
        assert report.lower <= report.upper
        assert set(report.to_dict()) >= {'lower', 'upper', 'given_good_lower', 'm_real', 'm_int'}

    def test_exact_matches_simulation(self, symmetric_params):
        """Test the exact symmetric probability against simulated survival."""
        report = sell_forever_bounds(0.5, 0.3, symmetric_params)
        config = SimConfig(model=symmetric_params, policy=PricingPolicy.threshold(0.3),
                           true_quality=TrueQuality.from_prior(), horizon=10_000, runs=20_000,
                           seed=7, block_size=20_000)
        estimate, _ = estimate_sell_forever(config)
        std_error = math.sqrt(estimate * (1 - estimate) / config.runs)
        assert abs(estimate - report.exact_symmetric) <= 4 * std_error


class TestSymmetricGivenGood:
    """Tests for the symmetric_sell_forever_given_good function."""

    def test_one_dislike(self):
        """Test p = 0.6, m = 1 gives 1/3."""
        assert symmetric_sell_forever_given_good(0.6, 1) == pytest.approx(1 / 3, abs=1e-15)

    def test_recurrence(self):
        """Test p_m = p p_{m+1} + (1 - p) p_{m-1} for m <= 50."""
        p = 0.6
        for m in range(1, 51):
            expected = (p * symmetric_sell_forever_given_good(p, m + 1)
                        + (1 - p) * symmetric_sell_forever_given_good(p, m - 1))
            assert symmetric_sell_forever_given_good(p, m) == pytest.approx(expected, abs=1e-12)

    def test_edges(self):
        """Test m = 0 and invalid p."""
        assert symmetric_sell_forever_given_good(0.6, 0) == 0.0
        assert symmetric_sell_forever_given_good(1.0, 3) == 1.0
        with pytest.raises(ValueError):
            symmetric_sell_forever_given_good(0.5, 1)


class TestFalseNegativeRatio:
    """Tests for the false_negative_ratio function."""

    def test_ratio_at_least_one(self, symmetric_params):
        """Test that a static price abandons good products at least as often."""
        report = false_negative_ratio(symmetric_params, 0.45)
        assert report.method == 'closed_form'
        assert not report.estimated
        assert report.x_min == pytest.approx(static_threshold(symmetric_params, 0.45))
        assert report.x_min > report.x_star
        assert report.ratio >= 1.0
        assert report.fn_static >= report.fn_dynamic

    def test_ratio_formula(self, symmetric_params):
        """Test the ratio against the odds of the one-dislike-below priors."""
        report = false_negative_ratio(symmetric_params, 0.45)
        odds = lambda x: x / (1 - x)
        expected = (odds(dislike_update(report.x_min, symmetric_params))
                    / odds(dislike_update(report.x_star, symmetric_params)))
        assert report.ratio == pytest.approx(expected)

    def test_equal_thresholds(self, symmetric_params, monkeypatch):
        """Test that the ratio is one when x_min equals x*."""
        price = 0.44
        x_min = static_threshold(symmetric_params, price)

        class Stub:
            x_star = x_min

        monkeypatch.setattr('review_pricing.learning.stopping_prior', lambda params, epsilon: Stub())
        report = false_negative_ratio(symmetric_params, price)
        assert report.ratio == pytest.approx(1.0)

    def test_general_is_estimated(self, general_params):
        """Test that the asymmetric case falls back to simulation."""
        report = false_negative_ratio(general_params, 0.5, runs=500, horizon=500, seed=3)
        assert report.method == 'monte_carlo'
        assert report.estimated
        assert 0.0 <= report.fn_dynamic <= report.fn_static <= 1.0

    def test_invalid_price(self, symmetric_params):
        """Test that prices at or below cost are rejected."""
        with pytest.raises(ValueError):
            false_negative_ratio(symmetric_params, 0.43)

    @pytest.mark.parametrize('price', [0.6, 0.7, 1.0])
    def test_price_never_paid(self, symmetric_params, price):
        """Test that a price at or above p abandons every good product."""
        report = false_negative_ratio(symmetric_params, price)
        assert report.x_min >= 1.0
        assert report.fn_static == 1.0
        assert 0.0 < report.fn_dynamic < 1.0
        assert report.ratio == pytest.approx(1.0 / report.fn_dynamic)
        assert report.ratio > 1.0
        assert report.ratio_at_x0 == pytest.approx(report.ratio)


class TestDecomposition:
    """Tests for how selling forever splits over good and bad products."""

    @pytest.mark.parametrize('x0,x_stop', [(0.5, 0.3), (0.5, 0.15), (0.7, 0.2), (0.4, 0.39)])
    def test_exact_is_prior_times_given_good(self, symmetric_params, x0, x_stop):
        """Test P(sell forever) = x0 * P(sell forever | good)."""
        report = sell_forever_bounds(x0, x_stop, symmetric_params)
        given_good = symmetric_sell_forever_given_good(symmetric_params.p, report.m_int)
        assert report.exact_symmetric == pytest.approx(x0 * given_good, abs=1e-12)

    def test_bad_product_always_stops(self, symmetric_params):
        """Test that no run with a bad product survives a long horizon."""
        config = SimConfig(model=symmetric_params, policy=PricingPolicy.threshold(0.3),
                           true_quality=TrueQuality.bad(), horizon=10_000, runs=2_000,
                           seed=11, block_size=2_000)
        assert run(config).survival_fraction == 0.0


class TestDynamicLearnsMore:
    """Tests that the dynamic stopping prior keeps selling in more cases than any static price."""

    @pytest.mark.parametrize('price', [0.44, 0.46, 0.48, 0.5])
    def test_bounds_dominate(self, symmetric_params, price):
        """Test that every bound at x* is at least the bound at x_min."""
        x_star = stopping_prior(symmetric_params).x_star
        x_min = static_threshold(symmetric_params, price)
        assert x_star < x_min
        dynamic = sell_forever_bounds(0.5, x_star, symmetric_params)
        static = sell_forever_bounds(0.5, x_min, symmetric_params)
        for name in ('lower', 'upper', 'given_good_lower', 'exact_symmetric'):
            assert getattr(dynamic, name) >= getattr(static, name) - 1e-12
