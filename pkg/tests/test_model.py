import itertools
import math

import pytest
from review_pricing.model import (
    ModelParams,
    PricingMode,
    ReviewCount,
    barrier_offset,
    crossing_dislikes,
    detect_lattice,
    dislike_update,
    lattice_prior,
    like_probability,
    like_update,
    local_reward,
    myopic_threshold,
    net_index,
    posterior,
    sequence_probability,
    static_threshold,
)


class TestModelParams:
    """Tests for the ModelParams class."""

    def test_valid_params(self, symmetric_params):
        """Test derived quantities of a symmetric instance."""
        assert symmetric_params.is_symmetric
        assert symmetric_params.like_step == pytest.approx(math.log(1.5))
        assert symmetric_params.dislike_step == pytest.approx(math.log(1.5))

    @pytest.mark.parametrize('kwargs', [
        dict(p=0.4, q=0.6, c=0.5, delta=0.9),   # q > p
        dict(p=0.6, q=0.4, c=0.3, delta=0.9),   # c below q
        dict(p=0.6, q=0.4, c=0.7, delta=0.9),   # c above p
        dict(p=0.6, q=0.4, c=0.43, delta=1.0),  # no discounting
        dict(p=0.6, q=0.4, c=0.43, delta=0.9, x0=1.0),
    ])
    def test_invalid_params(self, kwargs):
        """Test that parameters outside their ranges are rejected."""
        with pytest.raises(ValueError):
            ModelParams(**kwargs)

    def test_with_helpers(self, symmetric_params):
        """Test the copy-with helpers."""
        assert symmetric_params.with_x0(0.7).x0 == 0.7
        assert symmetric_params.with_cost(0.45).c == 0.45
        assert symmetric_params.with_delta(0.9).delta == 0.9
        assert symmetric_params.x0 == 0.5

    def test_general_not_symmetric(self, general_params):
        """Test that q != 1 - p is not symmetric."""
        assert not general_params.is_symmetric


class TestPricingMode:
    """Tests for the PricingMode class."""

    def test_constructors(self):
        """Test the dynamic and static constructors."""
        assert PricingMode.dynamic().is_dynamic
        static = PricingMode.static(0.52)
        assert not static.is_dynamic
        assert static.describe() == 'static(0.52)'

    def test_static_needs_price(self):
        """Test that a static mode without price is rejected."""
        with pytest.raises(ValueError):
            PricingMode('static')
        with pytest.raises(ValueError):
            PricingMode('dynamic', 0.5)


class TestUpdates:
    """Tests for the Bayesian update functions."""

    def test_like_and_dislike(self, symmetric_params):
        """Test single updates at x = 0.5."""
        assert like_update(0.5, symmetric_params) == pytest.approx(0.6)
        assert dislike_update(0.5, symmetric_params) == pytest.approx(0.4)

    def test_fixed_points(self, symmetric_params):
        """Test that certainty is never revised."""
        for x in (0.0, 1.0):
            assert like_update(x, symmetric_params) == x
            assert dislike_update(x, symmetric_params) == x
            assert posterior(x, ReviewCount(3, 5), symmetric_params) == x

    def test_posterior_matches_sequential_updates(self, general_params):
        """Test that every ordering of the same counts gives the same posterior."""
        r = ReviewCount(3, 2)
        expected = posterior(0.35, r, general_params)
        for order in set(itertools.permutations('LLLDD')):
            x = 0.35
            for review in order:
                x = like_update(x, general_params) if review == 'L' else dislike_update(x, general_params)
            assert x == pytest.approx(expected, abs=1e-12)

    def test_posterior_monotone(self, general_params, rng):
        """Test that likes raise and dislikes lower the posterior."""
        for x in rng.uniform(0.01, 0.99, size=50):
            assert like_update(x, general_params) > x
            assert dislike_update(x, general_params) < x

    def test_martingale(self, general_params, rng):
        """Test that the expected posterior after one review equals the prior."""
        for x in rng.uniform(0.01, 0.99, size=50):
            liked = like_probability(x, general_params)
            average = liked * like_update(x, general_params) + (1 - liked) * dislike_update(x, general_params)
            assert average == pytest.approx(x, abs=1e-12)

    def test_long_history_does_not_underflow(self, symmetric_params):
        """Test that long histories stay in (0, 1)."""
        # Two net dislikes: odds (2/3)^2
        x = posterior(0.5, ReviewCount(1000, 1002), symmetric_params)
        assert x == pytest.approx(4 / 13)


class TestSequenceProbability:
    """Tests for the sequence_probability function."""

    def test_matches_product_of_predictions(self, general_params):
        """Test the probability of one ordering against the chain of predictive probabilities."""
        x = 0.5
        prob = 1.0
        for review in 'LDLLD':
            liked = like_probability(x, general_params)
            if review == 'L':
                prob *= liked
                x = like_update(x, general_params)
            else:
                prob *= 1 - liked
                x = dislike_update(x, general_params)
        assert sequence_probability(0.5, ReviewCount(3, 2), general_params) == pytest.approx(prob, rel=1e-12)

    def test_total_mass(self, general_params):
        """Test that all orderings of length t carry total probability one."""
        t = 8
        total = sum(
            math.comb(t, d) * sequence_probability(0.3, ReviewCount(t - d, d), general_params)
            for d in range(t + 1)
        )
        assert total == pytest.approx(1.0, abs=1e-12)


class TestThresholds:
    """Tests for rewards and thresholds."""

    def test_myopic_threshold(self, symmetric_params):
        """Test (c - q) / (p - q)."""
        assert myopic_threshold(symmetric_params) == pytest.approx(0.15)
        assert local_reward(0.15, symmetric_params, PricingMode.dynamic()) == pytest.approx(0.0, abs=1e-15)

    def test_static_threshold(self, symmetric_params):
        """Test x_min for a static price."""
        assert static_threshold(symmetric_params, 0.52) == pytest.approx(0.6)
        assert local_reward(0.9, symmetric_params, PricingMode.static(0.52)) == pytest.approx(0.09)

    def test_barrier_offset(self, symmetric_params):
        """Test the dislike budget between 0.5 and 0.15."""
        assert barrier_offset(0.5, 0.15, symmetric_params) == pytest.approx(
            math.log(17 / 3) / math.log(1.5))
        assert crossing_dislikes(0.5, 0.15, symmetric_params) == 5

    def test_landing_on_threshold_does_not_cross(self, symmetric_params):
        """Test that a prior landing exactly on x_stop needs one more dislike."""
        assert crossing_dislikes(0.5, 0.4, symmetric_params) == 2


class TestLattice:
    """Tests for lattice detection."""

    def test_symmetric_lattice(self, symmetric_params):
        """Test that the symmetric case has unit steps."""
        lattice = detect_lattice(symmetric_params)
        assert (lattice.a, lattice.b) == (1, 1)
        assert lattice.gamma == pytest.approx(1.0)
        assert lattice.unit == pytest.approx(math.log(1.5))

    def test_no_lattice_within_denominator(self, general_params):
        """Test that a non-integer ratio is rejected when only b = 1 is allowed."""
        assert detect_lattice(general_params, max_denominator=1) is None

    def test_degenerate(self):
        """Test that q = 0 has no lattice."""
        assert detect_lattice(ModelParams(p=0.6, q=0.0, c=0.3, delta=0.9)) is None

    def test_invalid_arguments(self, symmetric_params):
        """Test argument validation."""
        with pytest.raises(ValueError):
            detect_lattice(symmetric_params, max_denominator=0)
        with pytest.raises(ValueError):
            detect_lattice(symmetric_params, tol=0.0)

    def test_lattice_priors_match_posteriors(self, symmetric_params):
        """Test that x_{a*l - b*d} is the posterior after (l, d)."""
        lattice = detect_lattice(symmetric_params)
        for r in (ReviewCount(3, 1), ReviewCount(0, 4), ReviewCount(5, 5)):
            i = net_index(r, lattice)
            assert float(lattice_prior(0.5, i, lattice)) == pytest.approx(posterior(0.5, r, symmetric_params))

    def test_review_count_validation(self):
        """Test that negative counts are rejected."""
        with pytest.raises(ValueError):
            ReviewCount(-1, 0)
        assert ReviewCount(2, 3).total == 5


class TestRandomizedProperties:
    """Identities checked over one hundred random parameter draws."""

    def test_martingale(self, random_params):
        """Test E[posterior after one review] = prior."""
        for params in random_params:
            x = params.x0
            liked = like_probability(x, params)
            average = liked * like_update(x, params) + (1 - liked) * dislike_update(x, params)
            assert average == pytest.approx(x, abs=1e-12)

    def test_updates_commute(self, random_params):
        """Test L(D(x)) = D(L(x))."""
        for params in random_params:
            x = params.x0
            assert like_update(dislike_update(x, params), params) == pytest.approx(
                dislike_update(like_update(x, params), params), abs=1e-12)

    def test_posterior_monotone(self, random_params):
        """Test that one more like raises and one more dislike lowers the posterior."""
        for params in random_params:
            base = posterior(params.x0, ReviewCount(2, 3), params)
            assert posterior(params.x0, ReviewCount(3, 3), params) > base
            assert posterior(params.x0, ReviewCount(2, 4), params) < base

    def test_sequence_probability_identity(self, random_params, rng):
        """Test P(sequence) = x p^l (1-p)^d + (1-x) q^l (1-q)^d for a random ordering."""
        for params in random_params:
            x = params.x0
            likes, dislikes = (int(n) for n in rng.integers(0, 8, size=2))
            order = rng.permutation(['L'] * likes + ['D'] * dislikes)
            prior, prob = x, 1.0
            for review in order:
                liked = like_probability(prior, params)
                prob *= liked if review == 'L' else 1 - liked
                prior = like_update(prior, params) if review == 'L' else dislike_update(prior, params)
            expected = (x * params.p ** likes * (1 - params.p) ** dislikes
                        + (1 - x) * params.q ** likes * (1 - params.q) ** dislikes)
            assert sequence_probability(x, ReviewCount(likes, dislikes), params) == pytest.approx(expected, rel=1e-10)
            assert prob == pytest.approx(expected, rel=1e-10)


class TestLatticePeriod:
    """Tests for lattices with unequal like and dislike steps."""

    @pytest.mark.parametrize('gamma_like,gamma_dislike,c', [(2, 1, 0.3), (1, 2, 0.6), (3, 2, 0.5)])
    def test_detected_steps(self, lattice_params, gamma_like, gamma_dislike, c):
        """Test that the step ratio is recovered."""
        params = lattice_params(gamma_like, gamma_dislike, 1.5, c)
        lattice = detect_lattice(params)
        assert (lattice.a, lattice.b) == (gamma_like, gamma_dislike)

    @pytest.mark.parametrize('gamma_like,gamma_dislike,c', [(2, 1, 0.3), (1, 2, 0.6), (3, 2, 0.5)])
    def test_period(self, lattice_params, gamma_like, gamma_dislike, c, rng):
        """Test that b likes and a dislikes return to the starting prior."""
        params = lattice_params(gamma_like, gamma_dislike, 1.5, c)
        lattice = detect_lattice(params)
        for x in rng.uniform(0.01, 0.99, size=20):
            assert posterior(x, ReviewCount(lattice.b, lattice.a), params) == pytest.approx(x, abs=1e-12)
