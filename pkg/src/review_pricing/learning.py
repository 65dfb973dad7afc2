#!/usr/bin/env python3
"""
Learning Module for Review Pricing

Contains the probabilities that the market learns a product's quality: bounds on
selling forever, the exact symmetric-case expressions, the net-dislike budget
and the comparison of false negatives under static and dynamic pricing.
"""

import math
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

from review_pricing.model import (
    ModelParams,
    ReviewCount,
    barrier_offset,
    crossing_dislikes,
    dislike_update,
    posterior,
    static_threshold,
)
from review_pricing.series_solver import stopping_prior
from review_pricing.simulator import PricingPolicy, SimConfig, TrueQuality, run


DEFAULT_FN_RUNS = 20_000
DEFAULT_FN_HORIZON = 10_000


@dataclass(frozen=True)
class LearningReport:
    """
    Probabilities of selling forever from prior x0 with stopping threshold x_stop.

    Attributes:
        x0: Initial prior
        x_stop: Stopping threshold
        lower: Lower bound on P(sell forever)
        upper: Upper bound on P(sell forever)
        given_good_lower: Lower bound on P(sell forever | good)
        exact_symmetric: Exact P(sell forever) when q = 1 - p, else None
        effective_stop_prior: Prior at which the walk stops in the symmetric case
        m_real: Log-odds gap between x0 and x_stop in dislikes
        m_int: Dislikes needed to drop strictly below x_stop
    """
    x0: float
    x_stop: float
    lower: float
    upper: float
    given_good_lower: float
    exact_symmetric: Optional[float]
    effective_stop_prior: float
    m_real: float
    m_int: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            'x0': self.x0,
            'x_stop': self.x_stop,
            'lower': self.lower,
            'upper': self.upper,
            'given_good_lower': self.given_good_lower,
            'exact_symmetric': self.exact_symmetric,
            'effective_stop_prior': self.effective_stop_prior,
            'm_real': self.m_real,
            'm_int': self.m_int,
        }


@dataclass(frozen=True)
class FalseNegativeReport:
    """
    Probability of abandoning a good product, static versus dynamic pricing.

    Attributes:
        ratio: FN_static / FN_dynamic
        x_star: Dynamic stopping prior
        x_min: Static stopping prior
        fn_static: P(stop | good) under the static price
        fn_dynamic: P(stop | good) under dynamic pricing
        method: 'closed_form' or 'monte_carlo'
        estimated: True when the numbers come from simulation
        ratio_at_x0: Ratio at the stopping priors actually reached from x0
    """
    ratio: float
    x_star: float
    x_min: float
    fn_static: float
    fn_dynamic: float
    method: str
    estimated: bool
    ratio_at_x0: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'ratio': self.ratio,
            'ratio_at_x0': self.ratio_at_x0,
            'x_star': self.x_star,
            'x_min': self.x_min,
            'fn_static': self.fn_static,
            'fn_dynamic': self.fn_dynamic,
            'method': self.method,
            'estimated': self.estimated,
        }


def _odds(x: float) -> float:
    return x / (1.0 - x)


def net_dislike_budget(x: float, x_stop: float, params: ModelParams) -> Tuple[float, int]:
    """
    How many dislikes separate x from the stopping threshold.

    Args:
        x: Current prior
        x_stop: Stopping threshold in (0, 1)
        params: Model parameters

    Returns:
        Tuple of (m_real, m_int): the log-odds gap in units of one dislike, and the
        smallest number of dislikes taking the prior strictly below x_stop
    """
    if not 0.0 < x_stop < 1.0:
        raise ValueError(f"Stopping threshold must lie in (0, 1), got {x_stop}")
    if not x_stop <= x < 1.0:
        raise ValueError(f"Prior must satisfy x_stop <= x < 1 (got x={x}, x_stop={x_stop})")
    return barrier_offset(x, x_stop, params), crossing_dislikes(x, x_stop, params)


def effective_stop_prior(x: float, x_stop: float, params: ModelParams) -> float:
    """
    Prior reached after m_int consecutive dislikes from x.

    In the symmetric case every stopped path ends exactly there.
    """
    _, m_int = net_dislike_budget(x, x_stop, params)
    return posterior(x, ReviewCount(0, m_int), params)


def sell_forever_bounds(x: float, x_stop: float, params: ModelParams) -> LearningReport:
    """
    Bounds on the probability that selling never stops.

    The prior is a martingale that either converges to 1 or stops at a value in
    [D(x_stop), x_stop), which gives
    (x - x_stop) / (1 - x_stop) <= P(sell forever) <= (x - D(x_stop)) / (1 - D(x_stop)).

    Args:
        x: Initial prior
        x_stop: Stopping threshold
        params: Model parameters

    Returns:
        LearningReport
    """
    m_real, m_int = net_dislike_budget(x, x_stop, params)
    below = dislike_update(x_stop, params)
    stop_prior = posterior(x, ReviewCount(0, m_int), params)

    exact = None
    if params.is_symmetric:
        exact = (x - stop_prior) / (1.0 - stop_prior)

    return LearningReport(
        x0=x,
        x_stop=x_stop,
        lower=(x - x_stop) / (1.0 - x_stop),
        upper=(x - below) / (1.0 - below),
        given_good_lower=(x - x_stop) / (x * (1.0 - x_stop)),
        exact_symmetric=exact,
        effective_stop_prior=stop_prior,
        m_real=m_real,
        m_int=m_int,
    )


def symmetric_sell_forever_given_good(p: float, m: int) -> float:
    """
    Probability that a walk with up-probability p never falls m steps below its start.

    Equals 1 - ((1 - sqrt(1 - 4p(1-p))) / (2p))^m; the square root is 2p - 1, so
    the ratio reduces to (1 - p) / p.
    """
    if not 0.5 < p <= 1.0:
        raise ValueError(f"Like probability of a good product must lie in (0.5, 1], got {p}")
    if m <= 0:
        return 0.0
    return 1.0 - ((1.0 - p) / p) ** m


def _monte_carlo_false_negatives(params: ModelParams, pi_static: float, x_star: float,
                                 runs: int, horizon: int, seed: int) -> Tuple[float, float]:
    stopped = []
    for policy in (PricingPolicy.static(pi_static), PricingPolicy.threshold(x_star)):
        config = SimConfig(model=params, policy=policy, true_quality=TrueQuality.good(),
                           horizon=horizon, runs=runs, seed=seed)
        stopped.append(1.0 - run(config).survival_fraction)
    return stopped[0], stopped[1]


def false_negative_ratio(params: ModelParams, pi_static: float, epsilon: float = 1e-9,
                         runs: int = DEFAULT_FN_RUNS, horizon: int = DEFAULT_FN_HORIZON,
                         seed: int = 0) -> FalseNegativeReport:
    """
    How much more often static pricing abandons a good product than dynamic pricing.

    In the symmetric case P(stop | good) = odds(y) / odds(x0), with y the prior where
    the walk stops, so the ratio is (1/D(x*) - 1) / (1/D(x_min) - 1). A price at or
    above p is never paid (x_min >= 1), so FN_static = 1 and the ratio is
    1 / FN_dynamic. Other cases are estimated by simulation and flagged as such.

    Args:
        params: Model parameters
        pi_static: Static price in (c, 1]
        epsilon: Accuracy of x*
        runs: Episodes per policy for the simulated estimate
        horizon: Periods per episode for the simulated estimate
        seed: Master seed for the simulated estimate

    Returns:
        FalseNegativeReport
    """
    if not params.c < pi_static <= 1.0:
        raise ValueError(f"Static price must lie in (c, 1] = ({params.c}, 1], got {pi_static}")

    x_min = static_threshold(params, pi_static)
    x_star = stopping_prior(params, epsilon).x_star

    if not params.is_symmetric:
        fn_static, fn_dynamic = _monte_carlo_false_negatives(params, pi_static, x_star, runs, horizon, seed)
        ratio = fn_static / fn_dynamic if fn_dynamic > 0.0 else math.inf
        return FalseNegativeReport(ratio=ratio, x_star=x_star, x_min=x_min, fn_static=fn_static,
                                   fn_dynamic=fn_dynamic, method='monte_carlo', estimated=True)

    x0 = params.x0
    stop_dynamic = dislike_update(x_star, params)
    fn_dynamic = min(1.0, _odds(stop_dynamic) / _odds(x0))

    if x_min >= 1.0:
        return FalseNegativeReport(ratio=1.0 / fn_dynamic, x_star=x_star, x_min=x_min, fn_static=1.0,
                                   fn_dynamic=fn_dynamic, method='closed_form', estimated=False,
                                   ratio_at_x0=1.0 / fn_dynamic)

    stop_static = dislike_update(x_min, params)
    ratio = _odds(stop_static) / _odds(stop_dynamic)

    ratio_at_x0 = None
    if x0 >= x_min:
        reached_static = effective_stop_prior(x0, x_min, params)
        reached_dynamic = effective_stop_prior(x0, x_star, params)
        ratio_at_x0 = _odds(reached_static) / _odds(reached_dynamic)

    return FalseNegativeReport(
        ratio=ratio,
        x_star=x_star,
        x_min=x_min,
        fn_static=min(1.0, _odds(stop_static) / _odds(x0)),
        fn_dynamic=fn_dynamic,
        method='closed_form',
        estimated=False,
        ratio_at_x0=ratio_at_x0,
    )
