#!/usr/bin/env python3
"""
Series Solver Module for Review Pricing

Contains the combinatorial solver with guaranteed truncation error: surviving
probability mass per review count, the series Phi(r) and the stopping prior x*
derived from it, expected rewards under dynamic and static pricing, and the
search for the best static price.
"""

import math
from dataclasses import dataclass
from typing import Any, Dict, Iterator, List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy.special import expit, logit

from review_pricing.model import (
    ModelParams,
    PricingMode,
    ReviewCount,
    crossing_dislikes,
    like_probability,
    local_reward,
    posterior,
    static_threshold,
)


BARRIER_EPSILON = 1e-12
DEFAULT_EPSILON = 1e-9
DEFAULT_RESOLUTION = 10_000
MAX_REFINEMENTS = 60


@dataclass(frozen=True)
class SeriesSolution:
    """
    Result of a series evaluation.

    Attributes:
        x_star: Stopping prior (dynamic) or x_min (static)
        value: Estimate of V(x)
        epsilon: Guaranteed bound on |V(x) - value|
        t_epsilon: Last diagonal likes + dislikes included in the sum
        mode: Pricing strategy
        x: Prior the value refers to
        phi_good: Phi(p), when computed
        phi_bad: Phi(q), when computed
    """
    x_star: float
    value: float
    epsilon: float
    t_epsilon: int
    mode: PricingMode
    x: float
    phi_good: Optional[float] = None
    phi_bad: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        result = {
            'mode': self.mode.describe(),
            'x0': self.x,
            'x_star': self.x_star,
            'value': self.value,
            'epsilon': self.epsilon,
            't_epsilon': self.t_epsilon,
        }
        if self.phi_good is not None:
            result['phi_good'] = self.phi_good
            result['phi_bad'] = self.phi_bad
        return result


@dataclass(frozen=True)
class ReachGrid:
    """
    Surviving probability mass on every diagonal likes + dislikes = t <= t_max.

    Attributes:
        x: Initial prior
        x_stop: Stopping threshold
        t_max: Last diagonal stored
        alive: alive[t][d] is the probability of reaching (t - d likes, d dislikes) without stopping
        stopped: stopped[t] is the mass that crossed the threshold on diagonal t
    """
    x: float
    x_stop: float
    t_max: int
    alive: Tuple[np.ndarray, ...]
    stopped: np.ndarray

    def mass(self, r: ReviewCount) -> float:
        if r.total > self.t_max:
            raise ValueError(f"Review count {r} lies beyond t_max={self.t_max}")
        return float(self.alive[r.total][r.dislikes])

    def alive_mass(self, t: int) -> float:
        return float(self.alive[t].sum())

    def stopped_mass(self, t: int) -> float:
        """Mass stopped exactly on diagonal t."""
        return float(self.stopped[t])

    def cumulative_stopped(self, t: int) -> float:
        return float(self.stopped[: t + 1].sum())


@dataclass(frozen=True)
class StaticPriceResult:
    """
    Best static price found by optimal_static_price.

    Attributes:
        price: Best price, None when no price yields a positive value
        value: V(x0) at that price
        m_pi: Net dislikes tolerated at that price
        candidates: Every evaluated price with columns price, value, m_pi
    """
    price: Optional[float]
    value: float
    m_pi: Optional[int]
    candidates: pd.DataFrame


def _finite(values: np.ndarray) -> np.ndarray:
    return np.where(np.isfinite(values), values, 0.0)


def _diagonal_shift(t: int, like_step: float, dislike_step: float) -> Tuple[np.ndarray, np.ndarray]:
    """Log-odds shift and its magnitude for every cell of diagonal t (indexed by dislikes)."""
    dislikes = np.arange(t + 1)
    likes = t - dislikes
    # 0 * inf must count as no shift when q = 0 or p = 1
    with np.errstate(invalid='ignore'):
        up = np.where(likes > 0, likes * like_step, 0.0)
        down = np.where(dislikes > 0, dislikes * dislike_step, 0.0)
        return up - down, up + down


def _surviving(shift: np.ndarray, scale: np.ndarray, offset: float, eps: float) -> np.ndarray:
    """Cells whose prior is not strictly below the threshold; cells on it survive."""
    margin = 1.0 + _finite(scale) + (abs(offset) if math.isfinite(offset) else 0.0)
    with np.errstate(invalid='ignore'):
        return shift + offset >= -eps * margin


def _diagonals(params: ModelParams, base: float, offset: float, like_chance: Optional[float] = None,
               eps: float = BARRIER_EPSILON) -> Iterator[Tuple[int, np.ndarray, np.ndarray, float]]:
    """
    Walk the review-count triangle diagonal by diagonal.

    Args:
        params: Model parameters
        base: Log-odds of the initial prior
        offset: Log-odds gap between the initial prior and the threshold
        like_chance: Fixed like probability (known true quality); None uses the posterior
        eps: Relative barrier tolerance

    Yields:
        (t, posteriors, alive mass, mass stopped on this diagonal)
    """
    like_step, dislike_step = params.like_step, params.dislike_step
    alive = np.ones(1)
    t = 0
    while True:
        shift, scale = _diagonal_shift(t, like_step, dislike_step)
        with np.errstate(invalid='ignore'):
            posteriors = np.nan_to_num(expit(base + shift), nan=0.5)
        stopped = 0.0
        if t > 0:
            keep = _surviving(shift, scale, offset, eps)
            stopped = float(alive[~keep].sum())
            alive = np.where(keep, alive, 0.0)
        yield t, posteriors, alive, stopped

        chance = like_probability(posteriors, params) if like_chance is None else like_chance
        following = np.zeros(t + 2)
        following[: t + 1] += alive * chance
        following[1:] += alive * (1.0 - chance)
        alive = following
        t += 1


def _validate_priors(x: float, x_stop: float):
    if not 0.0 < x_stop <= x < 1.0:
        raise ValueError(f"Priors must satisfy 0 < x_stop <= x < 1 (got x={x}, x_stop={x_stop})")


def reach_grid(x: float, params: ModelParams, x_stop: float, t_max: int) -> ReachGrid:
    """
    Surviving mass for every review count up to t_max.

    mass(l, d) = mass(l-1, d) P(like at x_{l-1,d}) + mass(l, d-1) P(dislike at x_{l,d-1}),
    zeroed where the posterior falls strictly below x_stop.
    """
    _validate_priors(x, x_stop)
    if t_max < 0:
        raise ValueError(f"t_max must be nonnegative, got {t_max}")

    alive: List[np.ndarray] = []
    stopped = np.zeros(t_max + 1)
    base = float(logit(x))
    for t, _, mass, lost in _diagonals(params, base, base - float(logit(x_stop))):
        alive.append(mass.copy())
        stopped[t] = lost
        if t == t_max:
            break
    return ReachGrid(x=x, x_stop=x_stop, t_max=t_max, alive=tuple(alive), stopped=stopped)


def reach_probability(x: float, params: ModelParams, x_stop: float, r: ReviewCount) -> float:
    """
    Probability that the process reaches review count r without stopping.

    Args:
        x: Initial prior
        params: Model parameters
        x_stop: Stopping threshold
        r: Review counts

    Returns:
        Surviving probability mass at (r.likes, r.dislikes)
    """
    return reach_grid(x, params, x_stop, r.total).mass(r)


def _reward_bound(params: ModelParams, mode: PricingMode) -> float:
    if mode.is_dynamic:
        return max(1.0 - params.c, params.c)
    return abs(mode.price - params.c)


def _horizon(bound: float, delta: float, epsilon: float) -> int:
    """Smallest t with bound * delta^(t+1) / (1 - delta) <= epsilon (conservatively rounded)."""
    if bound <= 0.0:
        return 0
    ratio = bound / (epsilon * (1.0 - delta))
    if ratio <= 1.0:
        return 0
    return int(math.ceil(math.log(ratio) / math.log(1.0 / delta)))


def truncation_horizon(params: ModelParams, mode: PricingMode, epsilon: float) -> int:
    """
    Number of diagonals after which the discounted tail is below epsilon.

    Each diagonal contributes at most delta^t times the largest reward magnitude,
    so t_eps = ceil(log(bound / (epsilon (1 - delta))) / log(1 / delta)).
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    return _horizon(_reward_bound(params, mode), params.delta, epsilon)


def _phi_series(r: float, params: ModelParams, epsilon: float) -> Tuple[float, int]:
    t_epsilon = _horizon(abs(r - params.c), params.delta, epsilon)
    total = 0.0
    discount = 1.0
    for t, _, alive, _ in _diagonals(params, 0.0, 0.0, like_chance=r):
        if t > t_epsilon:
            break
        total += discount * float(alive.sum())
        discount *= params.delta
    return (r - params.c) * total, t_epsilon


def phi(r: float, params: ModelParams, epsilon: float) -> float:
    """
    Discounted expected margin of a product liked with probability r, started at the threshold.

    Phi(r) = sum over surviving (l, d) of delta^(l+d) (r - c) C_0(l, d) r^l (1-r)^d, truncated
    so that the neglected tail is below epsilon.

    Args:
        r: True like probability, p or q
        params: Model parameters
        epsilon: Truncation error

    Returns:
        Phi(r)
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"Like probability must lie in [0, 1], got {r}")
    return _phi_series(r, params, epsilon)[0]


def stopping_prior(params: ModelParams, epsilon: float = DEFAULT_EPSILON) -> SeriesSolution:
    """
    Stopping prior x* = Phi(q) / (Phi(q) - Phi(p)) with |error| below epsilon.

    The series are tightened until the propagated truncation error of the ratio is
    below epsilon.

    Args:
        params: Model parameters
        epsilon: Accuracy of x*

    Returns:
        SeriesSolution with x = x_star and value 0
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")

    series_epsilon = epsilon
    for _ in range(MAX_REFINEMENTS):
        phi_good, t_good = _phi_series(params.p, params, series_epsilon)
        phi_bad, t_bad = _phi_series(params.q, params, series_epsilon)
        gap = phi_good - phi_bad - 2.0 * series_epsilon
        if gap > 0.0:
            error = series_epsilon * (abs(phi_good) + abs(phi_bad) + 2.0 * series_epsilon) / gap ** 2
            if error <= epsilon:
                break
            series_epsilon *= 0.5 * epsilon / error
        else:
            series_epsilon *= 1e-3

    x_star = phi_bad / (phi_bad - phi_good)
    return SeriesSolution(
        x_star=float(x_star),
        value=0.0,
        epsilon=epsilon,
        t_epsilon=max(t_good, t_bad),
        mode=PricingMode.dynamic(),
        x=float(x_star),
        phi_good=float(phi_good),
        phi_bad=float(phi_bad),
    )


def _validate_mode(params: ModelParams, mode: PricingMode):
    if not mode.is_dynamic and not params.c <= mode.price <= 1.0:
        raise ValueError(f"Static price must lie in [c, 1] = [{params.c}, 1], got {mode.price}")


def expected_reward(x: float, params: ModelParams, mode: PricingMode, x_stop: Optional[float] = None,
                    epsilon: float = DEFAULT_EPSILON) -> SeriesSolution:
    """
    Truncated series estimate of V(x).

    V(x) = sum over surviving (l, d) with l + d <= t_eps of delta^(l+d) P(reach (l, d)) R(x_{l,d}).

    Args:
        x: Initial prior in (0, 1]
        params: Model parameters
        mode: Pricing strategy
        x_stop: Stopping threshold; defaults to x* (dynamic) or x_min (static)
        epsilon: Guaranteed truncation error

    Returns:
        SeriesSolution for x
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if not 0.0 < x <= 1.0:
        raise ValueError(f"Prior must lie in (0, 1], got {x}")
    _validate_mode(params, mode)

    phi_good = phi_bad = None
    if x_stop is None:
        if mode.is_dynamic:
            fragment = stopping_prior(params, epsilon)
            x_stop, phi_good, phi_bad = fragment.x_star, fragment.phi_good, fragment.phi_bad
        else:
            x_stop = static_threshold(params, mode.price)
    if x_stop <= 0.0:
        raise ValueError(f"Stopping threshold must be positive, got {x_stop}")

    base = float(logit(x))
    # A static price above p is never accepted
    offset = base - float(logit(x_stop)) if x_stop < 1.0 else -math.inf
    t_epsilon = truncation_horizon(params, mode, epsilon)
    if offset < -BARRIER_EPSILON * (1.0 + abs(base)):
        # Below the threshold nothing is ever sold
        return SeriesSolution(x_star=x_stop, value=0.0, epsilon=epsilon, t_epsilon=0,
                              mode=mode, x=x, phi_good=phi_good, phi_bad=phi_bad)

    total = 0.0
    discount = 1.0
    for t, posteriors, alive, _ in _diagonals(params, base, offset):
        if t > t_epsilon:
            break
        total += discount * float(np.dot(alive, local_reward(posteriors, params, mode)))
        discount *= params.delta

    return SeriesSolution(x_star=x_stop, value=total, epsilon=epsilon, t_epsilon=t_epsilon,
                          mode=mode, x=x, phi_good=phi_good, phi_bad=phi_bad)


def _tolerated_dislikes(x0: float, x_stop: float, params: ModelParams) -> int:
    """Consecutive dislikes a buyer at x0 absorbs before refusing the price (-1: none)."""
    return max(crossing_dislikes(x0, x_stop, params) - 1, -1)


def _static_row(params: ModelParams, price: float, epsilon: float) -> Dict[str, Any]:
    x_stop = static_threshold(params, price)
    solution = expected_reward(params.x0, params, PricingMode.static(price), x_stop=x_stop, epsilon=epsilon)
    return {
        'price': price,
        'value': solution.value,
        'm_pi': _tolerated_dislikes(params.x0, x_stop, params),
    }


def efficient_frontier(params: ModelParams, epsilon: float = 1e-6) -> pd.DataFrame:
    """
    Highest static price for each number m of tolerated net dislikes (symmetric case only).

    The price for m makes the buyer exactly indifferent after m net dislikes,
    pi_m = P(like) at the posterior after m dislikes; m grows while pi_m > c.

    Args:
        params: Symmetric model parameters (q = 1 - p)
        epsilon: Truncation error of each value

    Returns:
        DataFrame with columns price, value, m_pi
    """
    if not params.is_symmetric:
        raise ValueError(f"The efficient frontier needs q = 1 - p (got p={params.p}, q={params.q})")

    rows = []
    m = 0
    while True:
        price = float(like_probability(posterior(params.x0, ReviewCount(0, m), params), params))
        if price <= params.c:
            break
        rows.append(_static_row(params, price, epsilon))
        m += 1
    return pd.DataFrame(rows, columns=['price', 'value', 'm_pi'])


def static_price_sweep(params: ModelParams, epsilon: float = 1e-6,
                       resolution: int = DEFAULT_RESOLUTION) -> pd.DataFrame:
    """
    V(x0) for a uniform grid of static prices in (c, P(like at x0)].

    Args:
        params: Model parameters
        epsilon: Truncation error of each value
        resolution: Number of grid prices

    Returns:
        DataFrame with columns price, value, m_pi
    """
    if resolution < 1:
        raise ValueError(f"Resolution must be at least 1, got {resolution}")
    top = float(like_probability(params.x0, params))
    prices = params.c + (top - params.c) * np.arange(1, resolution + 1) / resolution
    rows = [_static_row(params, float(price), epsilon) for price in prices]
    return pd.DataFrame(rows, columns=['price', 'value', 'm_pi'])


def optimal_static_price(params: ModelParams, epsilon: float = 1e-6,
                         resolution: int = DEFAULT_RESOLUTION) -> StaticPriceResult:
    """
    Best static price for a seller starting at params.x0.

    In the symmetric case only the efficient frontier needs to be searched; in
    general a uniform grid of `resolution` prices is evaluated.

    Args:
        params: Model parameters
        epsilon: Truncation error of each value
        resolution: Grid size for the general case

    Returns:
        StaticPriceResult
    """
    if params.is_symmetric:
        candidates = efficient_frontier(params, epsilon)
    else:
        candidates = static_price_sweep(params, epsilon, resolution)

    if candidates.empty or candidates['value'].max() <= 0.0:
        return StaticPriceResult(price=None, value=0.0, m_pi=None, candidates=candidates)

    best = candidates.loc[candidates['value'].idxmax()]
    return StaticPriceResult(
        price=float(best['price']),
        value=float(best['value']),
        m_pi=int(best['m_pi']),
        candidates=candidates,
    )
