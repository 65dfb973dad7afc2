#!/usr/bin/env python3
"""
Extended Module for Review Pricing

Contains the general-quality model: distribution-valued beliefs over a grid of
product qualities, order-independent review updates, memoised posterior means
and the finite-horizon dynamic program with its horizon error certificate.
"""

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.special import logsumexp, xlogy

from review_pricing.model import PricingMode, ReviewCount


DEFAULT_GRID_POINTS = 501
DEFAULT_HORIZON = 500
HORIZON_CAP = 2000
WEIGHT_TOLERANCE = 1e-12
BUY_TOLERANCE = 1e-12


class Review(Enum):
    """Outcome of one sale."""
    LIKE = "like"
    DISLIKE = "dislike"


@dataclass(frozen=True, eq=False)
class QualityDistribution:
    """
    Public belief over the like probability of the product.

    Attributes:
        support: Strictly increasing quality values in [0, 1]
        weights: Nonnegative probabilities summing to one
    """
    support: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        support = np.array(self.support, dtype=float)
        weights = np.array(self.weights, dtype=float)
        if support.ndim != 1 or support.shape != weights.shape or support.size == 0:
            raise ValueError("Support and weights must be nonempty one-dimensional arrays of equal length")
        if np.any(np.diff(support) <= 0):
            raise ValueError("Support values must be strictly increasing")
        if support[0] < 0.0 or support[-1] > 1.0:
            raise ValueError(f"Support must lie in [0, 1] (got [{support[0]}, {support[-1]}])")
        if np.any(weights < 0.0):
            raise ValueError("Weights must be nonnegative")
        if abs(weights.sum() - 1.0) > WEIGHT_TOLERANCE:
            raise ValueError(f"Weights must sum to 1 (got {weights.sum():.15g})")
        support.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, 'support', support)
        object.__setattr__(self, 'weights', weights)

    @cached_property
    def mean(self) -> float:
        return float(np.dot(self.support, self.weights))

    @property
    def variance(self) -> float:
        return float(np.dot((self.support - self.mean) ** 2, self.weights))

    @property
    def std(self) -> float:
        return float(np.sqrt(self.variance))

    @staticmethod
    def from_weights(support: Sequence[float], weights: Sequence[float]) -> 'QualityDistribution':
        """Distribution with the given support and weights normalised to sum to one."""
        weights = np.asarray(weights, dtype=float)
        total = weights.sum()
        if total <= 0.0:
            raise ValueError("Weights must have a positive sum")
        return QualityDistribution(np.asarray(support, dtype=float), weights / total)

    @staticmethod
    def uniform(low: float, high: float, points: int = DEFAULT_GRID_POINTS) -> 'QualityDistribution':
        """Uniform belief on an evenly spaced grid of `points` qualities in [low, high]."""
        if points < 1:
            raise ValueError(f"Grid needs at least one point, got {points}")
        if points == 1 or low == high:
            return QualityDistribution.point_mass(0.5 * (low + high))
        if not low < high:
            raise ValueError(f"Grid bounds must satisfy low < high (got {low}, {high})")
        return QualityDistribution(np.linspace(low, high, points), np.full(points, 1.0 / points))

    @staticmethod
    def two_point(q: float, p: float, x: float) -> 'QualityDistribution':
        """The binary model: quality p with probability x, q otherwise."""
        if not q < p:
            raise ValueError(f"Two-point support needs q < p (got q={q}, p={p})")
        if not 0.0 <= x <= 1.0:
            raise ValueError(f"Prior must lie in [0, 1], got {x}")
        return QualityDistribution(np.array([q, p]), np.array([1.0 - x, x]))

    @staticmethod
    def point_mass(value: float) -> 'QualityDistribution':
        return QualityDistribution(np.array([value]), np.array([1.0]))


def update(dist: QualityDistribution, review: Review) -> QualityDistribution:
    """
    Belief after one review.

    Args:
        dist: Current belief
        review: Review.LIKE or Review.DISLIKE

    Returns:
        Updated belief, weight(q) proportional to q weight(q) after a like and
        (1 - q) weight(q) after a dislike
    """
    if review == Review.LIKE:
        if dist.mean <= 0.0:
            raise ValueError("A like is impossible under a belief with mean 0")
        weights = dist.support * dist.weights / dist.mean
    else:
        if dist.mean >= 1.0:
            raise ValueError("A dislike is impossible under a belief with mean 1")
        weights = (1.0 - dist.support) * dist.weights / (1.0 - dist.mean)
    return QualityDistribution(dist.support, weights / weights.sum())


def _log_weights(dist: QualityDistribution) -> np.ndarray:
    with np.errstate(divide='ignore'):
        return np.log(dist.weights)


def posterior_general(dist0: QualityDistribution, r: ReviewCount) -> QualityDistribution:
    """
    Belief after r.likes likes and r.dislikes dislikes in any order.

    weight(q) is proportional to q^l (1-q)^d weight0(q); evaluated in log space.
    """
    log_weights = (_log_weights(dist0)
                   + xlogy(r.likes, dist0.support)
                   + xlogy(r.dislikes, 1.0 - dist0.support))
    norm = logsumexp(log_weights)
    if not np.isfinite(norm):
        raise ValueError(f"Review count {r} has probability zero under the initial belief")
    return QualityDistribution(dist0.support, np.exp(log_weights - norm))


class PosteriorMeanTable:
    """
    Memoised posterior means E(X_{l,d}), one array per diagonal l + d = t.

    diagonal(t)[d] is the mean after t - d likes and d dislikes. Cells that cannot
    be reached under the initial belief hold 0.5.
    """

    def __init__(self, dist0: QualityDistribution):
        self.dist0 = dist0
        self._log_weights = _log_weights(dist0)
        self._diagonals: Dict[int, np.ndarray] = {}

    def diagonal(self, t: int) -> np.ndarray:
        if t < 0:
            raise ValueError(f"Diagonal index must be nonnegative, got {t}")
        cached = self._diagonals.get(t)
        if cached is None:
            cached = self._compute(t)
            self._diagonals[t] = cached
        return cached

    def mean(self, r: ReviewCount) -> float:
        return float(self.diagonal(r.total)[r.dislikes])

    def prefill(self, t_max: int):
        """Compute every diagonal up to t_max."""
        for t in range(t_max + 1):
            self.diagonal(t)

    def _compute(self, t: int) -> np.ndarray:
        support = self.dist0.support
        dislikes = np.arange(t + 1)[:, None]
        likes = t - dislikes
        log_mass = self._log_weights[None, :] + xlogy(likes, support[None, :]) + xlogy(dislikes, 1.0 - support[None, :])
        with np.errstate(invalid='ignore', divide='ignore'):
            means = np.exp(logsumexp(log_mass, axis=1, b=support[None, :]) - logsumexp(log_mass, axis=1))
        means = np.nan_to_num(means, nan=0.5)
        means.setflags(write=False)
        return means


@dataclass(frozen=True, eq=False)
class ExtendedSolution:
    """
    Finite-horizon solution of the general-quality model.

    Layers 0..M-1 of grid_values are nonnegative in dynamic mode; layer M holds the
    seed (E - c) / (1 - delta), which is clipped at zero only with clip_seed and so
    may be negative. to_dict reports its minimum as seed_layer_min.

    Attributes:
        value: Estimate of V(X0)
        horizon: Number of layers M
        error_bound: (1 - c) / (1 - delta) * delta^M
        sharpened_bound: delta^M / (M (1 - delta)), a diagnostic for smooth priors
        grid_values: grid_values[i][d] is the estimate after i - d likes and d dislikes
        continue_mask: continue_mask[i][d] tells whether selling continues at that cell
        mode: Pricing strategy
        c: Unit cost
        delta: Discount factor
        clip_seed: Whether the seed layer was clipped at zero
    """
    value: float
    horizon: int
    error_bound: float
    sharpened_bound: float
    grid_values: Tuple[np.ndarray, ...]
    continue_mask: Tuple[np.ndarray, ...]
    mode: PricingMode
    c: float
    delta: float
    clip_seed: bool = False
    table: Optional[PosteriorMeanTable] = field(default=None, repr=False)

    def value_at(self, r: ReviewCount) -> float:
        if r.total > self.horizon:
            raise ValueError(f"Review count {r} lies beyond the horizon M={self.horizon}")
        return float(self.grid_values[r.total][r.dislikes])

    def continues(self, t: int, dislikes: np.ndarray) -> np.ndarray:
        """Continue decisions for cells on diagonal t; beyond the horizon the seed rule applies."""
        if t <= self.horizon:
            return self.continue_mask[t][dislikes]
        means = self.table.diagonal(t)[dislikes]
        if self.mode.is_dynamic:
            return means >= self.c - BUY_TOLERANCE
        return means >= self.mode.price - BUY_TOLERANCE

    def to_dict(self) -> dict:
        return {
            'mode': self.mode.describe(),
            'value': self.value,
            'horizon': self.horizon,
            'error_bound': self.error_bound,
            'sharpened_bound': self.sharpened_bound,
            'clip_seed': self.clip_seed,
            'seed_layer_min': float(self.grid_values[-1].min()),
        }


def solve_extended(dist0: QualityDistribution, c: float, delta: float, horizon: int = DEFAULT_HORIZON,
                   mode: Optional[PricingMode] = None, clip_seed: bool = False,
                   table: Optional[PosteriorMeanTable] = None,
                   horizon_cap: int = HORIZON_CAP) -> ExtendedSolution:
    """
    Backward induction over review counts l + d <= M.

    The seed layer uses the estimator (E(X_{l,d}) - c) / (1 - delta) that ignores
    future reviews; the layers below follow
    V(X) = max(0, E(X) - c + delta (E(X) V(L X) + (1 - E(X)) V(D X))).
    Static pricing earns pi - c while E(X) >= pi and nothing afterwards.

    Args:
        dist0: Initial belief with mean strictly between 0 and 1
        c: Unit cost
        delta: Discount factor in (0, 1)
        horizon: Number of layers M
        mode: Pricing strategy, dynamic by default
        clip_seed: Use max(0, seed) on layer M
        table: Posterior means to reuse across calls
        horizon_cap: Largest accepted M

    Returns:
        ExtendedSolution
    """
    mode = mode or PricingMode.dynamic()
    if not 0.0 < delta < 1.0:
        raise ValueError(f"Discount factor must lie in (0, 1), got {delta}")
    if not 0.0 <= c <= 1.0:
        raise ValueError(f"Cost must lie in [0, 1], got {c}")
    if horizon < 1:
        raise ValueError(f"Horizon must be at least 1, got {horizon}")
    if horizon > horizon_cap:
        raise ValueError(f"Horizon M={horizon} exceeds the configured cap of {horizon_cap}")
    if not 0.0 < dist0.mean < 1.0:
        raise ValueError(f"Initial belief mean must lie in (0, 1), got {dist0.mean}")
    if not mode.is_dynamic and not c <= mode.price <= 1.0:
        raise ValueError(f"Static price must lie in [c, 1] = [{c}, 1], got {mode.price}")
    if table is None:
        table = PosteriorMeanTable(dist0)
    elif table.dist0 is not dist0:
        raise ValueError("Posterior mean table was built for a different initial belief")

    scale = 1.0 / (1.0 - delta)
    means = table.diagonal(horizon)
    if mode.is_dynamic:
        values = (means - c) * scale
        if clip_seed:
            values = np.maximum(values, 0.0)
        mask = means >= c - BUY_TOLERANCE
    else:
        mask = means >= mode.price - BUY_TOLERANCE
        values = np.where(mask, (mode.price - c) * scale, 0.0)

    layers = [values]
    masks = [mask]
    for i in range(horizon - 1, -1, -1):
        means = table.diagonal(i)
        following = layers[-1]
        future = means * following[: i + 1] + (1.0 - means) * following[1:]
        if mode.is_dynamic:
            continuation = means - c + delta * future
            mask = continuation >= 0.0
            values = np.maximum(continuation, 0.0)
        else:
            mask = means >= mode.price - BUY_TOLERANCE
            values = np.where(mask, mode.price - c + delta * future, 0.0)
        layers.append(values)
        masks.append(mask)

    layers.reverse()
    masks.reverse()
    return ExtendedSolution(
        value=float(layers[0][0]),
        horizon=horizon,
        error_bound=(1.0 - c) * scale * delta ** horizon,
        sharpened_bound=delta ** horizon / (horizon * (1.0 - delta)),
        grid_values=tuple(layers),
        continue_mask=tuple(masks),
        mode=mode,
        c=c,
        delta=delta,
        clip_seed=clip_seed,
        table=table,
    )


def _price_grid(c: float, top: float, resolution: int) -> np.ndarray:
    if resolution < 1:
        raise ValueError(f"Resolution must be at least 1, got {resolution}")
    return c + (top - c) * np.arange(1, resolution + 1) / resolution


def price_sweep(dist0: QualityDistribution, c: float, delta: float, horizon: int = DEFAULT_HORIZON,
                resolution: int = 200, prices: Optional[Sequence[float]] = None,
                table: Optional[PosteriorMeanTable] = None) -> pd.DataFrame:
    """
    Static revenue V(X0) for a set of prices.

    Args:
        dist0: Initial belief
        c: Unit cost
        delta: Discount factor
        horizon: Number of layers M
        resolution: Number of grid prices in (c, E(X0)] when prices is not given
        prices: Explicit prices
        table: Posterior means to reuse

    Returns:
        DataFrame with columns price, revenue
    """
    table = table or PosteriorMeanTable(dist0)
    if prices is None:
        prices = _price_grid(c, dist0.mean, resolution)
    rows = []
    for price in prices:
        solution = solve_extended(dist0, c, delta, horizon, PricingMode.static(float(price)), table=table)
        rows.append({'price': float(price), 'revenue': solution.value})
    return pd.DataFrame(rows, columns=['price', 'revenue'])


def cost_sweep(dist0: QualityDistribution, costs: Sequence[float], delta: float,
               horizon: int = DEFAULT_HORIZON, resolution: int = 200) -> pd.DataFrame:
    """
    Best static revenue and dynamic revenue for each cost.

    The static revenue is the maximum over a grid of `resolution` prices in (c, E(X0)].

    Returns:
        DataFrame with columns cost, revenue_static, revenue_dynamic
    """
    table = PosteriorMeanTable(dist0)
    rows = []
    for cost in costs:
        cost = float(cost)
        if cost < dist0.mean:
            static = price_sweep(dist0, cost, delta, horizon, resolution, table=table)['revenue'].max()
        else:
            static = 0.0
        dynamic = solve_extended(dist0, cost, delta, horizon, table=table).value
        rows.append({'cost': cost, 'revenue_static': float(static), 'revenue_dynamic': dynamic})
    return pd.DataFrame(rows, columns=['cost', 'revenue_static', 'revenue_dynamic'])
