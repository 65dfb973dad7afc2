#!/usr/bin/env python3
"""
Simulator Module for Review Pricing

Contains the Monte Carlo harness: review streams under a pricing policy and a
stopping rule, in the binary and in the general-quality model. Episodes run in
fixed-size blocks, each with its own random stream, so results do not depend on
how blocks are scheduled.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
from scipy.special import expit, logit
from scipy.stats import norm

from review_pricing.extended import ExtendedSolution, PosteriorMeanTable, QualityDistribution
from review_pricing.model import ModelParams, like_probability
from review_pricing.series_solver import stopping_prior


RNG_NAME = "PCG64/SeedSequence.spawn"
DEFAULT_BLOCK_SIZE = 4096
DEFAULT_RUNS = 10_000
DEFAULT_HORIZON = 3000
SELL_FOREVER_MIN_HORIZON = 10_000
BUY_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class PricingPolicy:
    """
    Seller behaviour during a simulated episode.

    Attributes:
        kind: 'static', 'threshold' or 'extended'
        price: Fixed price for 'static'
        x_stop: Stopping prior for 'threshold' (prices follow the buyer's expected value)
        solution: Extended solution whose stopping region is followed for 'extended'
    """
    kind: str
    price: Optional[float] = None
    x_stop: Optional[float] = None
    solution: Optional[ExtendedSolution] = None

    @staticmethod
    def static(price: float) -> 'PricingPolicy':
        return PricingPolicy('static', price=float(price))

    @staticmethod
    def threshold(x_stop: float) -> 'PricingPolicy':
        return PricingPolicy('threshold', x_stop=float(x_stop))

    @staticmethod
    def dynamic(params: ModelParams, epsilon: float = 1e-9) -> 'PricingPolicy':
        """Dynamic prices, stopping below the optimal stopping prior x*."""
        return PricingPolicy.threshold(stopping_prior(params, epsilon).x_star)

    @staticmethod
    def extended(solution: ExtendedSolution) -> 'PricingPolicy':
        if not solution.mode.is_dynamic:
            return PricingPolicy.static(solution.mode.price)
        return PricingPolicy('extended', solution=solution)

    def describe(self) -> str:
        if self.kind == 'static':
            return f"static({self.price:.12g})"
        if self.kind == 'threshold':
            return f"threshold({self.x_stop:.12g})"
        return f"extended(M={self.solution.horizon})"


@dataclass(frozen=True)
class TrueQuality:
    """
    How the product's actual like probability is chosen for each episode.

    Attributes:
        kind: 'good', 'bad', 'prior' (drawn from the public prior) or 'fixed'
        value: Like probability for 'fixed'
    """
    kind: str
    value: Optional[float] = None

    @staticmethod
    def good() -> 'TrueQuality':
        return TrueQuality('good')

    @staticmethod
    def bad() -> 'TrueQuality':
        return TrueQuality('bad')

    @staticmethod
    def from_prior() -> 'TrueQuality':
        return TrueQuality('prior')

    @staticmethod
    def fixed(value: float) -> 'TrueQuality':
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"Quality must lie in [0, 1], got {value}")
        return TrueQuality('fixed', float(value))

    def describe(self) -> str:
        return f"fixed({self.value:.12g})" if self.kind == 'fixed' else self.kind


@dataclass(frozen=True, eq=False)
class SimConfig:
    """
    Monte Carlo experiment.

    Attributes:
        model: ModelParams (binary model) or QualityDistribution (general-quality model)
        policy: Pricing policy
        true_quality: How each episode's quality is drawn
        horizon: Maximum number of periods per episode
        runs: Number of episodes
        seed: Master seed
        c: Unit cost, general-quality model only
        delta: Discount factor, general-quality model only
        block_size: Episodes per random stream
        workers: Threads used to run blocks
    """
    model: Union[ModelParams, QualityDistribution]
    policy: PricingPolicy
    true_quality: TrueQuality = field(default_factory=TrueQuality.from_prior)
    horizon: int = DEFAULT_HORIZON
    runs: int = DEFAULT_RUNS
    seed: int = 0
    c: Optional[float] = None
    delta: Optional[float] = None
    block_size: int = DEFAULT_BLOCK_SIZE
    workers: int = 1

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError(f"Horizon must be at least 1, got {self.horizon}")
        if self.runs < 1:
            raise ValueError(f"Number of runs must be at least 1, got {self.runs}")
        if self.block_size < 1:
            raise ValueError(f"Block size must be at least 1, got {self.block_size}")
        if self.workers < 1:
            raise ValueError(f"Number of workers must be at least 1, got {self.workers}")
        if self.is_binary:
            if self.policy.kind == 'extended':
                raise ValueError("The extended policy needs a QualityDistribution model")
        else:
            if self.c is None or self.delta is None:
                raise ValueError("The general-quality model needs c and delta")
            if self.policy.kind == 'threshold':
                raise ValueError("Threshold policies apply to the binary model only")

    @property
    def is_binary(self) -> bool:
        return isinstance(self.model, ModelParams)

    @property
    def cost(self) -> float:
        return self.model.c if self.is_binary else self.c

    @property
    def discount(self) -> float:
        return self.model.delta if self.is_binary else self.delta


@dataclass(frozen=True, eq=False)
class SimStats:
    """
    Aggregate results of a simulation.

    Attributes:
        mean_discounted_revenue: Average of sum delta^t (price_t - c) over episodes
        std_error: Standard error of that average
        stop_time_histogram: Number of episodes stopping at each period
        censored: Number of episodes still selling at the horizon
        survival_fraction: censored / runs
        runs: Number of episodes
        horizon: Periods per episode
        seed: Master seed
        rng: Random generator and stream-splitting scheme
        block_seeds: Spawn key of each block's stream
        revenues: Discounted revenue of every episode
        stop_times: Stopping period of every episode, -1 when censored
    """
    mean_discounted_revenue: float
    std_error: float
    stop_time_histogram: Dict[int, int]
    censored: int
    survival_fraction: float
    runs: int
    horizon: int
    seed: int
    rng: str
    block_seeds: Tuple[Tuple[int, ...], ...]
    revenues: np.ndarray = field(repr=False)
    stop_times: np.ndarray = field(repr=False)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'mean_discounted_revenue': self.mean_discounted_revenue,
            'std_error': self.std_error,
            'survival_fraction': self.survival_fraction,
            'censored': self.censored,
            'stop_time_histogram': {str(t): n for t, n in sorted(self.stop_time_histogram.items())},
            'runs': self.runs,
            'horizon': self.horizon,
            'seed': self.seed,
            'rng': self.rng,
            'block_seeds': [list(key) for key in self.block_seeds],
        }


def _binary_like_chance(config: SimConfig, rng: np.random.Generator, n: int) -> np.ndarray:
    params = config.model
    kind = config.true_quality.kind
    if kind == 'good':
        return np.full(n, params.p)
    if kind == 'bad':
        return np.full(n, params.q)
    if kind == 'fixed':
        return np.full(n, config.true_quality.value)
    return np.where(rng.random(n) < params.x0, params.p, params.q)


def _extended_like_chance(config: SimConfig, rng: np.random.Generator, n: int) -> np.ndarray:
    dist = config.model
    kind = config.true_quality.kind
    if kind == 'good':
        return np.full(n, dist.support[-1])
    if kind == 'bad':
        return np.full(n, dist.support[0])
    if kind == 'fixed':
        return np.full(n, config.true_quality.value)
    return rng.choice(dist.support, size=n, p=dist.weights)


def _run_binary_block(config: SimConfig, rng: np.random.Generator, n: int) -> Tuple[np.ndarray, np.ndarray]:
    params = config.model
    policy = config.policy
    like_chance = _binary_like_chance(config, rng, n)
    like_step, dislike_step = params.like_step, params.dislike_step

    if policy.kind == 'static':
        x_stop = (policy.price - params.q) / (params.p - params.q)
    else:
        x_stop = policy.x_stop
    if x_stop <= 0.0:
        limit = -np.inf
    elif x_stop >= 1.0:
        limit = np.inf
    else:
        limit = float(logit(x_stop))
        # Buyers at the threshold up to rounding still buy
        limit -= BUY_TOLERANCE * (1.0 + abs(limit))

    log_odds = np.full(n, float(logit(params.x0)))
    revenue = np.zeros(n)
    stop_time = np.full(n, -1)
    active = np.arange(n)
    discount = 1.0
    for t in range(config.horizon):
        if active.size == 0:
            break
        current = log_odds[active]
        buys = current >= limit
        stop_time[active[~buys]] = t
        active = active[buys]
        current = current[buys]

        if policy.kind == 'static':
            revenue[active] += discount * (policy.price - params.c)
        else:
            revenue[active] += discount * (like_probability(expit(current), params) - params.c)

        liked = rng.random(active.size) < like_chance[active]
        with np.errstate(invalid='ignore'):
            log_odds[active] = current + np.where(liked, like_step, -dislike_step)
        discount *= params.delta
    return revenue, stop_time


def _run_extended_block(config: SimConfig, rng: np.random.Generator, n: int,
                        table: PosteriorMeanTable) -> Tuple[np.ndarray, np.ndarray]:
    policy = config.policy
    like_chance = _extended_like_chance(config, rng, n)

    dislikes = np.zeros(n, dtype=np.int64)
    revenue = np.zeros(n)
    stop_time = np.full(n, -1)
    active = np.arange(n)
    discount = 1.0
    for t in range(config.horizon):
        if active.size == 0:
            break
        means = table.diagonal(t)[dislikes[active]]
        if policy.kind == 'static':
            buys = means >= policy.price - BUY_TOLERANCE
        else:
            buys = policy.solution.continues(t, dislikes[active])
        stop_time[active[~buys]] = t
        active = active[buys]
        means = means[buys]

        price = policy.price if policy.kind == 'static' else means
        revenue[active] += discount * (price - config.cost)

        liked = rng.random(active.size) < like_chance[active]
        dislikes[active] += ~liked
        discount *= config.discount
    return revenue, stop_time


def run(config: SimConfig) -> SimStats:
    """
    Simulate config.runs independent episodes.

    Each period the buyer buys iff her expected value is at least the price; a
    buyer who refuses ends the episode, as does a dynamic seller below its
    stopping region. Results depend only on (seed, runs, block_size), never on
    the number of workers.

    Args:
        config: Simulation configuration

    Returns:
        SimStats
    """
    sizes = [config.block_size] * (config.runs // config.block_size)
    if config.runs % config.block_size:
        sizes.append(config.runs % config.block_size)
    streams = np.random.SeedSequence(config.seed).spawn(len(sizes))

    table = None
    if not config.is_binary:
        if config.policy.kind == 'extended':
            table = config.policy.solution.table
        if table is None or table.dist0 is not config.model:
            table = PosteriorMeanTable(config.model)
        table.prefill(config.horizon)

    def run_block(block: int) -> Tuple[np.ndarray, np.ndarray]:
        rng = np.random.Generator(np.random.PCG64(streams[block]))
        if config.is_binary:
            return _run_binary_block(config, rng, sizes[block])
        return _run_extended_block(config, rng, sizes[block], table)

    if config.workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(run_block, range(len(sizes))))
    else:
        results = [run_block(block) for block in range(len(sizes))]

    revenues = np.concatenate([revenue for revenue, _ in results])
    stop_times = np.concatenate([stops for _, stops in results])

    stopped = stop_times[stop_times >= 0]
    times, counts = np.unique(stopped, return_counts=True)
    censored = int(np.count_nonzero(stop_times < 0))
    std_error = float(np.std(revenues, ddof=1) / np.sqrt(config.runs)) if config.runs > 1 else 0.0

    return SimStats(
        mean_discounted_revenue=float(np.mean(revenues)),
        std_error=std_error,
        stop_time_histogram={int(t): int(k) for t, k in zip(times, counts)},
        censored=censored,
        survival_fraction=censored / config.runs,
        runs=config.runs,
        horizon=config.horizon,
        seed=config.seed,
        rng=RNG_NAME,
        block_seeds=tuple(tuple(stream.spawn_key) for stream in streams),
        revenues=revenues,
        stop_times=stop_times,
    )


def estimate_sell_forever(config: SimConfig, confidence: float = 0.99) -> Tuple[float, float]:
    """
    Estimate the probability of selling forever by survival at the horizon.

    Survival at a finite horizon over-estimates selling forever; the bias vanishes
    as the horizon grows.

    Args:
        config: Simulation configuration with horizon >= 10^4
        confidence: Level of the normal-approximation interval

    Returns:
        Tuple of (estimate, confidence radius)
    """
    if config.horizon < SELL_FOREVER_MIN_HORIZON:
        raise ValueError(
            f"Estimating the probability of selling forever needs horizon >= {SELL_FOREVER_MIN_HORIZON}, "
            f"got {config.horizon}"
        )
    stats = run(config)
    estimate = stats.survival_fraction
    z = float(norm.ppf(0.5 + confidence / 2.0))
    radius = z * np.sqrt(estimate * (1.0 - estimate) / config.runs)
    return estimate, float(radius)

