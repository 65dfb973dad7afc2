#!/usr/bin/env python3
"""
Model Module for Review Pricing

Contains the market primitives of the good/bad product model and the Bayesian
belief arithmetic built on them: like/dislike updates, posteriors after a
review count, sequence probabilities and detection of the discrete prior lattice.
"""

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy.special import expit, logit, xlogy


DEFAULT_MAX_DENOMINATOR = 1000
DEFAULT_LATTICE_TOLERANCE = 1e-9
SYMMETRY_TOLERANCE = 1e-12


@dataclass(frozen=True)
class ModelParams:
    """
    Market primitives of the binary quality model.

    Attributes:
        p: Probability that a good product is liked
        q: Probability that a bad product is liked
        c: Unit production cost
        delta: Per-period discount factor
        x0: Initial prior that the product is good
    """
    p: float
    q: float
    c: float
    delta: float
    x0: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.q < self.c < self.p <= 1.0:
            raise ValueError(
                f"Model parameters must satisfy 0 <= q < c < p <= 1 "
                f"(got p={self.p}, q={self.q}, c={self.c})"
            )
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"Discount factor must lie in (0, 1), got {self.delta}")
        if not 0.0 < self.x0 < 1.0:
            raise ValueError(f"Initial prior must lie in (0, 1), got {self.x0}")

    @property
    def like_step(self) -> float:
        """Log-odds increase caused by one like, log(p/q)."""
        return float(xlogy(1, self.p) - xlogy(1, self.q))

    @property
    def dislike_step(self) -> float:
        """Log-odds decrease caused by one dislike, log((1-q)/(1-p))."""
        return float(xlogy(1, 1.0 - self.q) - xlogy(1, 1.0 - self.p))

    @property
    def is_symmetric(self) -> bool:
        """True when q = 1 - p, i.e. likes and dislikes move the prior by equal steps."""
        return abs(self.q - (1.0 - self.p)) < SYMMETRY_TOLERANCE

    def with_x0(self, x0: float) -> 'ModelParams':
        return replace(self, x0=x0)

    def with_cost(self, c: float) -> 'ModelParams':
        return replace(self, c=c)

    def with_delta(self, delta: float) -> 'ModelParams':
        return replace(self, delta=delta)


@dataclass(frozen=True)
class ReviewCount:
    """
    Number of likes and dislikes received so far.

    Attributes:
        likes: Number of likes
        dislikes: Number of dislikes
    """
    likes: int
    dislikes: int

    def __post_init__(self):
        if self.likes < 0 or self.dislikes < 0:
            raise ValueError(
                f"Review counts must be nonnegative (got likes={self.likes}, dislikes={self.dislikes})"
            )

    @property
    def total(self) -> int:
        return self.likes + self.dislikes


@dataclass(frozen=True)
class LatticeSpec:
    """
    Rational representation gamma = a/b of the like/dislike step ratio.

    When it exists, every reachable prior is x_i with index i = a*likes - b*dislikes,
    and one index step moves the log-odds by `unit`.

    Attributes:
        a: Index increase per like
        b: Index decrease per dislike
        gamma: log(p/q) / log((1-q)/(1-p))
        unit: Log-odds distance between consecutive lattice priors
    """
    a: int
    b: int
    gamma: float
    unit: float

    def __post_init__(self):
        if self.a < 1 or self.b < 1:
            raise ValueError(f"Lattice steps must be positive integers (got a={self.a}, b={self.b})")
        if math.gcd(self.a, self.b) != 1:
            raise ValueError(f"Lattice steps must be coprime (got a={self.a}, b={self.b})")


@dataclass(frozen=True)
class PricingMode:
    """
    Pricing strategy of the seller.

    Attributes:
        kind: 'dynamic' (price follows the buyer's expected value) or 'static'
        price: The fixed price for the static strategy, None for dynamic
    """
    kind: str
    price: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ('dynamic', 'static'):
            raise ValueError(f"Unknown pricing mode '{self.kind}'")
        if self.kind == 'static' and self.price is None:
            raise ValueError("Static pricing requires a price")
        if self.kind == 'dynamic' and self.price is not None:
            raise ValueError("Dynamic pricing does not take a fixed price")

    @staticmethod
    def dynamic() -> 'PricingMode':
        return PricingMode('dynamic')

    @staticmethod
    def static(price: float) -> 'PricingMode':
        return PricingMode('static', float(price))

    @property
    def is_dynamic(self) -> bool:
        return self.kind == 'dynamic'

    def describe(self) -> str:
        if self.is_dynamic:
            return 'dynamic'
        return f"static({self.price:.12g})"


def like_update(x: float, params: ModelParams) -> float:
    """
    Posterior after one like, L(x) = xp / (xp + (1-x)q).

    Args:
        x: Current prior in [0, 1]
        params: Model parameters

    Returns:
        Updated prior
    """
    if x <= 0.0 or x >= 1.0:
        return float(x)
    return x * params.p / (x * params.p + (1.0 - x) * params.q)


def dislike_update(x: float, params: ModelParams) -> float:
    """
    Posterior after one dislike, D(x) = x(1-p) / (x(1-p) + (1-x)(1-q)).

    Args:
        x: Current prior in [0, 1]
        params: Model parameters

    Returns:
        Updated prior
    """
    if x <= 0.0 or x >= 1.0:
        return float(x)
    good = x * (1.0 - params.p)
    return good / (good + (1.0 - x) * (1.0 - params.q))


def posterior_log_odds(x: float, r: ReviewCount, params: ModelParams) -> float:
    """Log-odds of the posterior after r, logit(x) + likes*log(p/q) - dislikes*log((1-q)/(1-p))."""
    shift = (xlogy(r.likes, params.p) - xlogy(r.likes, params.q)
             + xlogy(r.dislikes, 1.0 - params.p) - xlogy(r.dislikes, 1.0 - params.q))
    return float(logit(x) + shift)


def posterior(x: float, r: ReviewCount, params: ModelParams) -> float:
    """
    Posterior after an arbitrary interleaving of r.likes likes and r.dislikes dislikes.

    The update only depends on the counts. It is evaluated in log-odds space so that
    long review histories do not underflow.

    Args:
        x: Initial prior in [0, 1]
        r: Review counts
        params: Model parameters

    Returns:
        Posterior probability that the product is good
    """
    if x <= 0.0 or x >= 1.0:
        return float(x)
    return float(expit(posterior_log_odds(x, r, params)))


def like_probability(x, params: ModelParams):
    """
    Probability that the next buyer likes the product, xp + (1-x)q.

    This is also the buyer's expected value, hence the dynamic price.
    Works elementwise on numpy arrays.
    """
    return x * params.p + (1.0 - x) * params.q


def sequence_probability(x: float, r: ReviewCount, params: ModelParams) -> float:
    """
    Probability of one fixed ordering of r.likes likes and r.dislikes dislikes.

    Args:
        x: Prior in [0, 1]
        r: Review counts
        params: Model parameters

    Returns:
        x p^l (1-p)^d + (1-x) q^l (1-q)^d
    """
    good = np.exp(xlogy(r.likes, params.p) + xlogy(r.dislikes, 1.0 - params.p))
    bad = np.exp(xlogy(r.likes, params.q) + xlogy(r.dislikes, 1.0 - params.q))
    return float(x * good + (1.0 - x) * bad)


def local_reward(x, params: ModelParams, mode: PricingMode):
    """Seller's margin on one sale at prior x (elementwise on arrays)."""
    if mode.is_dynamic:
        return like_probability(x, params) - params.c
    return np.zeros_like(x, dtype=float) + (mode.price - params.c)


def myopic_threshold(params: ModelParams) -> float:
    """Prior at which the dynamic price equals the cost, (c-q)/(p-q)."""
    return (params.c - params.q) / (params.p - params.q)


def static_threshold(params: ModelParams, price: float) -> float:
    """Lowest prior at which buyers still accept the static price, x_min = (price-q)/(p-q)."""
    return (price - params.q) / (params.p - params.q)


def detect_lattice(params: ModelParams, max_denominator: int = DEFAULT_MAX_DENOMINATOR,
                   tol: float = DEFAULT_LATTICE_TOLERANCE) -> Optional[LatticeSpec]:
    """
    Detect whether the set of reachable priors is a discrete lattice.

    Expands gamma = log(p/q) / log((1-q)/(1-p)) as a continued fraction and accepts the
    first convergent a/b with b <= max_denominator and |gamma - a/b| <= tol.

    Args:
        params: Model parameters
        max_denominator: Largest dislike step b to consider
        tol: Accepted distance between gamma and a/b

    Returns:
        LatticeSpec, or None when the prior set is dense (or degenerate, q = 0 or p = 1)
    """
    if max_denominator < 1:
        raise ValueError(f"max_denominator must be at least 1, got {max_denominator}")
    if tol <= 0:
        raise ValueError(f"Tolerance must be positive, got {tol}")

    like_step = params.like_step
    dislike_step = params.dislike_step
    if not (math.isfinite(like_step) and math.isfinite(dislike_step)):
        return None
    gamma = like_step / dislike_step

    # Convergents h/k of the continued fraction of gamma
    h_prev, h = 0, 1
    k_prev, k = 1, 0
    remainder = gamma
    while True:
        term = math.floor(remainder)
        h_prev, h = h, term * h + h_prev
        k_prev, k = k, term * k + k_prev
        if k > max_denominator:
            return None
        if h >= 1 and abs(gamma - h / k) <= tol:
            unit = 0.5 * (like_step / h + dislike_step / k)
            return LatticeSpec(a=h, b=k, gamma=gamma, unit=unit)
        fractional = remainder - term
        if fractional < 1e-15:
            return None
        remainder = 1.0 / fractional


def net_index(r: ReviewCount, lattice: LatticeSpec) -> int:
    """Lattice index a*likes - b*dislikes of the posterior after r."""
    return lattice.a * r.likes - lattice.b * r.dislikes


def lattice_prior(x: float, index, lattice: LatticeSpec):
    """Prior x_i on the lattice through x (elementwise for an array of indices)."""
    return expit(logit(x) + np.asarray(index, dtype=float) * lattice.unit)


def barrier_offset(x: float, x_stop: float, params: ModelParams) -> float:
    """
    Log-odds gap between x and x_stop measured in dislikes.

    Equals log_{(1-q)/(1-p)}( x(1-x_stop) / (x_stop(1-x)) ); negative when x < x_stop.
    """
    return float((logit(x) - logit(x_stop)) / params.dislike_step)


def crossing_dislikes(x: float, x_stop: float, params: ModelParams) -> int:
    """Smallest number of dislikes that takes x strictly below x_stop."""
    m_real = barrier_offset(x, x_stop, params)
    nearest = round(m_real)
    # Landing exactly on x_stop does not stop the process
    if abs(m_real - nearest) < 1e-9:
        m_real = float(nearest)
    return math.floor(m_real) + 1
