#!/usr/bin/env python3
"""
DP Solver Module for Review Pricing

Contains the fast lattice solver: value estimates V(x_i) on the discrete prior
lattice seeded from the linear expansion of V around x = 1, the estimated
stopping index and a refined stopping prior.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import brentq
from scipy.special import logit

from review_pricing.model import (
    LatticeSpec,
    ModelParams,
    PricingMode,
    lattice_prior,
    like_probability,
    local_reward,
    static_threshold,
)


DEFAULT_EPSILON = 1e-4
DEFAULT_MAX_SWEEPS = 100_000
DEFAULT_SWEEP_TOLERANCE = 1e-11
ZERO_VALUE_TOLERANCE = 1e-12
INDEX_TOLERANCE = 1e-12


class DenseLatticeError(ValueError):
    """Raised when the reachable priors do not form a discrete lattice."""


@dataclass(frozen=True, eq=False)
class DpSolution:
    """
    Result of the lattice solver.

    Attributes:
        lattice: Lattice the priors live on
        indices: Lattice indices covered by the solution, increasing
        lattice_priors: Prior x_i for each index
        values: Estimated V(x_i) for each index
        i_start: Highest index solved; indices above it hold the linear seed
        i_floor: Highest index fixed at zero before solving
        i_stop: Estimated stopping index i*
        x_stop_estimate: Prior at i_stop
        x_star: Stopping prior refined between lattice points (x_min for static pricing)
        pricing_mode: Pricing strategy solved for
        epsilon: Width of the seeding band below x = 1
        sweeps: Number of Bellman sweeps performed
        diagnostics: Numerical warnings collected while solving
    """
    lattice: LatticeSpec
    indices: np.ndarray
    lattice_priors: np.ndarray
    values: np.ndarray
    i_start: int
    i_floor: int
    i_stop: int
    x_stop_estimate: float
    x_star: float
    pricing_mode: PricingMode
    epsilon: float
    sweeps: int
    diagnostics: Tuple[str, ...] = field(default_factory=tuple)

    def value(self, i: int) -> float:
        """V(x_i) for a lattice index inside the solved range."""
        position = i - int(self.indices[0])
        if position < 0 or position >= len(self.indices):
            raise ValueError(
                f"Index {i} is outside the solved range "
                f"[{int(self.indices[0])}, {int(self.indices[-1])}]"
            )
        return float(self.values[position])

    def value_at(self, x: float) -> float:
        """
        V at an arbitrary prior.

        Exact at lattice priors; piecewise linear in between and constant
        outside the solved range.
        """
        return float(np.interp(x, self.lattice_priors, self.values))

    def to_frame(self) -> pd.DataFrame:
        """Table with columns i, x, V."""
        return pd.DataFrame({
            'i': self.indices.astype(int),
            'x': self.lattice_priors,
            'V': self.values,
        })


def boundary_conditions(params: ModelParams, mode: PricingMode) -> Tuple[float, float]:
    """
    Value and slope of V at x = 1.

    Args:
        params: Model parameters
        mode: Pricing strategy

    Returns:
        Tuple of (V(1), V'(1))
    """
    scale = 1.0 / (1.0 - params.delta)
    if mode.is_dynamic:
        return (params.p - params.c) * scale, (params.p - params.q) * scale

    price = mode.price
    if not params.c <= price <= 1.0:
        raise ValueError(f"Static price must lie in [c, 1] = [{params.c}, 1], got {price}")
    return (price - params.c) * scale, 0.0


def _highest_index_below(target: float, anchor: float, unit: float, tol: float = INDEX_TOLERANCE) -> int:
    """Greatest lattice index i with x_i strictly below target (lattice anchored at `anchor`)."""
    position = (logit(target) - logit(anchor)) / unit
    # Priors that equal the target up to rounding are not below it
    return int(np.ceil(position - tol * (1.0 + abs(position)))) - 1


def _floor_prior(params: ModelParams, mode: PricingMode) -> float:
    """Prior below which V is known to vanish."""
    if not mode.is_dynamic:
        return static_threshold(params, mode.price)
    # Even learning the quality for free next period cannot cover the current loss
    future = params.delta * (params.p - params.c) / (1.0 - params.delta)
    return (params.c - params.q) / ((params.p - params.q) + future)


@dataclass
class _Sweep:
    """Working arrays of one lattice solve anchored at a given prior."""
    indices: np.ndarray
    priors: np.ndarray
    values: np.ndarray
    i_start: int
    i_floor: int
    sweeps: int
    converged: bool
    last_change: float

    def position(self, i: int) -> int:
        return i - int(self.indices[0])


def _run_sweeps(params: ModelParams, lattice: LatticeSpec, mode: PricingMode, anchor: float,
                epsilon: float, max_sweeps: int, tol: float) -> _Sweep:
    """Bellman sweeps on the truncated lattice through `anchor`."""
    a, b, unit = lattice.a, lattice.b, lattice.unit
    i_start = _highest_index_below(1.0 - epsilon, anchor, unit)
    i_floor = _highest_index_below(_floor_prior(params, mode), anchor, unit)
    if i_start <= i_floor:
        raise ValueError(
            f"Seeding band epsilon={epsilon} leaves no lattice indices to solve; use a smaller epsilon"
        )

    low = min(i_floor - b + 1, -b)
    high = max(i_start + a, a)
    indices = np.arange(low, high + 1)
    priors = lattice_prior(anchor, indices, lattice)

    v1, slope = boundary_conditions(params, mode)
    seed = v1 - (1.0 - priors) * slope
    values = np.zeros_like(priors)
    above = indices > i_start
    values[above] = seed[above]

    free = (indices > i_floor) & (indices <= i_start)
    positions = np.nonzero(free)[0]
    if mode.is_dynamic:
        values[free] = np.maximum(0.0, seed[free])
    up = positions + a
    down = positions - b
    reward = local_reward(priors[free], params, mode)
    p_like = like_probability(priors[free], params)
    p_dislike = 1.0 - p_like

    threshold = tol * (1.0 - params.delta)
    change = np.inf
    sweeps = 0
    while sweeps < max_sweeps:
        continuation = reward + params.delta * (p_like * values[up] + p_dislike * values[down])
        if mode.is_dynamic:
            continuation = np.maximum(0.0, continuation)
        change = float(np.max(np.abs(continuation - values[free])))
        values[free] = continuation
        sweeps += 1
        if change < threshold:
            break

    return _Sweep(
        indices=indices,
        priors=priors,
        values=values,
        i_start=i_start,
        i_floor=i_floor,
        sweeps=sweeps,
        converged=change < threshold,
        last_change=change,
    )


def _continuation_value(params: ModelParams, lattice: LatticeSpec, x: float, epsilon: float,
                        max_sweeps: int, tol: float) -> float:
    """R(x) + delta * E[V(next prior)] on the lattice re-anchored at x."""
    sweep = _run_sweeps(params, lattice, PricingMode.dynamic(), x, epsilon, max_sweeps, tol)
    origin = sweep.position(0)
    p_like = like_probability(x, params)
    future = p_like * sweep.values[origin + lattice.a] + (1.0 - p_like) * sweep.values[origin - lattice.b]
    return float(local_reward(x, params, PricingMode.dynamic()) + params.delta * future)


def _refine_stopping_prior(params: ModelParams, lattice: LatticeSpec, lower: float, upper: float,
                           epsilon: float, max_sweeps: int, tol: float) -> float:
    """Root of the continuation value between two consecutive lattice priors."""
    def continuation(x: float) -> float:
        return _continuation_value(params, lattice, x, epsilon, max_sweeps, tol)

    at_lower = continuation(lower)
    if at_lower >= 0.0:
        return lower
    at_upper = continuation(upper)
    if at_upper <= 0.0:
        return upper
    return float(brentq(continuation, lower, upper, xtol=1e-12))


def solve(params: ModelParams, lattice: Optional[LatticeSpec], mode: PricingMode,
          epsilon: float = DEFAULT_EPSILON, max_sweeps: int = DEFAULT_MAX_SWEEPS,
          tol: float = DEFAULT_SWEEP_TOLERANCE) -> DpSolution:
    """
    Estimate V on the prior lattice through params.x0.

    Priors above 1 - epsilon are seeded with V(1) - (1 - x) V'(1). Priors below the
    floor (where V provably vanishes, or below x_min for static pricing) are zero.
    The indices in between are solved by Bellman sweeps
    V(x_i) = max(0, R(x_i) + delta (P(like) V(x_{i+a}) + P(dislike) V(x_{i-b})))
    until the largest change drops below tol * (1 - delta).

    Args:
        params: Model parameters
        lattice: Detected lattice, None when the prior set is dense
        mode: Pricing strategy
        epsilon: Width of the seeding band below x = 1
        max_sweeps: Sweep cap; reaching it is reported in diagnostics
        tol: Target accuracy of the fixed point

    Returns:
        DpSolution
    """
    if lattice is None:
        raise DenseLatticeError(
            "The prior set is dense (likes and dislikes have incommensurable steps); "
            "use the series solver instead"
        )
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if max_sweeps < 1:
        raise ValueError(f"max_sweeps must be at least 1, got {max_sweeps}")
    boundary_conditions(params, mode)

    diagnostics: List[str] = []
    sweep = _run_sweeps(params, lattice, mode, params.x0, epsilon, max_sweeps, tol)
    if not sweep.converged:
        diagnostics.append(
            f"Sweep cap of {max_sweeps} reached with last change {sweep.last_change:.3g}"
        )

    values = sweep.values
    if mode.is_dynamic:
        zero = np.nonzero(values[: sweep.position(sweep.i_start) + 1] <= ZERO_VALUE_TOLERANCE)[0]
        i_stop = int(sweep.indices[zero[-1]])
        values[: sweep.position(i_stop) + 1] = 0.0
    else:
        i_stop = sweep.i_floor
    x_stop_estimate = float(sweep.priors[sweep.position(i_stop)])

    if mode.is_dynamic:
        upper_prior = float(sweep.priors[sweep.position(i_stop) + 1])
        x_star = _refine_stopping_prior(
            params, lattice, x_stop_estimate, upper_prior, epsilon, max_sweeps, tol
        )
    else:
        x_star = static_threshold(params, mode.price)

    return DpSolution(
        lattice=lattice,
        indices=sweep.indices,
        lattice_priors=sweep.priors,
        values=values,
        i_start=sweep.i_start,
        i_floor=sweep.i_floor,
        i_stop=i_stop,
        x_stop_estimate=x_stop_estimate,
        x_star=x_star,
        pricing_mode=mode,
        epsilon=epsilon,
        sweeps=sweep.sweeps,
        diagnostics=tuple(diagnostics),
    )
