#!/usr/bin/env python3
"""
Figures Module for Review Pricing

Contains the built-in parameter presets and the orchestration that regenerates
every figure table (value function, static price sweeps, extended price and
cost sweeps) and writes them as CSV files.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional, Tuple

import click
import numpy as np
import pandas as pd

from review_pricing import dp_solver, extended, series_solver
from review_pricing.formatting import write_tables
from review_pricing.model import ModelParams, PricingMode, detect_lattice


class Figure(Enum):
    """Figure tables written by reproduce_figures, by file stem."""
    DP_VALUES = "fig1_dp_values"
    STATIC_SWEEP_SYMMETRIC = "fig3_static_sweep_sym"
    STATIC_SWEEP_GENERAL = "fig3_static_sweep_gen"
    PRICE_SWEEP = "fig4_price_sweep"
    COST_SWEEP = "fig5_cost_sweep"


@dataclass(frozen=True)
class FigurePreset:
    """
    Parameters behind the figure tables.

    Attributes:
        binary: Symmetric binary instance (value function, symmetric sweep, binary curves)
        general: Asymmetric binary instance for the general static sweep
        low: Lower end of the extended quality grid
        high: Upper end of the extended quality grid
        points: Extended grid size
        horizon: Horizon M of the extended solver
        epsilon: Truncation error of the series solver
        costs: Costs of the cost sweep
    """
    binary: ModelParams = field(default_factory=lambda: ModelParams(p=0.6, q=0.4, c=0.43, delta=0.99, x0=0.5))
    general: ModelParams = field(default_factory=lambda: ModelParams(p=0.7, q=0.2, c=0.43, delta=0.99, x0=0.5))
    low: float = 0.4
    high: float = 0.6
    points: int = extended.DEFAULT_GRID_POINTS
    horizon: int = extended.DEFAULT_HORIZON
    epsilon: float = 1e-6
    costs: Tuple[float, ...] = tuple(np.round(np.linspace(0.41, 0.59, 19), 10))

    def binary_distribution(self) -> extended.QualityDistribution:
        return extended.QualityDistribution.two_point(self.binary.q, self.binary.p, self.binary.x0)

    def extended_distribution(self) -> extended.QualityDistribution:
        return extended.QualityDistribution.uniform(self.low, self.high, self.points)


def dp_values_table(preset: FigurePreset) -> pd.DataFrame:
    """V(x_i) on the lattice of the symmetric instance, dynamic pricing."""
    params = preset.binary
    solution = dp_solver.solve(params, detect_lattice(params), PricingMode.dynamic())
    for message in solution.diagnostics:
        click.echo(f"Warning: {message}", err=True)
    return solution.to_frame()


def static_sweep_table(params: ModelParams, epsilon: float, resolution: int) -> pd.DataFrame:
    """
    Static price sweep, with the efficient frontier appended in the symmetric case.

    Columns: price, value, m_pi, frontier.
    """
    sweep = series_solver.static_price_sweep(params, epsilon, resolution)
    sweep['frontier'] = False
    if not params.is_symmetric:
        return sweep
    frontier = series_solver.efficient_frontier(params, epsilon)
    frontier['frontier'] = True
    return pd.concat([sweep, frontier], ignore_index=True)


def price_sweep_table(preset: FigurePreset, resolution: int) -> pd.DataFrame:
    """Static revenue against price for the binary and the extended belief. Columns: model, price, revenue."""
    frames = []
    for name, dist in (('binary', preset.binary_distribution()), ('extended', preset.extended_distribution())):
        frame = extended.price_sweep(dist, preset.binary.c, preset.binary.delta, preset.horizon, resolution)
        frame.insert(0, 'model', name)
        frames.append(frame)
    return pd.concat(frames, ignore_index=True)


def cost_sweep_table(preset: FigurePreset, resolution: int) -> pd.DataFrame:
    """Best static and dynamic revenue against cost. Columns: model, cost, revenue_static, revenue_dynamic."""
    frames = []
    for name, dist in (('binary', preset.binary_distribution()), ('extended', preset.extended_distribution())):
        frame = extended.cost_sweep(dist, preset.costs, preset.binary.delta, preset.horizon, resolution)
        frame.insert(0, 'model', name)
        frames.append(frame)
    return pd.concat(frames, ignore_index=True)


def build_figures(preset: FigurePreset, resolution: int) -> Dict[str, pd.DataFrame]:
    """
    Compute every figure table.

    Args:
        preset: Parameter preset
        resolution: Number of grid prices in each sweep

    Returns:
        Mapping of file stem to table, in Figure order
    """
    builders = {
        Figure.DP_VALUES: lambda: dp_values_table(preset),
        Figure.STATIC_SWEEP_SYMMETRIC: lambda: static_sweep_table(preset.binary, preset.epsilon, resolution),
        Figure.STATIC_SWEEP_GENERAL: lambda: static_sweep_table(preset.general, preset.epsilon, resolution),
        Figure.PRICE_SWEEP: lambda: price_sweep_table(preset, resolution),
        Figure.COST_SWEEP: lambda: cost_sweep_table(preset, resolution),
    }
    tables = {}
    for figure, build in builders.items():
        tables[figure.value] = build()
        click.echo(f"Computed {figure.value} ({len(tables[figure.value])} rows)", err=True)
    return tables


def reproduce_figures(output_dir: Optional[str] = None, overwrite: bool = False, resolution: int = 200,
                      preset: Optional[FigurePreset] = None) -> str:
    """
    Regenerate all figure tables and write them as CSV files.

    Args:
        output_dir: Directory to write to. If None, uses 'output/TIMESTAMP'
        overwrite: Whether to replace existing figure files
        resolution: Number of grid prices in each sweep
        preset: Parameter preset, the built-in one by default

    Returns:
        The path to the output directory
    """
    if resolution < 1:
        raise ValueError(f"Resolution must be at least 1, got {resolution}")
    tables = build_figures(preset or FigurePreset(), resolution)
    target_dir = write_tables(tables, output_dir, overwrite)
    click.echo(f"Figure tables written to {target_dir}/")
    return target_dir
