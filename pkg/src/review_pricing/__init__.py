"""
Review Pricing

A package for pricing a product whose quality the market learns from likes and
dislikes. Computes the seller's optimal revenue and stopping prior under dynamic
and static pricing, the probability that the market learns the quality, and
the general-quality extension, with a Monte Carlo simulator as an oracle.
"""

__version__ = '1.0.0'

# Import main components for easier access
from review_pricing.model import ModelParams, ReviewCount, LatticeSpec, PricingMode, detect_lattice, posterior
from review_pricing.catalan import CatalanTable, build_table
from review_pricing.dp_solver import DpSolution, DenseLatticeError
from review_pricing.series_solver import SeriesSolution, expected_reward, stopping_prior, optimal_static_price
from review_pricing.learning import LearningReport, FalseNegativeReport, sell_forever_bounds, false_negative_ratio
from review_pricing.extended import QualityDistribution, ExtendedSolution, solve_extended
from review_pricing.simulator import SimConfig, SimStats, PricingPolicy, TrueQuality
from review_pricing.figures import reproduce_figures
