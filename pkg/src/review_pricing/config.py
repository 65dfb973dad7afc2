#!/usr/bin/env python3
"""
Config Module for Review Pricing

Contains the run configuration shared by the command-line subcommands and its
flat JSON representation (dotted keys such as model.p or solver.epsilon).
"""

import json
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, Iterable, Optional, Union

from review_pricing.extended import DEFAULT_GRID_POINTS, DEFAULT_HORIZON, HORIZON_CAP, QualityDistribution
from review_pricing.model import DEFAULT_LATTICE_TOLERANCE, DEFAULT_MAX_DENOMINATOR, ModelParams, PricingMode
from review_pricing.series_solver import DEFAULT_RESOLUTION
from review_pricing.simulator import DEFAULT_BLOCK_SIZE, DEFAULT_RUNS
from review_pricing.simulator import DEFAULT_HORIZON as DEFAULT_SIM_HORIZON


OUTPUT_FORMATS = ('json', 'csv')
SOLVER_MODES = ('dynamic', 'static')
SIM_POLICIES = ('dynamic', 'static', 'threshold')
SIM_QUALITIES = ('prior', 'good', 'bad', 'fixed')
BLOCK_NAMES = ('model', 'solver', 'simulation', 'catalan', 'output')


@dataclass
class BinaryModelBlock:
    """Parameters of the good/bad product model."""
    p: float = 0.6
    q: float = 0.4
    c: float = 0.43
    delta: float = 0.99
    x0: float = 0.5

    def to_params(self) -> ModelParams:
        return ModelParams(p=self.p, q=self.q, c=self.c, delta=self.delta, x0=self.x0)


@dataclass
class ExtendedModelBlock:
    """Uniform quality grid of the general-quality model."""
    low: float = 0.4
    high: float = 0.6
    points: int = DEFAULT_GRID_POINTS
    c: float = 0.43
    delta: float = 0.99

    def to_distribution(self) -> QualityDistribution:
        return QualityDistribution.uniform(self.low, self.high, self.points)


@dataclass
class SolverBlock:
    """
    Solver settings.

    Attributes:
        mode: 'dynamic' or 'static'
        price: Static price
        epsilon: Accuracy parameter; None leaves the subcommand's default
        horizon_m: Horizon M of the general-quality solver
        resolution: Number of grid prices in sweeps
        max_denominator: Largest dislike step accepted by lattice detection
        tolerance: Lattice detection tolerance
        x_stop: Stopping threshold for learning reports and threshold policies
        cost_min: Smallest cost of a cost sweep
        cost_max: Largest cost of a cost sweep
        cost_steps: Number of costs in a cost sweep
    """
    mode: str = 'dynamic'
    price: Optional[float] = None
    epsilon: Optional[float] = None
    horizon_m: int = DEFAULT_HORIZON
    resolution: int = DEFAULT_RESOLUTION
    max_denominator: int = DEFAULT_MAX_DENOMINATOR
    tolerance: float = DEFAULT_LATTICE_TOLERANCE
    x_stop: Optional[float] = None
    cost_min: float = 0.41
    cost_max: float = 0.59
    cost_steps: int = 19

    def pricing_mode(self) -> PricingMode:
        if self.mode == 'static':
            return PricingMode.static(self.price)
        return PricingMode.dynamic()


@dataclass
class SimulationBlock:
    """Monte Carlo settings of the simulate subcommand."""
    policy: str = 'dynamic'
    quality: str = 'prior'
    quality_value: Optional[float] = None
    horizon: int = DEFAULT_SIM_HORIZON
    runs: int = DEFAULT_RUNS
    seed: int = 0
    block_size: int = DEFAULT_BLOCK_SIZE
    workers: int = 1


@dataclass
class CatalanBlock:
    """Barrier and size of a Catalan quadrilateral table."""
    a: Optional[float] = None
    b: Optional[float] = None
    m: float = 0.0
    tmax: Optional[int] = None


@dataclass
class OutputBlock:
    """Where and how results are written."""
    format: str = 'json'
    path: Optional[str] = None
    directory: Optional[str] = None


@dataclass
class RunConfig:
    """
    Complete configuration of one command-line run.

    Exactly one model block is present: binary or extended.
    """
    model: Union[BinaryModelBlock, ExtendedModelBlock] = field(default_factory=BinaryModelBlock)
    solver: SolverBlock = field(default_factory=SolverBlock)
    simulation: SimulationBlock = field(default_factory=SimulationBlock)
    catalan: CatalanBlock = field(default_factory=CatalanBlock)
    output: OutputBlock = field(default_factory=OutputBlock)

    def __post_init__(self):
        self.validate()

    @property
    def model_kind(self) -> str:
        return 'extended' if isinstance(self.model, ExtendedModelBlock) else 'binary'

    def validate(self):
        """Check value ranges and module caps; raises ValueError."""
        if self.solver.mode not in SOLVER_MODES:
            raise ValueError(f"solver.mode must be one of {', '.join(SOLVER_MODES)}, got '{self.solver.mode}'")
        if self.solver.mode == 'static' and self.solver.price is None:
            raise ValueError("solver.price is required when solver.mode is 'static'")
        if self.solver.epsilon is not None and self.solver.epsilon <= 0:
            raise ValueError(f"solver.epsilon must be positive, got {self.solver.epsilon}")
        if not 1 <= self.solver.horizon_m <= HORIZON_CAP:
            raise ValueError(f"solver.horizon_m must lie in [1, {HORIZON_CAP}], got {self.solver.horizon_m}")
        if self.solver.resolution < 1:
            raise ValueError(f"solver.resolution must be at least 1, got {self.solver.resolution}")
        if self.solver.max_denominator < 1:
            raise ValueError(f"solver.max_denominator must be at least 1, got {self.solver.max_denominator}")
        if self.solver.tolerance <= 0:
            raise ValueError(f"solver.tolerance must be positive, got {self.solver.tolerance}")
        if self.solver.x_stop is not None and not 0.0 < self.solver.x_stop < 1.0:
            raise ValueError(f"solver.x_stop must lie in (0, 1), got {self.solver.x_stop}")
        if self.solver.cost_steps < 1 or self.solver.cost_min > self.solver.cost_max:
            raise ValueError("solver.cost_steps must be at least 1 and solver.cost_min must not exceed solver.cost_max")
        self._validate_simulation()
        if self.catalan.tmax is not None and self.catalan.tmax < 0:
            raise ValueError(f"catalan.tmax must be nonnegative, got {self.catalan.tmax}")
        if self.output.format not in OUTPUT_FORMATS:
            raise ValueError(f"output.format must be one of {', '.join(OUTPUT_FORMATS)}, got '{self.output.format}'")
        if self.model_kind == 'binary':
            self.model.to_params()
        else:
            self.model.to_distribution()

    def _validate_simulation(self):
        sim = self.simulation
        if sim.policy not in SIM_POLICIES:
            raise ValueError(f"simulation.policy must be one of {', '.join(SIM_POLICIES)}, got '{sim.policy}'")
        if sim.quality not in SIM_QUALITIES:
            raise ValueError(f"simulation.quality must be one of {', '.join(SIM_QUALITIES)}, got '{sim.quality}'")
        for name in ('horizon', 'runs', 'block_size', 'workers'):
            if getattr(sim, name) < 1:
                raise ValueError(f"simulation.{name} must be at least 1, got {getattr(sim, name)}")

    def to_flat(self) -> Dict[str, Any]:
        """Flat mapping with dotted keys; from_flat(to_flat()) reproduces the config."""
        flat: Dict[str, Any] = {'model.kind': self.model_kind}
        for block_name in BLOCK_NAMES:
            for key, value in asdict(getattr(self, block_name)).items():
                flat[f"{block_name}.{key}"] = value
        return flat

    @staticmethod
    def model_keys(kind: str) -> set:
        """Field names of the model block for 'binary' or 'extended'."""
        model_type = ExtendedModelBlock if kind == 'extended' else BinaryModelBlock
        return {f.name for f in fields(model_type)}

    @staticmethod
    def from_flat(mapping: Dict[str, Any]) -> 'RunConfig':
        """
        Build a config from dotted keys.

        Args:
            mapping: Flat mapping such as {"model.p": 0.6, "solver.epsilon": 1e-9}

        Returns:
            RunConfig; missing keys take their defaults
        """
        binary_keys = RunConfig.model_keys('binary')
        extended_keys = RunConfig.model_keys('extended')
        blocks: Dict[str, Dict[str, Any]] = {name: {} for name in BLOCK_NAMES}
        kind = None

        for key, value in mapping.items():
            block_name, _, name = key.partition('.')
            if key == 'model.kind':
                kind = value
                continue
            if block_name not in blocks or not name:
                raise ValueError(f"Unknown configuration key '{key}'")
            blocks[block_name][name] = value

        model_names = set(blocks['model'])
        only_binary = model_names - extended_keys
        only_extended = model_names - binary_keys
        if only_binary and only_extended:
            raise ValueError(
                f"Configuration mixes binary ({', '.join(sorted(only_binary))}) and "
                f"extended ({', '.join(sorted(only_extended))}) model keys"
            )
        if kind is None:
            kind = 'extended' if only_extended else 'binary'
        if kind not in ('binary', 'extended'):
            raise ValueError(f"model.kind must be 'binary' or 'extended', got '{kind}'")

        block_types = {
            'model': ExtendedModelBlock if kind == 'extended' else BinaryModelBlock,
            'solver': SolverBlock,
            'simulation': SimulationBlock,
            'catalan': CatalanBlock,
            'output': OutputBlock,
        }
        for block_name, block_type in block_types.items():
            unknown = set(blocks[block_name]) - {f.name for f in fields(block_type)}
            if unknown:
                names = ', '.join(f"{block_name}.{name}" for name in sorted(unknown))
                raise ValueError(f"Unknown configuration key(s) for a {kind} model: {names}")

        try:
            return RunConfig(**{name: block_types[name](**blocks[name]) for name in BLOCK_NAMES})
        except TypeError as e:
            raise ValueError(f"Invalid configuration: {e}")

    def to_json(self) -> str:
        return json.dumps(self.to_flat(), indent=2, sort_keys=True)

    @staticmethod
    def read_flat(path: str) -> Dict[str, Any]:
        """Raw dotted-key mapping of a JSON config file; unreadable or malformed files raise ValueError."""
        try:
            with open(path, 'r') as f:
                mapping = json.load(f)
        except OSError as e:
            raise ValueError(f"Cannot read configuration file '{path}': {e}")
        except json.JSONDecodeError as e:
            raise ValueError(f"Configuration file '{path}' is not valid JSON: {e}")
        if not isinstance(mapping, dict):
            raise ValueError(f"Configuration file '{path}' must contain a JSON object")
        return mapping

    @staticmethod
    def load(path: str) -> 'RunConfig':
        """Read and validate a flat JSON config file."""
        return RunConfig.from_flat(RunConfig.read_flat(path))


# Subcommand option name for each dotted key
OPTION_NAMES = {
    'model.kind': 'model_kind',
    'model.p': 'p',
    'model.q': 'q',
    'model.c': 'c',
    'model.delta': 'delta',
    'model.x0': 'x0',
    'model.low': 'low',
    'model.high': 'high',
    'model.points': 'points',
    'solver.mode': 'mode',
    'solver.price': 'price',
    'solver.epsilon': 'epsilon',
    'solver.horizon_m': 'horizon_m',
    'solver.resolution': 'resolution',
    'solver.max_denominator': 'max_denominator',
    'solver.tolerance': 'tolerance',
    'solver.x_stop': 'x_stop',
    'solver.cost_min': 'cost_min',
    'solver.cost_max': 'cost_max',
    'solver.cost_steps': 'steps',
    'simulation.policy': 'policy',
    'simulation.quality': 'quality',
    'simulation.quality_value': 'quality_value',
    'simulation.horizon': 'horizon',
    'simulation.runs': 'runs',
    'simulation.seed': 'seed',
    'simulation.block_size': 'block_size',
    'simulation.workers': 'workers',
    'catalan.a': 'a',
    'catalan.b': 'b',
    'catalan.m': 'm',
    'catalan.tmax': 'tmax',
    'output.format': 'output_format',
    'output.path': 'output',
    'output.directory': 'output_dir',
}


def to_default_map(config: RunConfig, keys: Optional[Iterable[str]] = None) -> Dict[str, Any]:
    """
    Option defaults for a subcommand, skipping unset values.

    Args:
        config: Validated configuration
        keys: Dotted keys to map, normally those present in the config file; None maps every key

    Returns:
        Mapping from option name to value, suitable for click's default_map
    """
    wanted = None if keys is None else set(keys)
    return {
        OPTION_NAMES[key]: value
        for key, value in config.to_flat().items()
        if key in OPTION_NAMES and value is not None and (wanted is None or key in wanted)
    }
