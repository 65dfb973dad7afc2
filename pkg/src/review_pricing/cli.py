#!/usr/bin/env python3
"""
CLI Module for Review Pricing

Contains the command-line interface: one subcommand per solver, the simulator
and the figure reproduction.
"""

from contextlib import contextmanager
from typing import Any, Dict, Optional

import click
import numpy as np

from review_pricing import catalan, dp_solver, extended, learning, series_solver, simulator
from review_pricing.config import OPTION_NAMES, RunConfig, to_default_map
from review_pricing.figures import reproduce_figures
from review_pricing.formatting import emit, render_csv, render_json
from review_pricing.model import ModelParams, PricingMode, detect_lattice


OUTPUT_DIR_ENV = 'REVIEW_PRICING_OUTPUT_DIR'


@contextmanager
def usage_errors():
    """Report invalid inputs as usage errors (exit code 2)."""
    try:
        yield
    except ValueError as e:
        raise click.UsageError(str(e))


@contextmanager
def runtime_errors():
    """Report failures while solving or writing as runtime errors (exit code 1)."""
    try:
        yield
    except ValueError as e:
        raise click.ClickException(str(e))


def _config_callback(kind: Optional[str]):
    def callback(ctx: click.Context, param: click.Parameter, value: Optional[str]):
        if value is None:
            return value
        try:
            mapping = RunConfig.read_flat(value)
            config = RunConfig.from_flat(mapping)
        except ValueError as e:
            raise click.BadParameter(str(e), ctx=ctx, param=param)
        if kind is not None and config.model_kind != kind:
            raise click.BadParameter(
                f"'{value}' describes a {config.model_kind} model, this subcommand needs a {kind} model",
                ctx=ctx, param=param,
            )
        # Only keys written in the file replace option defaults
        keys = set(mapping)
        if any(key.startswith('model.') for key in keys):
            keys.add('model.kind')
        ctx.default_map = {**(ctx.default_map or {}), **to_default_map(config, keys)}
        return value
    return callback


def config_option(kind: Optional[str] = None):
    return click.option(
        '--config', 'config_file', type=click.Path(dir_okay=False), is_eager=True, expose_value=False,
        callback=_config_callback(kind), help='Flat JSON configuration file; explicit flags override it',
    )


def _apply(f, decorators):
    for decorator in reversed(decorators):
        f = decorator(f)
    return f


def binary_model_options(f):
    return _apply(f, [
        click.option('--p', type=float, default=0.6, show_default=True, help='Probability that a good product is liked'),
        click.option('--q', type=float, default=0.4, show_default=True, help='Probability that a bad product is liked'),
        click.option('--c', type=float, default=0.43, show_default=True, help='Unit production cost'),
        click.option('--delta', type=float, default=0.99, show_default=True, help='Discount factor'),
        click.option('--x0', type=float, default=0.5, show_default=True, help='Initial prior that the product is good'),
    ])


def extended_model_options(f):
    return _apply(f, [
        click.option('--low', type=float, default=0.4, show_default=True, help='Lowest quality on the grid'),
        click.option('--high', type=float, default=0.6, show_default=True, help='Highest quality on the grid'),
        click.option('--points', type=int, default=extended.DEFAULT_GRID_POINTS, show_default=True,
                     help='Number of grid qualities'),
        click.option('--c', type=float, default=0.43, show_default=True, help='Unit production cost'),
        click.option('--delta', type=float, default=0.99, show_default=True, help='Discount factor'),
    ])


def mode_options(f):
    return _apply(f, [
        click.option('--mode', type=click.Choice(['dynamic', 'static']), default='dynamic', show_default=True,
                     help='Pricing strategy'),
        click.option('--price', type=float, default=None, help='Fixed price for --mode static'),
    ])


def output_options(default_format: str = 'json', formats=('json', 'csv')):
    def decorator(f):
        return _apply(f, [
            click.option('-o', '--output', default=None, help='Output file (default: stdout)'),
            click.option('-f', '--format', 'output_format', type=click.Choice(list(formats)),
                         default=default_format, show_default=True, help='Output encoding'),
            click.option('-w', '--overwrite', is_flag=True, help='Overwrite the output file if it exists'),
        ])
    return decorator


def dump_config_option(f):
    return click.option('--dump-config', is_flag=True,
                        help='Print the resolved configuration as flat JSON and exit')(f)


def _binary_params(p: float, q: float, c: float, delta: float, x0: float) -> ModelParams:
    with usage_errors():
        return ModelParams(p=p, q=q, c=c, delta=delta, x0=x0)


def _pricing_mode(mode: str, price: Optional[float]) -> PricingMode:
    if mode == 'static':
        if price is None:
            raise click.UsageError("--price is required with --mode static")
        return PricingMode.static(price)
    return PricingMode.dynamic()


def _dump_config(kind: str, values: Dict[str, Any]) -> None:
    """Echo the configuration resolved from flags, config file and defaults."""
    flat: Dict[str, Any] = {'model.kind': kind}
    model_keys = RunConfig.model_keys(kind)
    for key, option in OPTION_NAMES.items():
        block_name, _, name = key.partition('.')
        if block_name == 'model' and name not in model_keys:
            continue
        if option in values and values[option] is not None:
            flat[key] = values[option]
    with usage_errors():
        config = RunConfig.from_flat(flat)
    click.echo(config.to_json())


def _warn(messages) -> None:
    for message in messages:
        click.echo(f"Warning: {message}", err=True)


@click.group()
@click.version_option(package_name='review_pricing')
def main() -> None:
    """
    Pricing a product whose quality is revealed by likes and dislikes.

    Solvers for the seller's optimal revenue and stopping prior, static price
    search, learning probabilities, the general-quality model and a Monte Carlo
    simulator.
    """


@main.command('solve-dp')
@config_option('binary')
@binary_model_options
@mode_options
@click.option('--epsilon', type=float, default=dp_solver.DEFAULT_EPSILON, show_default=True,
              help='Width of the seeding band below x = 1')
@click.option('--max-denominator', type=int, default=1000, show_default=True,
              help='Largest dislike step accepted when detecting the lattice')
@click.option('--tolerance', type=float, default=1e-9, show_default=True, help='Lattice detection tolerance')
@output_options()
@dump_config_option
def solve_dp(p, q, c, delta, x0, mode, price, epsilon, max_denominator, tolerance, output, output_format,
             overwrite, dump_config) -> None:
    """Lattice solver: V(x_i) and the estimated stopping prior."""
    if dump_config:
        return _dump_config('binary', locals())
    params = _binary_params(p, q, c, delta, x0)
    pricing_mode = _pricing_mode(mode, price)
    if not 0.0 < epsilon < 1.0:
        raise click.UsageError(f"--epsilon must lie in (0, 1), got {epsilon}")
    with usage_errors():
        lattice = detect_lattice(params, max_denominator, tolerance)

    with runtime_errors():
        solution = dp_solver.solve(params, lattice, pricing_mode, epsilon)
        _warn(solution.diagnostics)
        table = solution.to_frame()
        if output_format == 'csv':
            return emit(render_csv(table), output, overwrite)
        payload = {
            'mode': pricing_mode.describe(),
            'lattice': {'a': lattice.a, 'b': lattice.b, 'gamma': lattice.gamma},
            'i_start': solution.i_start,
            'i_stop': solution.i_stop,
            'x_stop_estimate': solution.x_stop_estimate,
            'x_star': solution.x_star,
            'value_x0': solution.value(0),
            'sweeps': solution.sweeps,
            'values': table,
        }
        emit(render_json(payload), output, overwrite)


@main.command('solve-series')
@config_option('binary')
@binary_model_options
@mode_options
@click.option('--epsilon', type=float, default=series_solver.DEFAULT_EPSILON, show_default=True,
              help='Guaranteed truncation error')
@output_options(formats=('json',))
@dump_config_option
def solve_series(p, q, c, delta, x0, mode, price, epsilon, output, output_format, overwrite, dump_config) -> None:
    """Series solver: x* and V(x0) with a guaranteed error."""
    if dump_config:
        return _dump_config('binary', locals())
    params = _binary_params(p, q, c, delta, x0)
    pricing_mode = _pricing_mode(mode, price)
    with usage_errors():
        if not pricing_mode.is_dynamic:
            dp_solver.boundary_conditions(params, pricing_mode)
        series_solver.truncation_horizon(params, pricing_mode, epsilon)

    with runtime_errors():
        solution = series_solver.expected_reward(x0, params, pricing_mode, epsilon=epsilon)
        emit(render_json(solution), output, overwrite)


@main.command('static-sweep')
@config_option('binary')
@binary_model_options
@click.option('--epsilon', type=float, default=1e-6, show_default=True, help='Truncation error of each value')
@click.option('--resolution', type=int, default=series_solver.DEFAULT_RESOLUTION, show_default=True,
              help='Number of grid prices')
@click.option('--frontier', is_flag=True, help='Only the efficient frontier (requires q = 1 - p)')
@output_options(default_format='csv')
@dump_config_option
def static_sweep(p, q, c, delta, x0, epsilon, resolution, frontier, output, output_format, overwrite,
                 dump_config) -> None:
    """Static revenue V(x0) against price (columns price, value, m_pi)."""
    if dump_config:
        return _dump_config('binary', locals())
    params = _binary_params(p, q, c, delta, x0)
    if frontier and not params.is_symmetric:
        raise click.UsageError("--frontier requires a symmetric model (q = 1 - p)")
    if resolution < 1 or epsilon <= 0:
        raise click.UsageError("--resolution must be at least 1 and --epsilon positive")

    with runtime_errors():
        if frontier:
            table = series_solver.efficient_frontier(params, epsilon)
        else:
            table = series_solver.static_price_sweep(params, epsilon, resolution)
        if not table.empty:
            best = table.loc[table['value'].idxmax()]
            click.echo(f"Best static price {best['price']:.12g} (value {best['value']:.12g})", err=True)
        content = render_csv(table) if output_format == 'csv' else render_json(table)
        emit(content, output, overwrite)


@main.command('catalan')
@config_option()
@click.option('--a', type=float, required=True, help='Barrier slope per like')
@click.option('--b', type=float, required=True, help='Barrier slope per dislike')
@click.option('--m', type=float, default=0.0, show_default=True, help='Barrier offset')
@click.option('--tmax', type=int, required=True, help='Largest likes + dislikes')
@output_options(default_format='csv')
@dump_config_option
def catalan_table(a, b, m, tmax, output, output_format, overwrite, dump_config) -> None:
    """Catalan quadrilateral counts (columns likes, dislikes, count)."""
    if dump_config:
        return _dump_config('binary', locals())
    with usage_errors():
        table = catalan.build_table(a, b, m, tmax).to_frame()
    with runtime_errors():
        content = render_csv(table) if output_format == 'csv' else render_json(table)
        emit(content, output, overwrite)


@main.command('learning')
@config_option('binary')
@binary_model_options
@click.option('--x-stop', type=float, default=None, help='Stopping threshold (default: dynamic stopping prior x*)')
@click.option('--price', type=float, default=None, help='Static price to compare false negatives against')
@click.option('--epsilon', type=float, default=series_solver.DEFAULT_EPSILON, show_default=True,
              help='Accuracy of x*')
@output_options(formats=('json',))
@dump_config_option
def learning_report(p, q, c, delta, x0, x_stop, price, epsilon, output, output_format, overwrite,
                    dump_config) -> None:
    """Probabilities of selling forever and of false negatives."""
    if dump_config:
        return _dump_config('binary', locals())
    params = _binary_params(p, q, c, delta, x0)
    with usage_errors():
        if x_stop is None:
            x_stop = series_solver.stopping_prior(params, epsilon).x_star
        report = learning.sell_forever_bounds(x0, x_stop, params)
        payload: Dict[str, Any] = {'sell_forever': report}
        if price is not None:
            false_negatives = learning.false_negative_ratio(params, price, epsilon)
            if false_negatives.estimated:
                _warn(["False-negative ratio estimated by simulation (no closed form for q != 1 - p)"])
            payload['false_negatives'] = false_negatives

    with runtime_errors():
        emit(render_json(payload), output, overwrite)


@main.command('extended-solve')
@config_option('extended')
@extended_model_options
@mode_options
@click.option('--horizon-m', type=int, default=extended.DEFAULT_HORIZON, show_default=True,
              help='Number of review layers M')
@click.option('--clip-seed', is_flag=True, help='Clip the seed layer at zero')
@output_options(formats=('json',))
@dump_config_option
def extended_solve(low, high, points, c, delta, mode, price, horizon_m, clip_seed, output, output_format,
                   overwrite, dump_config) -> None:
    """General-quality model: value with its horizon error bound."""
    if dump_config:
        return _dump_config('extended', locals())
    pricing_mode = _pricing_mode(mode, price)
    with usage_errors():
        dist = extended.QualityDistribution.uniform(low, high, points)
        solution = extended.solve_extended(dist, c, delta, horizon_m, pricing_mode, clip_seed=clip_seed)
    with runtime_errors():
        emit(render_json(solution), output, overwrite)


@main.command('extended-price-sweep')
@config_option('extended')
@extended_model_options
@click.option('--horizon-m', type=int, default=extended.DEFAULT_HORIZON, show_default=True,
              help='Number of review layers M')
@click.option('--resolution', type=int, default=200, show_default=True, help='Number of grid prices')
@output_options(default_format='csv')
@dump_config_option
def extended_price_sweep(low, high, points, c, delta, horizon_m, resolution, output, output_format, overwrite,
                         dump_config) -> None:
    """Static revenue against price in the general-quality model (columns price, revenue)."""
    if dump_config:
        return _dump_config('extended', locals())
    with usage_errors():
        dist = extended.QualityDistribution.uniform(low, high, points)
        table = extended.price_sweep(dist, c, delta, horizon_m, resolution)
    with runtime_errors():
        content = render_csv(table) if output_format == 'csv' else render_json(table)
        emit(content, output, overwrite)


@main.command('extended-cost-sweep')
@config_option('extended')
@extended_model_options
@click.option('--cost-min', type=float, default=0.41, show_default=True, help='Smallest cost')
@click.option('--cost-max', type=float, default=0.59, show_default=True, help='Largest cost')
@click.option('--steps', type=int, default=19, show_default=True, help='Number of costs')
@click.option('--horizon-m', type=int, default=extended.DEFAULT_HORIZON, show_default=True,
              help='Number of review layers M')
@click.option('--resolution', type=int, default=200, show_default=True, help='Grid prices per cost')
@output_options(default_format='csv')
@dump_config_option
def extended_cost_sweep(low, high, points, c, delta, cost_min, cost_max, steps, horizon_m, resolution, output,
                        output_format, overwrite, dump_config) -> None:
    """Best static and dynamic revenue against cost (columns cost, revenue_static, revenue_dynamic)."""
    if dump_config:
        return _dump_config('extended', locals())
    if steps < 1 or not cost_min <= cost_max:
        raise click.UsageError("--steps must be at least 1 and --cost-min must not exceed --cost-max")
    with usage_errors():
        dist = extended.QualityDistribution.uniform(low, high, points)
        table = extended.cost_sweep(dist, np.linspace(cost_min, cost_max, steps), delta, horizon_m, resolution)
    with runtime_errors():
        content = render_csv(table) if output_format == 'csv' else render_json(table)
        emit(content, output, overwrite)


@main.command('simulate')
@config_option()
@binary_model_options
@click.option('--model', 'model_kind', type=click.Choice(['binary', 'extended']), default='binary',
              show_default=True, help='Quality model')
@click.option('--low', type=float, default=0.4, show_default=True, help='Lowest quality (extended model)')
@click.option('--high', type=float, default=0.6, show_default=True, help='Highest quality (extended model)')
@click.option('--points', type=int, default=101, show_default=True, help='Grid qualities (extended model)')
@click.option('--policy', type=click.Choice(['dynamic', 'static', 'threshold']), default='dynamic',
              show_default=True, help='Pricing policy')
@click.option('--price', type=float, default=None, help='Price for --policy static')
@click.option('--x-stop', type=float, default=None, help='Stopping prior for --policy threshold')
@click.option('--quality', type=click.Choice(['prior', 'good', 'bad', 'fixed']), default='prior',
              show_default=True, help='True quality of each episode')
@click.option('--quality-value', type=float, default=None, help='Like probability for --quality fixed')
@click.option('--horizon', type=int, default=simulator.DEFAULT_HORIZON, show_default=True,
              help='Periods per episode')
@click.option('--runs', type=int, default=simulator.DEFAULT_RUNS, show_default=True, help='Number of episodes')
@click.option('--seed', type=int, default=0, show_default=True, help='Master seed')
@click.option('--block-size', type=int, default=simulator.DEFAULT_BLOCK_SIZE, show_default=True,
              help='Episodes per random stream')
@click.option('--workers', type=int, default=1, show_default=True, help='Threads running blocks')
@click.option('--horizon-m', type=int, default=extended.DEFAULT_HORIZON, show_default=True,
              help='Solver horizon for the extended dynamic policy')
@output_options(formats=('json',))
@dump_config_option
def simulate(p, q, c, delta, x0, model_kind, low, high, points, policy, price, x_stop, quality, quality_value,
             horizon, runs, seed, block_size, workers, horizon_m, output, output_format, overwrite,
             dump_config) -> None:
    """Monte Carlo simulation of discounted revenue and stopping times."""
    if dump_config:
        return _dump_config(model_kind, locals())
    with usage_errors():
        if quality == 'fixed':
            if quality_value is None:
                raise ValueError("--quality-value is required with --quality fixed")
            true_quality = simulator.TrueQuality.fixed(quality_value)
        else:
            true_quality = simulator.TrueQuality(quality)

        extra: Dict[str, Any] = {}
        if model_kind == 'binary':
            model = ModelParams(p=p, q=q, c=c, delta=delta, x0=x0)
        else:
            model = extended.QualityDistribution.uniform(low, high, points)
            extra = {'c': c, 'delta': delta}

        if policy == 'static':
            if price is None:
                raise ValueError("--price is required with --policy static")
            pricing_policy = simulator.PricingPolicy.static(price)
        elif policy == 'threshold':
            if x_stop is None:
                raise ValueError("--x-stop is required with --policy threshold")
            pricing_policy = simulator.PricingPolicy.threshold(x_stop)
        elif model_kind == 'binary':
            pricing_policy = simulator.PricingPolicy.dynamic(model)
        else:
            pricing_policy = simulator.PricingPolicy.extended(extended.solve_extended(model, c, delta, horizon_m))

        config = simulator.SimConfig(model=model, policy=pricing_policy, true_quality=true_quality,
                                     horizon=horizon, runs=runs, seed=seed, block_size=block_size,
                                     workers=workers, **extra)

    with runtime_errors():
        stats = simulator.run(config)
        payload = {
            'model': model_kind,
            'policy': pricing_policy.describe(),
            'true_quality': true_quality.describe(),
            **stats.to_dict(),
        }
        emit(render_json(payload), output, overwrite)


@main.command('reproduce-figures')
@config_option()
@click.option('--out', 'output_dir', envvar=OUTPUT_DIR_ENV, default=None,
              help=f'Directory for the CSV files (default: ${OUTPUT_DIR_ENV} or output/TIMESTAMP)')
@click.option('-w', '--overwrite', is_flag=True, help='Overwrite existing figure files')
@click.option('--resolution', type=int, default=200, show_default=True, help='Number of grid prices per sweep')
@dump_config_option
def reproduce(output_dir, overwrite, resolution, dump_config) -> None:
    """Write the figure tables fig1, fig3 (two panels), fig4 and fig5 as CSV."""
    if dump_config:
        return _dump_config('binary', locals())
    if resolution < 1:
        raise click.UsageError("--resolution must be at least 1")
    with runtime_errors():
        reproduce_figures(output_dir, overwrite, resolution)


if __name__ == '__main__':
    main()
