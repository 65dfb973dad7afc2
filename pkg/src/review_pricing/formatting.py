#!/usr/bin/env python3
"""
Formatting Module for Review Pricing

Contains functions for rendering results as JSON or CSV with 12 significant
digits and for writing them to stdout, single files or output directories.
"""

import datetime
import json
import math
import os
from typing import Any, Dict, Optional

import click
import numpy as np
import pandas as pd


FLOAT_FORMAT = '%.12g'


def format_number(value: float) -> str:
    """
    Format a number with 12 significant digits.

    Args:
        value: The number to format

    Returns:
        Formatted string, e.g. '0.333333333333'
    """
    return FLOAT_FORMAT % value


def _round_float(value: float) -> Any:
    # JSON has no literal for non-finite numbers
    if math.isnan(value):
        return 'nan'
    if math.isinf(value):
        return 'inf' if value > 0 else '-inf'
    return float(format_number(value))


def to_jsonable(value: Any) -> Any:
    """
    Convert a result into plain JSON types, rounding floats to 12 significant digits.

    Objects exposing to_dict() and DataFrames (as lists of records) are converted recursively.
    """
    if hasattr(value, 'to_dict') and not isinstance(value, (pd.DataFrame, pd.Series)):
        return to_jsonable(value.to_dict())
    if isinstance(value, pd.DataFrame):
        return to_jsonable(value.to_dict(orient='records'))
    if isinstance(value, dict):
        return {str(key): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [to_jsonable(item) for item in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return _round_float(float(value))
    return value


def render_json(payload: Any) -> str:
    return json.dumps(to_jsonable(payload), indent=2)


def render_csv(df: pd.DataFrame) -> str:
    return df.to_csv(index=False, float_format=FLOAT_FORMAT)


def _check_target(path: str, overwrite: bool):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    if os.path.exists(path) and not overwrite:
        raise ValueError(f"File '{path}' already exists. Use --overwrite to replace it.")


def write_text(content: str, path: str, overwrite: bool = False) -> str:
    """
    Write rendered output to a file.

    Args:
        content: Text to write
        path: Destination file; parent directories are created
        overwrite: Whether to replace an existing file

    Returns:
        The path written
    """
    _check_target(path, overwrite)
    with open(path, 'w') as f:
        f.write(content)
    return path


def write_table(df: pd.DataFrame, path: str, overwrite: bool = False) -> str:
    """Write one table as CSV; refuses to replace an existing file unless overwrite is set."""
    _check_target(path, overwrite)
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path


def default_output_dir() -> str:
    """output/YYYYMMDD_hhmmss under the current directory."""
    timestamp = datetime.datetime.now().strftime("%Y%m%d_%H%M%S")
    return os.path.join('output', timestamp)


def write_tables(tables: Dict[str, pd.DataFrame], output_dir: Optional[str] = None,
                 overwrite: bool = False) -> str:
    """
    Write several tables as <name>.csv into one directory.

    Args:
        tables: Mapping of file stem to table
        output_dir: Directory to write to. If None, uses 'output/TIMESTAMP'
        overwrite: Whether to replace files that already exist

    Returns:
        The path to the output directory
    """
    target_dir = output_dir if output_dir is not None else default_output_dir()
    os.makedirs(target_dir, exist_ok=True)

    # Check every target first so that nothing is written when one file is in the way
    paths = {name: os.path.join(target_dir, f"{name}.csv") for name in tables}
    existing = sorted(path for path in paths.values() if os.path.exists(path))
    if existing and not overwrite:
        raise ValueError(
            f"Directory '{target_dir}' already contains {', '.join(os.path.basename(p) for p in existing)}. "
            f"Use --overwrite to replace them."
        )

    for name, df in tables.items():
        write_table(df, paths[name], overwrite=True)
    return target_dir


def emit(content: str, output: Optional[str] = None, overwrite: bool = False) -> None:
    """
    Send rendered output to stdout, or to a file when output is given.

    Args:
        content: Rendered JSON or CSV
        output: Destination file, None or '-' for stdout
        overwrite: Whether to replace an existing file
    """
    if output is None or output == '-':
        click.echo(content.rstrip('\n'))
        return
    write_text(content, output, overwrite)
    click.echo(f"Output written to {output}", err=True)
