"""Driven radical pair spin dynamics.

Configs are plain dicts with the sections system, field, driving, rates,
sweep and output; missing keys keep their defaults.
"""

import csv
import io
import json

from . import _drp
from ._drp import (
    ConvergenceError,
    InvalidArgument,
    control_optimize,
    level_crossing,
    measure,
    parse_grid,
    presets,
    time_average_factor,
    two_level_efficiency,
    validate,
    version,
)

__all__ = [
    "ConvergenceError",
    "InvalidArgument",
    "chi",
    "control_optimize",
    "default_config",
    "level_crossing",
    "measure",
    "normalize_config",
    "orientation_map",
    "parse_grid",
    "presets",
    "sweep",
    "time_average_factor",
    "two_level_efficiency",
    "validate",
    "version",
    "yield_",
]


def _dump(config):
    return json.dumps(config or {})


def default_config(preset="one_nitrogen"):
    return json.loads(_drp.default_config_json(preset))


def normalize_config(config):
    """Fill defaults and validate."""
    return json.loads(_drp.normalize_config_json(_dump(config)))


def yield_(config=None):
    """Singlet yield for the field direction in the config."""
    return _drp.compute_yield(_dump(config))


def chi(config=None):
    """Relative anisotropy over the canonical parallel/perpendicular fields."""
    return _drp.compute_chi(_dump(config))


def orientation_map(config=None, level=3, workers=0):
    """Returns (vertices (n, 3), phi_singlet list, gamma)."""
    return _drp.orientation_map(_dump(config), level, workers)


def sweep(config=None, workers=0, as_csv=False):
    """Runs the config's sweep grid. Rows come back as dicts unless as_csv."""
    text = _drp.sweep_csv(_dump(config), workers)
    if as_csv:
        return text
    rows = []
    for row in csv.DictReader(io.StringIO(text)):
        rows.append({k: (v if k == "solver" else float(v)) for k, v in row.items()})
    return rows
