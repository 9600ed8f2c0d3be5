"""Disturbance-adaptive planning and simulation for a flying/driving vehicle."""

import json

from ._core import (
    AccelBounds,
    ConfigError,
    DisturbanceEstimate,
    Mode,
    UdeEstimator,
    VehicleParams,
    air_bounds,
    compute_energy_wh,
    distance_field,
    land_bounds,
    softplus,
    validate_config,
)
from . import _core

__all__ = [
    "AccelBounds",
    "ConfigError",
    "DisturbanceEstimate",
    "Mode",
    "UdeEstimator",
    "VehicleParams",
    "air_bounds",
    "benchmark",
    "compute_energy_wh",
    "distance_field",
    "land_bounds",
    "load_config",
    "plan",
    "simulate",
    "softplus",
]


def load_config(source):
    """Scenario (path or document text) as a dict with defaults filled in."""
    return json.loads(validate_config(str(source)))


def plan(source):
    return json.loads(_core.plan(str(source)))


def simulate(source, variant=None):
    return _core.simulate(str(source), variant)


def benchmark(sources, variants=("adaptive", "fixed_bounds")):
    return json.loads(_core.benchmark([str(s) for s in sources], list(variants)))
