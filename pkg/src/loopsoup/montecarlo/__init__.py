"""Direct simulation of the Brownian loop soup."""
from .config import ConfigError, SoupConfig, load_config
from .estimators import (
    Estimate,
    estimate_alpha,
    estimate_alpha_bar,
    estimate_correlator,
    estimate_correlator_ratio,
    estimate_weight_combination,
)
from .fill import BACKEND, OnPathError, fill_contains, flood_fill_contains, outer_boundary
from .sampler import LoopSample, expected_loop_count, sample_soup

__all__ = [
    "BACKEND",
    "ConfigError",
    "Estimate",
    "LoopSample",
    "OnPathError",
    "SoupConfig",
    "estimate_alpha",
    "estimate_alpha_bar",
    "estimate_correlator",
    "estimate_correlator_ratio",
    "estimate_weight_combination",
    "expected_loop_count",
    "fill_contains",
    "flood_fill_contains",
    "load_config",
    "outer_boundary",
    "sample_soup",
]
