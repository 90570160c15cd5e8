"""Phantom distribution functions for maxima of stationary sequences."""

from ._phdf import (
    Law,
    Phantom,
    PhdfError,
    Process,
    check_rate_sufficiency,
    continuous_phantom,
    estimate_driving_sequence,
    estimate_theta,
    exact_max_cdf,
    exact_max_quantile,
    generate,
    parse_law,
    parse_process,
    rule_phantom,
    running_maxima,
    threshold_beta,
)

__all__ = [
    "Law",
    "Phantom",
    "PhdfError",
    "Process",
    "check_rate_sufficiency",
    "continuous_phantom",
    "estimate_driving_sequence",
    "estimate_theta",
    "exact_max_cdf",
    "exact_max_quantile",
    "generate",
    "parse_law",
    "parse_process",
    "rule_phantom",
    "running_maxima",
    "threshold_beta",
]
