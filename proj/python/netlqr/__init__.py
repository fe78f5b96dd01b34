"""Distributed LQR analysis for networked systems."""

from ._netlqr import (
    ConfigError,
    Error,
    NetworkedSystem,
    NonConvergence,
    SizeGuardError,
    build_hvac,
    constants_report,
    decay_constants,
    load_system,
    optimal_gain,
    oracle_check,
    parse_block_file,
    solve_dare,
    solve_discrete_lyapunov,
    sweep,
    truncation_errors,
)

__all__ = [
    "ConfigError",
    "Error",
    "NetworkedSystem",
    "NonConvergence",
    "SizeGuardError",
    "build_hvac",
    "constants_report",
    "decay_constants",
    "load_system",
    "optimal_gain",
    "oracle_check",
    "parse_block_file",
    "solve_dare",
    "solve_discrete_lyapunov",
    "sweep",
    "truncation_errors",
]
