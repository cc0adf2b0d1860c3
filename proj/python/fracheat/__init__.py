"""Time-fractional semilinear heat equation: special functions, norms, operators and solver."""

from ._core import (
    AccuracyError,
    DomainError,
    Grid,
    UsageError,
    admissible_params,
    besov_morrey_norm,
    heat,
    make_data,
    mittag_leffler,
    morrey_norm,
    p_alpha,
    run_cli,
    s_alpha,
    solve,
    wright_moment,
    wright_phi,
)

__all__ = [
    "AccuracyError",
    "DomainError",
    "Grid",
    "UsageError",
    "admissible_params",
    "besov_morrey_norm",
    "heat",
    "make_data",
    "mittag_leffler",
    "morrey_norm",
    "p_alpha",
    "run_cli",
    "s_alpha",
    "solve",
    "wright_moment",
    "wright_phi",
]
