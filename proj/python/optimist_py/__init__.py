"""Python bindings for the optimist core library."""

from ._core import (
    ConfigError,
    DomainError,
    ResourceError,
    ShapeError,
    TabularMDP,
    alpha_schedule,
    chain_mdp,
    confidence_width,
    conjugate_bruteforce,
    conjugate_kl_linesearch,
    conjugate_upper,
    default_alpha_scale,
    divergence,
    known_algorithms,
    optimistic_value,
    random_mdp,
    run_csv,
    run_experiment,
)

__all__ = [
    "ConfigError",
    "DomainError",
    "ResourceError",
    "ShapeError",
    "TabularMDP",
    "alpha_schedule",
    "chain_mdp",
    "confidence_width",
    "conjugate_bruteforce",
    "conjugate_kl_linesearch",
    "conjugate_upper",
    "default_alpha_scale",
    "divergence",
    "known_algorithms",
    "optimistic_value",
    "random_mdp",
    "run_csv",
    "run_experiment",
]
