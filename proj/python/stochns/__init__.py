"""Stochastic Navier-Stokes solver: Taylor-Hood P2/P1 elements, implicit Euler-Maruyama
time stepping with Picard linearisation, and Monte Carlo convergence studies."""

from ._core import (
    ConfigError,
    Discretization,
    Mesh,
    NumericalError,
    StudyConfig,
    build_uniform_mesh,
    coarse_increment,
    fit_rate,
    fit_slope,
    mode_weight,
    moment_error,
    run_convergence_study,
    run_pathwise_study,
    run_q_sweep,
    run_single,
    run_stokes_verification,
    wiener_draws,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "Discretization",
    "Mesh",
    "NumericalError",
    "StudyConfig",
    "build_uniform_mesh",
    "coarse_increment",
    "fit_rate",
    "fit_slope",
    "mode_weight",
    "moment_error",
    "run_convergence_study",
    "run_pathwise_study",
    "run_q_sweep",
    "run_single",
    "run_stokes_verification",
    "wiener_draws",
]
