"""Critical echo state networks with morphable transfer functions."""

from ._core import (
    CriticalPoint,
    DecayFit,
    DistanceSeries,
    ForgettingRun,
    LyapunovEstimate,
    ReadoutModel,
    Reservoir,
    SingularSystemError,
    Transfer,
    classify_decay,
    cli,
    default_alpha_grid,
    default_gamma_grid,
    eq7_orbit_start,
    eq8_orbit_start,
    fit_exponential,
    fit_power_law,
    forgetting,
    generate,
    lyapunov_derivative_product,
    lyapunov_renormalized,
    make_reservoir,
    nrmse,
    random_orthogonal,
    run_pair,
    solve_critical_b,
    sweep_alpha,
    sweep_gamma,
    train_readout,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
