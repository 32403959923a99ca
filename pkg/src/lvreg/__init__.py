"""Lotka-Volterra predator-prey simulation, regime analysis and regulator comparison."""

from lvreg.dynamics import (
    DomainError,
    InitialCondition,
    LVParams,
    NoInteriorFixedPoint,
    State,
    conserved_quantity,
    equilibrium,
    rhs,
)
from lvreg.integrate import (
    EULER,
    HEUN,
    RK4,
    IntegrationConfig,
    Method,
    NoConvergence,
    NonFiniteState,
    Termination,
    Trajectory,
    reference_trajectory,
    simulate,
    step,
)
from lvreg.analyze import (
    ClassifierThresholds,
    LinearFit,
    Peak,
    Regime,
    RegimeReport,
    UnstableStep,
    WindowTooSmall,
    classify,
    estimate_order,
    filter_peaks,
    find_peaks,
    fit_linear,
    fit_samples,
)

__version__ = "0.1.0"

__all__ = [
    "ClassifierThresholds",
    "DomainError",
    "EULER",
    "HEUN",
    "InitialCondition",
    "IntegrationConfig",
    "LVParams",
    "LinearFit",
    "Method",
    "NoConvergence",
    "NoInteriorFixedPoint",
    "NonFiniteState",
    "Peak",
    "RK4",
    "Regime",
    "RegimeReport",
    "State",
    "Termination",
    "Trajectory",
    "UnstableStep",
    "WindowTooSmall",
    "classify",
    "conserved_quantity",
    "equilibrium",
    "estimate_order",
    "filter_peaks",
    "find_peaks",
    "fit_linear",
    "fit_samples",
    "reference_trajectory",
    "rhs",
    "simulate",
    "step",
]
