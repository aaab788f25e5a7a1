"""Well-balanced Engquist-Osher finite volume schemes for scalar balance laws

.. math::

    \\partial_t u + \\partial_x f(u) + z'(x) b(u) = 0

on a bounded interval with inflow boundary data.
"""

from __future__ import annotations

__version__ = "0.1.0"

from wbflux.analysis import (
    ErrorReport,
    convergence_table,
    l1_distance_states,
    l1_error_vs_exact,
    l1_error_vs_projection,
)
from wbflux.entropy import (
    EntropyPair,
    cell_entropy_residual,
    equilibrium_drift,
    quadratic_pair,
    semi_kruzkov_pair,
    smoothed_boundary_pair,
    weak_entropy_residual,
)
from wbflux.errors import (
    AssumptionViolation,
    ConfigError,
    ConvergenceFailure,
    GridError,
    HistoryUnavailable,
    IncompatibleGrids,
    NonIntegrableSource,
    QuadratureFailure,
    StateBlowup,
    WBFluxError,
)
from wbflux.experiments import TestCasePreset, preset, run_table
from wbflux.flux import SplitFlux, eo_flux, entropy_flux_G, make_split_flux
from wbflux.grid import Discretization, SolverState, Topography, project_initial, project_topography
from wbflux.kernels import BACKEND
from wbflux.model import (
    FluxModel,
    Problem,
    TopographyProfile,
    burgers_hopf,
    custom_model,
    evaluate_D,
    invert_D,
    linear_advection,
)
from wbflux.scheme import RunResult, StepPolicy, compute_bound_envelope, run

__all__ = [
    "BACKEND",
    "AssumptionViolation",
    "ConfigError",
    "ConvergenceFailure",
    "Discretization",
    "EntropyPair",
    "ErrorReport",
    "FluxModel",
    "GridError",
    "HistoryUnavailable",
    "IncompatibleGrids",
    "NonIntegrableSource",
    "Problem",
    "QuadratureFailure",
    "RunResult",
    "SolverState",
    "SplitFlux",
    "StateBlowup",
    "StepPolicy",
    "TestCasePreset",
    "Topography",
    "TopographyProfile",
    "WBFluxError",
    "burgers_hopf",
    "cell_entropy_residual",
    "compute_bound_envelope",
    "convergence_table",
    "custom_model",
    "entropy_flux_G",
    "eo_flux",
    "equilibrium_drift",
    "evaluate_D",
    "invert_D",
    "l1_distance_states",
    "l1_error_vs_exact",
    "l1_error_vs_projection",
    "linear_advection",
    "make_split_flux",
    "preset",
    "project_initial",
    "project_topography",
    "quadratic_pair",
    "run",
    "run_table",
    "semi_kruzkov_pair",
    "smoothed_boundary_pair",
    "weak_entropy_residual",
]
