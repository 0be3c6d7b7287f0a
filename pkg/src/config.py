from pydantic import BaseModel, Field

import logging
from typing import Literal

logger = logging.getLogger(__name__)

CSV_HEADER = "# qmetric-lab v1"
FLOAT_FORMAT = "%.17g"

class NumericTolerances(BaseModel):
    """Every numeric tolerance used across the package, in one record."""

    state_norm: float = Field(1e-12, description="Max deviation of a state's 2-norm from 1")
    distinct_fidelity: float = Field(1e-9, description="States with fidelity >= 1 - this are the same state")
    probability_sum: float = Field(1e-12, description="Max deviation of ensemble weights from summing to 1")
    moment_hermitian: float = 1e-10
    moment_psd: float = 1e-10
    moment_trace: float = 1e-10
    marginal_sum: float = Field(1e-9, description="Transport marginals must agree within this")
    plan_negative: float = 1e-12
    dual_feasibility: float = 1e-9
    slackness: float = 1e-8
    negative_distance: float = Field(1e-10, description="Distance values above -this are clamped to 0")
    max_moment_dim: int = Field(4096, description="Cap on d**k for moment-operator routes")
    max_resample_attempts: int = Field(100, description="Collision resamples before a generator fails")

    ot_perturbation: float = Field(1e-11, description="Supply perturbation used to avoid degenerate pivots")
    ot_reduced_cost: float = 1e-12

TOLERANCES = NumericTolerances()

def configure_tolerances(overrides: dict | None = None) -> NumericTolerances:
    """Reset the module-level tolerance record to the defaults plus overrides; unknown keys are rejected."""
    global TOLERANCES
    overrides = overrides or {}
    unknown = set(overrides) - set(NumericTolerances.model_fields)
    if unknown:
        raise ValueError(f"Unknown numeric tolerance keys: {sorted(unknown)}")
    TOLERANCES = NumericTolerances(**overrides)
    logger.debug(f"Numeric tolerances set to {TOLERANCES.model_dump()}")
    return TOLERANCES

def get_tolerances(tol: NumericTolerances | None = None) -> NumericTolerances:
    return tol if tol is not None else TOLERANCES

class SolverSettings(BaseModel):
    """Settings of the transport solver, read from the `transport` config section."""

    init: Literal["vogel", "northwest"] = "vogel"
    max_iterations: int = Field(100_000, ge=1)
    degenerate_run: int = Field(50, ge=1, description="Consecutive degenerate pivots before switching to Bland's rule")

SOLVER = SolverSettings()

def configure_solver(overrides: dict | None = None) -> SolverSettings:
    global SOLVER
    overrides = overrides or {}
    unknown = set(overrides) - set(SolverSettings.model_fields)
    if unknown:
        raise ValueError(f"Unknown transport solver keys: {sorted(unknown)}")
    SOLVER = SolverSettings(**overrides)
    logger.debug(f"Transport solver settings set to {SOLVER.model_dump()}")
    return SOLVER

def get_solver_settings(settings: SolverSettings | None = None) -> SolverSettings:
    return settings if settings is not None else SOLVER
