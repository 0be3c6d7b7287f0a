from pydantic import BaseModel, Field, field_validator, model_validator
import pandas as pd
import pandera.pandas as pa

import logging
from typing import Any, Dict, List, Literal, Optional

from .config import get_tolerances

logger = logging.getLogger(__name__)

PAIR_KINDS = (11, 12, 22)

## DataFrame schemas

BATCH_SCHEMA = pa.DataFrameSchema(
    {
        "kind": pa.Column(int, pa.Check.isin(PAIR_KINDS), coerce=True),
        "i": pa.Column(int, pa.Check.ge(0), coerce=True),
        "j": pa.Column(int, pa.Check.ge(0), coerce=True),
        "r": pa.Column(int, pa.Check.isin([-1, 1]), coerce=True),
    },
    strict=True,
    ordered=True,
)

ORACLE_SCHEMA = pa.DataFrameSchema(
    {
        "kind": pa.Column(int, pa.Check.isin(PAIR_KINDS), coerce=True),
        "i": pa.Column(int, pa.Check.ge(0), coerce=True),
        "j": pa.Column(int, pa.Check.ge(0), coerce=True),
        "x": pa.Column(float, pa.Check.between(0.0, 1.0), coerce=True),
    },
    strict=True,
    ordered=True,
)

CURVE_SCHEMA = pa.DataFrameSchema(
    {
        "metric": pa.Column(str, nullable=False),
        "k": pa.Column("Int64", pa.Check.ge(1), nullable=True, coerce=True),
        "N": pa.Column(int, pa.Check.ge(1), coerce=True),
        "trial": pa.Column(int, pa.Check.ge(0), coerce=True),
        "M": pa.Column(int, pa.Check.ge(0), coerce=True),
    },
    strict=True,
    ordered=True,
    unique=["metric", "k", "N", "trial"],
)

PLAN_SCHEMA = pa.DataFrameSchema(
    {
        "i": pa.Column(int, pa.Check.ge(0), coerce=True),
        "j": pa.Column(int, pa.Check.ge(0), coerce=True),
        "mass": pa.Column(float, pa.Check.ge(-get_tolerances().plan_negative), coerce=True),
    },
    strict=True,
    ordered=True,
)

## Ensemble documents

class EnsembleEntry(BaseModel):
    weight: float = Field(..., gt=0.0, le=1.0)
    amplitudes: List[float] = Field(..., description="Interleaved (re, im) pairs")

    @field_validator("amplitudes")
    @classmethod
    def even_length(cls, v):
        if len(v) % 2 or len(v) < 4:
            raise ValueError(f"amplitudes must hold an even number (>= 4) of reals. Got {len(v)}")
        return v

class EnsembleDocument(BaseModel):
    dim: int = Field(..., ge=2)
    kind: str = ""
    entries: List[EnsembleEntry]

    @model_validator(mode="after")
    def entries_match_dim(self):
        if not self.entries:
            raise ValueError("An ensemble needs at least one entry")
        for n, entry in enumerate(self.entries):
            if len(entry.amplitudes) != 2 * self.dim:
                raise ValueError(f"Entry {n} has {len(entry.amplitudes) // 2} amplitudes, expected {self.dim}")
        return self

## Reports

class DistanceReport(BaseModel):
    value: float
    raw_value: float
    metric: Literal["mmd", "wasserstein"]
    k: Optional[int] = None
    route: Literal["pairwise", "moment-operator", "transport"]
    components: Optional[Dict[str, float]] = None
    discrepancy: Optional[float] = Field(None, description="|pairwise - moment-operator| when cross-checked")

    @classmethod
    def from_raw(cls, raw_value: float, **kwargs) -> "DistanceReport":
        tol = get_tolerances().negative_distance
        if raw_value < -tol:
            raise ValueError(f"Distance {raw_value} is negative beyond round-off (tolerance {tol})")
        return cls(value=max(raw_value, 0.0), raw_value=raw_value, **kwargs)

class KindDiagnostics(BaseModel):
    kind: int
    value: float = Field(..., description="Estimated F-bar (or mean) for this pair kind")
    budget: int = Field(..., ge=0)
    labels_observed: int = Field(..., ge=0)
    m: int = Field(..., ge=0, description="Labels with at least k samples")
    min_count: int = Field(..., ge=0, description="Smallest per-label count among observed labels")
    labels_dropped: int = Field(..., ge=0, description="Observed labels with fewer than k samples")

class EstimateReport(BaseModel):
    estimate: float
    metric: str
    k: Optional[int] = None
    budget: int = Field(..., ge=0)
    diagnostics: List[KindDiagnostics] = Field(default_factory=list)
    weights: Optional[Dict[str, List[float]]] = Field(None, description="Estimated marginals p-hat, q-hat")

    @model_validator(mode="after")
    def m_within_label_space(self):
        for diag in self.diagnostics:
            if diag.m > diag.labels_observed:
                raise ValueError(f"Kind {diag.kind}: m={diag.m} exceeds observed labels {diag.labels_observed}")
        return self

## Configurations

class NoiseConfig(BaseModel):
    """
    Per-draw state noise of the SWAP-test channel.

    model 'eps-ball' redraws each state at infidelity eps_b from its label's
    state; model 'depolarizing' mixes in a Haar state with weight lambda_b.
    """

    model: Literal["eps-ball", "depolarizing"] = "eps-ball"
    eps_b: float = Field(0.0, ge=0.0, lt=1.0, description="Epsilon-ball radius of each drawn state")
    lambda_b: float = Field(0.0, ge=0.0, lt=1.0, description="Depolarizing strength")

    def radius(self, dim: int) -> float:
        """Mean infidelity between a noisy draw and its label's state."""
        if self.model == "eps-ball":
            return self.eps_b
        return (1.0 - 1.0 / dim) * self.lambda_b

class ComplexityConfig(BaseModel):
    epsilon: float = Field(0.1, gt=0.0)
    delta: float = Field(1.0 / 3.0, gt=0.0, lt=1.0)
    repetitions: int = Field(30, ge=1, description="K: probes per success-rate estimate")
    trials: int = Field(20, ge=1, description="T: independent ensemble draws per N")
    j_max: int = Field(8, ge=0, description="Maximum doublings of the initial hi")
    seed: int = Field(0, ge=0)
    hi_multiplier: float = Field(1.0, gt=0.0, description="Scale applied to the analytic bound for the initial hi")
    mmd_bound_constant: float = Field(4.0, gt=0.0, description="Constant c of the fixed-k MMD bound")

class EnsembleSpec(BaseModel):
    generator: Optional[str] = None
    path: Optional[str] = None
    params: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def generator_or_path(self):
        if (self.generator is None) == (self.path is None):
            raise ValueError("An ensemble spec needs exactly one of 'generator' or 'path'")
        return self

class RunConfig(BaseModel):
    command: Literal["gen", "dist", "estimate", "sweep", "bounds", "hard"]
    metric: Optional[str] = None
    k: Optional[int] = Field(None, ge=1)
    ensembles: List[EnsembleSpec] = Field(default_factory=list)
    epsilon: Optional[float] = Field(None, gt=0.0)
    delta: Optional[float] = Field(None, gt=0.0, lt=1.0)
    repetitions: Optional[int] = Field(None, ge=1)
    trials: Optional[int] = Field(None, ge=1)
    n_values: List[int] = Field(default_factory=list)
    budget: Optional[int] = Field(None, ge=0)
    noise: Optional[NoiseConfig] = None
    seed: int = Field(0, ge=0)
    output_dir: str = "output"
    workers: Optional[int] = Field(None, ge=1)
    options: Dict[str, Any] = Field(default_factory=dict)

## Sweep outputs

class TrialOutcome(BaseModel):
    n: int
    trial: int
    m: int = Field(..., ge=0)
    flagged: bool = False
    d_true: Optional[float] = None
    seed: int
    probes: int = 0
    message: Optional[str] = None

class CurvePoint(BaseModel):
    n: int
    m_mean: float
    m_std: float
    trials_used: int
    trials_flagged: int

class CurveSummary(BaseModel):
    metric: str
    k: Optional[int] = None
    slope: float
    intercept: float
    r_squared: float
    points: List[CurvePoint]
    config: Dict[str, Any]
    seed: int

class BoundsRow(BaseModel):
    n: int
    wasserstein: int
    mmd_fixed_k: int
    mmd_general: int
    mmd_k_equals_n: int
    occupancy_minimum: int

def validate_frame(df: pd.DataFrame, schema: pa.DataFrameSchema) -> pd.DataFrame:
    """Validate and coerce a frame; a column-less empty frame gets the schema's columns."""
    if df.empty and len(df.columns) == 0:
        df = pd.DataFrame({name: pd.Series(dtype=str(col.dtype)) for name, col in schema.columns.items()})
    return schema.validate(df)
