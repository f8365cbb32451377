import hashlib
import math
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationInfo, field_validator, model_validator

MetricChoice = Literal["d", "d_eta"]
NormChoice = Literal["sup", "l2"]
StatisticChoice = Literal["scaled_sum", "frechet_mean"]

WEIGHT_SUM_TOL = 1e-12


def _frozen_array(value, dtype=float) -> np.ndarray:
    arr = np.array(value, dtype=dtype)
    arr.setflags(write=False)
    return arr


def array_digest(arr: np.ndarray) -> str:
    """Short content hash used as provenance id for spaces and measures."""
    data = np.ascontiguousarray(arr, dtype=float)
    h = hashlib.sha256()
    h.update(str(data.shape).encode("utf-8"))
    h.update(data.tobytes())
    return h.hexdigest()[:16]


class _Frozen(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


# ---------------------------------------------------------------- metric_core


class MetricValidationReport(_Frozen):
    n: int
    tol: float
    symmetric: bool
    identity_ok: bool
    triangle_violations: List[Tuple[int, int, int, float]] = Field(default_factory=list)
    max_excess: float = 0.0

    @model_validator(mode="after")
    def _excess_matches(self):
        expected = max((v[3] for v in self.triangle_violations), default=0.0)
        if self.max_excess != expected:
            raise ValueError("max_excess must equal the largest listed excess")
        return self

    @property
    def ok(self) -> bool:
        return self.symmetric and self.identity_ok and not self.triangle_violations


class FiniteMetricSpace(_Frozen):
    """n points with a validated distance matrix.

    Construction runs the full axiom check; a matrix with any violation
    beyond `tol` raises MetricAxiomError. Callers that already validated the
    matrix pass context={"axioms_checked": True} to model_validate.
    """

    n: int = Field(ge=1)
    dist: np.ndarray
    labels: Optional[List[str]] = None
    tol: float = 1e-9

    @field_validator("dist", mode="before")
    @classmethod
    def _coerce_dist(cls, v):
        return _frozen_array(v)

    @model_validator(mode="after")
    def _check_axioms(self, info: ValidationInfo):
        from .analyzer.metric_core import validate_metric
        from .errors import MetricAxiomError

        if self.dist.shape != (self.n, self.n):
            raise MetricAxiomError(f"dist has shape {self.dist.shape}, expected ({self.n}, {self.n})")
        if self.labels is not None and len(self.labels) != self.n:
            raise MetricAxiomError(f"{len(self.labels)} labels given for {self.n} points")
        if info.context and info.context.get("axioms_checked"):
            return self
        report = validate_metric(self.dist, self.tol)
        if not report.ok:
            first = report.triangle_violations[:3]
            raise MetricAxiomError(
                f"matrix is not a metric: symmetric={report.symmetric}, "
                f"identity_ok={report.identity_ok}, triangle violations {first}"
            )
        return self

    @property
    def space_id(self) -> str:
        return array_digest(self.dist)

    def label(self, i: int) -> str:
        return self.labels[i] if self.labels else str(i)


class ConePoint(_Frozen):
    u: float = Field(gt=0.0, lt=1.0)
    v: float = Field(gt=0.0, lt=2.0 * math.pi)


# -------------------------------------------------------------------- measure


class ProbabilityMeasure(_Frozen):
    weights: np.ndarray
    space_id: str

    @field_validator("weights", mode="before")
    @classmethod
    def _coerce_weights(cls, v):
        arr = _frozen_array(v)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("weights must be a non-empty vector")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise ValueError("weights must be finite and nonnegative")
        if abs(float(arr.sum()) - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError(f"weights sum to {float(arr.sum())!r}, not 1")
        return arr

    @property
    def n(self) -> int:
        return int(self.weights.size)

    @property
    def measure_id(self) -> str:
        return array_digest(self.weights)

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.weights > 0)


class SampleBatch(_Frozen):
    indices: np.ndarray
    n_points: int = Field(ge=1)
    seed: int
    measure_id: str

    @field_validator("indices", mode="before")
    @classmethod
    def _coerce_indices(cls, v):
        return _frozen_array(v, dtype=np.int64)

    @model_validator(mode="after")
    def _in_range(self):
        if self.indices.size and (self.indices.min() < 0 or self.indices.max() >= self.n_points):
            raise ValueError(f"sample indices must lie in [0, {self.n_points})")
        return self

    @property
    def m(self) -> int:
        return int(self.indices.size)


class BallPositivityResult(_Frozen):
    ok: bool
    point: Optional[int] = None
    eps: Optional[float] = None
    min_mass: float


# ------------------------------------------------------------------ embedding


class EmbeddedFunction(_Frozen):
    """A function on the points of a space; `source` is set for f_x = d(x, .)."""

    values: np.ndarray
    space_id: str
    source: Optional[int] = None

    @field_validator("values", mode="before")
    @classmethod
    def _coerce_values(cls, v):
        arr = _frozen_array(v)
        if arr.ndim != 1 or not np.all(np.isfinite(arr)):
            raise ValueError("values must be a finite vector")
        return arr


class HullPoint(_Frozen):
    """Convex combination of embedded points.

    `weights` is the dense coefficient vector; `values` caches weights @ dist.
    """

    weights: np.ndarray
    values: np.ndarray
    space_id: str

    @field_validator("weights", mode="before")
    @classmethod
    def _coerce_weights(cls, v):
        arr = _frozen_array(v)
        if np.any(arr < 0) or abs(float(arr.sum()) - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError("hull coefficients must be nonnegative and sum to 1")
        return arr

    @field_validator("values", mode="before")
    @classmethod
    def _coerce_values(cls, v):
        return _frozen_array(v)

    @property
    def coeffs(self) -> Dict[int, float]:
        return {int(i): float(self.weights[i]) for i in np.flatnonzero(self.weights)}

    def as_function(self) -> EmbeddedFunction:
        return EmbeddedFunction(values=self.values, space_id=self.space_id)


class TwoDiameterCheck(_Frozen):
    dist_to_image: float
    nearest_point: int
    bound: float
    ok: bool


# -------------------------------------------------------------------- entropy


class CoveringReport(_Frozen):
    eps: float
    n_cover: int = Field(ge=1)
    method: Literal["greedy", "exact"]
    centers: List[int]
    convention: str = "closed balls of radius eps around chosen points"

    @model_validator(mode="after")
    def _count(self):
        if len(self.centers) != self.n_cover:
            raise ValueError("n_cover must equal the number of centers")
        return self


class EntropyCurve(_Frozen):
    grid: List[float]
    values: List[int]
    covers: List[CoveringReport]
    integral_estimate: float
    floor_eps: float
    floor_remainder: float
    cutoff_eps: Optional[float]
    convention: str = "closed balls of radius eps around chosen points"

    @property
    def total(self) -> float:
        return self.integral_estimate + self.floor_remainder


class DyadicSeries(_Frozen):
    N: float
    M: float
    partial_sums: List[float]
    tail: float


class DyadicCoverRow(_Frozen):
    k: int
    eps: float
    measured: int
    bound: float
    ok: bool


class DoublingCheck(_Frozen):
    N: int
    M: int
    scale: float
    rows: List[DyadicCoverRow]

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.rows)


# ------------------------------------------------------------ modified_metric


class ModifiedMetricSpace(_Frozen):
    base: FiniteMetricSpace
    measure: ProbabilityMeasure
    dist_eta: np.ndarray
    collapsed_pairs: List[Tuple[int, int]] = Field(default_factory=list)
    ball_positive: bool

    @field_validator("dist_eta", mode="before")
    @classmethod
    def _coerce(cls, v):
        return _frozen_array(v)

    @property
    def is_metric(self) -> bool:
        return not self.collapsed_pairs

    @property
    def measure_hash(self) -> str:
        return self.measure.measure_id

    def as_space(self) -> FiniteMetricSpace:
        """(K, d_eta) as a metric space in its own right."""
        from .errors import HypothesisError

        if not self.is_metric:
            raise HypothesisError(
                f"d_eta collapses {len(self.collapsed_pairs)} pairs (e.g. {self.collapsed_pairs[0]}); "
                "ball positivity (every ball has positive measure) is required for a metric"
            )
        return FiniteMetricSpace(n=self.base.n, dist=self.dist_eta, labels=self.base.labels, tol=self.base.tol)


class InjectivityMargin(_Frozen):
    min_distance: float
    pair: Optional[Tuple[int, int]]
    eps: Optional[float] = None
    ball_mass: Optional[float] = None
    lhs: Optional[float] = None
    rhs: Optional[float] = None
    bound_ok: bool = True


# -------------------------------------------------------------------- frechet


class FrechetResult(_Frozen):
    minimizers: List[int]
    min_value: float
    values: np.ndarray
    unique: bool
    metric_choice: MetricChoice = "d"

    @field_validator("values", mode="before")
    @classmethod
    def _coerce(cls, v):
        return _frozen_array(v)

    @model_validator(mode="after")
    def _consistent(self):
        if not self.minimizers:
            raise ValueError("at least one minimizer is required")
        if self.unique != (len(self.minimizers) == 1):
            raise ValueError("unique must be set iff exactly one minimizer")
        return self

    @property
    def representative(self) -> int:
        return min(self.minimizers)


class HullMeanResult(_Frozen):
    mean: HullPoint
    frechet_value: float
    oracle_value: Optional[float] = None
    oracle_gap: Optional[float] = None


class GradientCheck(_Frozen):
    probes: int
    max_relative_error: float
    stationary_norm: float


class ClosestPointResult(_Frozen):
    mu0: List[int]
    closest: List[int]
    coincide: bool
    embedded_minimizers: List[int]
    closest_distance: float


# ----------------------------------------------------------------- lp_compare


class LpAssumptionEstimate(_Frozen):
    D: float = Field(gt=0.0, lt=1.0)
    C: float = Field(ge=0.0, le=1.0)
    worst_pair: Optional[Tuple[int, int]]
    holds: bool
    margin: float

    @model_validator(mode="after")
    def _holds(self):
        if self.holds != (self.C < 1.0):
            raise ValueError("holds must be set iff C < 1")
        return self


class SandwichRow(_Frozen):
    x: int
    y: int
    d_p: float
    d_p_prime: float
    lower_bound: float
    slack: float


class SandwichViolation(_Frozen):
    x: int
    y: int
    kind: Literal["lower", "upper"]
    excess: float


class SandwichReport(_Frozen):
    p: float
    p_prime: float
    D: float
    C: float
    lower_constant: float
    violations: List[SandwichViolation] = Field(default_factory=list)
    max_violation: float = 0.0
    rows: List[SandwichRow] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


class NestingViolation(_Frozen):
    x: int
    y: int
    z: int


# ---------------------------------------------------------------- clt_harness


class CltConfig(_Frozen):
    metric_choice: MetricChoice = "d"
    norm_choice: NormChoice = "sup"
    statistic: StatisticChoice = "scaled_sum"
    n_list: List[int] = Field(default_factory=lambda: [2000])
    replicates: int = Field(default=500, ge=100)
    seed: int = 0
    n_projections: int = Field(default=10, ge=1)
    level: float = Field(default=0.01, gt=0.0, lt=1.0)
    pass_threshold: float = Field(default=0.9, ge=0.0, le=1.0)
    workers: int = Field(default=1, ge=1)
    oracle_replicates: int = Field(default=5, ge=0)

    @field_validator("n_list")
    @classmethod
    def _increasing(cls, v):
        if not v or any(n < 1 for n in v) or any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("n_list must be a non-empty strictly increasing list of positive sizes")
        return v


class CltSizeSummary(_Frozen):
    n: int
    empirical_covariance: np.ndarray
    frobenius_error: float
    relative_frobenius_error: float
    min_eigenvalue: float
    p_values: List[Optional[float]]
    ks_p_values: List[Optional[float]]
    tested_projections: int
    skipped_projections: int
    fraction_passing: Optional[float]
    mean_norm: float
    centering_threshold: float
    centered_ok: bool
    average_statistic_norm: float

    @field_validator("empirical_covariance", mode="before")
    @classmethod
    def _coerce(cls, v):
        return _frozen_array(v)


class CltReport(_Frozen):
    config: CltConfig
    exact_covariance: np.ndarray
    per_n: List[CltSizeSummary]
    frechet_equals_mean_max_gap: Optional[float] = None
    scaled_sum_identical: Optional[bool] = None
    oracle_max_gap: Optional[float] = None
    interpretation: str = ""

    @field_validator("exact_covariance", mode="before")
    @classmethod
    def _coerce(cls, v):
        return _frozen_array(v)


class TransportReport(_Frozen):
    max_transport_error: float
    pairs_checked: int
    claimed_isometry_gap: float
    statistic_report: CltReport
    statistics_identical: bool


# ------------------------------------------------------------------------ cli

Subcommand = Literal["validate", "embed", "entropy", "frechet", "lp-check", "clt", "cone-demo"]


class RunConfig(_Frozen):
    subcommand: Subcommand
    inputs: List[Path] = Field(default_factory=list)
    output: Optional[Path] = None
    seed: int = 0
    tolerances: Dict[str, float] = Field(default_factory=dict)
    format: Literal["json", "csv"] = "json"

    @field_validator("inputs")
    @classmethod
    def _exist(cls, v):
        missing = [str(p) for p in v if not Path(p).is_file()]
        if missing:
            raise ValueError(f"input files not found: {missing}")
        return v
