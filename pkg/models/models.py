from __future__ import annotations

import math
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

Regime = Literal["crisp", "fuzzy", "possibilistic", "bfpm"]
REGIME_CHAIN: Tuple[Regime, ...] = ("crisp", "fuzzy", "possibilistic", "bfpm")

Algorithm = Literal["fpm", "fpm1", "fpm2", "bfpm", "bfpm_wfd"]
DistanceFamily = Literal["lp", "wfd", "pwfd"]
SplitKind = Literal["holdout", "random_subsampling", "kfold", "bootstrap"]
ObjectKind = Literal["normal", "critical", "outlier"]

DEFAULT_THRESHOLDS: Tuple[float, ...] = (0.85, 0.75, 0.70)

_ARRAYS = ConfigDict(arbitrary_types_allowed=True, frozen=True)


def _frozen_array(value, ndim: int, dtype=float) -> np.ndarray:
    arr = np.array(value, dtype=dtype, copy=True)
    if arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


# -----------------------------------------------------------------------------
# Data
# -----------------------------------------------------------------------------
class Dataset(BaseModel):
    model_config = _ARRAYS

    objects: np.ndarray = Field(..., description="n x d matrix of real features")
    labels: Optional[np.ndarray] = Field(None, description="dense 0-based class index per object")
    feature_names: List[str]
    class_names: List[str] = Field(default_factory=list)  # original label text, by index
    normalized: bool = False

    @field_validator("objects", mode="before")
    @classmethod
    def _objects_matrix(cls, v):
        return _frozen_array(v, 2)

    @field_validator("labels", mode="before")
    @classmethod
    def _labels_vector(cls, v):
        return None if v is None else _frozen_array(v, 1, dtype=np.int64)

    @model_validator(mode="after")
    def _check(self) -> "Dataset":
        n, d = self.objects.shape
        if n < 1 or d < 1:
            raise ValueError("dataset needs at least one object and one feature")
        if not np.isfinite(self.objects).all():
            raise ValueError("feature values must be finite")
        if len(self.feature_names) != d:
            raise ValueError(f"{len(self.feature_names)} feature names for {d} features")
        if self.normalized and (self.objects.min() < 0.0 or self.objects.max() > 1.0):
            raise ValueError("normalized dataset has values outside [0, 1]")
        if self.labels is not None:
            if len(self.labels) != n:
                raise ValueError("labels length differs from object count")
            limit = len(self.class_names) or int(self.labels.max()) + 1
            if self.labels.min() < 0 or self.labels.max() >= limit:
                raise ValueError("label index outside the class range")
        return self

    @property
    def n(self) -> int:
        return self.objects.shape[0]

    @property
    def d(self) -> int:
        return self.objects.shape[1]

    @property
    def n_classes(self) -> int:
        if self.labels is None:
            return 0
        return len(self.class_names) or int(self.labels.max()) + 1

    def subset(self, indices) -> "Dataset":
        """Objects at ``indices`` in the given order (duplicates kept)."""
        idx = np.asarray(indices, dtype=np.int64)
        return self.model_copy(update={
            "objects": _frozen_array(self.objects[idx], 2),
            "labels": None if self.labels is None else _frozen_array(self.labels[idx], 1, np.int64),
        })


class FeatureRange(BaseModel):
    model_config = _ARRAYS

    minimum: np.ndarray
    maximum: np.ndarray


class SplitPlan(BaseModel):
    kind: SplitKind
    ratio: float = Field(2.0 / 3.0, gt=0.0, lt=1.0)
    t: int = Field(10, ge=1)
    k: int = Field(10, ge=2)
    seed: int = Field(42, ge=0, lt=2 ** 64)


class Split(BaseModel):
    """Index sets of one train/test split; bootstrap train indices may repeat."""

    train: List[int]
    test: List[int]


# -----------------------------------------------------------------------------
# Distances
# -----------------------------------------------------------------------------
class DistanceSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    family: DistanceFamily = "lp"
    p: float = Field(2.0, ge=1.0)
    r: Optional[float] = Field(None, ge=1.0, description="outer root exponent, defaults to p")
    w: Optional[Tuple[float, ...]] = Field(None, description="weights of the first object's features")
    w_prime: Optional[Tuple[float, ...]] = Field(None, description="weights of the second object's features, defaults to w")
    w_dprime: Optional[Tuple[float, ...]] = Field(None, description="priority divisors (pwfd only)")

    @model_validator(mode="after")
    def _check(self) -> "DistanceSpec":
        for name in ("w", "w_prime", "w_dprime"):
            vec = getattr(self, name)
            if vec is not None and not all(math.isfinite(x) for x in vec):
                raise ValueError(f"{name} entries must be finite")
        if self.family == "pwfd" and self.w_dprime is not None and any(x <= 0 for x in self.w_dprime):
            raise ValueError("w_dprime entries must be strictly positive")
        return self

    @property
    def root(self) -> float:
        return self.p if self.r is None else self.r


class DominantReport(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    feature_flags: List[bool]
    mean: float
    variance: float
    lambda_: float = Field(..., alias="lambda")


class DominantScan(BaseModel):
    reports: List[DominantReport]
    feature_counts: List[int]  # objects flagging each feature
    objects_flagged: int


# -----------------------------------------------------------------------------
# Memberships and clustering
# -----------------------------------------------------------------------------
class PartitionMatrix(BaseModel):
    model_config = _ARRAYS

    u: np.ndarray = Field(..., description="c x n memberships, clamped into [0, 1]")
    regime: Regime = "bfpm"

    @field_validator("u", mode="before")
    @classmethod
    def _clamp(cls, v):
        arr = np.clip(np.array(v, dtype=float, copy=True), 0.0, 1.0)
        if arr.ndim != 2:
            raise ValueError(f"membership matrix must be 2-d, got shape {arr.shape}")
        if np.isnan(arr).any():
            raise ValueError("membership matrix contains NaN")
        arr.setflags(write=False)
        return arr

    @property
    def c(self) -> int:
        return self.u.shape[0]

    @property
    def n(self) -> int:
        return self.u.shape[1]


class Centroids(BaseModel):
    model_config = _ARRAYS

    v: np.ndarray = Field(..., description="c x d prototype vectors")

    @field_validator("v", mode="before")
    @classmethod
    def _finite(cls, v):
        arr = _frozen_array(v, 2)
        if arr.shape[0] < 1 or not np.isfinite(arr).all():
            raise ValueError("centroids need at least one finite row")
        return arr

    @property
    def c(self) -> int:
        return self.v.shape[0]


class RegimeCheck(BaseModel):
    regime: Regime
    ok: bool
    reason: Optional[str] = None  # first violation

    def __bool__(self) -> bool:
        return self.ok


class ClusterConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    algorithm: Algorithm = "bfpm"
    c: int = Field(..., ge=1)
    m: float = Field(2.0, gt=1.0, description="fuzzification constant")
    epsilon: float = Field(1e-6, gt=0.0, description="stop when max squared centroid displacement drops below")
    max_iter: int = Field(300, ge=1)
    seed: int = Field(42, ge=0, lt=2 ** 64)
    distance: DistanceSpec = Field(default_factory=DistanceSpec)
    raw_exponent: bool = False  # literal printed membership exponent, for comparison only


class ClusterResult(BaseModel):
    model_config = _ARRAYS

    pm: PartitionMatrix
    cents: Centroids
    iterations: int
    converged: bool
    objective: float
    objective_trace: List[float] = Field(default_factory=list)
    reseeds: int = 0
    config: ClusterConfig


# -----------------------------------------------------------------------------
# Classification
# -----------------------------------------------------------------------------
class ClassifierModel(BaseModel):
    model_config = _ARRAYS

    train: Dataset
    c: int = Field(..., ge=1)
    feature_weights: Tuple[float, ...]
    distance: DistanceSpec = Field(default_factory=DistanceSpec)

    @model_validator(mode="after")
    def _check(self) -> "ClassifierModel":
        if self.train.labels is None:
            raise ValueError("classifier training data must be labeled")
        if len(self.feature_weights) != self.train.d:
            raise ValueError("feature_weights length differs from the feature count")
        return self


class Classification(BaseModel):
    model_config = _ARRAYS

    pm: PartitionMatrix
    predicted: List[int]


class ConfusionMatrix(BaseModel):
    t_pos: int = Field(..., ge=0)
    f_neg: int = Field(..., ge=0)
    f_pos: int = Field(..., ge=0)
    t_neg: int = Field(..., ge=0)

    @property
    def pos(self) -> int:
        return self.t_pos + self.f_neg

    @property
    def neg(self) -> int:
        return self.f_pos + self.t_neg

    @property
    def total(self) -> int:
        return self.pos + self.neg


class ClassifierMetrics(BaseModel):
    sensitivity: Optional[float] = None
    specificity: Optional[float] = None
    precision: Optional[float] = None
    accuracy: Optional[float] = None
    error_rate: Optional[float] = None


class ErrorMeasures(BaseModel):
    absolute: List[float]
    squared: List[float]
    mean_absolute: float
    mean_squared: float
    relative_absolute: float
    relative_squared: float


# -----------------------------------------------------------------------------
# Analysis
# -----------------------------------------------------------------------------
class MutationEntry(BaseModel):
    object_index: int
    own_cluster: int
    own_membership: float
    runner_up_cluster: int
    runner_up_membership: float


class MutationReport(BaseModel):
    per_object: List[MutationEntry]
    threshold_counts: Dict[float, int]


class CriticalFlag(BaseModel):
    object_index: int
    epsilon: float
    clusters_involved: Tuple[int, ...]

    @field_validator("clusters_involved")
    @classmethod
    def _at_least_two(cls, v):
        if len(v) < 2:
            raise ValueError("a critical object involves at least two clusters")
        return tuple(sorted(v))


class TaxonomyReport(BaseModel):
    kinds: List[ObjectKind]
    counts: Dict[str, int]


# -----------------------------------------------------------------------------
# CLI run configuration
# -----------------------------------------------------------------------------
Command = Literal["cluster", "classify", "validate", "mutation", "split", "sweep", "dominant"]


class RunConfig(BaseModel):
    command: Command
    dataset_path: str
    label_column: Optional[str] = None

    algorithm: Algorithm = "bfpm"
    c: Optional[int] = Field(None, ge=1)
    m: float = Field(2.0, gt=1.0)
    epsilon: float = Field(1e-6, gt=0.0)
    max_iter: int = Field(300, ge=1)
    seed: int = Field(42, ge=0, lt=2 ** 64)
    distance: DistanceFamily = "lp"
    p: float = Field(2.0, ge=1.0)
    r: Optional[float] = Field(None, ge=1.0)
    weights: Optional[str] = None
    priority_weights: Optional[str] = None
    raw_exponent: bool = False

    lambda_: float = Field(2.0, gt=0.0, alias="lambda")
    critical_epsilon: float = Field(0.1, gt=0.0)
    exact_critical: bool = False
    thresholds: Tuple[float, ...] = DEFAULT_THRESHOLDS
    outlier_threshold: float = Field(0.1, ge=0.0, le=1.0)
    harden_first: bool = False
    hungarian: bool = False
    indices: Tuple[str, ...] = ("v_pc", "v_pe", "v_xb")
    y: float = Field(2.0, gt=0.0)
    partition: Optional[str] = None  # stored cluster result for `validate`

    split: SplitKind = "holdout"
    ratio: float = Field(2.0 / 3.0, gt=0.0, lt=1.0)
    k: int = Field(10, ge=2)
    t: int = Field(10, ge=1)
    feature_weights: Optional[str] = None
    positive_class: int = Field(0, ge=0)

    m_values: Tuple[float, ...] = (2.0,)
    weight_specs: Tuple[str, ...] = ("uniform:1",)
    algorithms: Tuple[Algorithm, ...] = ()  # non-empty: sweep rows are algorithms

    output_format: Literal["json", "csv"] = "json"
    output_path: Optional[str] = None

    model_config = ConfigDict(populate_by_name=True)

    @model_validator(mode="after")
    def _consistent(self) -> "RunConfig":
        if self.command in ("cluster", "mutation", "sweep") and self.c is None:
            raise ValueError(f"{self.command} requires --c")
        if self.command == "validate" and self.c is None and self.partition is None:
            raise ValueError("validate requires --c or --partition")
        if self.command in ("classify", "sweep") and not self.label_column:
            raise ValueError(f"{self.command} requires --label-column")
        if self.command == "mutation" and self.c is not None and self.c < 2:
            raise ValueError("mutation analysis needs c >= 2")
        if any(m <= 1.0 for m in self.m_values):
            raise ValueError("every sweep m must exceed 1")
        if any(not 0.0 <= th <= 1.0 for th in self.thresholds):
            raise ValueError("thresholds must lie in [0, 1]")
        return self
