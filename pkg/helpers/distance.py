"""Minkowski (Lp), weighted feature (WFD) and prioritized weighted feature
(PWFD) distances, plus dominant-feature detection.

All three families share one kernel:

    (sum_f (|w_f a_f - w'_f b_f| / w''_f) ** p) ** (1 / r)

Lp fixes every weight to one and r = p; WFD fixes w'' to one.
"""
from __future__ import annotations

import logging
from fractions import Fraction
from typing import Tuple

import numpy as np

from models.errors import ConfigError, DimensionMismatchError
from models.models import Dataset, DistanceSpec, DominantReport, DominantScan

log = logging.getLogger(__name__)

EUCLIDEAN = DistanceSpec(family="lp", p=2.0)

Weights = Tuple[np.ndarray, np.ndarray, np.ndarray]


def resolve_weights(spec: DistanceSpec, d: int) -> Weights:
    ones = np.ones(d)
    if spec.family == "lp":
        return ones, ones, ones

    w = ones if spec.w is None else np.asarray(spec.w, dtype=float)
    w_prime = w if spec.w_prime is None else np.asarray(spec.w_prime, dtype=float)
    w_dprime = ones
    if spec.family == "pwfd" and spec.w_dprime is not None:
        w_dprime = np.asarray(spec.w_dprime, dtype=float)
    for name, vec in (("w", w), ("w_prime", w_prime), ("w_dprime", w_dprime)):
        if vec.shape != (d,):
            raise DimensionMismatchError(f"{name} has {vec.shape[0]} entries for {d} features")
    if (w_dprime <= 0).any():
        raise ConfigError("priority weights w'' must be strictly positive")
    return w, w_prime, w_dprime


def _aggregate(terms: np.ndarray, spec: DistanceSpec) -> np.ndarray:
    return np.sum(terms ** spec.p, axis=-1) ** (1.0 / spec.root)


def distance(a, b, spec: DistanceSpec = EUCLIDEAN) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionMismatchError(f"vectors of shape {a.shape} and {b.shape}")
    w, w_prime, w_dprime = resolve_weights(spec, a.shape[0])
    terms = np.abs(w * a - w_prime * b) / w_dprime
    return float(_aggregate(terms, spec))


def pairwise_distances(objects: np.ndarray, centers: np.ndarray,
                       spec: DistanceSpec = EUCLIDEAN) -> np.ndarray:
    """c x n matrix of distance(objects[j], centers[i]); objects carry w, centers w'."""
    objects = np.asarray(objects, dtype=float)
    centers = np.asarray(centers, dtype=float)
    if objects.shape[1] != centers.shape[1]:
        raise DimensionMismatchError(
            f"objects have {objects.shape[1]} features, centers {centers.shape[1]}")
    w, w_prime, w_dprime = resolve_weights(spec, objects.shape[1])
    terms = np.abs((w * objects)[None, :, :] - (w_prime * centers)[:, None, :]) / w_dprime
    return _aggregate(terms, spec)


def parse_weight_spec(text: str, d: int) -> Tuple[float, ...]:
    """
    Weight vector from ``uniform:VALUE`` or a comma-separated literal.

    VALUE may be a decimal, a fraction such as ``1/3``, or ``1/d`` for the
    reciprocal of the feature count.
    """
    text = text.strip()
    if text.startswith("uniform:"):
        value = _scalar(text.split(":", 1)[1], d)
        return tuple([value] * d)
    try:
        vec = tuple(_scalar(part, d) for part in text.split(","))
    except ConfigError:
        raise ConfigError(f"cannot read weight spec '{text}'")
    if len(vec) != d:
        raise ConfigError(f"weight spec '{text}' has {len(vec)} entries for {d} features")
    return vec


def _scalar(token: str, d: int) -> float:
    token = token.strip().replace("/d", f"/{d}")
    try:
        return float(Fraction(token))
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"cannot read weight value '{token}'")


def build_spec(family: str, d: int, p: float = 2.0, r: float | None = None,
               weights: str | None = None, priority_weights: str | None = None) -> DistanceSpec:
    """DistanceSpec with textual weight specs resolved against ``d`` features."""
    w = parse_weight_spec(weights, d) if weights else None
    w_dprime = parse_weight_spec(priority_weights, d) if priority_weights else None
    try:
        return DistanceSpec(family=family, p=p, r=r, w=w, w_prime=w, w_dprime=w_dprime)
    except ValueError as e:
        raise ConfigError(f"invalid distance settings: {e}")


# -----------------------------------------------------------------------------
# Dominant features
# -----------------------------------------------------------------------------
def mean_variance(x) -> Tuple[float, float]:
    x = np.asarray(x, dtype=float)
    mean = float(np.sum(x) / x.shape[0])
    variance = float(np.sum((x - mean) ** 2) / x.shape[0])
    return mean, variance


def detect_dominant(x, lambda_: float = 2.0) -> DominantReport:
    """A feature is dominant when it strays from the object's mean by more than
    lambda * variance, or its magnitude exceeds lambda * |mean|."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] < 2:
        raise DimensionMismatchError("dominant-feature detection needs at least two features")
    if lambda_ <= 0:
        raise ConfigError("lambda must be positive")
    mean, variance = mean_variance(x)
    flags = (np.abs(x - mean) > lambda_ * variance) | (np.abs(x) > lambda_ * abs(mean))
    return DominantReport(feature_flags=flags.tolist(), mean=mean, variance=variance, lambda_=lambda_)


def scan_dominant(ds: Dataset, lambda_: float = 2.0) -> DominantScan:
    reports = [detect_dominant(row, lambda_) for row in ds.objects]
    flags = np.array([r.feature_flags for r in reports], dtype=bool)
    scan = DominantScan(
        reports=reports,
        feature_counts=flags.sum(axis=0).astype(int).tolist(),
        objects_flagged=int(flags.any(axis=1).sum()),
    )
    log.info("dominant scan: %d of %d objects carry a dominant feature", scan.objects_flagged, ds.n)
    return scan
