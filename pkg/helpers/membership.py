"""Partition matrices: regime validators, BFPM membership and centroid updates,
hardening.

The membership update is the reciprocal form

    u_i = [sum_k (d_i / d_k) ** (2 / (m - 1))] ** (-1 / m)

which gives u = 1 at a centroid and decays with distance. ``raw_exponent``
switches to the +1/m exponent exactly as it is usually printed; that variant
grows with distance and is clamped to 1, so it is kept for comparison only.
"""
from __future__ import annotations

from typing import List, Optional

import numpy as np

from helpers.distance import EUCLIDEAN, pairwise_distances
from models.errors import ConfigError, DegenerateClusterError, InvalidPartitionError
from models.models import (REGIME_CHAIN, Centroids, Dataset, DistanceSpec, PartitionMatrix,
                           Regime, RegimeCheck)

FUZZY_TOLERANCE = 1e-9


# -----------------------------------------------------------------------------
# Validators
# -----------------------------------------------------------------------------
def _first(mask: np.ndarray) -> int:
    return int(np.argmax(mask))


def validate(pm: PartitionMatrix, regime: Optional[Regime] = None) -> RegimeCheck:
    """Check ``pm`` against ``regime`` (default: its own tag); report the first violation."""
    regime = regime or pm.regime
    u = pm.u
    c, n = u.shape

    def fail(reason: str) -> RegimeCheck:
        return RegimeCheck(regime=regime, ok=False, reason=reason)

    if ((u < 0) | (u > 1)).any():
        return fail("membership outside [0, 1]")

    cols = u.sum(axis=0)
    rows = u.sum(axis=1)

    if regime == "crisp":
        off = (u != 0) & (u != 1)
        if off.any():
            return fail(f"column {_first(off.any(axis=0))} has a non-binary membership")
        bad = cols != 1
        if bad.any():
            return fail(f"column {_first(bad)} sums to {cols[_first(bad)]:g}, expected 1")
    elif regime == "fuzzy":
        bad = np.abs(cols - 1.0) > FUZZY_TOLERANCE
        if bad.any():
            return fail(f"column {_first(bad)} sums to {cols[_first(bad)]:g}, expected 1")
    elif regime == "possibilistic":
        bad = u.max(axis=0) <= 0
        if bad.any():
            return fail(f"column {_first(bad)} has no positive membership")
    else:
        # compare the raw sum against c; the average underflows for subnormal sums
        bad = (cols <= 0) | (cols > c)
        if bad.any():
            j = _first(bad)
            return fail(f"column {j} averages {cols[j] / c:g}, outside (0, 1]")

    # crisp and fuzzy clusters must be proper: 0 < row sum < n
    upper_open = regime in ("crisp", "fuzzy")
    bad = (rows <= 0) | ((rows >= n) if upper_open else (rows > n))
    if bad.any():
        bound = "(0, n)" if upper_open else "(0, n]"
        return fail(f"row {_first(bad)} sums to {rows[_first(bad)]:g}, outside {bound}")
    return RegimeCheck(regime=regime, ok=True)


def regime_subset_check(pm: PartitionMatrix) -> List[Regime]:
    """Every regime whose validator accepts ``pm``, in crisp -> bfpm chain order."""
    return [r for r in REGIME_CHAIN if validate(pm, r).ok]


# -----------------------------------------------------------------------------
# Membership and centroid updates
# -----------------------------------------------------------------------------
def memberships_from_distances(dist: np.ndarray, m: float, raw_exponent: bool = False) -> np.ndarray:
    """
    c x n memberships from a c x n distance matrix.

    Where an object sits on one or more centroids those clusters get 1 and the
    rest are computed over the non-coincident centroids only.
    """
    if m <= 1:
        raise ConfigError(f"fuzzification constant m must exceed 1, got {m}")
    dist = np.asarray(dist, dtype=float)
    zero = dist == 0
    exponent = 2.0 / (m - 1.0)

    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = (dist[:, None, :] / dist[None, :, :]) ** exponent  # [i, k, j] = (d_ij / d_kj)^e
    ratios = np.where(zero[None, :, :], 0.0, ratios)
    total = ratios.sum(axis=1)
    with np.errstate(divide="ignore"):
        u = total ** (1.0 / m if raw_exponent else -1.0 / m)
    u = np.where(zero, 1.0, u)
    # a column whose every centroid coincides with the object keeps only the 1s
    return np.clip(np.nan_to_num(u, nan=1.0, posinf=1.0), 0.0, 1.0)


def bfpm_membership(obj, cents: Centroids, m: float, spec: DistanceSpec = EUCLIDEAN,
                    raw_exponent: bool = False) -> np.ndarray:
    """Membership of one object in each of the c clusters."""
    obj = np.asarray(obj, dtype=float).reshape(1, -1)
    dist = pairwise_distances(obj, cents.v, spec)
    return memberships_from_distances(dist, m, raw_exponent)[:, 0]


def weighted_means(objects: np.ndarray, u: np.ndarray, m: float, strict: bool = True) -> np.ndarray:
    """Rows of u ** m as weights over the objects. With ``strict=False`` a cluster
    without mass gets a zero row instead of raising."""
    weights = u ** m
    totals = weights.sum(axis=1)
    empty = np.flatnonzero(totals <= 0)
    if empty.size and strict:
        raise DegenerateClusterError(empty)
    # fixed-order reduction, no BLAS, so reruns are bit-identical
    sums = (weights[:, :, None] * objects[None, :, :]).sum(axis=1)
    return sums / np.where(totals > 0, totals, 1.0)[:, None]


def update_centroids(ds: Dataset, pm: PartitionMatrix, m: float) -> Centroids:
    if pm.n != ds.n:
        raise InvalidPartitionError(f"partition covers {pm.n} objects, dataset has {ds.n}")
    return Centroids(v=weighted_means(ds.objects, pm.u, m))


def harden(pm: PartitionMatrix) -> PartitionMatrix:
    """Crisp partition by per-object argmax; ties go to the lowest cluster index."""
    if (pm.u.max(axis=0) <= 0).any():
        col = _first(pm.u.max(axis=0) <= 0)
        raise InvalidPartitionError(f"column {col} has no positive membership to harden")
    hard = np.zeros_like(pm.u)
    hard[np.argmax(pm.u, axis=0), np.arange(pm.n)] = 1.0
    return PartitionMatrix(u=hard, regime="crisp")
