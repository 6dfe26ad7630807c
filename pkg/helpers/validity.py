"""Cluster validity indices and label-mapped clustering accuracy.

All distances default to Euclidean; the G-family accepts the run's
DistanceSpec. DB and CS work on the hardened partition.
"""
from __future__ import annotations

from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from helpers.distance import EUCLIDEAN, pairwise_distances
from helpers.membership import harden
from models.errors import DimensionMismatchError, InvalidPartitionError, UndefinedMeasureError
from models.models import Centroids, Dataset, DistanceSpec, PartitionMatrix


def _same_n(pm: PartitionMatrix, ds: Dataset) -> None:
    if pm.n != ds.n:
        raise DimensionMismatchError(f"partition covers {pm.n} objects, dataset has {ds.n}")


def _same_c(pm: PartitionMatrix, cents: Centroids) -> None:
    if pm.c != cents.c:
        raise DimensionMismatchError(f"partition has {pm.c} clusters, {cents.c} centroids given")


def _centroid_gaps(cents: Centroids) -> np.ndarray:
    """c x c Euclidean centroid distances with +inf on the diagonal."""
    if cents.c < 2:
        raise UndefinedMeasureError("separation needs at least two centroids")
    gaps = pairwise_distances(cents.v, cents.v, EUCLIDEAN)
    np.fill_diagonal(gaps, np.inf)
    if (gaps == 0).any():
        i, k = np.argwhere(gaps == 0)[0]
        raise UndefinedMeasureError(f"centroids {i} and {k} coincide")
    return gaps


# -----------------------------------------------------------------------------
# Membership-only indices
# -----------------------------------------------------------------------------
def v_pc(pm: PartitionMatrix) -> float:
    """Partition coefficient, sum of squared memberships per object."""
    return float(np.sum(pm.u ** 2) / pm.n)


def v_pe(pm: PartitionMatrix) -> float:
    """Partition entropy in nats; 0 * log 0 counts as 0."""
    u = pm.u
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(u > 0, u * np.log(u), 0.0)
    return float(-np.sum(terms) / pm.n)


def v_xb(pm: PartitionMatrix, cents: Centroids, ds: Dataset) -> float:
    """Xie-Beni: weighted compactness over n times the tightest squared centroid gap."""
    _same_n(pm, ds)
    _same_c(pm, cents)
    separation = np.min(_centroid_gaps(cents)) ** 2
    dist = pairwise_distances(ds.objects, cents.v, EUCLIDEAN)
    return float(np.sum(pm.u ** 2 * dist ** 2) / (ds.n * separation))


# -----------------------------------------------------------------------------
# Hard-partition indices
# -----------------------------------------------------------------------------
def _members(pm: PartitionMatrix) -> Tuple[np.ndarray, ...]:
    assign = np.argmax(harden(pm).u, axis=0)
    groups = tuple(np.flatnonzero(assign == i) for i in range(pm.c))
    empty = [i for i, g in enumerate(groups) if g.size == 0]
    if empty:
        raise InvalidPartitionError(f"clusters without members after hardening: {empty}")
    return groups


def db_index(hard_pm: PartitionMatrix, cents: Centroids, ds: Dataset) -> float:
    """Davies-Bouldin with e_i the mean squared member-to-centroid distance."""
    _same_n(hard_pm, ds)
    _same_c(hard_pm, cents)
    gaps = _centroid_gaps(cents)
    groups = _members(hard_pm)
    spread = np.array([
        np.mean(pairwise_distances(ds.objects[g], cents.v[i:i + 1], EUCLIDEAN) ** 2)
        for i, g in enumerate(groups)
    ])
    ratios = (spread[:, None] + spread[None, :]) / gaps  # diagonal is 0 against inf
    return float(np.mean(ratios.max(axis=1)))


def cs_index(hard_pm: PartitionMatrix, cents: Centroids, ds: Dataset) -> float:
    """
    CS index.

    numerator:   sum_i (1/N_i) sum_{j in C_i} max_{l in C_i} D(O_j, O_l)
    denominator: sum_i min_{k != i} D(P_i, P_k)
    """
    _same_n(hard_pm, ds)
    _same_c(hard_pm, cents)
    gaps = _centroid_gaps(cents)
    groups = _members(hard_pm)
    spread = 0.0
    for g in groups:
        inner = pairwise_distances(ds.objects[g], ds.objects[g], EUCLIDEAN)
        spread += float(np.mean(inner.max(axis=0)))
    return spread / float(np.sum(gaps.min(axis=1)))


# -----------------------------------------------------------------------------
# G family
# -----------------------------------------------------------------------------
def g_components(pm: PartitionMatrix, ds: Dataset,
                 spec: DistanceSpec = EUCLIDEAN) -> Tuple[float, float]:
    """
    (DS_s, CP) of the G index.

    DS_s = (1/n^2) sum_{j1, j2} D^2(j1, j2) * w2(j1, j2)
        w2 = min(max_i u_{i j1}, max_{i != i1} u_{i j2}), i1 the argmax of column j1
    CP   = 2 / (n (n - 1)) sum_{j1 < j2} sum_i D^2(j1, j2) * min(u_{i j1}, u_{i j2})
    """
    _same_n(pm, ds)
    n = ds.n
    if n < 2:
        raise UndefinedMeasureError("the G index needs at least two objects")
    u = pm.u
    d2 = pairwise_distances(ds.objects, ds.objects, spec) ** 2

    top = u.max(axis=0)
    owner = np.argmax(u, axis=0)
    if pm.c > 1:
        # other_max[i, j]: largest membership of object j outside cluster i
        other_max = np.stack([np.delete(u, i, axis=0).max(axis=0) for i in range(pm.c)])
    else:
        other_max = np.zeros_like(u)
    w2 = np.minimum(top[:, None], other_max[owner])
    separation = float(np.sum(d2 * w2) / n ** 2)

    w1 = np.minimum(u[:, :, None], u[:, None, :]).sum(axis=0)
    upper = np.triu_indices(n, k=1)
    compactness = float(2.0 / (n * (n - 1)) * np.sum((d2 * w1)[upper]))
    return separation, compactness


def g_index(pm: PartitionMatrix, ds: Dataset, spec: DistanceSpec = EUCLIDEAN) -> float:
    separation, compactness = g_components(pm, ds, spec)
    if compactness == 0:
        raise UndefinedMeasureError("G index compactness is zero")
    return separation / compactness


def ig_index(pm: PartitionMatrix, ds: Dataset, y: float = 2.0,
             spec: DistanceSpec = EUCLIDEAN) -> float:
    """G / G**y."""
    if y <= 0:
        raise UndefinedMeasureError(f"I_G exponent must be positive, got {y}")
    g = g_index(pm, ds, spec)
    if g == 0:
        raise UndefinedMeasureError("I_G is undefined when G is zero")
    return g / g ** y


# -----------------------------------------------------------------------------
# Accuracy against ground truth
# -----------------------------------------------------------------------------
def _contingency(assign: np.ndarray, truth: np.ndarray, c: int) -> np.ndarray:
    table = np.zeros((c, int(truth.max()) + 1), dtype=np.int64)
    np.add.at(table, (assign, truth), 1)
    return table


def clustering_accuracy(pm: PartitionMatrix, truth_labels: Sequence[int],
                        hungarian: bool = False) -> float:
    """
    Fraction of objects whose cluster maps to their true label.

    Default mapping sends every cluster to its majority label (ties to the
    lowest label), so several clusters may share a label. ``hungarian``
    uses a one-to-one assignment instead.
    """
    truth = np.asarray(truth_labels, dtype=np.int64)
    if truth.shape != (pm.n,):
        raise DimensionMismatchError(f"{truth.size} labels for {pm.n} objects")
    assign = np.argmax(harden(pm).u, axis=0)
    table = _contingency(assign, truth, pm.c)

    if hungarian:
        rows, cols = linear_sum_assignment(table, maximize=True)
        correct = int(table[rows, cols].sum())
    else:
        correct = int(table.max(axis=1).sum())
    return correct / pm.n


def majority_mapping(pm: PartitionMatrix, truth_labels: Sequence[int]) -> List[Optional[int]]:
    """Label chosen for every cluster; None for a cluster without members."""
    truth = np.asarray(truth_labels, dtype=np.int64)
    table = _contingency(np.argmax(harden(pm).u, axis=0), truth, pm.c)
    return [int(np.argmax(row)) if row.any() else None for row in table]
