from __future__ import annotations

import logging
from collections import Counter
from typing import List, Sequence

import numpy as np

from models.errors import ConfigError, InvalidPartitionError
from models.models import (DEFAULT_THRESHOLDS, CriticalFlag, MutationEntry, MutationReport,
                           PartitionMatrix, TaxonomyReport)

log = logging.getLogger(__name__)


def mutation_report(pm: PartitionMatrix, thresholds: Sequence[float] = DEFAULT_THRESHOLDS) -> MutationReport:
    """Own and runner-up cluster of every object, and how many runner-ups exceed each threshold."""
    if pm.c < 2:
        raise InvalidPartitionError(f"mutation analysis needs at least two clusters, got c={pm.c}")
    u = pm.u
    cols = np.arange(pm.n)
    own = np.argmax(u, axis=0)
    rest = u.copy()
    rest[own, cols] = -1.0
    runner = np.argmax(rest, axis=0)

    entries = [
        MutationEntry(
            object_index=int(j),
            own_cluster=int(own[j]),
            own_membership=float(u[own[j], j]),
            runner_up_cluster=int(runner[j]),
            runner_up_membership=float(u[runner[j], j]),
        )
        for j in cols
    ]
    second = u[runner, cols]
    counts = {float(th): int(np.sum(second > th)) for th in thresholds}
    log.info("mutation: runner-up counts %s", counts)
    return MutationReport(per_object=entries, threshold_counts=counts)


def detect_critical(pm: PartitionMatrix, epsilon: float, exact: bool = False) -> List[CriticalFlag]:
    """
    Objects whose top memberships sit within ``epsilon`` of each other.

    The cluster set grows from the argmax: every cluster with a positive
    membership less than ``epsilon`` below the maximum joins it. ``exact``
    keeps only clusters tied with the maximum.
    """
    if not exact and epsilon <= 0:
        raise ConfigError(f"critical epsilon must be positive, got {epsilon}")
    u = pm.u
    top = u.max(axis=0)
    gap = top[None, :] - u
    near = (gap == 0) if exact else (gap < epsilon)
    near &= u > 0

    flags = []
    for j in np.flatnonzero(near.sum(axis=0) >= 2):
        clusters = tuple(int(i) for i in np.flatnonzero(near[:, j]))
        flags.append(CriticalFlag(object_index=int(j), epsilon=0.0 if exact else epsilon,
                                  clusters_involved=clusters))
    return flags


def object_taxonomy(pm: PartitionMatrix, epsilon: float = 0.1,
                    outlier_threshold: float = 0.1, exact: bool = False) -> TaxonomyReport:
    """Label every object critical, outlier or normal."""
    kinds = ["normal"] * pm.n
    for j in np.flatnonzero(pm.u.max(axis=0) < outlier_threshold):
        kinds[j] = "outlier"
    for flag in detect_critical(pm, epsilon, exact=exact):
        kinds[flag.object_index] = "critical"
    tally = Counter(kinds)
    counts = {kind: tally.get(kind, 0) for kind in ("normal", "critical", "outlier")}
    return TaxonomyReport(kinds=kinds, counts=counts)
