"""Train/test resampling: holdout, random subsampling, k-fold and bootstrap.

Every split draws from ``numpy.random.default_rng(seed)`` (PCG64), so equal
seeds give identical index sets.
"""
from __future__ import annotations

import logging
import math
from typing import List, Tuple

import numpy as np

from models.errors import ConfigError
from models.models import Dataset, Split, SplitPlan

log = logging.getLogger(__name__)

DatasetPair = Tuple[Dataset, Dataset]


def _require(plan: SplitPlan, kind: str) -> None:
    if plan.kind != kind:
        raise ConfigError(f"split plan kind is '{plan.kind}', expected '{kind}'")


def holdout_indices(n: int, ratio: float, seed: int) -> Split:
    n_train = math.floor(ratio * n + 1e-9)  # 2/3 * 150 must give 100
    if not 1 <= n_train <= n - 1:
        raise ConfigError(f"ratio {ratio} on {n} objects leaves train size {n_train}; need 1..{n - 1}")
    order = np.random.default_rng(seed).permutation(n)
    return Split(train=order[:n_train].tolist(), test=order[n_train:].tolist())


def kfold_indices(n: int, k: int, seed: int) -> List[Split]:
    if not 2 <= k <= n:
        raise ConfigError(f"k={k} folds need 2 <= k <= n={n}")
    order = np.random.default_rng(seed).permutation(n)
    # array_split gives the first n % k folds one extra element
    folds = np.array_split(order, k)
    splits = []
    for i, fold in enumerate(folds):
        train = np.concatenate([f for j, f in enumerate(folds) if j != i])
        splits.append(Split(train=train.tolist(), test=fold.tolist()))
    return splits


def bootstrap_indices(n: int, seed: int) -> Split:
    drawn = np.random.default_rng(seed).integers(0, n, size=n)
    seen = np.zeros(n, dtype=bool)
    seen[drawn] = True
    return Split(train=drawn.tolist(), test=np.flatnonzero(~seen).tolist())


def subsampling_indices(n: int, ratio: float, t: int, seed: int) -> List[Split]:
    return [holdout_indices(n, ratio, seed + i) for i in range(t)]


def plan_indices(n: int, plan: SplitPlan) -> List[Split]:
    """Index sets for any plan kind, one entry per train/test pair."""
    if plan.kind == "holdout":
        return [holdout_indices(n, plan.ratio, plan.seed)]
    if plan.kind == "random_subsampling":
        return subsampling_indices(n, plan.ratio, plan.t, plan.seed)
    if plan.kind == "kfold":
        return kfold_indices(n, plan.k, plan.seed)
    return [bootstrap_indices(n, plan.seed)]


def _materialize(ds: Dataset, split: Split) -> DatasetPair:
    return ds.subset(split.train), _subset_or_empty(ds, split.test)


def _subset_or_empty(ds: Dataset, indices: List[int]):
    # an out-of-bag set can be empty, which a Dataset cannot represent
    return ds.subset(indices) if indices else None


# -----------------------------------------------------------------------------
# Dataset-level operations
# -----------------------------------------------------------------------------
def split_holdout(ds: Dataset, plan: SplitPlan) -> DatasetPair:
    _require(plan, "holdout")
    return _materialize(ds, holdout_indices(ds.n, plan.ratio, plan.seed))


def split_random_subsampling(ds: Dataset, plan: SplitPlan) -> List[DatasetPair]:
    _require(plan, "random_subsampling")
    return [_materialize(ds, s) for s in subsampling_indices(ds.n, plan.ratio, plan.t, plan.seed)]


def split_kfold(ds: Dataset, plan: SplitPlan) -> List[DatasetPair]:
    _require(plan, "kfold")
    return [_materialize(ds, s) for s in kfold_indices(ds.n, plan.k, plan.seed)]


def split_bootstrap(ds: Dataset, seed: int) -> Tuple[Dataset, Dataset | None]:
    """Train holds n draws with replacement; test is the out-of-bag set, or None when empty."""
    split = bootstrap_indices(ds.n, seed)
    log.debug("bootstrap: %d out-of-bag objects of %d", len(split.test), ds.n)
    return _materialize(ds, split)
