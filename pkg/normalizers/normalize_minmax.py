from __future__ import annotations

from typing import Optional

import numpy as np
from sklearn.preprocessing import MinMaxScaler

from models.errors import DimensionMismatchError
from models.models import Dataset, FeatureRange


def fit_min_max(ds: Dataset) -> FeatureRange:
    scaler = MinMaxScaler().fit(ds.objects)
    return FeatureRange(minimum=scaler.data_min_, maximum=scaler.data_max_)


def normalize_min_max(ds: Dataset, feature_range: Optional[FeatureRange] = None) -> Dataset:
    """
    Map every feature onto [0, 1] with x' = (x - min) / (max - min).

    Constant features map to 0. When ``feature_range`` comes from another
    dataset (e.g. the training part), values outside it are clipped so the
    result stays inside the unit interval.
    """
    rng = feature_range or fit_min_max(ds)
    lo = np.asarray(rng.minimum, dtype=float)
    hi = np.asarray(rng.maximum, dtype=float)
    if lo.shape != (ds.d,) or hi.shape != (ds.d,):
        raise DimensionMismatchError(f"feature range has {lo.shape[0]} features, dataset {ds.d}")

    # the two bound rows reproduce the range; clip also absorbs rounding past 1
    scaler = MinMaxScaler(clip=True).fit(np.vstack([lo, hi]))
    scaled = scaler.transform(ds.objects)
    scaled[:, hi == lo] = 0.0
    return ds.model_copy(update={"objects": _readonly(scaled), "normalized": True})


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr, dtype=float)
    arr.setflags(write=False)
    return arr
