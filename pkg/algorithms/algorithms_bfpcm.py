from __future__ import annotations

import logging
from typing import Optional, Sequence

import numpy as np

from helpers.distance import EUCLIDEAN, pairwise_distances
from models.errors import DatasetError, DimensionMismatchError
from models.models import Classification, ClassifierModel, Dataset, DistanceSpec, PartitionMatrix

log = logging.getLogger(__name__)


def build_model(train: Dataset, feature_weights: Optional[Sequence[float]] = None,
                distance: DistanceSpec = EUCLIDEAN) -> ClassifierModel:
    if train.labels is None:
        raise DatasetError("training data has no labels")
    weights = tuple(feature_weights) if feature_weights is not None else (1.0,) * train.d
    if len(weights) != train.d:
        raise DimensionMismatchError(f"{len(weights)} feature weights for {train.d} features")
    return ClassifierModel(train=train, c=train.n_classes, feature_weights=weights, distance=distance)


def _per_class_min(values: np.ndarray, labels: np.ndarray, c: int) -> np.ndarray:
    """c x n_test minimum of ``values`` (n_train x n_test) over each class's training rows."""
    out = np.empty((c, values.shape[1]))
    for i in range(c):
        out[i] = values[labels == i].min(axis=0)
    return out


def bfpcm_classify(model: ClassifierModel, test: Dataset) -> Classification:
    """
    Memberships of test objects in every class, from the nearest training object.

    u'  = 1 - min_l ||O_j - O_l||^2 / d        (vector space)
    u'' = 1 - min_l sum_f w_f (x_jf - x_lf)^2 / d   (feature space)
    u   = (u' + u'') / 2, each term clamped to [0, 1].
    """
    train = model.train
    if test.d != train.d:
        raise DimensionMismatchError(f"test has {test.d} features, training data {train.d}")
    labels = np.asarray(train.labels)
    missing = [i for i in range(model.c) if not (labels == i).any()]
    if missing:
        raise DatasetError(f"classes absent from the training data: {missing}")

    d = train.d
    diff2 = (train.objects[:, None, :] - test.objects[None, :, :]) ** 2
    if model.distance == EUCLIDEAN:
        squared = diff2.sum(axis=2)
    else:
        squared = pairwise_distances(test.objects, train.objects, model.distance) ** 2
    weighted = (diff2 * np.asarray(model.feature_weights)).sum(axis=2) / d

    u_vector = np.clip(1.0 - _per_class_min(squared, labels, model.c) / d, 0.0, 1.0)
    u_feature = np.clip(1.0 - _per_class_min(weighted, labels, model.c), 0.0, 1.0)
    u = (u_vector + u_feature) / 2.0

    predicted = np.argmax(u, axis=0)
    log.debug("bfpcm: classified %d objects against %d training objects", test.n, train.n)
    return Classification(pm=PartitionMatrix(u=u, regime="bfpm"), predicted=predicted.tolist())
