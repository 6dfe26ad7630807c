from __future__ import annotations

from typing import Optional, Sequence

import numpy as np
from sklearn.metrics import confusion_matrix

from models.errors import DimensionMismatchError, UndefinedMeasureError
from models.models import ClassifierMetrics, ConfusionMatrix, ErrorMeasures


def confusion(pred: Sequence[int], truth: Sequence[int], positive_class: int) -> ConfusionMatrix:
    """One-vs-rest counts with ``positive_class`` as the positive label."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise DimensionMismatchError(f"{pred.size} predictions for {truth.size} truths")
    if pred.size == 0:
        raise UndefinedMeasureError("confusion matrix of an empty prediction set")
    # rows are truth, columns prediction, positive first
    t_pos, f_neg, f_pos, t_neg = confusion_matrix(
        truth == positive_class, pred == positive_class, labels=[True, False]).ravel()
    return ConfusionMatrix(t_pos=int(t_pos), f_neg=int(f_neg), f_pos=int(f_pos), t_neg=int(t_neg))


def _ratio(num: int, den: int) -> Optional[float]:
    return num / den if den > 0 else None


def metrics(cm: ConfusionMatrix) -> ClassifierMetrics:
    """Undefined ratios come back as None."""
    accuracy = _ratio(cm.t_pos + cm.t_neg, cm.total)
    return ClassifierMetrics(
        sensitivity=_ratio(cm.t_pos, cm.pos),
        specificity=_ratio(cm.t_neg, cm.neg),
        precision=_ratio(cm.t_pos, cm.t_pos + cm.f_pos),
        accuracy=accuracy,
        error_rate=None if accuracy is None else 1.0 - accuracy,
    )


def error_measures(pred: Sequence[float], truth: Sequence[float]) -> ErrorMeasures:
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape or pred.ndim != 1:
        raise DimensionMismatchError(f"{pred.size} predictions for {truth.size} truths")
    if pred.size == 0:
        raise UndefinedMeasureError("error measures of an empty prediction set")

    residual = truth - pred
    absolute = np.abs(residual)
    squared = residual ** 2
    spread = truth - truth.mean()
    abs_den = np.sum(np.abs(spread))
    sq_den = np.sum(spread ** 2)
    if abs_den == 0 or sq_den == 0:
        raise UndefinedMeasureError("relative errors are undefined for a constant truth vector")

    return ErrorMeasures(
        absolute=absolute.tolist(),
        squared=squared.tolist(),
        mean_absolute=float(absolute.mean()),
        mean_squared=float(squared.mean()),
        relative_absolute=float(absolute.sum() / abs_den),
        relative_squared=float(squared.sum() / sq_den),
    )
