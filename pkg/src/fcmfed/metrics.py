"""Binary classification metrics over the positive class (label 1)."""
from __future__ import annotations

import numpy as np


def _as_binary(name: str, values) -> np.ndarray:
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if not np.isin(arr, (0, 1)).all():
        raise ValueError(f"{name} must contain only 0/1 labels")
    return arr.astype(int)


def _counts(y_true, y_pred) -> tuple[int, int, int]:
    t = _as_binary("y_true", y_true)
    p = _as_binary("y_pred", y_pred)
    if t.shape != p.shape:
        raise ValueError("y_true and y_pred must have equal length")
    if t.size < 1:
        raise ValueError("labels must be non-empty")
    tp = int(np.sum((t == 1) & (p == 1)))
    fp = int(np.sum((t == 0) & (p == 1)))
    fn = int(np.sum((t == 1) & (p == 0)))
    return tp, fp, fn


def accuracy(y_true, y_pred) -> float:
    t = _as_binary("y_true", y_true)
    p = _as_binary("y_pred", y_pred)
    if t.shape != p.shape:
        raise ValueError("y_true and y_pred must have equal length")
    if t.size < 1:
        raise ValueError("labels must be non-empty")
    return float(np.mean(t == p))


def precision(y_true, y_pred) -> float:
    """TP / (TP + FP); defined as 0 when nothing is predicted positive."""
    tp, fp, _ = _counts(y_true, y_pred)
    if tp + fp == 0:
        return 0.0
    return tp / (tp + fp)


def jaccard_complement(y_true, y_pred) -> float:
    """1 minus the Jaccard similarity of the positive-index sets.

    Equals 1 - TP / (TP + FP + FN). When both sets are empty the prediction
    is perfect, so the result is 0. Used as the swarm-training fitness (lower
    is better) and always lies in [0, 1].
    """
    tp, fp, fn = _counts(y_true, y_pred)
    union = tp + fp + fn
    if union == 0:
        return 0.0
    return 1.0 - tp / union
