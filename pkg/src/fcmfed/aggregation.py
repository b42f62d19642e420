"""Combining participants' weight matrices into a federated matrix.

Three weighting schemes: a plain arithmetic average, and weighted averages
using each participant's normalized test accuracy or precision. Also covers
merging maps with disjoint or overlapping node sets and the weighted total
loss diagnostic.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np


class WeightScheme(str, Enum):
    CONSTANT = "constant"
    ACCURACY = "accuracy"
    PRECISION = "precision"


class DegenerateWeightsWarning(UserWarning):
    """All participants reported a zero metric; fell back to equal weights."""


@dataclass(frozen=True, eq=False)
class ContributionBundle:
    """One participant's round contribution: matrix plus scalar metrics.

    Never carries features or labels; this is the entire payload a
    participant shares.
    """

    participant_id: str
    matrix: np.ndarray
    accuracy: float
    precision: float
    dataset_size: int

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        n = m.shape[0]
        if m.ndim != 2 or m.shape != (n, n):
            raise ValueError("matrix must be square")
        if np.any(np.abs(m) > 1.0):
            raise ValueError("matrix entries must lie in [-1, +1]")
        if np.any(np.diagonal(m) != 0.0):
            raise ValueError("matrix diagonal must be zero")
        for name in ("accuracy", "precision"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.dataset_size < 0:
            raise ValueError("dataset_size must be >= 0")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


def normalize_weights(raw: Sequence[float] | np.ndarray) -> np.ndarray:
    """Scale non-negative raw weights to sum to 1.

    An all-zero vector has no defined normalization (it can happen when every
    participant reports zero precision); the fallback is equal weights, with
    a warning.
    """
    arr = np.asarray(raw, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("raw weights must be a non-empty vector")
    if np.any(arr < 0):
        raise ValueError("raw weights must be non-negative")
    total = arr.sum()
    if total == 0.0:
        warnings.warn(
            "all raw weights are zero; falling back to constant weights",
            DegenerateWeightsWarning,
        )
        return np.full(arr.size, 1.0 / arr.size)
    if np.all(arr == arr[0]):
        # r/(n*r) == 1/n algebraically; honour it exactly in floats too
        return np.full(arr.size, 1.0 / arr.size)
    return arr / total


def scheme_weights(
    bundles: Sequence[ContributionBundle], scheme: WeightScheme
) -> np.ndarray:
    """Per-participant aggregation weights under the given scheme."""
    scheme = WeightScheme(scheme)
    n = len(bundles)
    if n == 0:
        raise ValueError("no contributions to weight")
    if scheme is WeightScheme.CONSTANT:
        return np.full(n, 1.0 / n)
    if scheme is WeightScheme.ACCURACY:
        return normalize_weights([b.accuracy for b in bundles])
    return normalize_weights([b.precision for b in bundles])


def aggregate(
    bundles: Sequence[ContributionBundle], scheme: WeightScheme
) -> np.ndarray:
    """Weighted average of the contributed matrices.

    A convex combination of in-range matrices stays in range and keeps a zero
    diagonal; the final clip is defensive only.
    """
    if len(bundles) == 0:
        raise ValueError("no contributions to aggregate")
    dim = bundles[0].matrix.shape[0]
    for b in bundles:
        if b.matrix.shape[0] != dim:
            raise ValueError("all matrices must have the same dimension")
    weights = scheme_weights(bundles, scheme)
    combined = np.zeros((dim, dim))
    for w, b in zip(weights, bundles):
        combined += w * b.matrix
    return np.clip(combined, -1.0, 1.0)


def direct_sum(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Block-diagonal composition of two square matrices (disjoint node sets).

    A 0x0 input acts as the identity element.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    m = a.shape[0] if a.ndim == 2 else 0
    n = b.shape[0] if b.ndim == 2 else 0
    if a.size and a.shape != (m, m):
        raise ValueError("a must be square")
    if b.size and b.shape != (n, n):
        raise ValueError("b must be square")
    out = np.zeros((m + n, m + n))
    if m:
        out[:m, :m] = a
    if n:
        out[m:, m:] = b
    return out


def merge_common_nodes(
    inputs: Sequence[tuple[np.ndarray, Sequence[str]]],
) -> tuple[np.ndarray, list[str]]:
    """Merge matrices over possibly overlapping named node sets.

    Output nodes are the union in first-seen order. Each edge is the mean of
    that edge's weight over the inputs containing both endpoints; edges seen
    in no input stay 0. With disjoint node sets this reduces to the direct
    sum (up to node order).
    """
    if len(inputs) == 0:
        raise ValueError("nothing to merge")
    order: list[str] = []
    for matrix, names in inputs:
        names = list(names)
        if len(set(names)) != len(names):
            raise ValueError("node names must be unique within an input")
        m = np.asarray(matrix, dtype=float)
        if m.shape != (len(names), len(names)):
            raise ValueError("matrix dimension must match node-name count")
        for name in names:
            if name not in order:
                order.append(name)
    index = {name: i for i, name in enumerate(order)}
    total = np.zeros((len(order), len(order)))
    count = np.zeros((len(order), len(order)))
    for matrix, names in inputs:
        m = np.asarray(matrix, dtype=float)
        idx = np.array([index[name] for name in names])
        total[np.ix_(idx, idx)] += m
        count[np.ix_(idx, idx)] += 1.0
    merged = np.divide(total, count, out=np.zeros_like(total), where=count > 0)
    return merged, order


def federated_loss(
    losses: Sequence[float] | np.ndarray, weights: Sequence[float] | np.ndarray
) -> float:
    """Importance-weighted total loss across participants."""
    l = np.asarray(losses, dtype=float)
    w = np.asarray(weights, dtype=float)
    if l.shape != w.shape or l.ndim != 1:
        raise ValueError("losses and weights must be vectors of equal length")
    return float(np.dot(w, l))
