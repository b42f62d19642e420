"""CSV ingestion, encoding to [0, 1] features, partitioning, and splitting.

Categorical columns are one-hot encoded, numeric columns min-max scaled.
Partitioning assigns shuffled rows contiguously by proportion with
largest-remainder rounding, with no class balancing: shares are expected to
end up with different positive rates, and that is the point.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd


@dataclass(frozen=True)
class RawTable:
    """Parsed CSV with binarized labels, before encoding."""

    features: pd.DataFrame
    labels: np.ndarray
    label_column: str
    positive_label: str
    n_dropped: int


@dataclass(frozen=True)
class NormalizationStats:
    """Per-column encoding statistics (sidecar metadata for cached datasets)."""

    numeric: dict[str, tuple[float, float]]
    categories: dict[str, list[str]]
    column_order: list[str]

    def to_dict(self) -> dict:
        return {
            "numeric": {k: [v[0], v[1]] for k, v in self.numeric.items()},
            "categories": dict(self.categories),
            "column_order": list(self.column_order),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "NormalizationStats":
        return cls(
            numeric={k: (float(v[0]), float(v[1])) for k, v in data["numeric"].items()},
            categories={k: list(v) for k, v in data["categories"].items()},
            column_order=list(data["column_order"]),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))

    @classmethod
    def load(cls, path: str | Path) -> "NormalizationStats":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True, eq=False)
class Dataset:
    """Encoded feature matrix in [0, 1] with binary labels."""

    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...]

    def __post_init__(self):
        x = np.array(self.features, dtype=float)
        y = np.array(self.labels)
        if x.ndim != 2:
            raise ValueError("features must be a 2-D matrix")
        if np.any(x < 0.0) or np.any(x > 1.0) or not np.all(np.isfinite(x)):
            raise ValueError("feature values must lie in [0, 1]")
        if y.shape != (x.shape[0],):
            raise ValueError("labels must match feature rows")
        if y.size and not np.isin(y, (0, 1)).all():
            raise ValueError("labels must be binary")
        y = y.astype(int)
        if len(self.feature_names) != x.shape[1]:
            raise ValueError("feature_names must match feature columns")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def positive_rate(self) -> float:
        return float(self.labels.mean()) if len(self) else 0.0

    def take(self, indices: np.ndarray) -> "Dataset":
        return Dataset(self.features[indices], self.labels[indices], self.feature_names)


@dataclass(frozen=True)
class PartitionSpec:
    """Share proportions (must sum to 1) and the shuffle seed."""

    proportions: tuple[float, ...]
    shuffle_seed: int = 0

    def __post_init__(self):
        props = tuple(float(p) for p in self.proportions)
        if len(props) == 0:
            raise ValueError("proportions must be non-empty")
        if any(p <= 0 for p in props):
            raise ValueError("every proportion must be > 0")
        if abs(sum(props) - 1.0) > 1e-9:
            raise ValueError(f"proportions must sum to 1, got {sum(props)}")
        object.__setattr__(self, "proportions", props)


def load_csv(
    path: str | Path,
    label_column: str,
    positive_label: str,
    delimiter: str = ",",
    missing_marker: str = "?",
) -> RawTable:
    """Parse a headered CSV, binarize the label column, drop incomplete rows."""
    frame = pd.read_csv(
        path,
        delimiter=delimiter,
        na_values=[missing_marker],
        skipinitialspace=True,
        float_precision="round_trip",
    )
    if label_column not in frame.columns:
        raise ValueError(f"label column {label_column!r} not found in {path}")
    before = len(frame)
    frame = frame.dropna().reset_index(drop=True)
    labels = (
        frame[label_column].astype(str).str.strip() == str(positive_label)
    ).to_numpy(dtype=int)
    features = frame.drop(columns=[label_column])
    return RawTable(
        features=features,
        labels=labels,
        label_column=label_column,
        positive_label=str(positive_label),
        n_dropped=before - len(frame),
    )


def _column_stats(frame: pd.DataFrame) -> NormalizationStats:
    numeric: dict[str, tuple[float, float]] = {}
    categories: dict[str, list[str]] = {}
    for col in frame.columns:
        if pd.api.types.is_numeric_dtype(frame[col]):
            numeric[col] = (float(frame[col].min()), float(frame[col].max()))
        else:
            categories[col] = sorted(frame[col].astype(str).str.strip().unique())
    return NormalizationStats(numeric, categories, [str(c) for c in frame.columns])


def encode_and_normalize(
    raw: RawTable, stats: NormalizationStats | None = None
) -> tuple[Dataset, NormalizationStats]:
    """Build a [0, 1] feature matrix: min-max for numerics, one-hot for the rest.

    Columns constant in the statistics map to 0.5. Passing precomputed
    ``stats`` applies an existing encoding (values outside the recorded range
    are clipped), which keeps feature columns aligned across datasets.
    """
    frame = raw.features
    if len(frame) < 2:
        raise ValueError("need at least 2 rows to encode")
    if stats is None:
        stats = _column_stats(frame)
    columns: list[np.ndarray] = []
    names: list[str] = []
    for col in stats.column_order:
        if col not in frame.columns:
            raise ValueError(f"column {col!r} missing from table")
        if col in stats.numeric:
            lo, hi = stats.numeric[col]
            values = frame[col].to_numpy(dtype=float)
            if hi > lo:
                scaled = np.clip((values - lo) / (hi - lo), 0.0, 1.0)
            else:
                scaled = np.full(len(frame), 0.5)
            columns.append(scaled)
            names.append(str(col))
        else:
            observed = frame[col].astype(str).str.strip()
            for category in stats.categories[col]:
                columns.append((observed == category).to_numpy(dtype=float))
                names.append(f"{col}={category}")
    features = np.column_stack(columns) if columns else np.empty((len(frame), 0))
    return Dataset(features, raw.labels, tuple(names)), stats


def partition_counts(n_rows: int, proportions: Sequence[float]) -> list[int]:
    """Largest-remainder apportionment of n_rows by the given proportions."""
    exact = [p * n_rows for p in proportions]
    counts = [int(np.floor(e)) for e in exact]
    leftover = n_rows - sum(counts)
    by_remainder = sorted(
        range(len(proportions)), key=lambda i: (-(exact[i] - counts[i]), i)
    )
    for i in by_remainder[:leftover]:
        counts[i] += 1
    return counts


def partition(dataset: Dataset, spec: PartitionSpec) -> list[Dataset]:
    """Shuffle rows, then deal them out contiguously by proportion."""
    counts = partition_counts(len(dataset), spec.proportions)
    small = [c for c in counts if c < 2]
    if small:
        raise ValueError(
            f"partition produces a share with {min(counts)} row(s); every share needs >= 2"
        )
    rng = np.random.default_rng(spec.shuffle_seed)
    perm = rng.permutation(len(dataset))
    shares = []
    start = 0
    for count in counts:
        shares.append(dataset.take(perm[start : start + count]))
        start += count
    return shares


def train_test_split(
    dataset: Dataset, test_fraction: float = 0.2, seed: int = 0
) -> tuple[Dataset, Dataset]:
    """Disjoint, exhaustive seeded split; test size floors, remainder trains."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must be in (0, 1)")
    n = len(dataset)
    n_test = int(np.floor(n * test_fraction))
    if n_test < 1 or n - n_test < 1:
        raise ValueError(f"split of {n} rows at {test_fraction} empties one side")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    return dataset.take(perm[n_test:]), dataset.take(perm[:n_test])


def rescale_local(dataset: Dataset) -> Dataset:
    """Re-min-max each varying column on this dataset's own rows.

    Columns constant within the dataset keep their values. Because min-max
    scaling is affine, rescaling an already-scaled column equals computing
    the statistics on the original local values directly.
    """
    x = np.array(dataset.features)
    lo = x.min(axis=0)
    hi = x.max(axis=0)
    varying = hi > lo
    x[:, varying] = (x[:, varying] - lo[varying]) / (hi - lo)[varying]
    return Dataset(x, dataset.labels, dataset.feature_names)


def save_dataset(dataset: Dataset, path: str | Path) -> None:
    """Cache an encoded dataset as CSV (features plus a ``label`` column)."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(list(dataset.feature_names) + ["label"])
        for row, label in zip(dataset.features, dataset.labels):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])


def load_dataset(path: str | Path) -> Dataset:
    """Inverse of save_dataset."""
    frame = pd.read_csv(path, float_precision="round_trip")
    if "label" not in frame.columns:
        raise ValueError("cached dataset must have a 'label' column")
    labels = frame["label"].to_numpy(dtype=int)
    features = frame.drop(columns=["label"])
    return Dataset(
        features.to_numpy(dtype=float),
        labels,
        tuple(str(c) for c in features.columns),
    )
