import csv
from pathlib import Path

import numpy as np
import pytest

from fcmfed import Dataset


@pytest.fixture(scope="session")
def breast_cancer_csv(tmp_path_factory) -> Path:
    """Breast Cancer Wisconsin (diagnostic) as a CSV file, from the offline
    scikit-learn copy: 569 rows, 30 numeric features, M/B diagnosis labels."""
    from sklearn.datasets import load_breast_cancer

    bunch = load_breast_cancer()
    path = tmp_path_factory.mktemp("datasets") / "breast_cancer.csv"
    names = [n.replace(" ", "_") for n in bunch.feature_names]
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["diagnosis"] + names)
        for row, target in zip(bunch.data, bunch.target):
            label = "M" if target == 0 else "B"  # malignant is the positive class
            writer.writerow([label] + [repr(float(v)) for v in row])
    return path


def make_toy_dataset(n_rows: int = 40, seed: int = 0) -> Dataset:
    """Linearly separable 2-feature set: class 1 iff feature 0 > 0.5."""
    rng = np.random.default_rng(seed)
    features = rng.uniform(0.0, 1.0, (n_rows, 2))
    labels = (features[:, 0] > 0.5).astype(int)
    return Dataset(features, labels, ("f0", "f1"))


@pytest.fixture
def toy_dataset() -> Dataset:
    return make_toy_dataset()
