"""Round-based federation over simulated participants, without an initial model.

No server-side model exists before the first round: every participant trains
from scratch on its own silo, and only weight matrices plus scalar metrics
ever cross the participant boundary. Two update modes after each aggregation:
the local matrix becomes the global one exactly, or the element-wise mean of
the global and the previous local matrix.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Sequence

import numpy as np

from .aggregation import (
    ContributionBundle,
    WeightScheme,
    aggregate,
    federated_loss,
    scheme_weights,
)
from .data import Dataset
from .fcm import DEFAULT_MAX_ITERATIONS, DEFAULT_TOLERANCE, FcmModel, ModelShape, predict
from .metrics import accuracy, precision
from .pso import PsoConfig, train

ROUND_MESSAGE_FIELDS = (
    "round",
    "participant_id",
    "matrix",
    "accuracy",
    "precision",
    "train_fitness",
    "dataset_size",
)


class FederationMode(str, Enum):
    BLIND = "blind"
    BLENDED = "blended"


@dataclass(frozen=True)
class FederationConfig:
    mode: FederationMode
    scheme: WeightScheme
    shape: ModelShape
    pso: PsoConfig
    rounds: int = 20
    master_seed: int = 0
    tolerance: float = DEFAULT_TOLERANCE
    max_iterations: int = DEFAULT_MAX_ITERATIONS

    def __post_init__(self):
        object.__setattr__(self, "mode", FederationMode(self.mode))
        object.__setattr__(self, "scheme", WeightScheme(self.scheme))
        # rounds=0 runs local training only (the no-federation baseline).
        if self.rounds < 0:
            raise ValueError("rounds must be >= 0")


@dataclass
class ParticipantState:
    """One agent's silo: its data splits, current model, and metric history.

    ``local_model`` is None until the agent's first training finishes; no
    model is ever provided from outside. ``seed_key`` feeds the per-round
    seed derivation and defaults to the participant id.
    """

    id: str
    train: Dataset
    test: Dataset
    local_model: FcmModel | None = None
    metric_history: list[dict] = field(default_factory=list)
    seed_key: str | None = None

    @property
    def n_rows(self) -> int:
        return len(self.train) + len(self.test)

    @property
    def positive_rate(self) -> float:
        labels = np.concatenate([self.train.labels, self.test.labels])
        return float(labels.mean()) if labels.size else 0.0


@dataclass
class RoundReport:
    """What one round exchanged and produced; contains no features or labels."""

    round_index: int
    bundles: list[ContributionBundle]
    train_fitnesses: dict[str, float]
    aggregated_matrix: np.ndarray
    federated_loss: float
    post_metrics: dict[str, dict]
    scheme: WeightScheme

    def messages(self) -> list[dict]:
        return [
            round_message(self.round_index, b, self.train_fitnesses[b.participant_id])
            for b in self.bundles
        ]

    def to_dict(self) -> dict:
        return {
            "round": self.round_index,
            "scheme": self.scheme.value,
            "messages": self.messages(),
            "aggregated_matrix": [[float(v) for v in row] for row in self.aggregated_matrix],
            "federated_loss": self.federated_loss,
            "post_metrics": self.post_metrics,
        }


@dataclass
class FederationResult:
    final_models: dict[str, FcmModel]
    reports: list[RoundReport]
    summary: dict


def participant_seed(master_seed: int, participant_id: str, round_index: int) -> int:
    """Stable per-(participant, round) seed; independent across participants."""
    digest = hashlib.sha256(
        f"{master_seed}|{participant_id}|{round_index}".encode()
    ).digest()
    return int.from_bytes(digest[:8], "little")


def round_message(round_index: int, bundle: ContributionBundle, train_fitness: float) -> dict:
    """The wire format a participant sends: a matrix and scalar metrics only."""
    return {
        "round": round_index,
        "participant_id": bundle.participant_id,
        "matrix": [[float(v) for v in row] for row in bundle.matrix],
        "accuracy": bundle.accuracy,
        "precision": bundle.precision,
        "train_fitness": train_fitness,
        "dataset_size": bundle.dataset_size,
    }


def local_update(
    previous: np.ndarray | None, global_matrix: np.ndarray, mode: FederationMode
) -> np.ndarray:
    """Next warm-start matrix: the global one, or its mean with the previous."""
    g = np.asarray(global_matrix, dtype=float)
    if previous is None or FederationMode(mode) is FederationMode.BLIND:
        return g.copy()
    p = np.asarray(previous, dtype=float)
    if p.shape != g.shape:
        raise ValueError("previous and global matrices must have equal shape")
    return (p + g) / 2.0


def evaluate_participant(model: FcmModel, test_features, test_labels) -> dict:
    """Accuracy and positive-class precision on a held-out split."""
    x = np.asarray(test_features, dtype=float)
    y = np.asarray(test_labels)
    if x.shape[0] == 0:
        raise ValueError("test split is empty")
    predictions = predict(model, x)
    return {
        "accuracy": accuracy(y, predictions),
        "precision": precision(y, predictions),
    }


def _train_participant(
    participant: ParticipantState,
    config: FederationConfig,
    round_index: int,
    warm_start: np.ndarray | None,
) -> None:
    key = participant.seed_key if participant.seed_key is not None else participant.id
    pso_config = replace(
        config.pso,
        seed=participant_seed(config.master_seed, key, round_index),
    )
    result = train(
        participant.train.features,
        participant.train.labels,
        config.shape,
        pso_config,
        warm_start=warm_start,
        tolerance=config.tolerance,
        max_iterations=config.max_iterations,
    )
    participant.local_model = result.model
    entry = {"round": round_index, "train_fitness": result.best_fitness}
    entry.update(
        evaluate_participant(
            result.model, participant.test.features, participant.test.labels
        )
    )
    participant.metric_history.append(entry)


def run_federation(
    participants: Sequence[ParticipantState], config: FederationConfig
) -> FederationResult:
    """Run local training plus ``config.rounds`` aggregate/retrain rounds.

    Round 0 trains every participant from scratch (there is no model to send
    them) and records the pre-federation baseline. Each later round collects
    matrix contributions weighted per the scheme, aggregates, lets each
    participant warm-start a retrain from its updated matrix, and re-evaluates
    on the participant's own test split. Participants with no training rows
    are excluded and recorded in the summary.
    """
    for p in participants:
        if p.local_model is not None:
            raise ValueError(
                f"participant {p.id!r} already holds a model; federation starts blind"
            )
    excluded = [p.id for p in participants if len(p.train) == 0]
    active = [p for p in participants if len(p.train) > 0]
    if config.rounds >= 1 and len(active) < 2:
        raise ValueError("federation rounds need at least 2 participants with data")
    if not active:
        raise ValueError("no participant has training data")
    dims = {p.train.n_features for p in active}
    if len(dims) != 1:
        raise ValueError(f"participants disagree on feature dimension: {sorted(dims)}")
    if next(iter(dims)) != config.shape.n_input:
        raise ValueError("feature dimension does not match the configured shape")

    for p in active:
        _train_participant(p, config, 0, warm_start=None)

    reports: list[RoundReport] = []
    for round_index in range(1, config.rounds + 1):
        bundles = []
        train_fits = {}
        for p in active:
            latest = p.metric_history[-1]
            bundles.append(
                ContributionBundle(
                    participant_id=p.id,
                    matrix=p.local_model.weights,
                    accuracy=latest["accuracy"],
                    precision=latest["precision"],
                    dataset_size=len(p.train),
                )
            )
            train_fits[p.id] = latest["train_fitness"]
        weights = scheme_weights(bundles, config.scheme)
        merged = aggregate(bundles, config.scheme)
        loss = federated_loss([train_fits[b.participant_id] for b in bundles], weights)

        post: dict[str, dict] = {}
        for p in active:
            warm = local_update(p.local_model.weights, merged, config.mode)
            _train_participant(p, config, round_index, warm_start=warm)
            post[p.id] = p.metric_history[-1]
        reports.append(
            RoundReport(
                round_index=round_index,
                bundles=bundles,
                train_fitnesses=train_fits,
                aggregated_matrix=merged,
                federated_loss=loss,
                post_metrics=post,
                scheme=config.scheme,
            )
        )

    summary = _summarize(participants, active, excluded, config)
    return FederationResult(
        final_models={p.id: p.local_model for p in active},
        reports=reports,
        summary=summary,
    )


def _summarize(participants, active, excluded, config: FederationConfig) -> dict:
    total_rows = sum(p.n_rows for p in participants)
    rows = []
    for p in active:
        pre = p.metric_history[0]
        post = p.metric_history[-1]
        rows.append(
            {
                "id": p.id,
                "share": p.n_rows / total_rows if total_rows else 0.0,
                "positive_rate": p.positive_rate,
                "accuracy_pre": pre["accuracy"],
                "accuracy_post": post["accuracy"],
                "precision_pre": pre["precision"],
                "precision_post": post["precision"],
            }
        )
    metric_keys = ["accuracy_pre", "accuracy_post", "precision_pre", "precision_post"]
    average = {k: float(np.mean([r[k] for r in rows])) for k in metric_keys}
    return {
        "mode": config.mode.value,
        "scheme": config.scheme.value,
        "rounds": config.rounds,
        "participants": rows,
        "average": average,
        "excluded": excluded,
    }
