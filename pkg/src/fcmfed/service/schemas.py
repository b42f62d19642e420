"""Pydantic request/response models for the HTTP service."""
from __future__ import annotations

import numpy as np
from pydantic import BaseModel

from ..aggregation import ContributionBundle, WeightScheme
from ..fcm import Activation, FcmModel


class HealthResponse(BaseModel):
    status: str
    version: str


class ModelPayload(BaseModel):
    n_input: int
    n_output: int
    activation: Activation
    slope: float
    weights: list[list[float]]
    node_names: list[str] | None = None

    def build(self) -> FcmModel:
        return FcmModel(
            n_input=self.n_input,
            n_output=self.n_output,
            weights=np.array(self.weights, dtype=float),
            activation=self.activation,
            slope=self.slope,
            node_names=tuple(self.node_names) if self.node_names else None,
        )


class ClassifyRequest(BaseModel):
    model: ModelPayload
    features: list[float]


class ClassifyResponse(BaseModel):
    class_index: int
    output_states: list[float]
    converged: bool


class ContributionPayload(BaseModel):
    """Mirror of the round message a participant sends: no raw data fields."""

    round: int = 0
    participant_id: str
    matrix: list[list[float]]
    accuracy: float
    precision: float
    train_fitness: float = 0.0
    dataset_size: int = 0

    def build(self) -> ContributionBundle:
        return ContributionBundle(
            participant_id=self.participant_id,
            matrix=np.array(self.matrix, dtype=float),
            accuracy=self.accuracy,
            precision=self.precision,
            dataset_size=self.dataset_size,
        )


class AggregateRequest(BaseModel):
    contributions: list[ContributionPayload]
    scheme: WeightScheme = WeightScheme.CONSTANT


class AggregateResponse(BaseModel):
    matrix: list[list[float]]
    weights: list[float]
    total_loss: float


class JobSubmitResponse(BaseModel):
    job_id: str
    status: str


class JobStatusResponse(BaseModel):
    job_id: str
    status: str
    error: str | None = None
    n_failed: int | None = None


class JobResultResponse(BaseModel):
    job_id: str
    status: str
    payload: dict
