"""FastAPI service wrapping the core package.

Stateless endpoints expose classification and the central-server aggregation
step (the same wire format the simulator uses). Experiment runs execute as
background jobs: submit a config, poll status, fetch the full result payload.
"""
from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import __version__
from ..aggregation import aggregate, federated_loss, scheme_weights
from ..experiments import ExperimentConfig, run_config
from ..fcm import run_dynamics
from .schemas import (
    AggregateRequest,
    AggregateResponse,
    ClassifyRequest,
    ClassifyResponse,
    HealthResponse,
    JobResultResponse,
    JobStatusResponse,
    JobSubmitResponse,
)


@dataclass
class Job:
    status: str = "queued"
    error: str | None = None
    payload: dict | None = None
    n_failed: int | None = None


@dataclass
class JobStore:
    jobs: dict[str, Job] = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock)

    def create(self) -> str:
        job_id = uuid.uuid4().hex
        with self.lock:
            self.jobs[job_id] = Job()
        return job_id

    def get(self, job_id: str) -> Job:
        with self.lock:
            job = self.jobs.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail=f"unknown job {job_id!r}")
        return job


def _run_job(store: JobStore, job_id: str, config: ExperimentConfig) -> None:
    job = store.get(job_id)
    job.status = "running"
    try:
        outcome = run_config(config)
        job.payload = outcome.payload()
        job.n_failed = outcome.n_failed
        job.status = "done"
    except Exception as exc:
        job.error = f"{type(exc).__name__}: {exc}"
        job.status = "failed"


def create_app() -> FastAPI:
    app = FastAPI(title="fcmfed", version=__version__)
    store = JobStore()
    app.state.jobs = store

    @app.get("/health", response_model=HealthResponse)
    def health():
        return HealthResponse(status="ok", version=__version__)

    @app.post("/classify", response_model=ClassifyResponse)
    def classify_sample(request: ClassifyRequest):
        try:
            model = request.model.build()
            if len(request.features) != model.n_input:
                raise ValueError(
                    f"expected {model.n_input} features, got {len(request.features)}"
                )
            initial = np.concatenate(
                [
                    np.asarray(request.features, dtype=float),
                    np.full(model.n_output, model.activation.neutral),
                ]
            )
            outcome = run_dynamics(model, initial, clamp_inputs=True)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        outputs = outcome.final_state[model.n_input :]
        return ClassifyResponse(
            class_index=int(np.argmax(outputs)),
            output_states=[float(v) for v in outputs],
            converged=outcome.status.value == "converged",
        )

    @app.post("/aggregate", response_model=AggregateResponse)
    def aggregate_contributions(request: AggregateRequest):
        try:
            bundles = [c.build() for c in request.contributions]
            weights = scheme_weights(bundles, request.scheme)
            merged = aggregate(bundles, request.scheme)
            loss = federated_loss(
                [c.train_fitness for c in request.contributions], weights
            )
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return AggregateResponse(
            matrix=[[float(v) for v in row] for row in merged],
            weights=[float(w) for w in weights],
            total_loss=loss,
        )

    @app.post("/experiments", response_model=JobSubmitResponse, status_code=202)
    def submit_experiment(config: ExperimentConfig):
        job_id = store.create()
        thread = threading.Thread(
            target=_run_job, args=(store, job_id, config), daemon=True
        )
        thread.start()
        return JobSubmitResponse(job_id=job_id, status="queued")

    @app.get("/experiments/{job_id}", response_model=JobStatusResponse)
    def job_status(job_id: str):
        job = store.get(job_id)
        return JobStatusResponse(
            job_id=job_id, status=job.status, error=job.error, n_failed=job.n_failed
        )

    @app.get("/experiments/{job_id}/result", response_model=JobResultResponse)
    def job_result(job_id: str):
        job = store.get(job_id)
        if job.status != "done":
            raise HTTPException(
                status_code=409, detail=f"job is {job.status}, not done"
            )
        return JobResultResponse(job_id=job_id, status=job.status, payload=job.payload)

    return app
