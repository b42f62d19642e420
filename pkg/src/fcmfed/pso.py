"""Particle swarm training of a map's weight matrix.

Each particle's position is a candidate weight matrix, encoded as the
off-diagonal entries in row-major order (the diagonal is pinned to zero).
The objective is the complement of the Jaccard similarity between the true
and predicted positive sets on the training split, so fitness 0 means a
perfect training-set fit.

The update rule has no inertia term: v' = v + U(0, phi1)*(pbest - x)
+ U(0, phi2)*(gbest - x), with fresh per-component uniform draws each call,
followed by clamping of velocities to +/-velocity_clamp and positions to
[-1, +1]. Because the plain rule diverges without damping, the velocity
clamp defaults to 0.5.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .fcm import (
    DEFAULT_MAX_ITERATIONS,
    DEFAULT_TOLERANCE,
    FcmModel,
    ModelShape,
    predict,
)
from .metrics import jaccard_complement


@dataclass(frozen=True)
class PsoConfig:
    swarm_size: int = 10
    iterations: int = 20
    phi1: float = 2.0
    phi2: float = 2.0
    velocity_clamp: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.swarm_size < 1:
            raise ValueError("swarm_size must be >= 1")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        # phi/velocity_clamp of 0 freeze the swarm; useful for tests.
        if self.phi1 < 0 or self.phi2 < 0:
            raise ValueError("phi1 and phi2 must be >= 0")
        if self.velocity_clamp < 0:
            raise ValueError("velocity_clamp must be >= 0")


@dataclass
class Particle:
    position: np.ndarray
    velocity: np.ndarray
    best_position: np.ndarray
    best_fitness: float


@dataclass
class Swarm:
    particles: list[Particle]
    best_position: np.ndarray
    best_fitness: float


@dataclass
class PsoTrainResult:
    """Trained model plus the per-iteration global-best trace.

    ``history`` holds (iteration, global_best_fitness) pairs, starting with
    the post-initialisation entry at iteration 0. ``single_class`` flags a
    training split that contained only one label value.
    """

    model: FcmModel
    best_fitness: float
    history: list[tuple[int, float]] = field(default_factory=list)
    single_class: bool = False


def flatten_weights(weights: np.ndarray) -> np.ndarray:
    """Off-diagonal entries of a square matrix, row-major."""
    w = np.asarray(weights, dtype=float)
    n = w.shape[0]
    if w.shape != (n, n):
        raise ValueError("weights must be square")
    return w[~np.eye(n, dtype=bool)].copy()


def unflatten_weights(position: np.ndarray, n_nodes: int) -> np.ndarray:
    """Inverse of flatten_weights; the diagonal comes back as zeros."""
    vec = np.asarray(position, dtype=float)
    expected = n_nodes * n_nodes - n_nodes
    if vec.shape != (expected,):
        raise ValueError(f"position must have length {expected}, got {vec.shape}")
    w = np.zeros((n_nodes, n_nodes))
    w[~np.eye(n_nodes, dtype=bool)] = vec
    return w


def evaluate_candidate(
    position: np.ndarray,
    shape: ModelShape,
    features: np.ndarray,
    labels: np.ndarray,
    tolerance: float = DEFAULT_TOLERANCE,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
) -> float:
    """Fitness of one candidate position on a labelled training set."""
    model = FcmModel(
        n_input=shape.n_input,
        n_output=shape.n_output,
        weights=unflatten_weights(position, shape.n_nodes),
        activation=shape.activation,
        slope=shape.slope,
    )
    predictions = predict(model, features, tolerance, max_iterations)
    return jaccard_complement(labels, predictions)


def update_velocity(
    particle: Particle,
    global_best: np.ndarray,
    config: PsoConfig,
    rng: np.random.Generator,
) -> np.ndarray:
    """New clamped velocity; draws u1 (personal term) then u2 (social term)."""
    d = particle.position.shape[0]
    u1 = rng.uniform(0.0, config.phi1, d)
    u2 = rng.uniform(0.0, config.phi2, d)
    v = (
        particle.velocity
        + u1 * (particle.best_position - particle.position)
        + u2 * (global_best - particle.position)
    )
    return np.clip(v, -config.velocity_clamp, config.velocity_clamp)


def update_position(particle: Particle) -> np.ndarray:
    """New position x + v, clamped to the weight range [-1, +1]."""
    return np.clip(particle.position + particle.velocity, -1.0, 1.0)


def _init_swarm(
    shape: ModelShape,
    config: PsoConfig,
    rng: np.random.Generator,
    warm_start: np.ndarray | None,
    fitness,
) -> Swarm:
    d = shape.n_nodes * shape.n_nodes - shape.n_nodes
    positions = rng.uniform(-1.0, 1.0, (config.swarm_size, d))
    if warm_start is not None:
        positions[0] = flatten_weights(warm_start)
    velocities = rng.uniform(
        -config.velocity_clamp, config.velocity_clamp, (config.swarm_size, d)
    )
    particles = []
    for k in range(config.swarm_size):
        fit = fitness(positions[k])
        particles.append(
            Particle(
                position=positions[k].copy(),
                velocity=velocities[k].copy(),
                best_position=positions[k].copy(),
                best_fitness=fit,
            )
        )
    best = min(range(len(particles)), key=lambda k: particles[k].best_fitness)
    return Swarm(
        particles=particles,
        best_position=particles[best].best_position.copy(),
        best_fitness=particles[best].best_fitness,
    )


def train(
    features: np.ndarray,
    labels: np.ndarray,
    shape: ModelShape,
    config: PsoConfig,
    warm_start: np.ndarray | None = None,
    tolerance: float = DEFAULT_TOLERANCE,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    log_path: str | Path | None = None,
) -> PsoTrainResult:
    """Fit a weight matrix to a labelled training set.

    Particles start uniform in [-1, +1]^D (velocities uniform within the
    clamp); if ``warm_start`` is given, particle 0 starts exactly there, so
    its fitness can never be lost (personal/global bests only improve).
    One iteration moves every particle against the previous iteration's
    global best, then refreshes the bests, so results do not depend on
    evaluation order within an iteration.
    """
    x = np.asarray(features, dtype=float)
    y = np.asarray(labels)
    if x.ndim != 2 or x.shape[1] != shape.n_input:
        raise ValueError(f"features must be (rows, {shape.n_input})")
    if x.shape[0] == 0:
        raise ValueError("training set is empty")
    if y.shape != (x.shape[0],):
        raise ValueError("labels must match feature rows")
    single_class = np.unique(y).size < 2

    def fitness(position: np.ndarray) -> float:
        return evaluate_candidate(position, shape, x, y, tolerance, max_iterations)

    rng = np.random.default_rng(config.seed)
    swarm = _init_swarm(shape, config, rng, warm_start, fitness)
    history = [(0, swarm.best_fitness)]

    for it in range(1, config.iterations + 1):
        anchor = swarm.best_position.copy()
        for particle in swarm.particles:
            particle.velocity = update_velocity(particle, anchor, config, rng)
            particle.position = update_position(particle)
            fit = fitness(particle.position)
            if fit < particle.best_fitness:
                particle.best_fitness = fit
                particle.best_position = particle.position.copy()
        best = min(
            range(len(swarm.particles)),
            key=lambda k: swarm.particles[k].best_fitness,
        )
        if swarm.particles[best].best_fitness < swarm.best_fitness:
            swarm.best_fitness = swarm.particles[best].best_fitness
            swarm.best_position = swarm.particles[best].best_position.copy()
        history.append((it, swarm.best_fitness))

    if log_path is not None:
        write_training_log(history, log_path)

    model = FcmModel(
        n_input=shape.n_input,
        n_output=shape.n_output,
        weights=unflatten_weights(swarm.best_position, shape.n_nodes),
        activation=shape.activation,
        slope=shape.slope,
    )
    return PsoTrainResult(
        model=model,
        best_fitness=swarm.best_fitness,
        history=history,
        single_class=single_class,
    )


def write_training_log(history: list[tuple[int, float]], path: str | Path) -> None:
    """CSV trace of the global best, one row per iteration."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["iteration", "global_best_fitness"])
        for iteration, fitness in history:
            writer.writerow([iteration, repr(float(fitness))])
