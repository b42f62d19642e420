"""Fuzzy cognitive map classifiers and their fixed-point dynamics.

A map is a fully connected signed digraph over input (feature) nodes and
output (class) nodes. Node states update synchronously: each node applies a
squashing activation to the weighted sum of all node states from the previous
step. Classification runs the dynamics with the input nodes clamped to the
feature values and reads the winning output node.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np

DEFAULT_TOLERANCE = 1e-5
DEFAULT_MAX_ITERATIONS = 100


class Activation(str, Enum):
    """Squashing function applied at every node.

    SIGMOID maps into (0, 1), TANH into (-1, +1); both are scaled by the
    model's slope before squashing.
    """

    SIGMOID = "sigmoid"
    TANH = "tanh"

    @property
    def neutral(self) -> float:
        """Value an unconnected node settles at: f(0)."""
        return 0.5 if self is Activation.SIGMOID else 0.0

    @property
    def bounds(self) -> tuple[float, float]:
        return (0.0, 1.0) if self is Activation.SIGMOID else (-1.0, 1.0)


class DynamicsStatus(str, Enum):
    CONVERGED = "converged"
    MAX_ITERATIONS = "max_iterations"


@dataclass(frozen=True)
class ModelShape:
    """Architecture of a classifier map, without its weights."""

    n_input: int
    n_output: int
    activation: Activation
    slope: float

    def __post_init__(self):
        if self.n_input < 1:
            raise ValueError("n_input must be >= 1")
        if self.n_output < 1:
            raise ValueError("n_output must be >= 1")
        if not self.slope > 0:
            raise ValueError("slope must be positive")
        object.__setattr__(self, "activation", Activation(self.activation))

    @property
    def n_nodes(self) -> int:
        return self.n_input + self.n_output


@dataclass(frozen=True, eq=False)
class FcmModel:
    """A trained classifier: weight matrix plus activation settings.

    ``weights[i, j]`` is the influence of node i on node j, in [-1, +1].
    The diagonal is zero (no self-influence). Nodes 0..n_input-1 are the
    feature nodes, the rest are class nodes. Instances are immutable; the
    weight array is marked read-only.
    """

    n_input: int
    n_output: int
    weights: np.ndarray
    activation: Activation
    slope: float
    node_names: tuple[str, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "activation", Activation(self.activation))
        if self.n_input < 1 or self.n_output < 1:
            raise ValueError("node counts must be >= 1")
        if not self.slope > 0:
            raise ValueError("slope must be positive")
        w = np.array(self.weights, dtype=float)
        n = self.n_input + self.n_output
        if w.shape != (n, n):
            raise ValueError(f"weights must be {n}x{n}, got {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        if np.any(np.abs(w) > 1.0):
            raise ValueError("weights must lie in [-1, +1]")
        if np.any(np.diagonal(w) != 0.0):
            raise ValueError("weight diagonal must be exactly zero")
        if self.node_names is not None:
            names = tuple(self.node_names)
            if len(names) != n:
                raise ValueError("node_names length must equal node count")
            object.__setattr__(self, "node_names", names)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n_nodes(self) -> int:
        return self.n_input + self.n_output

    @property
    def shape(self) -> ModelShape:
        return ModelShape(self.n_input, self.n_output, self.activation, self.slope)


@dataclass(frozen=True)
class DynamicsOutcome:
    """Result of iterating a map to (or towards) a fixed point.

    When converged, applying one more step to ``final_state`` moves it by
    less than the tolerance (that is the measured stopping condition).
    """

    final_state: np.ndarray
    status: DynamicsStatus
    iterations_used: int


def activate(x, kind: Activation, slope: float):
    """Apply the squashing function f(slope * x). Works on scalars and arrays."""
    if not slope > 0:
        raise ValueError("slope must be positive")
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("activation input must be finite")
    z = slope * arr
    if Activation(kind) is Activation.TANH:
        out = np.tanh(z)
    else:
        # Split by sign to avoid overflow in exp for large |z|.
        out = np.empty_like(z)
        pos = z >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
        ez = np.exp(z[~pos])
        out[~pos] = ez / (1.0 + ez)
    return out if arr.ndim else float(out)


def step(model: FcmModel, state: Sequence[float] | np.ndarray) -> np.ndarray:
    """One synchronous update: every node squashes its weighted input sum.

    The incoming state is not mutated.
    """
    s = np.asarray(state, dtype=float)
    if s.shape != (model.n_nodes,):
        raise ValueError(f"state must have length {model.n_nodes}, got shape {s.shape}")
    return activate(s @ model.weights, model.activation, model.slope)


def _evolve(
    model: FcmModel,
    states: np.ndarray,
    tolerance: float,
    max_iterations: int,
    clamp_inputs: bool,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Iterate a batch of state rows until each converges or the cap is hit.

    Rows are frozen once their successive-state difference drops below the
    tolerance (max-norm), so every row follows exactly the trajectory it
    would follow if iterated alone. A converged row keeps the state whose
    measured successor was within tolerance, so one further step is
    guaranteed to move it by less than the tolerance.

    Returns (final states, converged mask, iterations used per row).
    """
    states = np.array(states, dtype=float)
    n_rows = states.shape[0]
    clamp_values = states[:, : model.n_input].copy() if clamp_inputs else None
    active = np.ones(n_rows, dtype=bool)
    iterations = np.zeros(n_rows, dtype=int)
    for it in range(1, max_iterations + 1):
        if not active.any():
            break
        current = states[active]
        nxt = activate(current @ model.weights, model.activation, model.slope)
        if clamp_inputs:
            nxt[:, : model.n_input] = clamp_values[active]
        delta = np.abs(nxt - current).max(axis=1)
        converged = delta < tolerance
        nxt[converged] = current[converged]
        states[active] = nxt
        iterations[active] = it
        rows = np.flatnonzero(active)
        active[rows[converged]] = False
    return states, ~active, iterations


def run_dynamics(
    model: FcmModel,
    initial: Sequence[float] | np.ndarray,
    tolerance: float = DEFAULT_TOLERANCE,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    clamp_inputs: bool = False,
) -> DynamicsOutcome:
    """Iterate the map from an initial state until it settles.

    Stops when two consecutive states differ by less than ``tolerance`` in
    max-norm, or after ``max_iterations`` steps (limit cycles surface as the
    latter). With ``clamp_inputs`` the feature nodes are pinned back to their
    initial values after every step, so only the remaining nodes evolve.
    """
    if not tolerance > 0:
        raise ValueError("tolerance must be positive")
    if max_iterations < 1:
        raise ValueError("max_iterations must be >= 1")
    s = np.asarray(initial, dtype=float)
    if s.shape != (model.n_nodes,):
        raise ValueError(f"initial state must have length {model.n_nodes}")
    states, converged, iterations = _evolve(
        model, s[np.newaxis, :], tolerance, max_iterations, clamp_inputs
    )
    status = DynamicsStatus.CONVERGED if converged[0] else DynamicsStatus.MAX_ITERATIONS
    return DynamicsOutcome(states[0], status, int(iterations[0]))


def _initial_states(model: FcmModel, features: np.ndarray) -> np.ndarray:
    rows = features.shape[0]
    out = np.full((rows, model.n_output), model.activation.neutral)
    return np.concatenate([features, out], axis=1)


def predict(
    model: FcmModel,
    features: np.ndarray,
    tolerance: float = DEFAULT_TOLERANCE,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
) -> np.ndarray:
    """Class index for each feature row.

    Feature nodes are clamped to the row values, output nodes start at the
    activation's neutral point, and the winner is the output node with the
    highest settled state (ties go to the lowest index).
    """
    if model.n_output < 2:
        raise ValueError("classification needs at least 2 output nodes")
    x = np.asarray(features, dtype=float)
    if x.ndim != 2 or x.shape[1] != model.n_input:
        raise ValueError(f"features must be (rows, {model.n_input}), got {x.shape}")
    states, _, _ = _evolve(
        model, _initial_states(model, x), tolerance, max_iterations, clamp_inputs=True
    )
    return np.argmax(states[:, model.n_input :], axis=1)


def classify(
    model: FcmModel,
    features: Sequence[float] | np.ndarray,
    tolerance: float = DEFAULT_TOLERANCE,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
) -> int:
    """Class index for a single feature vector."""
    x = np.asarray(features, dtype=float)
    if x.shape != (model.n_input,):
        raise ValueError(f"features must have length {model.n_input}")
    return int(predict(model, x[np.newaxis, :], tolerance, max_iterations)[0])


def model_to_dict(model: FcmModel) -> dict:
    """JSON-ready representation; float repr round-trips weights bit-exactly."""
    return {
        "n_input": model.n_input,
        "n_output": model.n_output,
        "activation": model.activation.value,
        "slope": model.slope,
        "weights": [[float(v) for v in row] for row in model.weights],
        "node_names": list(model.node_names) if model.node_names else None,
    }


def model_from_dict(data: dict) -> FcmModel:
    names = data.get("node_names")
    return FcmModel(
        n_input=int(data["n_input"]),
        n_output=int(data["n_output"]),
        weights=np.array(data["weights"], dtype=float),
        activation=Activation(data["activation"]),
        slope=float(data["slope"]),
        node_names=tuple(names) if names else None,
    )


def save_model(model: FcmModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2))


def load_model(path: str | Path) -> FcmModel:
    return model_from_dict(json.loads(Path(path).read_text()))
