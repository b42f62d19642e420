"""Blind federated learning of fuzzy cognitive map classifiers.

Core pieces: map dynamics and classification (``fcm``), swarm-based weight
training (``pso``), matrix aggregation schemes (``aggregation``), the
round-based federation orchestrator (``federation``), CSV ingestion and
partitioning (``data``), and the reproducible experiment runner
(``experiments``). An HTTP service and thin CLI wrap the experiment runner.
"""

__version__ = "0.1.0"

from .aggregation import (
    ContributionBundle,
    DegenerateWeightsWarning,
    WeightScheme,
    aggregate,
    direct_sum,
    federated_loss,
    merge_common_nodes,
    normalize_weights,
    scheme_weights,
)
from .data import (
    Dataset,
    NormalizationStats,
    PartitionSpec,
    RawTable,
    encode_and_normalize,
    load_csv,
    load_dataset,
    partition,
    partition_counts,
    rescale_local,
    save_dataset,
    train_test_split,
)
from .experiments import (
    ExperimentConfig,
    ExperimentOutcome,
    ReportTable,
    emit_table,
    median_table,
    run_config,
    write_payload,
)
from .fcm import (
    Activation,
    DynamicsOutcome,
    DynamicsStatus,
    FcmModel,
    ModelShape,
    activate,
    classify,
    load_model,
    model_from_dict,
    model_to_dict,
    predict,
    run_dynamics,
    save_model,
    step,
)
from .federation import (
    FederationConfig,
    FederationMode,
    FederationResult,
    ParticipantState,
    RoundReport,
    evaluate_participant,
    local_update,
    participant_seed,
    round_message,
    run_federation,
)
from .metrics import accuracy, jaccard_complement, precision
from .pso import (
    Particle,
    PsoConfig,
    PsoTrainResult,
    Swarm,
    evaluate_candidate,
    flatten_weights,
    train,
    unflatten_weights,
    update_position,
    update_velocity,
)

__all__ = [
    "__version__",
    "Activation",
    "ContributionBundle",
    "Dataset",
    "DegenerateWeightsWarning",
    "DynamicsOutcome",
    "DynamicsStatus",
    "ExperimentConfig",
    "ExperimentOutcome",
    "FcmModel",
    "FederationConfig",
    "FederationMode",
    "FederationResult",
    "ModelShape",
    "NormalizationStats",
    "Particle",
    "ParticipantState",
    "PartitionSpec",
    "PsoConfig",
    "PsoTrainResult",
    "RawTable",
    "ReportTable",
    "RoundReport",
    "Swarm",
    "WeightScheme",
    "accuracy",
    "activate",
    "aggregate",
    "classify",
    "direct_sum",
    "emit_table",
    "encode_and_normalize",
    "evaluate_candidate",
    "evaluate_participant",
    "federated_loss",
    "flatten_weights",
    "jaccard_complement",
    "load_csv",
    "load_dataset",
    "load_model",
    "local_update",
    "median_table",
    "merge_common_nodes",
    "model_from_dict",
    "model_to_dict",
    "normalize_weights",
    "partition",
    "partition_counts",
    "participant_seed",
    "precision",
    "predict",
    "rescale_local",
    "round_message",
    "run_config",
    "run_dynamics",
    "run_federation",
    "save_dataset",
    "save_model",
    "scheme_weights",
    "step",
    "train",
    "train_test_split",
    "unflatten_weights",
    "update_position",
    "update_velocity",
    "write_payload",
]
