"""Reproducible experiment runs: config in, report tables and artifacts out.

A run sweeps every (partition, mode, scheme, shape) combination over the
configured seeds, producing one report table per seed plus a median summary
table, serialized final models, and per-round reports. Everything is derived
from the config and the dataset file, so re-running a config yields
byte-identical tables.
"""
from __future__ import annotations

import json
import statistics
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from itertools import product
from pathlib import Path

from pydantic import BaseModel, Field

from .aggregation import WeightScheme
from .data import (
    Dataset,
    PartitionSpec,
    encode_and_normalize,
    load_csv,
    partition,
    rescale_local,
    train_test_split,
)
from .fcm import Activation, FcmModel, ModelShape, model_to_dict
from .federation import (
    FederationConfig,
    FederationMode,
    FederationResult,
    ParticipantState,
    participant_seed,
    run_federation,
)
from .pso import PsoConfig

CSV_HEADER = "agent,size,pos_rate,acc_pre,acc_post,prec_pre,prec_post"
METRIC_COLUMNS = ("size", "pos_rate", "acc_pre", "acc_post", "prec_pre", "prec_post")


class DatasetConfig(BaseModel):
    path: str
    label_column: str
    positive_label: str
    delimiter: str = ","
    missing_marker: str = "?"


class ShapeConfig(BaseModel):
    activation: Activation = Activation.TANH
    slope: float = 2.0


class PsoSettings(BaseModel):
    swarm_size: int = 10
    iterations: int = 20
    phi1: float = 2.0
    phi2: float = 2.0
    velocity_clamp: float = 0.5

    def build(self, seed: int) -> PsoConfig:
        return PsoConfig(
            swarm_size=self.swarm_size,
            iterations=self.iterations,
            phi1=self.phi1,
            phi2=self.phi2,
            velocity_clamp=self.velocity_clamp,
            seed=seed,
        )


class ExperimentConfig(BaseModel):
    """Everything needed to reproduce a run, JSON-serializable."""

    dataset: DatasetConfig
    partitions: list[list[float]] = Field(default_factory=lambda: [[1.0]])
    modes: list[FederationMode] = Field(default_factory=lambda: [FederationMode.BLIND])
    schemes: list[WeightScheme] = Field(default_factory=lambda: [WeightScheme.CONSTANT])
    shapes: list[ShapeConfig] = Field(default_factory=lambda: [ShapeConfig()])
    rounds: int = 20
    pso: PsoSettings = Field(default_factory=PsoSettings)
    test_fraction: float = 0.2
    tolerance: float = 1e-5
    max_iterations: int = 100
    local_normalization: bool = True
    seeds: list[int] = Field(default_factory=lambda: [0])
    output_dir: str | None = None


@dataclass
class AgentRow:
    id: str
    size: float
    pos_rate: float
    acc_pre: float
    acc_post: float
    prec_pre: float
    prec_post: float

    def metric(self, column: str) -> float:
        return getattr(self, column)


@dataclass
class ReportTable:
    rows: list[AgentRow]
    metadata: dict

    def averaged(self) -> dict[str, float]:
        if not self.rows:
            raise ValueError("table has no agent rows")
        return {
            col: sum(r.metric(col) for r in self.rows) / len(self.rows)
            for col in METRIC_COLUMNS
        }

    def to_csv(self) -> str:
        if not self.rows:
            raise ValueError("refusing to render an empty table")
        lines = [CSV_HEADER]
        for r in self.rows:
            lines.append(
                ",".join([r.id] + [format_cell(r.metric(c)) for c in METRIC_COLUMNS])
            )
        avg = self.averaged()
        lines.append(",".join(["avg"] + [format_cell(avg[c]) for c in METRIC_COLUMNS]))
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        if not self.rows:
            raise ValueError("refusing to render an empty table")
        meta = " ".join(f"{k}={v}" for k, v in sorted(self.metadata.items()))
        header = ["agent", *METRIC_COLUMNS]
        body = [
            [r.id] + [format_cell(r.metric(c)) for c in METRIC_COLUMNS]
            for r in self.rows
        ]
        avg = self.averaged()
        body.append(["avg"] + [format_cell(avg[c]) for c in METRIC_COLUMNS])
        widths = [
            max(len(header[i]), *(len(row[i]) for row in body))
            for i in range(len(header))
        ]
        lines = [meta, "  ".join(h.ljust(w) for h, w in zip(header, widths))]
        for row in body:
            lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)))
        return "\n".join(lines) + "\n"


def format_cell(value: float) -> str:
    """Render a 4-decimal table cell, rounding halves up (0.92105 -> '0.9211')."""
    return str(Decimal(repr(float(value))).quantize(Decimal("0.0001"), ROUND_HALF_UP))


def emit_table(table: ReportTable, csv_path: str | Path, text_path: str | Path | None = None) -> None:
    Path(csv_path).write_text(table.to_csv())
    if text_path is not None:
        Path(text_path).write_text(table.to_text())


def median_table(tables: list[ReportTable]) -> ReportTable:
    """Cell-wise median across per-seed tables (rows matched by agent id)."""
    if not tables:
        raise ValueError("no tables to summarize")
    ids = [r.id for r in tables[0].rows]
    for t in tables[1:]:
        if [r.id for r in t.rows] != ids:
            raise ValueError("tables disagree on agent rows")
    rows = []
    for i, agent_id in enumerate(ids):
        values = {
            col: statistics.median(t.rows[i].metric(col) for t in tables)
            for col in METRIC_COLUMNS
        }
        rows.append(AgentRow(id=agent_id, **values))
    metadata = dict(tables[0].metadata)
    metadata["seed"] = "median:" + ",".join(str(t.metadata["seed"]) for t in tables)
    return ReportTable(rows=rows, metadata=metadata)


@dataclass
class CombinationSeedResult:
    seed: int
    table: ReportTable
    federation: FederationResult


@dataclass
class CombinationOutcome:
    name: str
    metadata: dict
    status: str = "ok"
    error: str | None = None
    seed_results: list[CombinationSeedResult] = field(default_factory=list)
    median: ReportTable | None = None


@dataclass
class ExperimentOutcome:
    config: ExperimentConfig
    combinations: list[CombinationOutcome]

    @property
    def n_failed(self) -> int:
        return sum(1 for c in self.combinations if c.status != "ok")

    def manifest(self) -> dict:
        return {
            "config": self.config.model_dump(mode="json"),
            "combinations": [
                {
                    "name": c.name,
                    "status": c.status,
                    "error": c.error,
                    "seeds": [r.seed for r in c.seed_results],
                }
                for c in self.combinations
            ],
            "n_failed": self.n_failed,
        }

    def payload(self) -> dict:
        """JSON-ready form of the whole run (what the service returns)."""
        combos = []
        for c in self.combinations:
            combos.append(
                {
                    "name": c.name,
                    "status": c.status,
                    "error": c.error,
                    "metadata": c.metadata,
                    "tables": [
                        {
                            "seed": r.seed,
                            "csv": r.table.to_csv(),
                            "text": r.table.to_text(),
                            "metadata": r.table.metadata,
                        }
                        for r in c.seed_results
                    ],
                    "median": (
                        {
                            "csv": c.median.to_csv(),
                            "text": c.median.to_text(),
                            "metadata": c.median.metadata,
                        }
                        if c.median is not None
                        else None
                    ),
                    "round_reports": {
                        str(r.seed): [rep.to_dict() for rep in r.federation.reports]
                        for r in c.seed_results
                    },
                    "models": {
                        str(r.seed): {
                            pid: model_to_dict(m)
                            for pid, m in r.federation.final_models.items()
                        }
                        for r in c.seed_results
                    },
                    "summaries": {
                        str(r.seed): r.federation.summary for r in c.seed_results
                    },
                }
            )
        return {"manifest": self.manifest(), "combinations": combos}


def _build_participants(
    dataset: Dataset,
    proportions: list[float],
    seed: int,
    test_fraction: float,
    local_normalization: bool,
) -> list[ParticipantState]:
    shares = partition(dataset, PartitionSpec(tuple(proportions), shuffle_seed=seed))
    participants = []
    for i, share in enumerate(shares):
        if local_normalization:
            share = rescale_local(share)
        split_seed = participant_seed(seed, f"split-{i}", 0)
        train_split, test_split = train_test_split(share, test_fraction, split_seed)
        participants.append(
            ParticipantState(id=str(i + 1), train=train_split, test=test_split)
        )
    return participants


def run_combination(
    dataset: Dataset,
    proportions: list[float],
    mode: FederationMode,
    scheme: WeightScheme,
    shape_config: ShapeConfig,
    config: ExperimentConfig,
    seed: int,
) -> CombinationSeedResult:
    participants = _build_participants(
        dataset, proportions, seed, config.test_fraction, config.local_normalization
    )
    shape = ModelShape(
        n_input=dataset.n_features,
        n_output=2,
        activation=shape_config.activation,
        slope=shape_config.slope,
    )
    federation_config = FederationConfig(
        mode=mode,
        scheme=scheme,
        shape=shape,
        pso=config.pso.build(seed),
        rounds=config.rounds,
        master_seed=seed,
        tolerance=config.tolerance,
        max_iterations=config.max_iterations,
    )
    result = run_federation(participants, federation_config)
    metadata = {
        "partition": "/".join(f"{p:g}" for p in proportions),
        "mode": mode.value,
        "scheme": scheme.value,
        "activation": shape_config.activation.value,
        "slope": shape_config.slope,
        "rounds": config.rounds,
        "seed": seed,
    }
    rows = [
        AgentRow(
            id=r["id"],
            size=r["share"],
            pos_rate=r["positive_rate"],
            acc_pre=r["accuracy_pre"],
            acc_post=r["accuracy_post"],
            prec_pre=r["precision_pre"],
            prec_post=r["precision_post"],
        )
        for r in result.summary["participants"]
    ]
    return CombinationSeedResult(
        seed=seed, table=ReportTable(rows=rows, metadata=metadata), federation=result
    )


def load_dataset_from_config(config: DatasetConfig) -> Dataset:
    raw = load_csv(
        config.path,
        label_column=config.label_column,
        positive_label=config.positive_label,
        delimiter=config.delimiter,
        missing_marker=config.missing_marker,
    )
    dataset, _ = encode_and_normalize(raw)
    return dataset


def run_config(config: ExperimentConfig) -> ExperimentOutcome:
    """Execute every combination in the config; failures don't stop the rest."""
    dataset = load_dataset_from_config(config.dataset)
    combos = []
    grid = product(
        enumerate(config.partitions), config.modes, config.schemes, config.shapes
    )
    for (p_index, proportions), mode, scheme, shape_config in grid:
        name = (
            f"p{p_index}-{mode.value}-{scheme.value}"
            f"-{shape_config.activation.value}-s{shape_config.slope:g}"
        )
        outcome = CombinationOutcome(
            name=name,
            metadata={
                "partition": "/".join(f"{p:g}" for p in proportions),
                "mode": mode.value,
                "scheme": scheme.value,
                "activation": shape_config.activation.value,
                "slope": shape_config.slope,
                "rounds": config.rounds,
            },
        )
        try:
            for seed in config.seeds:
                outcome.seed_results.append(
                    run_combination(
                        dataset, proportions, mode, scheme, shape_config, config, seed
                    )
                )
            if len(outcome.seed_results) > 1:
                outcome.median = median_table([r.table for r in outcome.seed_results])
        except Exception as exc:
            outcome.status = "failed"
            outcome.error = f"{type(exc).__name__}: {exc}"
            outcome.seed_results = []
        combos.append(outcome)
    result = ExperimentOutcome(config=config, combinations=combos)
    if config.output_dir is not None:
        write_payload(result.payload(), config.output_dir)
    return result


def write_payload(payload: dict, out_dir: str | Path) -> None:
    """Materialize a run payload as files: tables, models, reports, manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "manifest.json").write_text(json.dumps(payload["manifest"], indent=2))
    for combo in payload["combinations"]:
        combo_dir = out / combo["name"]
        combo_dir.mkdir(parents=True, exist_ok=True)
        for table in combo["tables"]:
            seed_dir = combo_dir / f"seed_{table['seed']}"
            seed_dir.mkdir(parents=True, exist_ok=True)
            (seed_dir / "table.csv").write_text(table["csv"])
            (seed_dir / "table.txt").write_text(table["text"])
        if combo.get("median"):
            (combo_dir / "median_table.csv").write_text(combo["median"]["csv"])
            (combo_dir / "median_table.txt").write_text(combo["median"]["text"])
        for seed, reports in combo.get("round_reports", {}).items():
            seed_dir = combo_dir / f"seed_{seed}"
            seed_dir.mkdir(parents=True, exist_ok=True)
            (seed_dir / "round_reports.json").write_text(json.dumps(reports, indent=2))
        for seed, models in combo.get("models", {}).items():
            model_dir = combo_dir / f"seed_{seed}" / "models"
            model_dir.mkdir(parents=True, exist_ok=True)
            for pid, model in models.items():
                (model_dir / f"participant_{pid}.json").write_text(
                    json.dumps(model, indent=2)
                )
        for seed, summary in combo.get("summaries", {}).items():
            seed_dir = combo_dir / f"seed_{seed}"
            seed_dir.mkdir(parents=True, exist_ok=True)
            (seed_dir / "summary.json").write_text(json.dumps(summary, indent=2))
