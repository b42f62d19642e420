"""Thin command-line client for the experiment service.

``run`` submits a config to the service and writes the returned artifacts.
By default it talks to an in-process instance over an in-memory transport;
pass --server to target a running ``fcmfed serve`` instead.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .aggregation import WeightScheme
from .experiments import ExperimentConfig, ShapeConfig, write_payload
from .fcm import Activation
from .federation import FederationMode

MODE_ALIASES = {"blind": FederationMode.BLIND, "blended": FederationMode.BLENDED}
SCHEME_ALIASES = {
    "constant": WeightScheme.CONSTANT,
    "accuracy": WeightScheme.ACCURACY,
    "precision": WeightScheme.PRECISION,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fcmfed")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute an experiment config")
    run.add_argument("--config", required=True, help="experiment config JSON file")
    run.add_argument("--dataset", help="override the dataset CSV path")
    run.add_argument("--mode", choices=sorted(MODE_ALIASES))
    run.add_argument("--scheme", choices=sorted(SCHEME_ALIASES))
    run.add_argument("--activation", choices=[a.value for a in Activation])
    run.add_argument("--slope", type=float)
    run.add_argument("--rounds", type=int)
    run.add_argument("--agents", help="comma-separated share proportions, e.g. 0.2,0.2,0.2,0.2,0.2")
    run.add_argument("--seed", help="comma-separated seed list")
    run.add_argument("--out", help="directory for tables, models, and reports")
    run.add_argument("--server", help="base URL of a running service (default: in-process)")
    run.add_argument("--poll-interval", type=float, default=0.5)

    serve = sub.add_parser("serve", help="start the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def apply_overrides(config: ExperimentConfig, args: argparse.Namespace) -> ExperimentConfig:
    update: dict = {}
    if args.dataset:
        update["dataset"] = config.dataset.model_copy(update={"path": args.dataset})
    if args.mode:
        update["modes"] = [MODE_ALIASES[args.mode]]
    if args.scheme:
        update["schemes"] = [SCHEME_ALIASES[args.scheme]]
    if args.activation or args.slope is not None:
        base = config.shapes[0] if config.shapes else ShapeConfig()
        update["shapes"] = [
            ShapeConfig(
                activation=Activation(args.activation) if args.activation else base.activation,
                slope=args.slope if args.slope is not None else base.slope,
            )
        ]
    if args.rounds is not None:
        update["rounds"] = args.rounds
    if args.agents:
        update["partitions"] = [[float(p) for p in args.agents.split(",")]]
    if args.seed:
        update["seeds"] = [int(s) for s in args.seed.split(",")]
    return config.model_copy(update=update)


def _make_client(server: str | None):
    if server:
        import httpx

        return httpx.Client(base_url=server, timeout=None)
    # In-process mode: same HTTP surface, no network.
    from fastapi.testclient import TestClient

    from .service import create_app

    return TestClient(create_app())


def run_command(args: argparse.Namespace) -> int:
    config_path = Path(args.config)
    config = ExperimentConfig.model_validate(json.loads(config_path.read_text()))
    config = apply_overrides(config, args)
    out_dir = args.out or config.output_dir
    # Artifacts are written client-side from the returned payload.
    config = config.model_copy(update={"output_dir": None})

    with _make_client(args.server) as client:
        response = client.post("/experiments", json=config.model_dump(mode="json"))
        response.raise_for_status()
        job_id = response.json()["job_id"]
        while True:
            status = client.get(f"/experiments/{job_id}")
            status.raise_for_status()
            body = status.json()
            if body["status"] in ("done", "failed"):
                break
            time.sleep(args.poll_interval)
        if body["status"] == "failed":
            print(f"run failed: {body['error']}", file=sys.stderr)
            return 1
        result = client.get(f"/experiments/{job_id}/result")
        result.raise_for_status()
        payload = result.json()["payload"]

    if out_dir:
        write_payload(payload, out_dir)
    failures = 0
    for combo in payload["combinations"]:
        if combo["status"] == "ok":
            source = combo["median"] or combo["tables"][-1]
            print(f"[ok] {combo['name']}")
            print(source["text"], end="")
        else:
            failures += 1
            print(f"[failed] {combo['name']}: {combo['error']}")
    if out_dir:
        print(f"artifacts written to {out_dir}")
    return 1 if failures else 0


def serve_command(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return run_command(args)
    return serve_command(args)


if __name__ == "__main__":
    sys.exit(main())
