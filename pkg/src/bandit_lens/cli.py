"""Command line entry points: simulate, report, serve."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .config import load_config
from .dashboard import assemble_dashboard, payload_to_json
from .exceptions import BanditLensError
from .logstore import ingest_logs, write_log_file
from .policies import load_snapshot, save_snapshot
from .simulator import Environment, run_online

DEFAULT_PORT = 8080
PORT_ENV_VAR = "BANDIT_LENS_PORT"


def _cmd_simulate(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    env = Environment(config)
    store, snapshot = run_online(env, config, rounds=args.rounds, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    log_path = out / "log.jsonl"
    snapshot_path = out / "snapshot.json"
    n = write_log_file(store.snapshot().records, log_path)
    save_snapshot(snapshot, snapshot_path)
    view = store.snapshot()
    print(
        f"simulated {n} rounds (seed {args.seed}) for "
        f"'{config.experiment_id}': mean reward "
        f"{float(view.reward.mean()):.4f} {config.goal_metric.units}; "
        f"wrote {log_path} and {snapshot_path}"
    )
    return 0


def _load_report_inputs(args: argparse.Namespace):
    config = load_config(args.config)
    store = ingest_logs(args.log, config)
    report = store.ingest_report
    if report is not None and report.rejected:
        print(
            f"ingest: accepted {report.accepted}, rejected {report.rejected}",
            file=sys.stderr,
        )
    view = store.snapshot()
    if view.n == 0:
        raise BanditLensError("empty log")
    policy = load_snapshot(args.snapshot, config)
    return config, view, policy


def _cmd_report(args: argparse.Namespace) -> int:
    config, view, policy = _load_report_inputs(args)
    payload = assemble_dashboard(view, policy, config)
    Path(args.out).write_text(payload_to_json(payload))
    print(f"wrote dashboard payload for '{config.experiment_id}' to {args.out}")
    return 0


def resolve_port(flag_value: int | None, environ: dict | None = None) -> int:
    """Explicit --port wins; otherwise the env var overrides the default."""
    if flag_value is not None:
        return flag_value
    environ = os.environ if environ is None else environ
    return int(environ.get(PORT_ENV_VAR, DEFAULT_PORT))


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.config, args.log, args.snapshot)
    uvicorn.run(app, host=args.host, port=resolve_port(args.port))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bandit-lens",
        description="Operator console for contextual bandits",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run the synthetic environment online")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--rounds", type=int, default=10_000)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--out", required=True, help="output directory")
    p_sim.set_defaults(func=_cmd_simulate)

    p_rep = sub.add_parser("report", help="assemble the dashboard payload")
    p_rep.add_argument("--config", required=True)
    p_rep.add_argument("--log", required=True)
    p_rep.add_argument("--snapshot", required=True)
    p_rep.add_argument("--out", required=True, help="payload output path")
    p_rep.set_defaults(func=_cmd_report)

    p_srv = sub.add_parser("serve", help="serve the dashboard over HTTP")
    p_srv.add_argument("--config", required=True)
    p_srv.add_argument("--log", required=True)
    p_srv.add_argument("--snapshot", required=True)
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.add_argument(
        "--port",
        type=int,
        default=None,
        help=f"default {DEFAULT_PORT}, or ${PORT_ENV_VAR} when set",
    )
    p_srv.set_defaults(func=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BanditLensError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
