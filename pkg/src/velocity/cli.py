"""velocity command line: scenario runs, attack demos, the trading service."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .harness import load_scenario, run_attack, run_scenario


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="velocity")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="replay a scenario file end to end")
    run_p.add_argument("--scenario", required=True)
    run_p.add_argument("--ticks", help="tick CSV overriding the scenario's source")
    run_p.add_argument("--seed", type=int, help="seed overriding a generated walk")
    run_p.add_argument("--out", required=True, help="event log output (JSON lines)")
    run_p.add_argument("--report-dir", help="also render figures and CSV summaries")

    atk_p = sub.add_parser("attack", help="run an adversarial fixture")
    atk_p.add_argument("--fixture", default="reentrant",
                       choices=("reentrant", "throwing", "gashog"))
    group = atk_p.add_mutually_exclusive_group()
    group.add_argument("--vulnerable", action="store_true",
                       help="settle through the unpatched payout ordering")
    group.add_argument("--patched", action="store_true", default=True)
    atk_p.add_argument("--depth", type=int, default=3)
    atk_p.add_argument("--pool-rounds", type=int, default=12)

    serve_p = sub.add_parser("serve", help="start the trading HTTP service")
    serve_p.add_argument("--config", help="session config JSON")
    serve_p.add_argument("--port", type=int)
    serve_p.add_argument("--ui", help="dashboard directory to serve "
                                      "(default: ./frontend when present)")

    args = parser.parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "attack":
        return _cmd_attack(args)
    return _cmd_serve(args)


def _cmd_run(args) -> int:
    scenario = load_scenario(args.scenario, ticks_path=args.ticks, seed=args.seed)
    result = run_scenario(scenario, log_path=args.out)
    print(f"produced {result.sim.ledger.height} blocks, "
          f"{len(result.log.records)} log records -> {args.out}")
    for sweep in result.sweeps:
        print(f"sweep: scanned={sweep.scanned} settled={sweep.settled} "
              f"failed={len(sweep.failed)}")
    for check in result.checks:
        mark = "PASS" if check.passed else "FAIL"
        print(f"check {check.name}: {mark} ({check.detail})")
    if args.report_dir:
        from .report import write_report
        files = write_report(result.log.records, args.report_dir,
                             expiry_blocks=scenario.config.market.expiry_blocks,
                             margin_points=scenario.config.market.margin_points)
        for path in files:
            print(f"report: {path}")
    return 0 if result.passed else 1


def _cmd_attack(args) -> int:
    outcome = run_attack(fixture=args.fixture, vulnerable=args.vulnerable,
                         depth=args.depth, pool_rounds=args.pool_rounds)
    print(json.dumps(outcome.as_dict(), indent=2))
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import Session, SessionConfig, create_app

    config = SessionConfig.load(args.config)
    if args.port is not None:
        config.port = args.port
    ui_dir = args.ui or ("frontend" if Path("frontend/index.html").exists() else None)
    session = Session(config)
    app = create_app(session, ui_dir=ui_dir)
    print(f"velocity service on port {config.port} "
          f"({config.mode} mode, height {session.snapshot.height}"
          f"{', dashboard mounted' if ui_dir else ''})")
    uvicorn.run(app, host="127.0.0.1", port=config.port, log_level="warning")
    return 0


if __name__ == "__main__":
    sys.exit(main())
