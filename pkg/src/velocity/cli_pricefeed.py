"""pricefeed command line: tick replay against a ledger, and walk generation."""
from __future__ import annotations

import argparse
import sys

from .harness.checks import check_fidelity
from .harness.sim import Sim, SimConfig
from .ledger import EventLog, GenesisConfig
from .pricefeed import generate_walk, read_tick_csv, write_tick_csv
from .pricefeed.contract import KEY_FIRST, KEY_LAST


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="pricefeed")
    sub = parser.add_subparsers(dest="command", required=True)

    rep = sub.add_parser("replay", help="publish a tick file onto a fresh ledger")
    rep.add_argument("--ticks", required=True)
    rep.add_argument("--genesis", required=True)
    rep.add_argument("--out", help="optional event log output")

    gen = sub.add_parser("gen-walk", help="generate a seeded random-walk tick file")
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--seconds", type=int, required=True)
    gen.add_argument("--start", type=int, required=True,
                     help="start price in hundredths (points)")
    gen.add_argument("--vol", type=float, default=0.0005)
    gen.add_argument("--start-time", type=int, default=1_500_000_000)
    gen.add_argument("--out", help="output CSV (default stdout)")

    args = parser.parse_args(argv)
    if args.command == "replay":
        return _cmd_replay(args)
    return _cmd_gen_walk(args)


def _cmd_replay(args) -> int:
    ticks = read_tick_csv(args.ticks)
    genesis = GenesisConfig.from_file(args.genesis)
    if genesis.genesis_time < ticks.first_time:
        genesis.genesis_time = ticks.first_time
    log = EventLog(args.out) if args.out else None
    sim = Sim(SimConfig(genesis=genesis), ticks, log=log)
    ledger = sim.ledger

    while ledger.timestamp_for(ledger.height + 1) <= ticks.last_time:
        ledger.produce_block()
    ledger.produce_block()  # flush the final pending setPrice

    store = sim.feed_store()
    first, last = store.get(KEY_FIRST, 0), store.get(KEY_LAST, 0)
    print(f"replayed {len(ticks)} ticks into {ledger.height} blocks; "
          f"published feeds for blocks [{first}, {last}]")
    check = check_fidelity(ledger, sim.history, ticks)
    print(f"fidelity: {'PASS' if check.passed else 'FAIL'} ({check.detail})")
    if log:
        log.close()
        print(f"event log -> {args.out}")
    return 0 if check.passed else 1


def _cmd_gen_walk(args) -> int:
    store = generate_walk(seed=args.seed, seconds=args.seconds, start=args.start,
                          vol=args.vol, start_time=args.start_time)
    if args.out:
        with open(args.out, "w") as fh:
            write_tick_csv(store, fh)
        print(f"wrote {len(store)} ticks -> {args.out}", file=sys.stderr)
    else:
        write_tick_csv(store, sys.stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
