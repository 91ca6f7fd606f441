"""Scenario files and the deterministic end-to-end runner.

A scenario bundles genesis, a tick source, an ordered transaction schedule,
optional callback fault plans, and the checks to evaluate after the run.
Schedule entries are keyed by block number. Entry kinds:

* ``goLong`` / ``goShort`` / ``exercise`` / ``transfer`` execute in their block.
* ``sweep`` runs the settlement sweeper right after its block commits, so the
  exercise transactions land in the following block (where the expiry-block
  price is available).
* ``callback`` registers a price request with the callback oracle after its
  block commits, optionally with a fault plan.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..ledger import EventLog, GenesisConfig, Transaction, TxReceipt
from ..market import MarketConfig
from ..pricefeed import OracleFaultPlan, TickStore, generate_walk, read_tick_csv
from .checks import (CheckResult, check_cap, check_conservation, check_escrow,
                     check_fidelity)
from .fixtures import CallbackExerciser
from .sim import (ENTRY_GAS_LIMIT, EXERCISE_GAS_LIMIT, Sim, SimConfig,
                  contract_address)
from .sweeper import SweepReport, collect_sweep, plan_sweep

DEFAULT_CHECKS = ("conservation", "cap", "escrow", "fidelity")


@dataclass
class Scenario:
    config: SimConfig
    ticks: TickStore
    schedule: list[dict] = field(default_factory=list)
    blocks: int | None = None
    checks: tuple = DEFAULT_CHECKS

    def __post_init__(self):
        last = 0
        for entry in self.schedule:
            block = int(entry.get("block", 0))
            if block < 1:
                raise ValueError("schedule entries need a block >= 1")
            if block < last:
                raise ValueError("schedule blocks must be non-decreasing")
            last = block

    @property
    def end_block(self) -> int:
        if self.blocks is not None:
            return self.blocks
        horizon = max((int(e["block"]) for e in self.schedule), default=1)
        return horizon + self.config.market.expiry_blocks + 2


def load_scenario(path: str | Path, ticks_path: str | Path | None = None,
                  seed: int | None = None) -> Scenario:
    base = Path(path).parent
    with open(path) as fh:
        raw = json.load(fh)
    return scenario_from_dict(raw, base_dir=base, ticks_path=ticks_path, seed=seed)


def scenario_from_dict(raw: dict, base_dir: Path | None = None,
                       ticks_path: str | Path | None = None,
                       seed: int | None = None) -> Scenario:
    base_dir = base_dir or Path(".")

    genesis_raw = raw.get("genesis", {})
    if isinstance(genesis_raw, str):
        genesis = GenesisConfig.from_file(base_dir / genesis_raw)
    else:
        genesis = GenesisConfig.from_dict(genesis_raw)

    market = MarketConfig.from_dict(raw.get("market", {}))
    config = SimConfig(genesis=genesis, market=market,
                       pool=int(raw.get("pool", 10 ** 18)),
                       vulnerable=bool(raw.get("vulnerable", False)))

    ticks_raw = ticks_path if ticks_path is not None else raw.get("ticks")
    if ticks_raw is None:
        raise ValueError("scenario needs a tick source (file or walk parameters)")
    if isinstance(ticks_raw, (str, Path)):
        ticks = read_tick_csv(Path(ticks_raw) if Path(ticks_raw).is_absolute()
                              else base_dir / ticks_raw)
    else:
        ticks = generate_walk(
            seed=seed if seed is not None else int(ticks_raw.get("seed", 0)),
            seconds=int(ticks_raw["seconds"]),
            start=int(ticks_raw["start"]),
            vol=float(ticks_raw.get("vol", 0.0005)),
            start_time=int(ticks_raw.get("startTime", genesis.genesis_time)),
        )

    return Scenario(config=config, ticks=ticks,
                    schedule=list(raw.get("schedule", [])),
                    blocks=raw.get("blocks"),
                    checks=tuple(raw.get("checks", DEFAULT_CHECKS)))


def parse_fault(raw) -> OracleFaultPlan:
    if raw in (None, "none"):
        return OracleFaultPlan.none()
    if raw == "drop":
        return OracleFaultPlan.drop()
    kind, _, arg = str(raw).partition(":")
    if kind == "delay":
        return OracleFaultPlan.delay(int(arg or 1))
    if kind == "underfunded":
        return OracleFaultPlan.underfunded(int(arg or 100))
    raise ValueError(f"unknown fault plan {raw!r}")


@dataclass
class RunResult:
    sim: Sim
    receipts: dict[int, list[tuple[Transaction, TxReceipt]]]
    sweeps: list[SweepReport]
    checks: list[CheckResult]
    log: EventLog

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def all_events(self):
        for block in sorted(self.receipts):
            for _, receipt in self.receipts[block]:
                yield from receipt.events


def run_scenario(scenario: Scenario, log_path: str | Path | None = None) -> RunResult:
    log = EventLog(log_path)
    sim = Sim(scenario.config, scenario.ticks, log=log)
    ledger = sim.ledger

    by_block: dict[int, list[dict]] = {}
    for entry in scenario.schedule:
        by_block.setdefault(int(entry["block"]), []).append(entry)

    callback_clients: dict[int, CallbackExerciser] = {}
    receipts: dict[int, list] = {}
    sweeps: list[SweepReport] = []
    pending_sweep: tuple[int, list[Transaction]] | None = None

    for number in range(1, scenario.end_block + 1):
        entries = by_block.get(number, [])
        for entry in entries:
            kind = entry["kind"]
            if kind in ("goLong", "goShort"):
                deposit = entry.get("deposit")
                ledger.submit(sim.entry_tx(
                    entry["from"], long_side=(kind == "goLong"),
                    deposit=None if deposit is None else int(deposit)))
            elif kind == "exercise":
                ledger.submit(sim.exercise_tx(entry["from"],
                                              entry.get("optionId")))
            elif kind == "transfer":
                ledger.submit(Transaction(
                    sender=ledger.account(entry["from"]),
                    target=ledger.account(entry["to"]),
                    value=int(entry["value"]),
                    gas_limit=int(entry.get("gasLimit", ENTRY_GAS_LIMIT))))
            elif kind in ("sweep", "callback"):
                pass  # handled after the block commits
            else:
                raise ValueError(f"unknown schedule entry kind {kind!r}")

        _, block_receipts = ledger.produce_block()
        paired = list(zip(ledger.last_batch, block_receipts))
        receipts[number] = paired

        if pending_sweep is not None:
            scanned, txs = pending_sweep
            sweeps.append(collect_sweep(scanned, txs, paired))
            pending_sweep = None

        for entry in entries:
            if entry["kind"] == "sweep":
                scanned, txs = plan_sweep(ledger, sim.market, sim.sweeper,
                                          gas_limit=int(entry.get("gasLimit",
                                                                  EXERCISE_GAS_LIMIT)))
                for tx in txs:
                    ledger.submit(tx)
                pending_sweep = (scanned, txs)
            elif entry["kind"] == "callback":
                option_id = int(entry["optionId"])
                client = callback_clients.get(option_id)
                if client is None:
                    client = CallbackExerciser(
                        contract_address(f"callback-client-{option_id}"),
                        market=sim.market.address,
                        oracle_account=sim.oracle.account)
                    ledger.register_contract(client)
                    ledger.stores[client.address]["oid"] = option_id
                    callback_clients[option_id] = client
                sim.oracle.request(client.address,
                                   delay_blocks=int(entry.get("delay", 1)),
                                   fault=parse_fault(entry.get("fault")))

    if pending_sweep is not None:
        scanned, txs = pending_sweep
        _, block_receipts = ledger.produce_block()
        paired = list(zip(ledger.last_batch, block_receipts))
        receipts[ledger.height] = paired
        sweeps.append(collect_sweep(scanned, txs, paired))

    results = []
    for name in scenario.checks:
        if name == "conservation":
            results.append(check_conservation(log.records, ledger))
        elif name == "cap":
            results.append(check_cap(log.records, scenario.config.market.entry_deposit))
        elif name == "escrow":
            results.append(check_escrow(log.records, sim.market, ledger))
        elif name == "fidelity":
            results.append(check_fidelity(ledger, sim.history, scenario.ticks))
        else:
            results.append(CheckResult(name, False, "unknown check"))
    log.close()
    return RunResult(sim=sim, receipts=receipts, sweeps=sweeps,
                     checks=results, log=log)
