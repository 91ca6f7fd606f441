"""Reentrancy and payout-failure attacks, run as self-contained simulations.

Each attack sets up one winning option owned by a hostile receiver contract,
settles it, and measures the attacker's gain: the fixture's balance delta
minus whatever payout it was legitimately entitled to (and actually received).
Outcomes are data, not assertions; the differential between the patched and
the deliberately unpatched market is what the tests pin down.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from ..ledger import GasSchedule, GenesisConfig, Transaction, TxReceipt
from ..market import MarketConfig, compute_payout
from ..pricefeed import PriceHistory, Tick, TickStore, ingest_ticks
from .fixtures import GasHog, ReentrantReceiver, ThrowingReceiver
from .sim import Sim, SimConfig, contract_address

FIXTURES = ("reentrant", "throwing", "gashog")

# Generous stipend so a payout forwards enough gas for the receiver to run
# real code (storage writes plus a nested settlement call). The default tiny
# stipend only allows logging; the drain depends on the caller granting more.
ATTACK_SEND_STIPEND = 2_000_000
ATTACK_GAS_LIMIT = 8_000_000


@dataclass
class AttackOutcome:
    fixture: str
    vulnerable: bool
    depth: int
    entitled: int
    delivered: int
    gain: int
    option_open: bool
    locked_balance: int
    receipts: list[TxReceipt] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "fixture": self.fixture, "vulnerable": self.vulnerable,
            "depth": self.depth, "entitled": str(self.entitled),
            "delivered": str(self.delivered), "gain": str(self.gain),
            "optionOpen": self.option_open,
            "lockedBalance": str(self.locked_balance),
        }


def rising_ticks(margin_points: int, seconds: int, start_time: int) -> TickStore:
    """Strictly rising walk that clears the collar within any single block
    window, guaranteeing a limit-up settlement."""
    base = 100_00
    ticks = [Tick(start_time + i, 4000_00 + i, base + i * margin_points,
                  base + i * margin_points, base + i * margin_points)
             for i in range(seconds)]
    return ingest_ticks(ticks)


def run_attack(fixture: str = "reentrant", vulnerable: bool = False,
               depth: int = 3, pool_rounds: int = 12,
               noise_seed: int | None = None) -> AttackOutcome:
    """Deploy the fixture, enter one option it owns, settle it after expiry.

    ``pool_rounds`` sizes the market pool in multiples of 2*deposit; shrink it
    to watch the drain hit pool exhaustion. ``noise_seed`` adds randomized
    bystander entries before expiry.
    """
    if fixture not in FIXTURES:
        raise ValueError(f"unknown fixture {fixture!r}; pick one of {FIXTURES}")

    market_cfg = MarketConfig()
    deposit = market_cfg.entry_deposit
    stipend = ATTACK_SEND_STIPEND if fixture == "reentrant" else 50
    genesis = GenesisConfig(
        accounts={"attacker": 100 * deposit, "bystander": 100 * deposit},
        gas=GasSchedule.with_overrides(send_stipend=stipend),
    )
    config = SimConfig(genesis=genesis, market=market_cfg,
                       pool=pool_rounds * 2 * deposit, vulnerable=vulnerable)
    ticks = rising_ticks(market_cfg.margin_points,
                         seconds=60 * genesis.block_cadence,
                         start_time=genesis.genesis_time)
    sim = Sim(config, ticks)
    ledger = sim.ledger

    if fixture == "reentrant":
        hostile = ReentrantReceiver(contract_address("attacker-fixture"),
                                    market=sim.market.address, depth=depth)
    elif fixture == "throwing":
        hostile = ThrowingReceiver(contract_address("attacker-fixture"),
                                   market=sim.market.address)
    else:
        hostile = GasHog(contract_address("attacker-fixture"),
                         market=sim.market.address)
    ledger.register_contract(hostile)

    attacker = ledger.account("attacker")
    receipts: list[TxReceipt] = []
    rng = random.Random(noise_seed)

    ledger.produce_block()  # block 1: first feed publishes next block

    # Block 2: the fixture enters the market so the payout lands on its hook.
    ledger.submit(Transaction(sender=attacker, target=hostile.address,
                              value=deposit, op="enter",
                              gas_limit=ATTACK_GAS_LIMIT))
    _, rs = ledger.produce_block()
    receipts.extend(rs)
    option_id = 1

    entry_block = ledger.height
    expiry = entry_block + market_cfg.expiry_blocks

    if noise_seed is not None:
        for _ in range(entry_block + 1, expiry):
            if rng.random() < 0.5:
                ledger.submit(sim.entry_tx("bystander",
                                           long_side=rng.random() < 0.5))
            _, rs = ledger.produce_block()
            receipts.extend(rs)

    while ledger.height < expiry:
        _, rs = ledger.produce_block()
        receipts.extend(rs)

    balance_before = ledger.balance_of(hostile.address)
    ledger.submit(sim.exercise_tx("attacker", option_id))
    _, rs = ledger.produce_block()  # expiry feed publishes here, then exercise
    receipts.extend(rs)

    delivered = ledger.balance_of(hostile.address) - balance_before
    record = sim.market.option(sim.market_store(), option_id)
    end_feed = PriceHistory.read(sim.feed_store(), record.expiry_block)
    entitled, _ = compute_payout(record.amount, record.start_price,
                                 end_feed.pair(market_cfg.pair),
                                 market_cfg.lot_size)
    gain = delivered - min(delivered, entitled)

    return AttackOutcome(
        fixture=fixture, vulnerable=vulnerable, depth=depth,
        entitled=entitled, delivered=delivered, gain=gain,
        option_open=not record.closed,
        locked_balance=sim.market.locked_balance(sim.market_store()),
        receipts=receipts,
    )
