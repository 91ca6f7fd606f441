"""Callback-style price oracle with injectable delivery faults.

A client contract registers a request; after the requested number of blocks
the oracle delivers a callback transaction carrying the price as a 2dp decimal
string plus a proof placeholder. The fault plan perturbs delivery: dropped
entirely, delayed by k blocks (delivering the price current at the late fire
time), or delivered with an insufficient gas limit.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from ..ledger import Address, Block, Ledger, Transaction
from .ticks import TickStore, format_price

CALLBACK_OP = "__callback"
PROOF_PLACEHOLDER = "proof:none"


class FaultMode(Enum):
    NONE = "none"
    DROP = "drop"
    DELAY = "delay"
    UNDERFUNDED = "underfunded"


@dataclass(frozen=True)
class OracleFaultPlan:
    mode: FaultMode = FaultMode.NONE
    delay_blocks: int = 0
    gas: int = 0

    @classmethod
    def none(cls):
        return cls(FaultMode.NONE)

    @classmethod
    def drop(cls):
        return cls(FaultMode.DROP)

    @classmethod
    def delay(cls, blocks: int):
        if blocks < 1:
            raise ValueError("delay fault must be at least 1 block")
        return cls(FaultMode.DELAY, delay_blocks=blocks)

    @classmethod
    def underfunded(cls, gas: int):
        if gas < 1:
            raise ValueError("underfunded fault needs a positive gas limit")
        return cls(FaultMode.UNDERFUNDED, gas=gas)


@dataclass
class _Request:
    rid: int
    client: Address
    scheduled_block: int
    fire_block: int | None
    gas_limit: int


class CallbackOracle:
    """Off-chain service with an on-ledger account; delivers price callbacks."""

    def __init__(self, ledger: Ledger, store: TickStore, account: Address,
                 pair: str = "btceth", default_gas_limit: int = 300_000,
                 gas_price: int = 1):
        self.ledger = ledger
        self.store = store
        self.account = account
        self.pair = pair
        self.default_gas_limit = default_gas_limit
        self.gas_price = gas_price
        self._next_rid = 1
        self._requests: list[_Request] = []

    def attach(self):
        self.ledger.add_listener(self.on_block)
        return self

    def request(self, client: Address, delay_blocks: int,
                fault: OracleFaultPlan | None = None) -> int:
        if client not in self.ledger.contracts:
            raise ValueError("callback client must be a contract")
        if delay_blocks < 1:
            raise ValueError("delay must be at least 1 block")
        fault = fault or OracleFaultPlan.none()
        rid = self._next_rid
        self._next_rid += 1

        scheduled = self.ledger.height + delay_blocks
        if fault.mode is FaultMode.DROP:
            fire = None
        elif fault.mode is FaultMode.DELAY:
            fire = scheduled + fault.delay_blocks
        else:
            fire = scheduled
        gas_limit = fault.gas if fault.mode is FaultMode.UNDERFUNDED else self.default_gas_limit
        self._requests.append(_Request(rid, client, scheduled, fire, gas_limit))
        return rid

    def on_block(self, block: Block):
        due = [r for r in self._requests
               if r.fire_block is not None and r.fire_block == block.number + 1]
        for req in due:
            price = self.price_at_block(req.fire_block)
            self.ledger.submit(Transaction(
                sender=self.account,
                target=req.client,
                op=CALLBACK_OP,
                args=(req.rid, format_price(price), PROOF_PLACEHOLDER),
                gas_limit=req.gas_limit,
                gas_price=self.gas_price,
            ))
            self._requests.remove(req)

    def price_at_block(self, block_number: int) -> int:
        """Pair price at a block's (possibly future, cadence-derived) timestamp."""
        return self.store.at(self.ledger.timestamp_for(block_number)).__getattribute__(self.pair)
