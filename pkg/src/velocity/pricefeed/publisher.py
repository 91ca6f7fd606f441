"""Block listener that publishes the tick price at each block's timestamp.

On every produced block the publisher looks up the last tick at or before the
block time and enqueues an owner-signed setPrice transaction, which executes
in the following block. If the tick series does not cover a block's timestamp
the publisher halts and reports; it never publishes a guess.
"""
from __future__ import annotations

from ..ledger import Block, Ledger, Transaction
from .contract import PriceHistory
from .ticks import TickStore


class PublisherHalted(RuntimeError):
    pass


class PricePublisher:
    def __init__(self, ledger: Ledger, store: TickStore, history: PriceHistory,
                 gas_limit: int = 5_000, gas_price: int = 1):
        self.ledger = ledger
        self.store = store
        self.history = history
        self.owner = history.owner
        self.gas_limit = gas_limit
        self.gas_price = gas_price
        self.halted: str | None = None
        self.published = 0

    def attach(self):
        self.ledger.add_listener(self.on_block)
        return self

    def on_block(self, block: Block):
        if self.halted:
            return
        if not self.store.covers(block.timestamp):
            self.halted = (f"tick store does not cover block {block.number} "
                           f"at t={block.timestamp}")
            return
        tick = self.store.at(block.timestamp)
        self.ledger.submit(Transaction(
            sender=self.owner,
            target=self.history.address,
            op="setPrice",
            args=(tick.timestamp, block.number, tick.usdbtc, tick.btceth,
                  tick.btcetc, tick.btcdoge),
            gas_limit=self.gas_limit,
            gas_price=self.gas_price,
        ))
        self.published += 1

    def check_not_halted(self):
        if self.halted:
            raise PublisherHalted(self.halted)
