"""On-ledger price history: an owner-gated, gapless, block-indexed feed store.

Writes cost storage gas and are restricted to the owner; reads are free so any
contract can consult historical prices without spending gas.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..ledger import Address, Contract, Frame, Revert

UINT40_MAX = (1 << 40) - 1

KEY_OWNER = "owner"
KEY_FIRST = "firstBlock"
KEY_LAST = "lastBlock"


def feed_key(block_number: int) -> tuple:
    return ("feed", block_number)


class FeedMissing(LookupError):
    """No feed stored for the requested block. Distinct from a revert so
    callers can decide how to proceed."""


@dataclass(frozen=True)
class Feed:
    usdbtc: int
    btceth: int
    btcetc: int
    btcdoge: int
    timestamp: int
    block_number: int

    def pair(self, name: str) -> int:
        if name not in ("usdbtc", "btceth", "btcetc", "btcdoge"):
            raise KeyError(f"unknown price pair {name!r}")
        return getattr(self, name)


class PriceHistory(Contract):
    """Contract holding one Feed per block over a gapless [firstBlock, lastBlock]
    range. firstBlock == 0 doubles as the "empty" sentinel, so feeds start at
    block 1 or later."""

    def __init__(self, address: Address, owner: Address):
        super().__init__(address)
        self.owner = owner

    def setup(self, store: dict):
        store[KEY_OWNER] = self.owner
        store[KEY_FIRST] = 0
        store[KEY_LAST] = 0

    def op_setPrice(self, frame: Frame, timestamp: int, blocknumber: int,
                    usdbtc: int, btceth: int, btcetc: int, btcdoge: int):
        if frame.sender != frame.sload(KEY_OWNER):
            raise Revert("setPrice: caller is not the owner")
        for label, value in (("usdbtc", usdbtc), ("btceth", btceth),
                             ("btcetc", btcetc), ("btcdoge", btcdoge)):
            if value <= 0:
                raise Revert(f"setPrice: non-positive {label}")
        for label, value in (("btceth", btceth), ("btcetc", btcetc),
                             ("btcdoge", btcdoge), ("timestamp", timestamp)):
            if value > UINT40_MAX:
                raise Revert(f"setPrice: {label} exceeds 40 bits")
        if blocknumber <= 0:
            raise Revert("setPrice: block number must be positive")

        first = frame.sload(KEY_FIRST)
        last = frame.sload(KEY_LAST)
        if first == 0:
            frame.sstore(KEY_FIRST, blocknumber)
        elif blocknumber != last + 1:
            raise Revert(f"setPrice: expected block {last + 1}, got {blocknumber}")

        frame.sstore(feed_key(blocknumber),
                     Feed(usdbtc, btceth, btcetc, btcdoge, timestamp, blocknumber))
        frame.sstore(KEY_LAST, blocknumber)
        frame.emit("PriceUpdated", timestamp=timestamp, blocknumber=blocknumber,
                   usdbtc=usdbtc, btceth=btceth, btcetc=btcetc, btcdoge=btcdoge)

    def op_getPrice(self, frame: Frame, blocknumber: int) -> Feed:
        # Free read by design: no gas charged beyond the dispatch step.
        return self.read(frame.ctx.store(self.address), blocknumber)

    # -- read helpers usable both on-ledger (via frame.peek) and off-chain ----

    @staticmethod
    def read(store: dict, blocknumber: int) -> Feed:
        feed = store.get(feed_key(blocknumber))
        if feed is None:
            raise FeedMissing(f"no feed for block {blocknumber}")
        return feed

    @staticmethod
    def read_from_frame(frame: Frame, history_addr: Address, blocknumber: int) -> Feed:
        feed = frame.peek(history_addr, feed_key(blocknumber))
        if feed is None:
            raise FeedMissing(f"no feed for block {blocknumber}")
        return feed

    @staticmethod
    def bounds(store: dict) -> tuple[int, int]:
        return store.get(KEY_FIRST, 0), store.get(KEY_LAST, 0)

    @staticmethod
    def latest(store: dict) -> Feed:
        last = store.get(KEY_LAST, 0)
        if last == 0:
            raise FeedMissing("price history is empty")
        return PriceHistory.read(store, last)
