"""Adversarial receiver contracts used to probe settlement behavior.

Every fixture can enter the market itself (op ``enter`` forwarding the
deposit), so the resulting option is owned by the fixture and payouts land on
its receive hook.
"""
from __future__ import annotations

from ..ledger import Address, Contract, Frame, Revert
from ..pricefeed.ticks import parse_price

KEY_HITS = "hits"
KEY_OPTION = "oid"
KEY_DELIVERED = "delivered"


class MarketEntrant(Contract):
    def __init__(self, address: Address, market: Address):
        super().__init__(address)
        self.market = market

    def setup(self, store: dict):
        store[KEY_OPTION] = 0

    def op_enter(self, frame: Frame) -> int:
        option_id = frame.call(self.market, "goLong", (), value=frame.value)
        if not option_id:
            raise Revert("entry rejected")
        frame.sstore(KEY_OPTION, option_id)
        return option_id


class ReentrantReceiver(MarketEntrant):
    """When paid, re-invokes settlement up to ``depth`` times. Failed
    reentrant calls are swallowed so the legitimate payout still lands."""

    def __init__(self, address: Address, market: Address, depth: int):
        super().__init__(address, market)
        self.depth = depth

    def setup(self, store: dict):
        super().setup(store)
        store[KEY_HITS] = 0

    def receive(self, frame: Frame):
        hits = frame.sload(KEY_HITS, 0)
        if hits < self.depth:
            frame.sstore(KEY_HITS, hits + 1)
            frame.try_call(self.market, "exercise", (frame.sload(KEY_OPTION),))


class ThrowingReceiver(MarketEntrant):
    """Refuses every incoming payment."""

    def receive(self, frame: Frame):
        raise Revert("receiver refuses funds")


class GasHog(MarketEntrant):
    """Burns more gas than the send stipend affords."""

    def __init__(self, address: Address, market: Address, cost: int = 10_000):
        super().__init__(address, market)
        self.cost = cost

    def receive(self, frame: Frame):
        frame.charge("compute-step", self.cost)


class CallbackExerciser(Contract):
    """Oracle client: records the delivered price and settles its option.

    Mirrors callback-driven settlement: the oracle's transaction both delivers
    the price string and triggers the exercise call.
    """

    aliases = {"__callback": "op_callback"}

    def __init__(self, address: Address, market: Address, oracle_account: Address):
        super().__init__(address)
        self.market = market
        self.oracle_account = oracle_account

    def setup(self, store: dict):
        store[KEY_OPTION] = 0

    def op_arm(self, frame: Frame, option_id: int):
        frame.sstore(KEY_OPTION, option_id)

    def op_callback(self, frame: Frame, request_id: int, result: str, proof: str):
        if frame.sender != self.oracle_account:
            raise Revert("callback from unknown sender")
        price = parse_price(result)
        frame.sstore(KEY_DELIVERED, (request_id, price))
        frame.emit("CallbackDelivered", requestId=request_id, price=price)
        option_id = frame.sload(KEY_OPTION, 0)
        if option_id:
            frame.call(self.market, "exercise", (option_id,))

    @staticmethod
    def delivered(store: dict):
        return store.get(KEY_DELIVERED)
