"""The options market contract: entry, escrow, and capped settlement.

The contract itself takes the opposite side of every incoming position
(market-maker mode), escrowing a matching amount from its own pool. Settlement
is block-indexed: an option entered at block b expires at b + expiryBlocks and
settles against the published feed for the expiry block.

The ``vulnerable`` flag keeps the pre-fix settlement ordering in-tree for
differential testing: payouts go out before the option is marked closed, so a
reentrant receiver can drain the pool. The fixed ordering closes the option
and releases escrow before any funds move.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

from ..ledger import Address, Contract, Frame, Revert
from ..pricefeed.contract import KEY_LAST as FEED_KEY_LAST
from ..pricefeed.contract import FeedMissing, PriceHistory
from .payout import MarketConfig, compute_payout

KEY_LAST_ID = "lastOptionId"
KEY_LOCKED = "lockedBalance"


def option_key(option_id: int) -> tuple:
    return ("option", option_id)


@dataclass(frozen=True)
class OptionRecord:
    id: int
    long: Address
    short: Address
    amount: int
    start_block: int
    expiry_block: int
    start_price: int
    closed: bool


class OptionsMarket(Contract):
    def __init__(self, address: Address, config: MarketConfig,
                 pricefeed: Address, vulnerable: bool = False):
        super().__init__(address)
        self.config = config
        self.pricefeed = pricefeed
        self.vulnerable = vulnerable

    def setup(self, store: dict):
        store[KEY_LAST_ID] = 0
        store[KEY_LOCKED] = 0

    # -- entry -----------------------------------------------------------------

    def op_goLong(self, frame: Frame) -> int:
        return self._enter(frame, long_side=True)

    def op_goShort(self, frame: Frame) -> int:
        return self._enter(frame, long_side=False)

    def _enter(self, frame: Frame, long_side: bool) -> int:
        value = frame.value
        sender = frame.sender

        # hasEnoughFunds: the pool must be able to escrow the matching side
        # over and above everything already reserved for open options.
        locked = frame.sload(KEY_LOCKED, 0)
        pool = frame.balance(self.address)
        if pool - value - 2 * locked < value:
            raise Revert("pool cannot escrow the matching side")

        # checkMargin: the deposit must be exactly the margin in wei.
        if value != self.config.entry_deposit:
            frame.emit("Error", message="Invalid Margin!")
            if not frame.send(sender, value):
                raise Revert("margin refund failed")
            return 0

        start_price = self._latest_price(frame)
        option_id = frame.sload(KEY_LAST_ID, 0) + 1
        record = OptionRecord(
            id=option_id,
            long=sender if long_side else self.address,
            short=self.address if long_side else sender,
            amount=value,
            start_block=frame.block.number,
            expiry_block=frame.block.number + self.config.expiry_blocks,
            start_price=start_price,
            closed=False,
        )
        frame.sstore(KEY_LAST_ID, option_id)
        frame.sstore(option_key(option_id), record)
        frame.sstore(KEY_LOCKED, locked + value)
        frame.emit("LongOption" if long_side else "ShortOption",
                   optionId=option_id, sender=sender, amount=value,
                   block=frame.block.number)
        return option_id

    def _latest_price(self, frame: Frame) -> int:
        # The feed for the in-flight block is published next block, so entry
        # prices come from the latest feed on record.
        last = frame.peek(self.pricefeed, FEED_KEY_LAST, 0)
        if last == 0:
            raise Revert("no published price yet")
        feed = PriceHistory.read_from_frame(frame, self.pricefeed, last)
        return feed.pair(self.config.pair)

    # -- settlement --------------------------------------------------------------

    def op_exercise(self, frame: Frame, option_id: int | None = None) -> bool:
        if option_id is None:
            option_id = self._find_option_id(frame, frame.sender)

        record = frame.sload(option_key(option_id))
        if record is None:
            raise Revert(f"no option {option_id}")
        if record.closed:  # isOpen
            raise Revert(f"option {option_id} already closed")
        if frame.block.number < record.expiry_block:
            raise Revert(f"option {option_id} not expired until block "
                         f"{record.expiry_block}")
        try:
            feed = PriceHistory.read_from_frame(frame, self.pricefeed,
                                                record.expiry_block)
        except FeedMissing:
            raise Revert(f"no price for expiry block {record.expiry_block}") from None
        end_price = feed.pair(self.config.pair)

        if not self.vulnerable:
            # close before payouts to prevent replay
            frame.sstore(option_key(option_id), replace(record, closed=True))
            frame.sstore(KEY_LOCKED, frame.sload(KEY_LOCKED) - record.amount)

        pay_long, pay_short = compute_payout(record.amount, record.start_price,
                                             end_price, self.config.lot_size)
        self._pay_and_handle(frame, option_id, record.long, pay_long)
        self._pay_and_handle(frame, option_id, record.short, pay_short)

        if self.vulnerable:
            current = frame.sload(option_key(option_id))
            frame.sstore(option_key(option_id), replace(current, closed=True))
            frame.sstore(KEY_LOCKED, frame.sload(KEY_LOCKED) - record.amount)
        return True

    def _pay_and_handle(self, frame: Frame, option_id: int, addr: Address,
                        amount: int) -> bool:
        if amount == 0:
            return True  # zero legs move nothing and emit nothing
        if frame.send(addr, amount):
            frame.emit("optionPaid", optionId=option_id, addr=addr, amount=amount)
            return True
        raise Revert(f"payout of {amount} to {addr} failed")

    def _find_option_id(self, frame: Frame, owner: Address) -> int:
        last_id = frame.sload(KEY_LAST_ID, 0)
        for oid in range(1, last_id + 1):
            record = frame.sload(option_key(oid))
            if (record is not None and not record.closed
                    and frame.block.number >= record.expiry_block
                    and owner in (record.long, record.short)):
                return oid
        raise Revert(f"{owner} has no open expired option")

    # -- off-chain read helpers ---------------------------------------------------

    @staticmethod
    def option(store: dict, option_id: int) -> OptionRecord | None:
        return store.get(option_key(option_id))

    @staticmethod
    def options(store: dict) -> list[OptionRecord]:
        last_id = store.get(KEY_LAST_ID, 0)
        found = []
        for oid in range(1, last_id + 1):
            record = store.get(option_key(oid))
            if record is not None:
                found.append(record)
        return found

    @staticmethod
    def open_expired(store: dict, height: int) -> list[OptionRecord]:
        return [r for r in OptionsMarket.options(store)
                if not r.closed and r.expiry_block <= height]

    @staticmethod
    def locked_balance(store: dict) -> int:
        return store.get(KEY_LOCKED, 0)
