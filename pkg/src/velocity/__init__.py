"""Velocity: a deterministic simulation of a collateralized collared-option
market running on a miniature block ledger, with a block-indexed price oracle,
a settlement sweeper, an adversarial harness, and a trader-facing service."""

from .ledger import (Address, Block, Contract, EventLog, Frame, GasSchedule,
                     GenesisConfig, Ledger, Transaction, TxReceipt, TxStatus)
from .market import MarketConfig, OptionRecord, OptionsMarket, compute_payout
from .pricefeed import (CallbackOracle, Feed, FeedMissing, OracleFaultPlan,
                        PriceHistory, PricePublisher, Tick, TickStore)

__version__ = "0.1.0"

__all__ = [
    "Address", "Block", "CallbackOracle", "Contract", "EventLog", "Feed",
    "FeedMissing", "Frame", "GasSchedule", "GenesisConfig", "Ledger",
    "MarketConfig", "OptionRecord", "OptionsMarket", "OracleFaultPlan",
    "PriceHistory", "PricePublisher", "Tick", "TickStore", "Transaction",
    "TxReceipt", "TxStatus", "compute_payout",
]
