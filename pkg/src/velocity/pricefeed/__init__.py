from .contract import Feed, FeedMissing, PriceHistory, feed_key
from .oracle import CALLBACK_OP, CallbackOracle, FaultMode, OracleFaultPlan
from .publisher import PricePublisher, PublisherHalted
from .ticks import (CSV_HEADER, PAIRS, Tick, TickError, TickStore, format_price,
                    generate_walk, ingest_ticks, parse_price, parse_tick_csv,
                    read_tick_csv, write_tick_csv)

__all__ = [
    "CALLBACK_OP", "CSV_HEADER", "CallbackOracle", "FaultMode", "Feed",
    "FeedMissing", "OracleFaultPlan", "PAIRS", "PriceHistory", "PricePublisher",
    "PublisherHalted", "Tick", "TickError", "TickStore", "feed_key",
    "format_price", "generate_walk", "ingest_ticks", "parse_price",
    "parse_tick_csv", "read_tick_csv", "write_tick_csv",
]
