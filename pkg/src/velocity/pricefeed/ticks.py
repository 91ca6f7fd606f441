"""Per-second price ticks: CSV ingestion, lookup, and synthetic generation.

Prices are fixed-point integers with two decimal places (price times 100).
A tick file covers a contiguous interval at one tick per second; the store is
immutable after load and may be shared across threads.
"""
from __future__ import annotations

import csv
import io
import random
from bisect import bisect_right
from dataclasses import dataclass
from pathlib import Path

PAIRS = ("usdbtc", "btceth", "btcetc", "btcdoge")
CSV_HEADER = "timestamp,usdbtc,btceth,btcetc,btcdoge"


class TickError(ValueError):
    """Malformed or gapped tick input."""


def parse_price(text: str) -> int:
    """Parse a decimal price string with up to 2 fractional digits into
    fixed-point hundredths. '4123.45' -> 412345."""
    text = text.strip()
    if not text:
        raise TickError("empty price field")
    sign = -1 if text.startswith("-") else 1
    if text[0] in "+-":
        text = text[1:]
    whole, _, frac = text.partition(".")
    if not whole.isdigit() or (frac and not frac.isdigit()):
        raise TickError(f"malformed price {text!r}")
    if len(frac) > 2:
        raise TickError(f"price {text!r} has more than 2 decimal places")
    frac = (frac + "00")[:2]
    return sign * (int(whole) * 100 + int(frac))


def format_price(points: int) -> str:
    """Render fixed-point hundredths as a 2dp decimal string."""
    sign = "-" if points < 0 else ""
    points = abs(points)
    return f"{sign}{points // 100}.{points % 100:02d}"


@dataclass(frozen=True)
class Tick:
    timestamp: int
    usdbtc: int
    btceth: int
    btcetc: int
    btcdoge: int

    def __post_init__(self):
        for pair in PAIRS:
            if getattr(self, pair) <= 0:
                raise TickError(f"tick at t={self.timestamp} has non-positive {pair}")


class TickStore:
    """Time-indexed tick series answering priceAt(t) = latest tick at or before t."""

    def __init__(self, ticks: list[Tick], forward_filled: bool = False):
        if not ticks:
            raise TickError("tick store is empty")
        self.ticks = tuple(ticks)
        self.times = tuple(t.timestamp for t in ticks)
        self.forward_filled = forward_filled

    @property
    def first_time(self) -> int:
        return self.times[0]

    @property
    def last_time(self) -> int:
        return self.times[-1]

    def covers(self, timestamp: int) -> bool:
        return self.first_time <= timestamp <= self.last_time

    def at(self, timestamp: int) -> Tick:
        if not self.covers(timestamp):
            raise TickError(
                f"timestamp {timestamp} outside tick coverage "
                f"[{self.first_time}, {self.last_time}]")
        idx = bisect_right(self.times, timestamp) - 1
        return self.ticks[idx]

    def __len__(self) -> int:
        return len(self.ticks)


def ingest_ticks(rows, strict: bool = True) -> TickStore:
    """Build a TickStore from an iterable of Ticks.

    Timestamps must strictly increase. In strict mode any gap larger than one
    second rejects the input; in lenient mode gaps are forward-filled with the
    previous tick and the store is flagged as forward_filled.
    """
    ticks: list[Tick] = []
    filled = False
    for tick in rows:
        if ticks:
            prev = ticks[-1]
            if tick.timestamp <= prev.timestamp:
                raise TickError(
                    f"tick timestamps must strictly increase "
                    f"({prev.timestamp} then {tick.timestamp})")
            gap = tick.timestamp - prev.timestamp
            if gap > 1:
                if strict:
                    raise TickError(
                        f"gap of {gap}s at t={prev.timestamp} (strict mode)")
                for t in range(prev.timestamp + 1, tick.timestamp):
                    ticks.append(Tick(t, prev.usdbtc, prev.btceth,
                                      prev.btcetc, prev.btcdoge))
                filled = True
        ticks.append(tick)
    return TickStore(ticks, forward_filled=filled)


def read_tick_csv(path: str | Path, strict: bool = True) -> TickStore:
    with open(path, newline="") as fh:
        return parse_tick_csv(fh.read(), strict=strict)


def parse_tick_csv(text: str, strict: bool = True) -> TickStore:
    rows = []
    reader = csv.reader(io.StringIO(text))
    for lineno, row in enumerate(reader, start=1):
        if not row or not any(field.strip() for field in row):
            continue
        if lineno == 1 and not row[0].strip().isdigit():
            continue  # header
        if len(row) != 5:
            raise TickError(f"line {lineno}: expected 5 fields, got {len(row)}")
        ts = row[0].strip()
        if not ts.isdigit():
            raise TickError(f"line {lineno}: bad timestamp {ts!r}")
        rows.append(Tick(int(ts), *(parse_price(p) for p in row[1:])))
    return ingest_ticks(rows, strict=strict)


def write_tick_csv(store_or_ticks, out) -> None:
    ticks = store_or_ticks.ticks if isinstance(store_or_ticks, TickStore) else store_or_ticks
    out.write(CSV_HEADER + "\n")
    for t in ticks:
        out.write(f"{t.timestamp},{format_price(t.usdbtc)},{format_price(t.btceth)},"
                  f"{format_price(t.btcetc)},{format_price(t.btcdoge)}\n")


def generate_walk(seed: int, seconds: int, start: int, vol: float = 0.0005,
                  start_time: int = 1_500_000_000) -> TickStore:
    """Seeded geometric random walk, one tick per second for all four pairs.

    ``start`` is the initial price in fixed-point hundredths; each pair walks
    independently from the same start. Prices never drop below 1 point.
    """
    if seconds < 1:
        raise TickError("walk must cover at least one second")
    if start <= 0:
        raise TickError("start price must be positive")
    rng = random.Random(seed)
    prices = [float(start)] * len(PAIRS)
    ticks = []
    for i in range(seconds):
        if i > 0:
            for j in range(len(PAIRS)):
                prices[j] *= 2.718281828459045 ** (vol * rng.gauss(0.0, 1.0))
        ticks.append(Tick(start_time + i, *(max(1, round(p)) for p in prices)))
    return TickStore(ticks)
