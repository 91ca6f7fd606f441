"""Shared fixtures and independent oracles used across the suite."""
from __future__ import annotations

import pytest

from velocity.ledger import GenesisConfig

ETH = 10 ** 18


def payout_oracle(amount: int, start: int, end: int, lot: int,
                  margin: int) -> tuple[int, int]:
    """Brute-force payout rule written as explicit branches (limit up, limit
    down, linear inside the collar), independent of the clamp implementation.
    Valid when margin * lot == amount, which the market config enforces."""
    d = end - start
    if d >= margin:
        return 2 * amount, 0
    if d <= -margin:
        return 0, 2 * amount
    return amount + d * lot, amount - d * lot


def scan_price_oracle(ticks, t: int):
    """Linear scan for the latest tick at or before t."""
    best = None
    for tick in ticks:
        if tick.timestamp <= t:
            best = tick
        else:
            break
    return best


@pytest.fixture
def genesis():
    return GenesisConfig(accounts={
        "alice": 10 * ETH,
        "bob": 10 * ETH,
        "carol": 10 * ETH,
    })
