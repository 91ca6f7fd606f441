"""Collared-option payout math.

Both sides of a position escrow the same amount, so the contract always holds
2*amount for a settlement. The long side receives the escrow midpoint shifted
by the price move converted to wei, clamped to the collar:

    d        = endPrice - startPrice          (signed, price points)
    payLong  = amount + clamp(d * lotSize, -amount, +amount)
    payShort = 2*amount - payLong

The collar half-width R (marginPoints) and the point-to-wei conversion
(lotSize) are tied together by requiring marginPoints * lotSize == the entry
deposit, which makes the clamp saturate exactly at |d| == R: beyond that the
position is limit up (long takes the whole 2*amount) or limit down (short
does). Payouts are exact integer arithmetic and always sum to 2*amount.
"""
from __future__ import annotations

from dataclasses import dataclass

ETH = 10 ** 18
DEFAULT_ENTRY_DEPOSIT = ETH // 10  # 0.1 ETH in wei


@dataclass(frozen=True)
class MarketConfig:
    margin_points: int = 500               # collar half-width R, price points
    lot_size: int = DEFAULT_ENTRY_DEPOSIT // 500  # wei per price point
    expiry_blocks: int = 5
    entry_deposit: int = DEFAULT_ENTRY_DEPOSIT
    pair: str = "btceth"

    def __post_init__(self):
        if self.margin_points <= 0 or self.lot_size <= 0:
            raise ValueError("marginPoints and lotSize must be positive")
        if self.expiry_blocks < 1:
            raise ValueError("expiryBlocks must be at least 1")
        if self.apply_lot(self.margin_points) != self.entry_deposit:
            raise ValueError(
                "entryDeposit must equal marginPoints * lotSize "
                f"({self.margin_points} * {self.lot_size} != {self.entry_deposit})")

    def apply_lot(self, points: int) -> int:
        """Convert a price-point quantity into wei."""
        return points * self.lot_size

    @classmethod
    def from_dict(cls, raw: dict) -> "MarketConfig":
        defaults = cls()
        return cls(
            margin_points=int(raw.get("marginPoints", defaults.margin_points)),
            lot_size=int(raw.get("lotSize", defaults.lot_size)),
            expiry_blocks=int(raw.get("expiryBlocks", defaults.expiry_blocks)),
            entry_deposit=int(raw.get("entryDeposit", defaults.entry_deposit)),
            pair=raw.get("pair", defaults.pair),
        )


def compute_payout(amount: int, start_price: int, end_price: int,
                   lot_size: int) -> tuple[int, int]:
    """Split the 2*amount escrow between long and short at settlement.

    Pure function; no state. Valid for any endPrice > 0.
    """
    if amount < 0:
        raise ValueError("escrowed amount must be non-negative")
    if end_price <= 0:
        raise ValueError("end price must be positive")
    diff_lot = (end_price - start_price) * lot_size
    pay_long = amount + max(-amount, min(amount, diff_lot))
    return pay_long, 2 * amount - pay_long
