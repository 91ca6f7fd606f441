from .contract import KEY_LAST_ID, KEY_LOCKED, OptionRecord, OptionsMarket, option_key
from .payout import DEFAULT_ENTRY_DEPOSIT, ETH, MarketConfig, compute_payout

__all__ = [
    "DEFAULT_ENTRY_DEPOSIT", "ETH", "KEY_LAST_ID", "KEY_LOCKED", "MarketConfig",
    "OptionRecord", "OptionsMarket", "compute_payout", "option_key",
]
