"""Genesis configuration: named accounts with initial balances, the gas cost
table, and the block cadence. Loaded from JSON; balances are decimal wei strings."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .gas import GasSchedule


@dataclass
class GenesisConfig:
    accounts: dict[str, int] = field(default_factory=dict)
    gas: GasSchedule = field(default_factory=GasSchedule.default)
    block_cadence: int = 12
    genesis_time: int = 1_500_000_000
    miner: str = "miner"

    def __post_init__(self):
        if self.block_cadence < 1:
            raise ValueError("block cadence must be at least 1 second")
        for name, balance in self.accounts.items():
            if balance < 0:
                raise ValueError(f"genesis balance for {name!r} is negative")

    @classmethod
    def from_dict(cls, raw: dict) -> "GenesisConfig":
        accounts = {name: int(b) for name, b in raw.get("accounts", {}).items()}
        gas = GasSchedule.from_table(raw.get("gas", {}))
        return cls(
            accounts=accounts,
            gas=gas,
            block_cadence=int(raw.get("blockCadence", 12)),
            genesis_time=int(raw.get("genesisTime", 1_500_000_000)),
            miner=raw.get("miner", "miner"),
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "GenesisConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_record(self) -> dict:
        return {
            "kind": "genesis",
            "accounts": {name: str(b) for name, b in sorted(self.accounts.items())},
            "gas": self.gas.as_dict(),
            "blockCadence": self.block_cadence,
            "genesisTime": self.genesis_time,
            "miner": self.miner,
        }
