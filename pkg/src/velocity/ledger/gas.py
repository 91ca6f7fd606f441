"""Gas metering: a configurable cost table over coarse operation classes.

Costs are denominated in gas units, not wei; transactions buy gas at their own
gasPrice. The send stipend doubles as the gas budget handed to a receive hook,
so raising it in a scenario models full gas forwarding on payouts.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType

STORAGE_WRITE = "storage-write"
STORAGE_READ = "storage-read"
COMPUTE_STEP = "compute-step"
CALL = "call"
SEND_STIPEND = "send-stipend"

DEFAULT_COSTS = {
    STORAGE_WRITE: 100,
    STORAGE_READ: 10,
    COMPUTE_STEP: 1,
    CALL: 40,
    SEND_STIPEND: 50,
}


@dataclass(frozen=True)
class GasSchedule:
    costs: MappingProxyType = field(default_factory=lambda: MappingProxyType(dict(DEFAULT_COSTS)))

    @classmethod
    def default(cls) -> "GasSchedule":
        return cls()

    @classmethod
    def with_overrides(cls, **overrides: int) -> "GasSchedule":
        table = dict(DEFAULT_COSTS)
        for key, value in overrides.items():
            name = key.replace("_", "-")
            if name not in table:
                raise KeyError(f"unknown gas class {name!r}")
            if value < 0:
                raise ValueError("gas costs must be non-negative")
            table[name] = value
        return cls(MappingProxyType(table))

    @classmethod
    def from_table(cls, table: dict) -> "GasSchedule":
        merged = dict(DEFAULT_COSTS)
        for name, value in table.items():
            if name not in merged:
                raise KeyError(f"unknown gas class {name!r}")
            merged[name] = int(value)
        return cls(MappingProxyType(merged))

    def cost(self, op_class: str) -> int:
        try:
            return self.costs[op_class]
        except KeyError:
            raise KeyError(f"unknown gas class {op_class!r}") from None

    def as_dict(self) -> dict:
        return dict(self.costs)
