"""Value types shared across the ledger: addresses, blocks, transactions, receipts."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from enum import Enum

ADDRESS_BYTES = 20


@dataclass(frozen=True, order=True)
class Address:
    """Opaque 20-byte account identifier. The label is display-only and does not
    participate in equality or ordering."""

    id: bytes
    label: str = field(default="", compare=False, repr=False)

    def __post_init__(self):
        if len(self.id) != ADDRESS_BYTES:
            raise ValueError(f"address must be {ADDRESS_BYTES} bytes, got {len(self.id)}")

    @classmethod
    def named(cls, name: str) -> "Address":
        digest = hashlib.blake2b(name.encode("utf-8"), digest_size=ADDRESS_BYTES).digest()
        return cls(digest, name)

    @property
    def hex(self) -> str:
        return "0x" + self.id.hex()

    def __str__(self) -> str:
        return self.label or self.hex


@dataclass(frozen=True)
class Block:
    number: int
    timestamp: int

    def __post_init__(self):
        if self.number < 0 or self.timestamp < 0:
            raise ValueError("block number and timestamp must be non-negative")


@dataclass(frozen=True)
class Transaction:
    """One signed-by-convention message: a value transfer plus an optional
    symbolic operation (name + positional args) on the target contract."""

    sender: Address
    target: Address
    value: int = 0
    op: str | None = None
    args: tuple = ()
    gas_limit: int = 100_000
    gas_price: int = 1

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("value must be non-negative")
        if self.gas_limit <= 0:
            raise ValueError("gasLimit must be positive")
        if self.gas_price < 0:
            raise ValueError("gasPrice must be non-negative")
        object.__setattr__(self, "args", tuple(self.args))


class TxStatus(str, Enum):
    SUCCESS = "Success"
    REVERTED = "Reverted"
    OUT_OF_GAS = "OutOfGas"


@dataclass(frozen=True)
class Event:
    name: str
    payload: dict


@dataclass
class TxReceipt:
    status: TxStatus
    gas_used: int
    events: list[Event]
    error: str | None = None
    gas_by_class: dict[str, int] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status is TxStatus.SUCCESS
