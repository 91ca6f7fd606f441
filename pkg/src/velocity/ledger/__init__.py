from .eventlog import EventLog, encode_line
from .gas import CALL, COMPUTE_STEP, SEND_STIPEND, STORAGE_READ, STORAGE_WRITE, GasSchedule
from .genesis import GenesisConfig
from .types import Address, Block, Event, Transaction, TxReceipt, TxStatus
from .vm import Contract, Frame, Ledger, LedgerInvariantError, OutOfGasError, Revert, VmError

__all__ = [
    "Address", "Block", "Contract", "Event", "EventLog", "Frame", "GasSchedule",
    "GenesisConfig", "Ledger", "LedgerInvariantError", "OutOfGasError", "Revert",
    "Transaction", "TxReceipt", "TxStatus", "VmError", "encode_line",
    "CALL", "COMPUTE_STEP", "SEND_STIPEND", "STORAGE_READ", "STORAGE_WRITE",
]
