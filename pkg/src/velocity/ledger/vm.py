"""Deterministic block ledger with accounts, gas metering, and nested contract calls.

Block production is the only clock: every produced block raises the height by
one and advances the timestamp by the configured cadence. Each transaction
executes in its own revert scope; a failed transaction restores balances and
contract storage but the gas it consumed is still paid to the miner.

Two call kinds exist, mirroring the two failure disciplines contracts rely on:

* ``Frame.call`` propagates callee failures to the caller (throw-style).
* ``Frame.send`` / ``Frame.try_call`` confine the failure to the callee frame
  and report it as a boolean (send-style). Reentrancy is permitted by the VM;
  any guard against it belongs to the contracts themselves.
"""
from __future__ import annotations

from collections import Counter

from .eventlog import EventLog
from .gas import CALL, COMPUTE_STEP, SEND_STIPEND
from .genesis import GenesisConfig
from .types import Address, Block, Event, Transaction, TxReceipt, TxStatus

MAX_CALL_DEPTH = 128


class VmError(Exception):
    """Base class for failures that abort the current call frame.

    ``gas_used`` is filled in by the call machinery: how much of the failing
    frame's budget was consumed before the frame was rolled back.
    """

    def __init__(self, message: str = ""):
        super().__init__(message)
        self.gas_used = 0


class Revert(VmError):
    """Explicit throw from contract code."""


class OutOfGasError(VmError):
    """Frame budget exhausted mid-call."""


class LedgerInvariantError(AssertionError):
    """A ledger-level invariant (conservation, monotonicity) was violated."""


class Contract:
    """Base for on-ledger contract logic.

    Instances hold only immutable construction parameters; all mutable state
    lives in the ledger's per-contract key-value store and is read/written
    through the executing frame (so reverts roll it back).
    """

    # Maps wire operation names that are not valid ``op_`` suffixes.
    aliases: dict[str, str] = {}

    def __init__(self, address: Address):
        self.address = address

    def setup(self, store: dict):
        """Initialize storage at deployment, before any block is produced."""

    def receive(self, frame: "Frame"):
        """Hook invoked on a plain value transfer (no operation). Default: accept."""

    def handle(self, frame: "Frame", op: str, args: tuple):
        method = getattr(self, self.aliases.get(op, "op_" + op), None)
        if method is None or not callable(method):
            raise Revert(f"unknown operation {op!r}")
        return method(frame, *args)


class _TxContext:
    """Working state of one executing transaction: copy-on-write account and
    storage views that are committed to the ledger only when the root frame
    finishes."""

    __slots__ = ("ledger", "tx", "block", "accounts", "stores", "gas_by_class")

    def __init__(self, ledger: "Ledger", tx: Transaction, block: Block):
        self.ledger = ledger
        self.tx = tx
        self.block = block
        self.accounts = dict(ledger.accounts)
        self.stores: dict[Address, dict] = {}
        self.gas_by_class: Counter = Counter()

    def store(self, addr: Address) -> dict:
        if addr not in self.stores:
            self.stores[addr] = dict(self.ledger.stores[addr])
        return self.stores[addr]

    def snapshot(self):
        return dict(self.accounts), {a: dict(s) for a, s in self.stores.items()}

    def restore(self, snap):
        accounts, stores = snap
        self.accounts = dict(accounts)
        self.stores = {a: dict(s) for a, s in stores.items()}


class Frame:
    """One contract invocation: message context plus a private gas budget."""

    __slots__ = ("ctx", "contract", "sender", "value", "depth", "events", "_gas")

    def __init__(self, ctx: _TxContext, contract: Contract, sender: Address,
                 value: int, gas: int, depth: int):
        self.ctx = ctx
        self.contract = contract
        self.sender = sender
        self.value = value
        self.depth = depth
        self.events: list[Event] = []
        self._gas = gas

    # -- gas ---------------------------------------------------------------

    @property
    def gas_remaining(self) -> int:
        return self._gas

    def charge(self, op_class: str, times: int = 1):
        cost = self.ctx.ledger.gas.cost(op_class) * times
        if cost > self._gas:
            self.ctx.gas_by_class[op_class] += self._gas
            self._gas = 0
            raise OutOfGasError(f"out of gas charging {op_class}")
        self._gas -= cost
        self.ctx.gas_by_class[op_class] += cost

    def _reserve(self, amount: int) -> int:
        amount = min(amount, self._gas)
        self._gas -= amount
        return amount

    def _refund(self, amount: int):
        self._gas += amount

    # -- environment -------------------------------------------------------

    @property
    def block(self) -> Block:
        return self.ctx.block

    def balance(self, addr: Address) -> int:
        self.charge("storage-read")
        return self.ctx.accounts.get(addr, 0)

    def sload(self, key, default=None):
        self.charge("storage-read")
        return self.ctx.store(self.contract.address).get(key, default)

    def sstore(self, key, value):
        self.charge("storage-write")
        self.ctx.store(self.contract.address)[key] = value

    def peek(self, addr: Address, key, default=None):
        """Library-style read of another contract's storage. Charges no gas;
        sees this transaction's uncommitted writes."""
        if addr not in self.ctx.ledger.contracts:
            raise Revert(f"{addr} is not a contract")
        return self.ctx.store(addr).get(key, default)

    def emit(self, name: str, **payload):
        self.charge(COMPUTE_STEP)
        self.events.append(Event(name, payload))

    # -- calls -------------------------------------------------------------

    def call(self, target: Address, op: str | None = None, args: tuple = (),
             value: int = 0, gas: int | None = None):
        """Throw-style call: failures in the callee propagate to this frame."""
        self.charge(CALL)
        budget = self._reserve(self._gas if gas is None else gas)
        try:
            result, used = _run_call(self.ctx, self.contract.address, target,
                                     value, op, args, budget, self.depth + 1,
                                     self.events)
        except VmError as err:
            self._refund(budget - err.gas_used)
            raise
        self._refund(budget - used)
        return result

    def try_call(self, target: Address, op: str | None = None, args: tuple = (),
                 value: int = 0, gas: int | None = None):
        """Send-style call: returns (ok, result); a callee failure reverts the
        callee frame only."""
        try:
            return True, self.call(target, op, args, value, gas)
        except VmError:
            return False, None

    def send(self, to: Address, amount: int) -> bool:
        """Transfer with a fixed gas stipend for the receive hook.

        Returns False (never throws) when the hook throws or exhausts the
        stipend, or when this contract cannot cover the amount.
        """
        self.charge(COMPUTE_STEP)
        stipend = self._reserve(self.ctx.ledger.gas.cost(SEND_STIPEND))
        try:
            _, used = _run_call(self.ctx, self.contract.address, to, amount,
                                None, (), stipend, self.depth + 1, self.events)
        except VmError as err:
            self._refund(stipend - err.gas_used)
            return False
        self._refund(stipend - used)
        return True


def _run_call(ctx: _TxContext, caller: Address, target: Address, value: int,
              op: str | None, args: tuple, budget: int, depth: int,
              parent_events: list[Event]):
    """Execute one call frame against the transaction's working state.

    Returns (result, gas_used). On failure raises a VmError carrying gas_used,
    after restoring the working state to this frame's entry snapshot. An
    OutOfGasError consumes the entire frame budget; a Revert consumes only
    what was spent before the throw.
    """
    if depth > MAX_CALL_DEPTH:
        raise Revert("call depth limit exceeded")

    snap = ctx.snapshot()
    try:
        if ctx.accounts.get(caller, 0) < value:
            raise Revert("insufficient funds for transfer")
        if value:
            ctx.accounts[caller] = ctx.accounts.get(caller, 0) - value
            ctx.accounts[target] = ctx.accounts.get(target, 0) + value

        contract = ctx.ledger.contracts.get(target)
        if contract is None:
            if op is not None:
                raise Revert(f"{target} is not a contract")
            return None, 0

        frame = Frame(ctx, contract, caller, value, budget, depth)
        try:
            frame.charge(COMPUTE_STEP)  # dispatch
            if op is None:
                result = contract.receive(frame)
            else:
                result = contract.handle(frame, op, args)
        except VmError as err:
            if isinstance(err, OutOfGasError):
                err.gas_used = budget
            else:
                err.gas_used = budget - frame.gas_remaining
            raise
        except Exception as err:  # contract bug or unhandled lookup: treat as throw
            wrapped = Revert(f"unhandled {type(err).__name__}: {err}")
            wrapped.gas_used = budget - frame.gas_remaining
            raise wrapped from err

        parent_events.extend(frame.events)
        return result, budget - frame.gas_remaining
    except VmError:
        ctx.restore(snap)
        raise


class Ledger:
    """Single-writer simulated chain: accounts, contracts, block production.

    All mutation must happen on one logical thread. ``produce_block`` drains
    the pending queue, executes each transaction in order with its own revert
    scope, settles gas to the miner, checks conservation exactly, then
    notifies block listeners (who typically enqueue work for the next block).
    """

    def __init__(self, genesis: GenesisConfig, log: EventLog | None = None,
                 notify_listeners: bool = True):
        self.genesis = genesis
        self.gas = genesis.gas
        self.cadence = genesis.block_cadence
        self.log = log
        self.notify_listeners = notify_listeners

        self.names: dict[str, Address] = {}
        self.accounts: dict[Address, int] = {}
        self.contracts: dict[Address, Contract] = {}
        self.stores: dict[Address, dict] = {}
        self.pending: list[Transaction] = []
        self.last_batch: list[Transaction] = []
        self.listeners: list = []
        self.height = 0
        self.block = Block(0, genesis.genesis_time)

        for name, balance in genesis.accounts.items():
            self.accounts[self.account(name)] = balance
        self.miner = self.account(genesis.miner)
        self.accounts.setdefault(self.miner, 0)
        self.total_supply = sum(self.accounts.values())

        if self.log is not None:
            self.log.write(genesis.to_record())

    # -- identities ----------------------------------------------------------

    def account(self, name: str) -> Address:
        if name not in self.names:
            self.names[name] = Address.named(name)
        return self.names[name]

    def label_of(self, addr: Address) -> str:
        return addr.label or addr.hex

    def balance_of(self, who: Address | str) -> int:
        addr = self.account(who) if isinstance(who, str) else who
        return self.accounts.get(addr, 0)

    # -- deployment ----------------------------------------------------------

    def register_contract(self, contract: Contract, endowment: int = 0,
                          endow_from: Address | None = None):
        addr = contract.address
        if addr in self.contracts:
            raise ValueError(f"contract already registered at {addr}")
        self.contracts[addr] = contract
        self.stores[addr] = {}
        self.accounts.setdefault(addr, 0)
        if addr.label and addr.label not in self.names:
            self.names[addr.label] = addr
        contract.setup(self.stores[addr])
        if endowment:
            if endow_from is None:
                raise ValueError("endowment requires a source account")
            if self.accounts.get(endow_from, 0) < endowment:
                raise ValueError("endowment source underfunded")
            self.accounts[endow_from] -= endowment
            self.accounts[addr] += endowment
        return contract

    def add_listener(self, fn):
        self.listeners.append(fn)

    # -- block production ------------------------------------------------------

    def submit(self, tx: Transaction):
        self.pending.append(tx)

    def timestamp_for(self, block_number: int) -> int:
        return self.genesis.genesis_time + block_number * self.cadence

    def produce_block(self, extra: list[Transaction] | None = None):
        txs = self.pending
        self.pending = []
        if extra:
            txs = txs + list(extra)
        self.last_batch = txs

        number = self.height + 1
        block = Block(number, self.timestamp_for(number))
        if block.timestamp <= self.block.timestamp:
            raise LedgerInvariantError("block timestamps must strictly increase")
        self.height = number
        self.block = block

        if self.log is not None:
            self.log.write({"kind": "block", "number": block.number,
                            "timestamp": block.timestamp, "txs": len(txs)})

        receipts = []
        for index, tx in enumerate(txs):
            receipt = self._execute_tx(tx, block)
            receipts.append(receipt)
            self._log_tx(block, index, tx, receipt)

        if sum(self.accounts.values()) != self.total_supply:
            raise LedgerInvariantError(
                f"conservation violated at block {block.number}")

        if self.notify_listeners:
            for listener in self.listeners:
                listener(block)
        return block, receipts

    # -- transaction execution ------------------------------------------------

    def _execute_tx(self, tx: Transaction, block: Block) -> TxReceipt:
        # Admission covers the gas purchase; a value the sender cannot cover
        # fails during execution and still pays for the gas it burned.
        if self.accounts.get(tx.sender, 0) < tx.gas_limit * tx.gas_price:
            return TxReceipt(TxStatus.REVERTED, 0, [],
                             "sender cannot buy gas", {})

        ctx = _TxContext(self, tx, block)
        ctx.accounts[tx.sender] -= tx.gas_limit * tx.gas_price  # gas escrow

        events: list[Event] = []
        status = TxStatus.SUCCESS
        error = None
        call_cost = self.gas.cost(CALL)
        if call_cost > tx.gas_limit:
            status = TxStatus.OUT_OF_GAS
            error = "gas limit below base call cost"
            gas_used = tx.gas_limit
        else:
            ctx.gas_by_class[CALL] += call_cost
            try:
                _, used = _run_call(ctx, tx.sender, tx.target, tx.value,
                                    tx.op, tx.args, tx.gas_limit - call_cost,
                                    depth=0, parent_events=events)
                gas_used = call_cost + used
            except OutOfGasError as err:
                status = TxStatus.OUT_OF_GAS
                error = str(err) or "out of gas"
                gas_used = call_cost + err.gas_used
                events = []
            except VmError as err:
                status = TxStatus.REVERTED
                error = str(err) or "reverted"
                gas_used = call_cost + err.gas_used
                events = []

        ctx.accounts[tx.sender] += (tx.gas_limit - gas_used) * tx.gas_price
        ctx.accounts[self.miner] = ctx.accounts.get(self.miner, 0) + gas_used * tx.gas_price

        self.accounts = ctx.accounts
        for addr, store in ctx.stores.items():
            self.stores[addr] = store

        return TxReceipt(status, gas_used, events, error, dict(ctx.gas_by_class))

    def _log_tx(self, block: Block, index: int, tx: Transaction, receipt: TxReceipt):
        if self.log is None:
            return
        self.log.write({
            "kind": "tx", "block": block.number, "index": index,
            "sender": tx.sender.hex, "target": tx.target.hex,
            "value": str(tx.value), "op": tx.op, "args": list(tx.args),
            "gasLimit": tx.gas_limit, "gasPrice": str(tx.gas_price),
        })
        for seq, event in enumerate(receipt.events):
            self.log.write({
                "kind": "event", "block": block.number, "tx": index,
                "seq": seq, "name": event.name, "payload": event.payload,
            })
        self.log.write({
            "kind": "receipt", "block": block.number, "index": index,
            "status": receipt.status.value, "gasUsed": receipt.gas_used,
            "error": receipt.error, "events": len(receipt.events),
        })
