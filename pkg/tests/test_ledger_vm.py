"""Ledger VM: blocks, transfers, gas, revert scopes, nested calls."""
from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from velocity.ledger import (Contract, EventLog, GasSchedule, GenesisConfig,
                             Ledger, Revert, Transaction, TxStatus, encode_line)

ETH = 10 ** 18


def make_ledger(log=None, **accounts):
    accounts = accounts or {"alice": 10 * ETH, "bob": 10 * ETH}
    return Ledger(GenesisConfig(accounts=accounts), log=log)


class Recorder(Contract):
    """Emits one event per call so nesting order is observable."""

    def __init__(self, address, peers=()):
        super().__init__(address)
        self.peers = dict(peers)

    def op_ping(self, frame, hops: int):
        frame.emit("entered", who=self.address.label, hops=hops)
        frame.sstore(("hops", hops), frame.sender.label or frame.sender.hex)
        if hops > 0:
            frame.call(self.peers["next"], "ping", (hops - 1,))
        frame.emit("leaving", who=self.address.label, hops=hops)


class Thrower(Contract):
    def op_boom(self, frame):
        frame.sstore("touched", True)
        raise Revert("boom")

    def receive(self, frame):
        raise Revert("no thanks")


class GasProbe(Contract):
    def op_probe(self, frame):
        before = frame.gas_remaining
        frame.charge("storage-write")
        frame.emit("probe", before=before, after=frame.gas_remaining)

    def op_consume_exact(self, frame, slack: int):
        frame.charge("compute-step", frame.gas_remaining - slack)
        return frame.gas_remaining


def addr(ledger, name):
    return ledger.account(name)


# -- blocks ---------------------------------------------------------------------


def test_empty_block_at_height_10():
    ledger = make_ledger()
    for _ in range(10):
        ledger.produce_block()
    assert ledger.height == 10
    block, receipts = ledger.produce_block()
    assert ledger.height == 11
    assert block.number == 11
    assert receipts == []


def test_block_monotonicity():
    ledger = make_ledger()
    seen = [(ledger.block.number, ledger.block.timestamp)]
    for _ in range(20):
        block, _ = ledger.produce_block()
        seen.append((block.number, block.timestamp))
    numbers = [n for n, _ in seen]
    times = [t for _, t in seen]
    assert numbers == list(range(21))
    assert all(b > a for a, b in zip(times, times[1:]))


# -- transfers and the balance-sum oracle ------------------------------------------


def test_plain_transfer_against_log_recomputation():
    log = EventLog()
    ledger = make_ledger(log=log)
    gas_price = 3
    ledger.submit(Transaction(addr(ledger, "alice"), addr(ledger, "bob"),
                              value=5, gas_limit=1000, gas_price=gas_price))
    _, (receipt,) = ledger.produce_block()
    assert receipt.ok
    g = receipt.gas_used
    assert 0 < g <= 1000

    # Independent recomputation from the log records only.
    balances = {}
    genesis = next(r for r in log.records if r["kind"] == "genesis")
    for name, amount in genesis["accounts"].items():
        balances[name] = int(amount)
    miner = genesis["miner"]
    balances.setdefault(miner, 0)
    txs = {(r["block"], r["index"]): r for r in log.records if r["kind"] == "tx"}
    for rec in log.records:
        if rec["kind"] != "receipt":
            continue
        tx = txs[(rec["block"], rec["index"])]
        sender = next(n for n, a in ledger.names.items() if a.hex == tx["sender"])
        target = next(n for n, a in ledger.names.items() if a.hex == tx["target"])
        fee = rec["gasUsed"] * int(tx["gasPrice"])
        balances[sender] -= fee
        balances[miner] += fee
        if rec["status"] == "Success":
            balances[sender] -= int(tx["value"])
            balances[target] += int(tx["value"])

    assert balances["alice"] == ledger.balance_of("alice") == 10 * ETH - 5 - g * gas_price
    assert balances["bob"] == ledger.balance_of("bob") == 10 * ETH + 5
    assert balances[miner] == ledger.balance_of(miner) == g * gas_price
    assert sum(balances.values()) == 20 * ETH


def test_transfer_value_over_balance_reverts_but_charges_gas():
    ledger = make_ledger(alice=10 * ETH, bob=0)
    miner0 = ledger.balance_of(ledger.miner)
    ledger.submit(Transaction(addr(ledger, "alice"), addr(ledger, "bob"),
                              value=11 * ETH, gas_limit=1000, gas_price=1))
    _, (receipt,) = ledger.produce_block()
    assert receipt.status is TxStatus.REVERTED
    assert receipt.gas_used > 0
    assert ledger.balance_of("bob") == 0
    assert ledger.balance_of("alice") == 10 * ETH - receipt.gas_used
    assert ledger.balance_of(ledger.miner) == miner0 + receipt.gas_used


def test_cannot_buy_gas_rejected_without_charge():
    ledger = make_ledger(alice=100, bob=0)
    ledger.submit(Transaction(addr(ledger, "alice"), addr(ledger, "bob"),
                              value=1, gas_limit=1000, gas_price=1))
    _, (receipt,) = ledger.produce_block()
    assert receipt.status is TxStatus.REVERTED
    assert receipt.gas_used == 0
    assert ledger.balance_of("alice") == 100


# -- calls --------------------------------------------------------------------


def test_call_to_plain_account_is_transfer():
    ledger = make_ledger()
    ledger.submit(Transaction(addr(ledger, "alice"), addr(ledger, "bob"),
                              value=7, gas_limit=1000))
    _, (receipt,) = ledger.produce_block()
    assert receipt.ok
    assert ledger.balance_of("bob") == 10 * ETH + 7


def test_call_to_throwing_contract_reverts_and_undoes_mutations():
    ledger = make_ledger()
    thrower = Thrower(ledger.account("thrower"))
    ledger.register_contract(thrower)
    ledger.submit(Transaction(addr(ledger, "alice"), thrower.address,
                              op="boom", gas_limit=10_000))
    _, (receipt,) = ledger.produce_block()
    assert receipt.status is TxStatus.REVERTED
    assert "boom" in receipt.error
    assert "touched" not in ledger.stores[thrower.address]


def test_depth2_reentrant_call_sequence():
    # Hand-trace: A.ping(2) -> B.ping(1) -> A.ping(0). Events must nest like
    # enter(A,2) enter(B,1) enter(A,0) leave(A,0) leave(B,1) leave(A,2), and
    # each frame records its caller.
    ledger = make_ledger()
    a = Recorder(ledger.account("A"))
    b = Recorder(ledger.account("B"))
    a.peers["next"] = b.address
    b.peers["next"] = a.address
    ledger.register_contract(a)
    ledger.register_contract(b)

    ledger.submit(Transaction(addr(ledger, "alice"), a.address,
                              op="ping", args=(2,), gas_limit=100_000))
    _, (receipt,) = ledger.produce_block()
    assert receipt.ok
    trace = [(e.name, e.payload["who"], e.payload["hops"]) for e in receipt.events]
    assert trace == [
        ("entered", "A", 2), ("entered", "B", 1), ("entered", "A", 0),
        ("leaving", "A", 0), ("leaving", "B", 1), ("leaving", "A", 2),
    ]
    assert ledger.stores[a.address][("hops", 2)] == "alice"
    assert ledger.stores[b.address][("hops", 1)] == "A"
    assert ledger.stores[a.address][("hops", 0)] == "B"


# -- send ----------------------------------------------------------------------


class Sender(Contract):
    def op_pay(self, frame, to, amount):
        ok = frame.send(to, amount)
        frame.emit("sent", ok=ok)
        return ok


def test_send_to_plain_account():
    ledger = make_ledger()
    sender = Sender(ledger.account("sender"))
    ledger.register_contract(sender, endowment=100, endow_from=addr(ledger, "alice"))
    ledger.submit(Transaction(addr(ledger, "alice"), sender.address, op="pay",
                              args=(addr(ledger, "bob"), 40), gas_limit=10_000))
    _, (receipt,) = ledger.produce_block()
    assert receipt.ok
    assert receipt.events[-1].payload["ok"] is True
    assert ledger.balance_of("bob") == 10 * ETH + 40
    assert ledger.balance_of(sender.address) == 60


def test_send_to_throwing_hook_returns_false_and_moves_nothing():
    ledger = make_ledger()
    sender = Sender(ledger.account("sender"))
    hostile = Thrower(ledger.account("hostile"))
    ledger.register_contract(sender, endowment=100, endow_from=addr(ledger, "alice"))
    ledger.register_contract(hostile)
    ledger.submit(Transaction(addr(ledger, "alice"), sender.address, op="pay",
                              args=(hostile.address, 40), gas_limit=10_000))
    _, (receipt,) = ledger.produce_block()
    assert receipt.ok  # send never throws
    assert receipt.events[-1].payload["ok"] is False
    assert ledger.balance_of(hostile.address) == 0
    assert ledger.balance_of(sender.address) == 100


# -- gas ---------------------------------------------------------------------------


def test_charge_deducts_cost_table_value():
    ledger = make_ledger()
    probe = GasProbe(ledger.account("probe"))
    ledger.register_contract(probe)
    ledger.submit(Transaction(addr(ledger, "alice"), probe.address, op="probe",
                              gas_limit=10_000))
    _, (receipt,) = ledger.produce_block()
    payload = receipt.events[0].payload
    assert payload["before"] - payload["after"] == 100  # storage-write
    assert receipt.gas_by_class["storage-write"] == 100


def test_exact_budget_succeeds_with_zero_remaining():
    ledger = make_ledger()
    probe = GasProbe(ledger.account("probe"))
    ledger.register_contract(probe)
    ledger.submit(Transaction(addr(ledger, "alice"), probe.address,
                              op="consume_exact", args=(0,), gas_limit=5_000))
    _, (receipt,) = ledger.produce_block()
    assert receipt.ok
    assert receipt.gas_used == 5_000


def test_insufficient_budget_out_of_gas_reverts_frame():
    ledger = make_ledger()
    probe = GasProbe(ledger.account("probe"))
    ledger.register_contract(probe)
    # storage-write costs 100; leave less than that available.
    ledger.submit(Transaction(addr(ledger, "alice"), probe.address, op="probe",
                              gas_limit=60))
    _, (receipt,) = ledger.produce_block()
    assert receipt.status is TxStatus.OUT_OF_GAS
    assert receipt.gas_used == 60
    assert receipt.events == []


def test_custom_gas_schedule():
    schedule = GasSchedule.with_overrides(storage_write=7, send_stipend=1234)
    assert schedule.cost("storage-write") == 7
    assert schedule.cost("send-stipend") == 1234
    with pytest.raises(KeyError):
        GasSchedule.with_overrides(warp_drive=1)
    with pytest.raises(KeyError):
        schedule.cost("warp-drive")


# -- revert atomicity (property) -----------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(value_extra=st.integers(min_value=1, max_value=10 ** 20),
       gas_limit=st.integers(min_value=41, max_value=10_000))
def test_revert_atomicity_randomized_failures(value_extra, gas_limit):
    ledger = make_ledger(alice=ETH, bob=ETH)
    before = dict(ledger.accounts)
    # Overdrawn transfer with zero gas price: post-state must equal pre-state.
    ledger.submit(Transaction(addr(ledger, "alice"), addr(ledger, "bob"),
                              value=ETH + value_extra, gas_limit=gas_limit,
                              gas_price=0))
    _, (receipt,) = ledger.produce_block()
    assert receipt.status is not TxStatus.SUCCESS
    assert ledger.accounts == before


@settings(max_examples=40, deadline=None)
@given(gas_price=st.integers(min_value=1, max_value=50))
def test_revert_atomicity_modulo_gas(gas_price):
    ledger = make_ledger(alice=ETH, bob=ETH)
    thrower = Thrower(ledger.account("thrower"))
    ledger.register_contract(thrower)
    before = dict(ledger.accounts)
    ledger.submit(Transaction(addr(ledger, "alice"), thrower.address, op="boom",
                              gas_limit=10_000, gas_price=gas_price))
    _, (receipt,) = ledger.produce_block()
    assert receipt.status is TxStatus.REVERTED
    fee = receipt.gas_used * gas_price
    after = dict(ledger.accounts)
    assert after[addr(ledger, "alice")] == before[addr(ledger, "alice")] - fee
    assert after[ledger.miner] == before[ledger.miner] + fee
    others = set(before) - {addr(ledger, "alice"), ledger.miner}
    assert all(after[a] == before[a] for a in others)


# -- conservation and determinism ------------------------------------------------------


def test_conservation_across_mixed_blocks():
    ledger = make_ledger()
    thrower = Thrower(ledger.account("thrower"))
    ledger.register_contract(thrower)
    total = sum(ledger.accounts.values())
    for i in range(10):
        ledger.submit(Transaction(addr(ledger, "alice"), addr(ledger, "bob"),
                                  value=i * 1000, gas_limit=1000, gas_price=2))
        ledger.submit(Transaction(addr(ledger, "bob"), thrower.address,
                                  op="boom", gas_limit=500, gas_price=1))
        ledger.produce_block()
        assert sum(ledger.accounts.values()) == total


def test_identical_inputs_give_bit_identical_logs():
    def run():
        log = EventLog()
        ledger = make_ledger(log=log)
        for i in range(5):
            ledger.submit(Transaction(addr(ledger, "alice"), addr(ledger, "bob"),
                                      value=100 + i, gas_limit=1000, gas_price=1))
            ledger.produce_block()
        return "\n".join(encode_line(r) for r in log.records)

    assert run() == run()


def test_log_records_are_json_lines_with_fixed_order():
    log = EventLog()
    ledger = make_ledger(log=log)
    ledger.submit(Transaction(addr(ledger, "alice"), addr(ledger, "bob"),
                              value=1, gas_limit=1000))
    ledger.produce_block()
    kinds = [r["kind"] for r in log.records]
    assert kinds == ["genesis", "block", "tx", "receipt"]
    line = encode_line(log.records[2])
    assert list(json.loads(line)) == ["kind", "block", "index", "sender",
                                      "target", "value", "op", "args",
                                      "gasLimit", "gasPrice"]
