"""Independent end-of-run verifications computed from the event log.

Each check re-derives its quantity from the log records (and the tick file,
for feed fidelity) rather than trusting ledger internals, and reports the
first block where the recomputation diverges.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..ledger import Ledger
from ..market import OptionsMarket
from ..pricefeed import PriceHistory, TickStore
from ..pricefeed.contract import KEY_FIRST, KEY_LAST


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    first_divergence_block: int | None = None

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail,
                "firstDivergenceBlock": self.first_divergence_block}


def _receipts_by_tx(records):
    out = {}
    for rec in records:
        if rec.get("kind") == "receipt":
            out[(rec["block"], rec["index"])] = rec
    return out


def _events(records):
    return [r for r in records if r.get("kind") == "event"]


def check_conservation(records: list[dict], ledger: Ledger) -> CheckResult:
    """Recompute every balance from genesis plus the logged flows and compare
    against the live ledger. Covers value transfers, refunds, payouts, gas."""
    genesis = next(r for r in records if r["kind"] == "genesis")
    balances: dict[str, int] = {}

    def addr_of(name):
        return ledger.account(name).hex

    for name, amount in genesis["accounts"].items():
        balances[addr_of(name)] = int(amount)
    balances.setdefault(addr_of(genesis["miner"]), 0)
    # Contract endowment moves treasury funds at deployment.
    setup = next((r for r in records if r["kind"] == "setup"), None)
    market_hex = None
    feed_hex = None
    if setup is not None:
        from .sim import MARKET_CONTRACT, PRICEFEED_CONTRACT, TREASURY_ACCOUNT, contract_address
        market_hex = contract_address(MARKET_CONTRACT).hex
        feed_hex = contract_address(PRICEFEED_CONTRACT).hex
        balances[feed_hex] = 0
        balances[market_hex] = int(setup["pool"])
        balances[addr_of(TREASURY_ACCOUNT)] -= int(setup["pool"])

    total0 = sum(balances.values())
    receipts = _receipts_by_tx(records)
    events_by_tx: dict[tuple, list[dict]] = {}
    for ev in _events(records):
        events_by_tx.setdefault((ev["block"], ev["tx"]), []).append(ev)

    miner = addr_of(genesis["miner"])
    divergence = None
    for rec in records:
        if rec.get("kind") != "tx":
            continue
        key = (rec["block"], rec["index"])
        receipt = receipts[key]
        sender, target = rec["sender"], rec["target"]
        gas_fee = receipt["gasUsed"] * int(rec["gasPrice"])
        balances[sender] = balances.get(sender, 0) - gas_fee
        balances[miner] = balances.get(miner, 0) + gas_fee
        if receipt["status"] != "Success":
            continue
        value = int(rec["value"])
        balances[sender] -= value
        balances[target] = balances.get(target, 0) + value
        for ev in events_by_tx.get(key, []):
            if ev["name"] == "Error" and ev["payload"].get("message") == "Invalid Margin!":
                balances[target] -= value
                balances[sender] += value
            elif ev["name"] == "optionPaid":
                paid = int(ev["payload"]["amount"])
                payee = ev["payload"]["addr"]
                balances[market_hex] -= paid
                balances[payee] = balances.get(payee, 0) + paid
        if sum(balances.values()) != total0 and divergence is None:
            divergence = rec["block"]

    live = {a.hex: b for a, b in ledger.accounts.items()}
    mismatched = {h: (balances.get(h, 0), live.get(h, 0))
                  for h in set(balances) | set(live)
                  if balances.get(h, 0) != live.get(h, 0)}
    if divergence is not None:
        return CheckResult("conservation", False,
                           "recomputed total drifted", divergence)
    if mismatched:
        sample = next(iter(sorted(mismatched.items())))
        return CheckResult("conservation", False,
                           f"balance mismatch at {sample[0]}: log={sample[1][0]} ledger={sample[1][1]}")
    return CheckResult("conservation", True,
                       f"{len(live)} balances reproduced from the log")


def check_cap(records: list[dict], entry_deposit: int) -> CheckResult:
    """Every payout leg is capped at 2*amount and per-option totals equal
    exactly 2*amount."""
    opened: dict[int, int] = {}
    paid: dict[int, int] = {}
    for ev in _events(records):
        if ev["name"] in ("LongOption", "ShortOption"):
            opened[int(ev["payload"]["optionId"])] = int(ev["payload"]["amount"])
        elif ev["name"] == "optionPaid":
            oid = int(ev["payload"]["optionId"])
            amount = int(ev["payload"]["amount"])
            if amount > 2 * opened.get(oid, entry_deposit):
                return CheckResult("cap", False,
                                   f"option {oid} leg {amount} exceeds cap",
                                   ev["block"])
            paid[oid] = paid.get(oid, 0) + amount
    for oid, total in paid.items():
        if total != 2 * opened[oid]:
            return CheckResult("cap", False,
                               f"option {oid} paid {total}, expected {2 * opened[oid]}")
    return CheckResult("cap", True, f"{len(paid)} settlements within cap")


def check_escrow(records: list[dict], market: OptionsMarket, ledger: Ledger) -> CheckResult:
    """Recompute the locked balance from entry/settlement events and compare
    with the contract's accounting."""
    locked = 0
    settled: set[int] = set()
    amounts: dict[int, int] = {}
    divergence = None
    for ev in _events(records):
        if ev["name"] in ("LongOption", "ShortOption"):
            oid = int(ev["payload"]["optionId"])
            amounts[oid] = int(ev["payload"]["amount"])
            locked += amounts[oid]
        elif ev["name"] == "optionPaid":
            oid = int(ev["payload"]["optionId"])
            if oid not in settled:
                settled.add(oid)
                locked -= amounts[oid]
                if locked < 0 and divergence is None:
                    divergence = ev["block"]
    actual = OptionsMarket.locked_balance(ledger.stores[market.address])
    if divergence is not None:
        return CheckResult("escrow", False, "recomputed escrow went negative",
                           divergence)
    if locked != actual:
        return CheckResult("escrow", False,
                           f"recomputed {locked} != contract {actual}")
    open_sum = sum(r.amount for r in OptionsMarket.options(ledger.stores[market.address])
                   if not r.closed)
    if actual != open_sum:
        return CheckResult("escrow", False,
                           f"lockedBalance {actual} != sum of open amounts {open_sum}")
    return CheckResult("escrow", True, f"escrow ledger matches ({actual} wei locked)")


def check_fidelity(ledger: Ledger, history: PriceHistory, ticks: TickStore) -> CheckResult:
    """Every stored feed equals the tick-store price at that block's timestamp."""
    store = ledger.stores[history.address]
    first, last = store.get(KEY_FIRST, 0), store.get(KEY_LAST, 0)
    if first == 0:
        return CheckResult("fidelity", True, "no feeds published")
    for number in range(first, last + 1):
        try:
            feed = PriceHistory.read(store, number)
        except LookupError:
            return CheckResult("fidelity", False, f"gap at block {number}", number)
        tick = ticks.at(ledger.timestamp_for(number))
        if (feed.usdbtc, feed.btceth, feed.btcetc, feed.btcdoge) != (
                tick.usdbtc, tick.btceth, tick.btcetc, tick.btcdoge):
            return CheckResult("fidelity", False,
                               f"feed at block {number} disagrees with ticks", number)
    return CheckResult("fidelity", True,
                       f"{last - first + 1} feeds match the tick store exactly")
