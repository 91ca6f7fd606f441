"""Settlement sweeper: settles expired options that nobody bothers to settle.

Losers have no incentive to pay gas for a settlement that pays them nothing,
so escrow goes stale without an external job sweeping expired options. The
sweeper account pays its own gas and is not reimbursed.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..ledger import Address, Ledger, Transaction, TxReceipt
from ..market import OptionsMarket

SWEEP_GAS_LIMIT = 600_000


@dataclass
class SweepReport:
    scanned: int = 0
    settled: int = 0
    failed: list[tuple[int, str]] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "scanned": self.scanned,
            "settled": self.settled,
            "failed": [{"optionId": oid, "error": err} for oid, err in self.failed],
        }


def plan_sweep(ledger: Ledger, market: OptionsMarket, sweeper: Address,
               gas_limit: int = SWEEP_GAS_LIMIT) -> tuple[int, list[Transaction]]:
    """Scan open options at the current height and build exercise transactions
    for the expired ones. Returns (scanned open count, transactions)."""
    store = ledger.stores[market.address]
    open_options = [r for r in OptionsMarket.options(store) if not r.closed]
    due = [r for r in open_options if r.expiry_block <= ledger.height]
    txs = [Transaction(sender=sweeper, target=market.address, op="exercise",
                       args=(r.id,), gas_limit=gas_limit)
           for r in due]
    return len(open_options), txs


def collect_sweep(scanned: int, txs: list[Transaction],
                  results: list[tuple[Transaction, TxReceipt]]) -> SweepReport:
    """Assemble a report once the sweep's transactions have executed."""
    report = SweepReport(scanned=scanned)
    wanted = {(tx.sender, tx.op, tx.args): tx for tx in txs}
    for tx, receipt in results:
        key = (tx.sender, tx.op, tx.args)
        if key not in wanted:
            continue
        option_id = tx.args[0]
        if receipt.ok:
            report.settled += 1
        else:
            report.failed.append((option_id, receipt.error or receipt.status.value))
    return report


def run_sweep(ledger: Ledger, market: OptionsMarket, sweeper: Address,
              gas_limit: int = SWEEP_GAS_LIMIT) -> SweepReport:
    """Sweep now: enqueue exercises for everything expired and produce the
    block that executes them."""
    scanned, txs = plan_sweep(ledger, market, sweeper, gas_limit)
    for tx in txs:
        ledger.submit(tx)
    _, receipts = ledger.produce_block()
    results = list(zip(ledger.last_batch, receipts))
    return collect_sweep(scanned, txs, results)
