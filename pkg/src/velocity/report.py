"""Run reports: delimited summaries plus rendered figures.

Consumes the event-log records of a finished run and writes, into a report
directory: ``prices.csv`` and ``options.csv``, a price chart with each
option's entry price and collar band, and an activity chart of escrow and
cumulative payouts per block. Figures use the Agg backend so reports render
headless.
"""
from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

PRICE_FIELDS = ("usdbtc", "btceth", "btcetc", "btcdoge")


def _events(records):
    return [r for r in records if r.get("kind") == "event"]


def collect_prices(records) -> list[dict]:
    rows = []
    for ev in _events(records):
        if ev["name"] == "PriceUpdated":
            p = ev["payload"]
            rows.append({"block": p["blocknumber"], "timestamp": p["timestamp"],
                         **{f: p[f] for f in PRICE_FIELDS}})
    rows.sort(key=lambda r: r["block"])
    return rows


def collect_options(records, expiry_blocks: int, margin_points: int) -> list[dict]:
    feeds = {r["block"]: r for r in collect_prices(records)}
    options: dict[int, dict] = {}
    for ev in _events(records):
        if ev["name"] in ("LongOption", "ShortOption"):
            p = ev["payload"]
            oid = int(p["optionId"])
            start_block = int(p["block"])
            start_feed = feeds.get(start_block - 1)
            options[oid] = {
                "id": oid,
                "side": "Long" if ev["name"] == "LongOption" else "Short",
                "owner": p["sender"],
                "amount": int(p["amount"]),
                "startBlock": start_block,
                "expiryBlock": start_block + expiry_blocks,
                "startPrice": start_feed["btceth"] if start_feed else None,
                "paid": [],
            }
        elif ev["name"] == "optionPaid":
            oid = int(ev["payload"]["optionId"])
            if oid in options:
                options[oid]["paid"].append(
                    (ev["payload"]["addr"], int(ev["payload"]["amount"]),
                     ev["block"]))
    for opt in options.values():
        end_feed = feeds.get(opt["expiryBlock"])
        opt["endPrice"] = end_feed["btceth"] if end_feed else None
        opt["settled"] = bool(opt["paid"])
    return [options[k] for k in sorted(options)]


def write_report(records: list[dict], out_dir: str | Path,
                 expiry_blocks: int = 5, margin_points: int = 500) -> list[Path]:
    """Write delimited summaries and figures; returns the files created."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    prices = collect_prices(records)
    options = collect_options(records, expiry_blocks, margin_points)

    path = out / "prices.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["block", "timestamp", *PRICE_FIELDS])
        for row in prices:
            writer.writerow([row["block"], row["timestamp"],
                             *(row[f] for f in PRICE_FIELDS)])
    written.append(path)

    path = out / "options.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "side", "owner", "amount", "startBlock",
                         "expiryBlock", "startPrice", "endPrice", "settled",
                         "paidTotal"])
        for opt in options:
            writer.writerow([
                opt["id"], opt["side"], opt["owner"], opt["amount"],
                opt["startBlock"], opt["expiryBlock"],
                opt["startPrice"] or "", opt["endPrice"] or "",
                int(opt["settled"]), sum(a for _, a, _ in opt["paid"]),
            ])
    written.append(path)

    if prices:
        written.append(_price_figure(prices, options, margin_points, out))
        written.append(_activity_figure(records, options, out))
    return written


def _price_figure(prices, options, margin_points, out: Path) -> Path:
    blocks = [r["block"] for r in prices]
    series = [int(r["btceth"]) / 100.0 for r in prices]
    fig, ax = plt.subplots(figsize=(9, 5))
    ax.plot(blocks, series, lw=1.4, color="#1f5fa8", label="btceth")
    band = margin_points / 100.0
    for opt in options:
        if opt["startPrice"] is None:
            continue
        k1 = int(opt["startPrice"]) / 100.0
        span = (opt["startBlock"], opt["expiryBlock"])
        ax.fill_between(span, k1 - band, k1 + band, alpha=0.12, color="#d08a2e")
        ax.hlines(k1, *span, color="#d08a2e", lw=1.0, linestyles="--")
        ax.axvline(opt["expiryBlock"], color="#888888", lw=0.6, alpha=0.5)
    ax.set_xlabel("block")
    ax.set_ylabel("price")
    ax.set_title("price per block with entry collars")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    path = out / "price_chart.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def _activity_figure(records, options, out: Path) -> Path:
    max_block = max((r["number"] for r in records if r.get("kind") == "block"),
                    default=0)
    opened: dict[int, int] = {}
    closed: dict[int, int] = {}
    pays: dict[int, int] = {}
    for opt in options:
        opened[opt["startBlock"]] = opened.get(opt["startBlock"], 0) + opt["amount"]
        if opt["paid"]:
            block = min(b for _, _, b in opt["paid"])
            closed[block] = closed.get(block, 0) + opt["amount"]
        for _, amount, block in opt["paid"]:
            pays[block] = pays.get(block, 0) + amount

    locked, paid = [], []
    current = cumulative = 0
    for number in range(max_block + 1):
        current += opened.get(number, 0) - closed.get(number, 0)
        cumulative += pays.get(number, 0)
        locked.append(current)
        paid.append(cumulative)

    eth = 10 ** 18
    fig, ax = plt.subplots(figsize=(9, 4))
    ax.step(range(max_block + 1), [v / eth for v in locked], where="post",
            label="locked escrow (ETH)", color="#2e7d32")
    ax.step(range(max_block + 1), [v / eth for v in paid], where="post",
            label="cumulative payouts (ETH)", color="#b03a2e")
    ax.set_xlabel("block")
    ax.set_ylabel("ETH")
    ax.set_title("escrow and settlements")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    path = out / "activity_chart.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
