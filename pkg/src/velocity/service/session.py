"""Live trading session over one simulation instance.

All mutation is serialized through a lock onto the ledger's single execution
thread; reads are answered from an immutable snapshot rebuilt at each block
boundary. The session persists nothing except the ledger event log: restarting
with the same log path replays it to reconstruct identical state.
"""
from __future__ import annotations

import json
import os
import queue
import threading
from dataclasses import dataclass, field
from pathlib import Path

from ..harness.sim import SWEEPER_ACCOUNT, Sim, SimConfig, replay_log
from ..harness.sweeper import SweepReport, collect_sweep, plan_sweep
from ..ledger import EventLog, GenesisConfig, TxReceipt
from ..market import MarketConfig, OptionsMarket, compute_payout
from ..pricefeed import (CallbackOracle, PriceHistory, PricePublisher,
                         format_price, generate_walk, read_tick_csv)
from ..pricefeed.contract import KEY_FIRST, KEY_LAST

MODE_MANUAL = "manual"
MODE_AUTO = "auto"


@dataclass
class SessionConfig:
    mode: str = MODE_MANUAL
    interval: float = 2.0
    port: int = 8000
    genesis: dict = field(default_factory=lambda: {
        "accounts": {"alice": str(10 ** 19), "bob": str(10 ** 19),
                     "carol": str(10 ** 19)}})
    market: dict = field(default_factory=dict)
    pool: int = 2 * 10 ** 18
    ticks: object = None  # path or walk parameters
    seed: int | None = None
    log_path: str | None = None

    @classmethod
    def load(cls, path: str | Path | None = None, env: dict | None = None) -> "SessionConfig":
        raw = {}
        base = Path(".")
        if path is not None:
            base = Path(path).parent
            with open(path) as fh:
                raw = json.load(fh)
        env = env if env is not None else os.environ
        mode = env.get("VELOCITY_MODE", raw.get("mode", MODE_MANUAL))
        if mode not in (MODE_MANUAL, MODE_AUTO):
            raise ValueError(f"mode must be '{MODE_MANUAL}' or '{MODE_AUTO}'")
        ticks = env.get("VELOCITY_TICKS", raw.get("ticks"))
        if isinstance(ticks, str) and not Path(ticks).is_absolute():
            ticks = str(base / ticks)
        genesis = raw.get("genesis", cls().genesis)
        if isinstance(genesis, str):
            with open(base / genesis) as fh:
                genesis = json.load(fh)
        log_path = env.get("VELOCITY_LOG", raw.get("logPath"))
        if isinstance(log_path, str) and not Path(log_path).is_absolute():
            log_path = str(base / log_path)
        seed = env.get("VELOCITY_SEED", raw.get("seed"))
        return cls(
            mode=mode,
            interval=float(raw.get("intervalSeconds", 2.0)),
            port=int(env.get("VELOCITY_PORT", raw.get("port", 8000))),
            genesis=genesis,
            market=raw.get("market", {}),
            pool=int(raw.get("pool", 2 * 10 ** 18)),
            ticks=ticks,
            seed=None if seed in (None, "") else int(seed),
            log_path=log_path,
        )


@dataclass
class Snapshot:
    """Immutable read model captured at a block boundary."""
    height: int
    timestamp: int
    balances: dict[str, int]
    options: list
    feed_store: dict
    first_block: int
    last_block: int


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, **extra):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.extra = extra

    def body(self) -> dict:
        return {"code": self.code, "message": self.message, **self.extra}


class Session:
    def __init__(self, config: SessionConfig):
        self.config = config
        self.lock = threading.RLock()
        self.settlements: dict[int, list[dict]] = {}
        self.subscribers: list[queue.Queue] = []
        self._stop = threading.Event()
        self._auto_thread: threading.Thread | None = None
        self._waiters: list[dict] = []

        ticks = self._load_ticks(config)
        existing = None
        if config.log_path and Path(config.log_path).exists():
            records = EventLog.read(config.log_path)
            existing = replay_log(records)

        if existing is not None:
            self.sim = existing
            self.sim.ticks = ticks
            self.sim.ledger.log = EventLog(config.log_path, append=True) if config.log_path else None
            self.sim.publisher = PricePublisher(self.sim.ledger, ticks, self.sim.history).attach()
            self.sim.oracle = CallbackOracle(self.sim.ledger, ticks,
                                             self.sim.ledger.account("oracle"),
                                             pair=self.sim.config.market.pair).attach()
            self._rebuild_settlements(records)
            # The last replayed block committed without listeners; publish its
            # feed so the history continues gaplessly.
            ledger = self.sim.ledger
            if ledger.height >= 1 and self.sim.feed_store().get(KEY_LAST, 0) < ledger.height:
                self.sim.publisher.on_block(ledger.block)
        else:
            sim_config = SimConfig(
                genesis=GenesisConfig.from_dict(config.genesis),
                market=MarketConfig.from_dict(config.market),
                pool=config.pool,
            )
            log = EventLog(config.log_path) if config.log_path else None
            self.sim = Sim(sim_config, ticks, log=log)
            # Prime the price pipeline: the first feed lands in block 2, after
            # which positions can always read a start price.
            self.sim.ledger.produce_block()
            self.sim.ledger.produce_block()

        self.accounts = sorted(set(self.sim.ledger.genesis.accounts))
        self.snapshot = self._capture()
        if config.mode == MODE_AUTO:
            self._auto_thread = threading.Thread(target=self._auto_loop, daemon=True)
            self._auto_thread.start()

    @staticmethod
    def _load_ticks(config: SessionConfig):
        raw = config.ticks
        if raw is None:
            raw = {"seed": config.seed or 0, "seconds": 86_400, "start": 10_000,
                   "vol": 0.001}
        if isinstance(raw, (str, Path)):
            return read_tick_csv(raw)
        return generate_walk(
            seed=config.seed if config.seed is not None else int(raw.get("seed", 0)),
            seconds=int(raw.get("seconds", 86_400)),
            start=int(raw.get("start", 10_000)),
            vol=float(raw.get("vol", 0.001)),
            start_time=int(raw.get("startTime", 1_500_000_000)),
        )

    # -- lifecycle ------------------------------------------------------------

    def close(self):
        self._stop.set()
        if self._auto_thread is not None:
            self._auto_thread.join(timeout=5)
        if self.sim.ledger.log is not None:
            self.sim.ledger.log.close()

    def stopping(self) -> bool:
        return self._stop.is_set()

    def _auto_loop(self):
        while not self._stop.wait(self.config.interval):
            self._produce()

    # -- block production -------------------------------------------------------

    def _produce(self):
        with self.lock:
            block, receipts = self.sim.ledger.produce_block()
            pairs = list(zip(self.sim.ledger.last_batch, receipts))
            self._after_block(block, pairs)
            for waiter in list(self._waiters):
                for tx, receipt in pairs:
                    if tx is waiter["tx"]:
                        waiter["receipt"] = receipt
                        waiter["event"].set()
                        self._waiters.remove(waiter)
                        break
            return block, pairs

    def _after_block(self, block, pairs):
        for tx, receipt in pairs:
            for event in receipt.events:
                if event.name == "optionPaid":
                    oid = int(event.payload["optionId"])
                    self.settlements.setdefault(oid, []).append({
                        "to": self._label(event.payload["addr"]),
                        "amount": str(event.payload["amount"]),
                        "block": block.number,
                    })
        self.snapshot = self._capture()
        self._publish_events(block, pairs)

    def _rebuild_settlements(self, records):
        heights = {}
        for rec in records:
            if rec.get("kind") == "event" and rec["name"] == "optionPaid":
                oid = int(rec["payload"]["optionId"])
                self.settlements.setdefault(oid, []).append({
                    "to": self._label_hex(rec["payload"]["addr"]),
                    "amount": str(rec["payload"]["amount"]),
                    "block": rec["block"],
                })
        return heights

    def _capture(self) -> Snapshot:
        ledger = self.sim.ledger
        feed_store = dict(self.sim.feed_store())
        return Snapshot(
            height=ledger.height,
            timestamp=ledger.block.timestamp,
            balances={name: ledger.balance_of(name) for name in
                      sorted(set(ledger.genesis.accounts))},
            options=OptionsMarket.options(self.sim.market_store()),
            feed_store=feed_store,
            first_block=feed_store.get(KEY_FIRST, 0),
            last_block=feed_store.get(KEY_LAST, 0),
        )

    # -- SSE ---------------------------------------------------------------------

    def subscribe(self) -> queue.Queue:
        q: queue.Queue = queue.Queue()
        with self.lock:
            self.subscribers.append(q)
        return q

    def unsubscribe(self, q: queue.Queue):
        with self.lock:
            if q in self.subscribers:
                self.subscribers.remove(q)

    def _publish_events(self, block, pairs):
        messages = [("block", {"number": block.number, "timestamp": block.timestamp})]
        for tx, receipt in pairs:
            for event in receipt.events:
                if event.name == "PriceUpdated":
                    messages.append(("price", {
                        "blockNumber": event.payload["blocknumber"],
                        "timestamp": event.payload["timestamp"],
                        **{p: format_price(event.payload[p])
                           for p in ("usdbtc", "btceth", "btcetc", "btcdoge")},
                    }))
                elif event.name in ("LongOption", "ShortOption"):
                    messages.append(("option", {
                        "optionId": event.payload["optionId"],
                        "side": "Long" if event.name == "LongOption" else "Short",
                        "owner": self._label(event.payload["sender"]),
                        "amount": str(event.payload["amount"]),
                        "block": event.payload["block"],
                    }))
                elif event.name == "optionPaid":
                    messages.append(("settlement", {
                        "optionId": event.payload["optionId"],
                        "to": self._label(event.payload["addr"]),
                        "amount": str(event.payload["amount"]),
                        "block": block.number,
                    }))
        for q in list(self.subscribers):
            for message in messages:
                q.put(message)

    def _label(self, addr) -> str:
        return getattr(addr, "label", "") or getattr(addr, "hex", str(addr))

    def _label_hex(self, hexstr: str) -> str:
        for name, addr in self.sim.ledger.names.items():
            if addr.hex == hexstr:
                return name
        return hexstr

    # -- API operations --------------------------------------------------------------

    def status(self) -> dict:
        snap = self.snapshot
        return {
            "height": snap.height,
            "timestamp": snap.timestamp,
            "mode": self.config.mode,
            "firstBlock": snap.first_block,
            "lastBlock": snap.last_block,
            "entryDeposit": str(self.sim.config.market.entry_deposit),
            "marginPoints": self.sim.config.market.margin_points,
            "expiryBlocks": self.sim.config.market.expiry_blocks,
            "pair": self.sim.config.market.pair,
            "accounts": self.accounts,
        }

    def balances(self) -> dict:
        return {name: str(amount) for name, amount in self.snapshot.balances.items()}

    def submit_position(self, account: str, side: str, deposit: int) -> dict:
        if account not in self.accounts:
            raise ApiError(404, "UNKNOWN_ACCOUNT", f"no such account {account!r}")
        if side not in ("Long", "Short"):
            raise ApiError(400, "BAD_SIDE", "side must be 'Long' or 'Short'")
        if deposit <= 0:
            raise ApiError(400, "BAD_DEPOSIT", "deposit must be positive")

        tx = self.sim.entry_tx(account, long_side=(side == "Long"), deposit=deposit)
        with self.lock:
            self.sim.ledger.submit(tx)
            if self.config.mode == MODE_MANUAL:
                _, pairs = self._produce()
                receipt = next(r for t, r in pairs if t is tx)
            else:
                waiter = {"tx": tx, "event": threading.Event(), "receipt": None}
                self._waiters.append(waiter)
        if self.config.mode == MODE_AUTO:
            if not waiter["event"].wait(timeout=max(10.0, 4 * self.config.interval)):
                raise ApiError(504, "TIMEOUT", "transaction was not included in time")
            receipt = waiter["receipt"]
        return self._entry_result(receipt)

    def _entry_result(self, receipt: TxReceipt) -> dict:
        if receipt.ok:
            for event in receipt.events:
                if event.name in ("LongOption", "ShortOption"):
                    return {"optionId": int(event.payload["optionId"]),
                            "block": int(event.payload["block"])}
                if event.name == "Error":
                    raise ApiError(422, "INVALID_MARGIN",
                                   event.payload.get("message", "Invalid Margin!"))
            raise ApiError(500, "NO_OPTION", "entry succeeded without an option event")
        if receipt.error and "pool" in receipt.error:
            raise ApiError(409, "POOL_EXHAUSTED", receipt.error)
        raise ApiError(400, "REJECTED", receipt.error or receipt.status.value)

    def step(self, blocks: int) -> dict:
        if self.config.mode != MODE_MANUAL:
            raise ApiError(409, "AUTO_MODE", "manual stepping is disabled in auto mode")
        if blocks < 0:
            raise ApiError(400, "BAD_STEP", "blocks must be >= 0")
        for _ in range(blocks):
            self._produce()
        return {"height": self.snapshot.height}

    def sweep(self) -> SweepReport:
        with self.lock:
            scanned, txs = plan_sweep(self.sim.ledger, self.sim.market,
                                      self.sim.ledger.account(SWEEPER_ACCOUNT))
            for tx in txs:
                self.sim.ledger.submit(tx)
            _, pairs = self._produce()
            return collect_sweep(scanned, txs, pairs)

    def prices(self, start: int, end: int) -> list[dict]:
        snap = self.snapshot
        if start > end:
            raise ApiError(400, "BAD_RANGE", "from must be <= to")
        if snap.first_block == 0:
            raise ApiError(416, "EMPTY_HISTORY", "no prices published yet",
                           firstBlock=snap.first_block, lastBlock=snap.last_block)
        if start < snap.first_block or end > snap.last_block:
            raise ApiError(416, "OUT_OF_RANGE", "range outside price history",
                           firstBlock=snap.first_block, lastBlock=snap.last_block)
        feeds = []
        for number in range(start, end + 1):
            feed = PriceHistory.read(snap.feed_store, number)
            feeds.append({
                "blockNumber": feed.block_number,
                "timestamp": feed.timestamp,
                "usdbtc": format_price(feed.usdbtc),
                "btceth": format_price(feed.btceth),
                "btcetc": format_price(feed.btcetc),
                "btcdoge": format_price(feed.btcdoge),
            })
        return feeds

    def option(self, option_id: int) -> dict:
        record = next((r for r in self.snapshot.options if r.id == option_id), None)
        if record is None:
            raise ApiError(404, "UNKNOWN_OPTION", f"no option {option_id}")
        return self._option_view(record)

    def options(self, owner: str | None = None, state: str | None = None) -> list[dict]:
        views = [self._option_view(r) for r in self.snapshot.options]
        if owner is not None:
            views = [v for v in views if v["owner"] == owner]
        if state == "open":
            views = [v for v in views if not v["closed"]]
        elif state == "closed":
            views = [v for v in views if v["closed"]]
        return views

    def _option_view(self, record) -> dict:
        market_addr = self.sim.market.address
        if record.long != market_addr:
            side, owner = "Long", self._label(record.long)
        else:
            side, owner = "Short", self._label(record.short)
        cfg = self.sim.config.market
        view = {
            "optionId": record.id,
            "side": side,
            "owner": owner,
            "amount": str(record.amount),
            "startBlock": record.start_block,
            "expiryBlock": record.expiry_block,
            "blocksRemaining": max(0, record.expiry_block - self.snapshot.height),
            "startPrice": format_price(record.start_price),
            "marginPoints": cfg.margin_points,
            "closed": record.closed,
        }
        if record.closed:
            view["final"] = {"payouts": self.settlements.get(record.id, [])}
            try:
                feed = PriceHistory.read(self.snapshot.feed_store, record.expiry_block)
                view["final"]["endPrice"] = format_price(feed.pair(cfg.pair))
            except LookupError:
                pass
        else:
            last = self.snapshot.last_block
            if last:
                feed = PriceHistory.read(self.snapshot.feed_store, last)
                current = feed.pair(cfg.pair)
                pay_long, pay_short = compute_payout(record.amount,
                                                     record.start_price,
                                                     current, cfg.lot_size)
                view["preview"] = {
                    "payLong": str(pay_long), "payShort": str(pay_short),
                    "price": format_price(current), "asOfBlock": last,
                    "binding": False,
                }
        return view
