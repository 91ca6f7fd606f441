"""Wiring for a complete simulation: ledger, price pipeline, market, oracle.

Also implements log replay: because the event log records every transaction
verbatim and the VM is deterministic, re-executing the logged blocks against a
fresh ledger reconstructs the exact ledger state (used for crash recovery and
replay-stability checks).
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from ..ledger import Address, EventLog, GenesisConfig, Ledger, Transaction
from ..ledger.types import ADDRESS_BYTES
from ..market import MarketConfig, OptionsMarket
from ..pricefeed import CallbackOracle, PriceHistory, PricePublisher, TickStore

PRICEFEED_OWNER = "pricefeed-owner"
ORACLE_ACCOUNT = "oracle"
SWEEPER_ACCOUNT = "sweeper"
TREASURY_ACCOUNT = "treasury"
PRICEFEED_CONTRACT = "pricegeth"
MARKET_CONTRACT = "market"

INFRA_GAS_FUND = 10 ** 18  # 1 ETH of gas money for infrastructure accounts

ENTRY_GAS_LIMIT = 100_000
EXERCISE_GAS_LIMIT = 600_000


def contract_address(name: str) -> Address:
    """Contract addresses live in their own namespace so a contract can share
    a display name with no account."""
    digest = hashlib.blake2b(f"contract:{name}".encode(), digest_size=ADDRESS_BYTES).digest()
    return Address(digest, name)


@dataclass
class SimConfig:
    genesis: GenesisConfig
    market: MarketConfig = field(default_factory=MarketConfig)
    pool: int = 10 ** 18  # market-maker pool, funded from the treasury
    vulnerable: bool = False

    def market_record(self) -> dict:
        return {
            "kind": "setup",
            "market": {
                "marginPoints": self.market.margin_points,
                "lotSize": str(self.market.lot_size),
                "expiryBlocks": self.market.expiry_blocks,
                "entryDeposit": str(self.market.entry_deposit),
                "pair": self.market.pair,
            },
            "pool": str(self.pool),
            "vulnerable": self.vulnerable,
        }

    @staticmethod
    def market_from_record(record: dict) -> MarketConfig:
        m = record["market"]
        return MarketConfig(
            margin_points=int(m["marginPoints"]),
            lot_size=int(m["lotSize"]),
            expiry_blocks=int(m["expiryBlocks"]),
            entry_deposit=int(m["entryDeposit"]),
            pair=m["pair"],
        )


def _with_infra_accounts(genesis: GenesisConfig, pool: int) -> GenesisConfig:
    accounts = dict(genesis.accounts)
    for name in (PRICEFEED_OWNER, ORACLE_ACCOUNT, SWEEPER_ACCOUNT):
        accounts.setdefault(name, INFRA_GAS_FUND)
    accounts.setdefault(TREASURY_ACCOUNT, 0)
    if accounts[TREASURY_ACCOUNT] < pool:
        accounts[TREASURY_ACCOUNT] = pool + INFRA_GAS_FUND
    return GenesisConfig(accounts=accounts, gas=genesis.gas,
                         block_cadence=genesis.block_cadence,
                         genesis_time=genesis.genesis_time,
                         miner=genesis.miner)


class Sim:
    """One live simulation instance. Single-writer: drive it from one thread."""

    def __init__(self, config: SimConfig, ticks: TickStore | None,
                 log: EventLog | None = None, attach_feeds: bool = True):
        self.config = config
        self.ticks = ticks
        genesis = _with_infra_accounts(config.genesis, config.pool)
        self.ledger = Ledger(genesis, log=log)

        self.history = PriceHistory(contract_address(PRICEFEED_CONTRACT),
                                    owner=self.ledger.account(PRICEFEED_OWNER))
        self.ledger.register_contract(self.history)

        self.market = OptionsMarket(
            contract_address(MARKET_CONTRACT),
            config=config.market,
            pricefeed=self.history.address,
            vulnerable=config.vulnerable,
        )
        self.ledger.register_contract(self.market, endowment=config.pool,
                                      endow_from=self.ledger.account(TREASURY_ACCOUNT))

        if log is not None:
            log.write(config.market_record())

        self.publisher: PricePublisher | None = None
        self.oracle: CallbackOracle | None = None
        if ticks is not None:
            self.publisher = PricePublisher(self.ledger, ticks, self.history)
            self.oracle = CallbackOracle(self.ledger, ticks,
                                         self.ledger.account(ORACLE_ACCOUNT),
                                         pair=config.market.pair)
            if attach_feeds:
                self.publisher.attach()
                self.oracle.attach()

    # -- convenience -----------------------------------------------------------

    @property
    def sweeper(self) -> Address:
        return self.ledger.account(SWEEPER_ACCOUNT)

    def market_store(self) -> dict:
        return self.ledger.stores[self.market.address]

    def feed_store(self) -> dict:
        return self.ledger.stores[self.history.address]

    def entry_tx(self, sender: str | Address, long_side: bool = True,
                 deposit: int | None = None) -> Transaction:
        addr = self.ledger.account(sender) if isinstance(sender, str) else sender
        return Transaction(
            sender=addr,
            target=self.market.address,
            value=self.config.market.entry_deposit if deposit is None else deposit,
            op="goLong" if long_side else "goShort",
            gas_limit=ENTRY_GAS_LIMIT,
        )

    def exercise_tx(self, sender: str | Address, option_id: int | None = None) -> Transaction:
        addr = self.ledger.account(sender) if isinstance(sender, str) else sender
        args = () if option_id is None else (option_id,)
        return Transaction(sender=addr, target=self.market.address,
                           op="exercise", args=args, gas_limit=EXERCISE_GAS_LIMIT)


def replay_log(records: list[dict]) -> Sim | None:
    """Rebuild a simulation's ledger state by re-executing a recorded log.

    The returned Sim has no feeds attached and no log sink (the logged
    transactions already contain everything the feeds submitted); assign a
    tick store, listeners, and an appending log to continue the run live.
    """
    if not records or records[0].get("kind") != "genesis":
        return None
    genesis = GenesisConfig.from_dict(records[0])
    setup = next((r for r in records if r.get("kind") == "setup"), None)
    if setup is None:
        return None
    config = SimConfig(genesis=genesis,
                       market=SimConfig.market_from_record(setup),
                       pool=int(setup["pool"]),
                       vulnerable=bool(setup["vulnerable"]))

    sim = Sim(config, ticks=None, log=None, attach_feeds=False)
    ledger = sim.ledger

    by_block: dict[int, list[dict]] = {}
    for rec in records:
        if rec.get("kind") == "tx":
            by_block.setdefault(rec["block"], []).append(rec)
    max_block = max((r["number"] for r in records if r.get("kind") == "block"),
                    default=0)
    for number in range(1, max_block + 1):
        for rec in sorted(by_block.get(number, []), key=lambda r: r["index"]):
            ledger.submit(Transaction(
                sender=_addr_from_hex(ledger, rec["sender"]),
                target=_addr_from_hex(ledger, rec["target"]),
                value=int(rec["value"]),
                op=rec["op"],
                args=tuple(rec["args"]),
                gas_limit=int(rec["gasLimit"]),
                gas_price=int(rec["gasPrice"]),
            ))
        ledger.produce_block()
    return sim


def _addr_from_hex(ledger: Ledger, hexstr: str) -> Address:
    raw = bytes.fromhex(hexstr[2:] if hexstr.startswith("0x") else hexstr)
    for addr in ledger.accounts:
        if addr.id == raw:
            return addr
    return Address(raw)
