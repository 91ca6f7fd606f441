"""Price pipeline: tick store, publisher, history contract, callback oracle."""
from __future__ import annotations

import random

import pytest

from conftest import scan_price_oracle
from velocity.harness import Sim, SimConfig, contract_address
from velocity.harness.fixtures import KEY_OPTION, CallbackExerciser
from velocity.ledger import GenesisConfig, Transaction, TxStatus
from velocity.pricefeed import (CSV_HEADER, FeedMissing, OracleFaultPlan,
                                PriceHistory, Tick, TickError, TickStore,
                                format_price, generate_walk, ingest_ticks,
                                parse_price, parse_tick_csv, write_tick_csv)
from velocity.pricefeed.contract import KEY_FIRST, KEY_LAST

ETH = 10 ** 18
T0 = 1_500_000_000


def const_ticks(seconds, price=100_00, start=T0):
    return ingest_ticks([Tick(start + i, 4000_00, price, price, price)
                         for i in range(seconds)])


def make_sim(ticks, **accounts):
    accounts = accounts or {"alice": 10 * ETH}
    genesis = GenesisConfig(accounts=accounts, genesis_time=T0)
    return Sim(SimConfig(genesis=genesis), ticks)


# -- parsing and formatting -------------------------------------------------------


def test_parse_price_two_decimals():
    assert parse_price("4123.45") == 412345
    assert parse_price("0.01") == 1
    assert parse_price("7") == 700
    assert parse_price("7.5") == 750
    assert format_price(412345) == "4123.45"
    assert format_price(700) == "7.00"


def test_parse_price_rejects_junk():
    with pytest.raises(TickError):
        parse_price("1.234")  # more than 2 dp
    with pytest.raises(TickError):
        parse_price("abc")
    with pytest.raises(TickError):
        parse_price("")


def test_csv_roundtrip():
    import io
    store = const_ticks(10)
    buf = io.StringIO()
    write_tick_csv(store, buf)
    text = buf.getvalue()
    assert text.splitlines()[0] == CSV_HEADER
    again = parse_tick_csv(text)
    assert again.ticks == store.ticks


# -- ingestion -----------------------------------------------------------------


def test_sixty_ticks_cover_sixty_seconds():
    store = const_ticks(60)
    assert len(store) == 60
    assert store.covers(T0) and store.covers(T0 + 59)
    assert not store.covers(T0 + 60)


def test_price_at_matches_linear_scan_oracle():
    rng = random.Random(11)
    ticks = [Tick(T0 + i, 4000_00, 100_00 + rng.randrange(1000),
                  90_00 + rng.randrange(100), 80_00)
             for i in range(120)]
    store = ingest_ticks(ticks)
    for t in [T0, T0 + 1, T0 + 59, T0 + 119] + [T0 + rng.randrange(120)
                                                for _ in range(50)]:
        assert store.at(t) == scan_price_oracle(ticks, t)


def test_gap_rejected_in_strict_mode():
    ticks = [Tick(T0, 1, 1, 1, 1), Tick(T0 + 1, 1, 1, 1, 1), Tick(T0 + 4, 1, 1, 1, 1)]
    with pytest.raises(TickError, match="gap"):
        ingest_ticks(ticks, strict=True)


def test_gap_forward_filled_in_lenient_mode():
    ticks = [Tick(T0, 1, 10, 1, 1), Tick(T0 + 3, 1, 40, 1, 1)]
    store = ingest_ticks(ticks, strict=False)
    assert store.forward_filled
    assert len(store) == 4
    assert store.at(T0 + 2).btceth == 10  # carried forward


def test_non_monotonic_rejected():
    with pytest.raises(TickError):
        ingest_ticks([Tick(T0 + 1, 1, 1, 1, 1), Tick(T0, 1, 1, 1, 1)])


# -- publisher ------------------------------------------------------------------


def test_publisher_block_with_exact_tick():
    sim = make_sim(const_ticks(120))
    sim.ledger.produce_block()  # block 1; feed(1) lands in block 2
    sim.ledger.produce_block()
    feed = PriceHistory.read(sim.feed_store(), 1)
    tick = sim.ticks.at(sim.ledger.timestamp_for(1))
    assert feed.btceth == tick.btceth
    assert feed.timestamp == tick.timestamp == sim.ledger.timestamp_for(1)


def test_publisher_uses_latest_tick_at_or_before_blocktime():
    # Deliberate missing second exactly at block 1's timestamp (t0 + 12).
    ticks = [Tick(T0 + i, 1000, 1000 + i, 1000, 1000)
             for i in range(40) if i != 12]
    store = TickStore(ticks)
    sim = make_sim(store)
    sim.ledger.produce_block()
    sim.ledger.produce_block()
    feed = PriceHistory.read(sim.feed_store(), 1)
    assert feed.timestamp == T0 + 11
    assert feed.btceth == 1000 + 11  # the t-1 tick


def test_publisher_halts_before_first_tick():
    store = const_ticks(300, start=T0 + 1000)  # coverage starts after genesis
    sim = make_sim(store)
    sim.ledger.produce_block()
    assert sim.publisher.halted is not None
    assert sim.publisher.published == 0
    sim.ledger.produce_block()
    assert sim.feed_store()[KEY_FIRST] == 0  # nothing ever published


def test_publisher_halts_when_ticks_run_out():
    sim = make_sim(const_ticks(30))  # covers blocks 1..2 only (cadence 12)
    for _ in range(5):
        sim.ledger.produce_block()
    assert sim.publisher.halted is not None
    assert sim.feed_store()[KEY_LAST] == 2


# -- history contract ----------------------------------------------------------------


def set_price_tx(sim, sender, blocknumber, price=100_00, timestamp=None):
    return Transaction(
        sender=sender, target=sim.history.address, op="setPrice",
        args=(timestamp if timestamp is not None else T0 + blocknumber,
              blocknumber, 4000_00, price, price, price),
        gas_limit=5_000)


def test_first_write_sets_first_and_last_block():
    # No publisher attached: drive setPrice by hand from the owner account.
    genesis = GenesisConfig(accounts={"alice": ETH}, genesis_time=T0)
    sim = Sim(SimConfig(genesis=genesis), const_ticks(600), attach_feeds=False)
    owner = sim.ledger.account("pricefeed-owner")
    sim.ledger.submit(set_price_tx(sim, owner, 100))
    _, (receipt,) = sim.ledger.produce_block()
    assert receipt.ok
    store = sim.feed_store()
    assert store[KEY_FIRST] == 100
    assert store[KEY_LAST] == 100


def test_non_owner_set_price_reverts():
    sim = make_sim(const_ticks(600))
    sim.ledger.produce_block()
    sim.ledger.produce_block()
    before = dict(sim.feed_store())
    sim.ledger.submit(set_price_tx(sim, sim.ledger.account("alice"), 3))
    _, receipts = sim.ledger.produce_block()
    mine = receipts[-1]
    assert mine.status is TxStatus.REVERTED
    assert "owner" in mine.error
    after = {k: v for k, v in sim.feed_store().items()}
    assert after[KEY_FIRST] == before[KEY_FIRST]


def test_out_of_order_block_reverts():
    genesis = GenesisConfig(accounts={"alice": ETH}, genesis_time=T0)
    sim = Sim(SimConfig(genesis=genesis), const_ticks(600), attach_feeds=False)
    owner = sim.ledger.account("pricefeed-owner")
    sim.ledger.submit(set_price_tx(sim, owner, 100))
    sim.ledger.produce_block()
    sim.ledger.submit(set_price_tx(sim, owner, 102))  # gap: expected 101
    _, (receipt,) = sim.ledger.produce_block()
    assert receipt.status is TxStatus.REVERTED
    assert "expected block 101" in receipt.error
    assert sim.feed_store()[KEY_LAST] == 100


def test_get_price_bounds():
    sim = make_sim(const_ticks(600))
    for _ in range(5):
        sim.ledger.produce_block()
    store = sim.feed_store()
    first, last = store[KEY_FIRST], store[KEY_LAST]
    assert PriceHistory.read(store, last).block_number == last
    assert PriceHistory.read(store, first).block_number == first
    with pytest.raises(FeedMissing):
        PriceHistory.read(store, first - 1)


def test_gapless_history_property():
    sim = make_sim(const_ticks(1200))
    for _ in range(40):
        sim.ledger.produce_block()
    store = sim.feed_store()
    for number in range(store[KEY_FIRST], store[KEY_LAST] + 1):
        assert PriceHistory.read(store, number).block_number == number


def test_free_reads_never_charge_storage_write():
    sim = make_sim(const_ticks(600))
    sim.ledger.produce_block()
    sim.ledger.produce_block()
    sim.ledger.submit(Transaction(sim.ledger.account("alice"),
                                  sim.history.address, op="getPrice",
                                  args=(1,), gas_limit=5_000))
    _, receipts = sim.ledger.produce_block()
    mine = receipts[-1]
    assert mine.ok
    assert mine.gas_by_class.get("storage-write", 0) == 0


def test_access_control_fuzz():
    sim = make_sim(const_ticks(1200), alice=ETH, mallory=ETH, eve=ETH)
    for _ in range(3):
        sim.ledger.produce_block()
    snapshot = dict(sim.feed_store())
    rng = random.Random(5)
    intruders = ["alice", "mallory", "eve"]
    for name in (rng.choice(intruders) for _ in range(200)):
        sim.ledger.submit(set_price_tx(sim, sim.ledger.account(name),
                                       rng.randrange(1, 10),
                                       price=rng.randrange(1, 10 ** 6)))
    _, receipts = sim.ledger.produce_block()
    non_owner = receipts[1:]  # first is the publisher's own setPrice
    assert all(r.status is TxStatus.REVERTED for r in non_owner)
    after = sim.feed_store()
    for key, value in snapshot.items():
        if isinstance(key, tuple):
            assert after[key] == value


# -- callback oracle --------------------------------------------------------------


def callback_setup(fault, ticks=None):
    sim = make_sim(ticks if ticks is not None else const_ticks(1200))
    ledger = sim.ledger
    client = CallbackExerciser(contract_address("cb-client"),
                               sim.market.address, sim.oracle.account)
    ledger.register_contract(client)
    ledger.produce_block()
    ledger.submit(sim.entry_tx("alice"))
    ledger.produce_block()  # entry at block 2, expiry 7
    ledger.stores[client.address][KEY_OPTION] = 1
    rid = sim.oracle.request(client.address, delay_blocks=6, fault=fault)
    return sim, client, rid


def test_callback_arrives_exactly_after_delay():
    sim, client, rid = callback_setup(OracleFaultPlan.none())
    fired_at = None
    for _ in range(8):
        block, receipts = sim.ledger.produce_block()
        for tx, receipt in zip(sim.ledger.last_batch, receipts):
            if tx.op == "__callback":
                fired_at = block.number
                assert receipt.ok
    assert fired_at == 8  # requested at height 2, delay 6
    delivered = CallbackExerciser.delivered(sim.ledger.stores[client.address])
    assert delivered == (rid, sim.oracle.price_at_block(8))
    assert sim.market.option(sim.market_store(), 1).closed


def test_drop_callback_leaves_option_unsettled():
    sim, client, rid = callback_setup(OracleFaultPlan.drop())
    for _ in range(12):
        sim.ledger.produce_block()
    assert CallbackExerciser.delivered(sim.ledger.stores[client.address]) is None
    assert not sim.market.option(sim.market_store(), 1).closed


def test_underfunded_callback_out_of_gas_no_settlement():
    sim, client, rid = callback_setup(OracleFaultPlan.underfunded(200))
    outcome = None
    for _ in range(12):
        _, receipts = sim.ledger.produce_block()
        for tx, receipt in zip(sim.ledger.last_batch, receipts):
            if tx.op == "__callback":
                outcome = receipt
    assert outcome is not None
    assert outcome.status is TxStatus.OUT_OF_GAS
    assert not sim.market.option(sim.market_store(), 1).closed


def test_delayed_callback_differs_on_monotone_walk():
    # Strictly increasing series: a k-block delay always changes the price.
    for k in (1, 2, 5):
        ticks = ingest_ticks([Tick(T0 + i, 1000, 100_00 + i, 1000, 1000)
                              for i in range(1200)])
        sim, client, rid = callback_setup(OracleFaultPlan.delay(k), ticks=ticks)
        scheduled_price = sim.oracle.price_at_block(8)
        for _ in range(10 + k):
            sim.ledger.produce_block()
        delivered = CallbackExerciser.delivered(sim.ledger.stores[client.address])
        assert delivered is not None
        assert delivered[1] == sim.oracle.price_at_block(8 + k)
        assert delivered[1] != scheduled_price


def test_callback_from_non_oracle_sender_reverts():
    sim, client, rid = callback_setup(OracleFaultPlan.drop())
    sim.ledger.submit(Transaction(sim.ledger.account("alice"), client.address,
                                  op="__callback", args=(99, "123.00", "p"),
                                  gas_limit=100_000))
    _, receipts = sim.ledger.produce_block()
    assert receipts[-1].status is TxStatus.REVERTED


# -- walk generation ----------------------------------------------------------------


def test_walk_is_deterministic_and_positive():
    a = generate_walk(seed=9, seconds=500, start=10_000, vol=0.01)
    b = generate_walk(seed=9, seconds=500, start=10_000, vol=0.01)
    assert a.ticks == b.ticks
    assert all(t.btceth > 0 and t.usdbtc > 0 for t in a.ticks)
    c = generate_walk(seed=10, seconds=500, start=10_000, vol=0.01)
    assert c.ticks != a.ticks
