"""HTTP facade: placement, queries, admin stepping, SSE, crash recovery."""
from __future__ import annotations

import json
import time

import pytest
from fastapi.testclient import TestClient

from velocity.ledger import EventLog
from velocity.service import Session, SessionConfig, create_app

ETH = 10 ** 18
DEPOSIT = str(10 ** 17)

WALK = {"seed": 21, "seconds": 7200, "start": 10_000, "vol": 0.001}


@pytest.fixture
def session(tmp_path):
    cfg = SessionConfig(mode="manual", ticks=dict(WALK),
                        log_path=str(tmp_path / "events.jsonl"))
    s = Session(cfg)
    yield s
    s.close()


@pytest.fixture
def client(session):
    return TestClient(create_app(session))


# -- positions --------------------------------------------------------------------


def test_valid_long_returns_201_and_option_id(client):
    r = client.post("/positions", json={"account": "alice", "side": "Long",
                                        "deposit": DEPOSIT})
    assert r.status_code == 201
    body = r.json()
    assert body["optionId"] == 1
    option = client.get("/options/1").json()
    assert option["owner"] == "alice"
    assert option["side"] == "Long"
    assert option["amount"] == DEPOSIT


def test_wrong_deposit_422_invalid_margin_refunded(client):
    before = client.get("/accounts").json()["alice"]
    r = client.post("/positions", json={"account": "alice", "side": "Long",
                                        "deposit": str(9 * 10 ** 16)})
    assert r.status_code == 422
    body = r.json()
    assert body["code"] == "INVALID_MARGIN"
    assert body["message"] == "Invalid Margin!"
    after = client.get("/accounts").json()["alice"]
    assert int(before) - int(after) < 10 ** 6  # only gas, deposit refunded
    assert client.get("/options").json() == []


def test_unknown_account_404(client):
    r = client.post("/positions", json={"account": "zelda", "side": "Long",
                                        "deposit": DEPOSIT})
    assert r.status_code == 404
    assert r.json()["code"] == "UNKNOWN_ACCOUNT"


def test_pool_exhaustion_409(tmp_path):
    cfg = SessionConfig(mode="manual", ticks=dict(WALK), pool=10 ** 16)
    session = Session(cfg)
    client = TestClient(create_app(session))
    r = client.post("/positions", json={"account": "alice", "side": "Long",
                                        "deposit": DEPOSIT})
    assert r.status_code == 409
    assert r.json()["code"] == "POOL_EXHAUSTED"
    session.close()


# -- prices -----------------------------------------------------------------------


def test_prices_single_and_full_range(client):
    client.post("/admin/step", json={"blocks": 6})
    status = client.get("/status").json()
    first, last = status["firstBlock"], status["lastBlock"]
    one = client.get(f"/prices?from={last}&to={last}").json()
    assert len(one) == 1
    assert one[0]["blockNumber"] == last
    assert "." in one[0]["btceth"]  # fixed-point string, 2 dp
    full = client.get(f"/prices?from={first}&to={last}").json()
    assert len(full) == last - first + 1
    assert [f["blockNumber"] for f in full] == list(range(first, last + 1))


def test_prices_out_of_range_416_with_bounds(client):
    r = client.get("/prices?from=0&to=9999")
    assert r.status_code == 416
    body = r.json()
    assert body["firstBlock"] >= 1
    assert body["lastBlock"] >= body["firstBlock"]


def test_prices_reversed_range_400(client):
    assert client.get("/prices?from=5&to=2").status_code == 400


# -- options -----------------------------------------------------------------------


def test_open_option_preview_at_flat_price(tmp_path):
    flat = {"seed": 0, "seconds": 7200, "start": 10_000, "vol": 0.0}
    session = Session(SessionConfig(mode="manual", ticks=flat))
    client = TestClient(create_app(session))
    client.post("/positions", json={"account": "alice", "side": "Long",
                                    "deposit": DEPOSIT})
    option = client.get("/options/1").json()
    preview = option["preview"]
    assert preview["binding"] is False
    assert preview["payLong"] == DEPOSIT
    assert preview["payShort"] == DEPOSIT
    session.close()


def test_closed_option_shows_final_payouts_from_log(client, session):
    client.post("/positions", json={"account": "alice", "side": "Long",
                                    "deposit": DEPOSIT})
    client.post("/admin/step", json={"blocks": 5})
    sweep = client.post("/admin/sweep").json()
    assert sweep["settled"] == 1
    option = client.get("/options/1").json()
    assert option["closed"] is True
    payouts = option["final"]["payouts"]
    assert sum(int(p["amount"]) for p in payouts) == 2 * int(DEPOSIT)
    # The log agrees.
    paid_events = [r for r in EventLog.read(session.config.log_path)
                   if r.get("kind") == "event" and r["name"] == "optionPaid"
                   and r["payload"]["optionId"] == 1]
    assert len(paid_events) == len(payouts)


def test_option_filters_and_404(client):
    client.post("/positions", json={"account": "alice", "side": "Long",
                                    "deposit": DEPOSIT})
    client.post("/positions", json={"account": "bob", "side": "Short",
                                    "deposit": DEPOSIT})
    assert client.get("/options/99").status_code == 404
    mine = client.get("/options?owner=alice").json()
    assert [o["optionId"] for o in mine] == [1]
    opened = client.get("/options?state=open").json()
    assert len(opened) == 2
    assert client.get("/options?state=weird").status_code == 400


# -- admin -------------------------------------------------------------------------


def test_step_advances_and_step_zero_is_noop(client):
    h0 = client.get("/status").json()["height"]
    r = client.post("/admin/step", json={"blocks": 3})
    assert r.status_code == 200
    assert r.json()["height"] == h0 + 3
    r = client.post("/admin/step", json={"blocks": 0})
    assert r.status_code == 200
    assert r.json()["height"] == h0 + 3


def test_step_rejected_in_auto_mode(tmp_path):
    cfg = SessionConfig(mode="auto", interval=0.05, ticks=dict(WALK))
    session = Session(cfg)
    client = TestClient(create_app(session))
    r = client.post("/admin/step", json={"blocks": 1})
    assert r.status_code == 409
    # And the clock advances by itself; a position waits for inclusion.
    h0 = client.get("/status").json()["height"]
    r = client.post("/positions", json={"account": "alice", "side": "Long",
                                        "deposit": DEPOSIT})
    assert r.status_code == 201
    deadline = time.monotonic() + 5
    while time.monotonic() < deadline:
        if client.get("/status").json()["height"] > h0:
            break
        time.sleep(0.05)
    assert client.get("/status").json()["height"] > h0
    session.close()


def test_position_step_sweep_settles(client):
    r = client.post("/positions", json={"account": "alice", "side": "Long",
                                        "deposit": DEPOSIT})
    oid = r.json()["optionId"]
    client.post("/admin/step", json={"blocks": 5})
    option = client.get(f"/options/{oid}").json()
    assert option["blocksRemaining"] == 0
    sweep = client.post("/admin/sweep").json()
    assert sweep["settled"] == 1
    assert client.get(f"/options/{oid}").json()["closed"]


def test_sweep_with_nothing_expired(client):
    assert client.post("/admin/sweep").json() == {"scanned": 0, "settled": 0,
                                                  "failed": []}


# -- coherence, SSE, recovery -------------------------------------------------------


def test_api_ledger_coherence(client, session):
    for account, side in (("alice", "Long"), ("bob", "Short"), ("alice", "Long")):
        r = client.post("/positions", json={"account": account, "side": side,
                                            "deposit": DEPOSIT})
        assert r.status_code == 201
    records = EventLog.read(session.config.log_path)
    entry_events = [r for r in records if r.get("kind") == "event"
                    and r["name"] in ("LongOption", "ShortOption")]
    assert len(entry_events) == 3
    api_ids = sorted(o["optionId"] for o in client.get("/options").json())
    log_ids = sorted(int(e["payload"]["optionId"]) for e in entry_events)
    assert api_ids == log_ids == [1, 2, 3]


def test_event_stream_pushes_blocks_prices_and_settlements(session):
    # SSE needs a real server: the in-process test client buffers sync
    # generator bodies eagerly instead of streaming them.
    import socket
    import threading

    import httpx
    import uvicorn

    sock = socket.socket()
    sock.bind(("127.0.0.1", 0))
    port = sock.getsockname()[1]
    sock.close()
    server = uvicorn.Server(uvicorn.Config(create_app(session), host="127.0.0.1",
                                           port=port, log_level="error"))
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.monotonic() + 10
    while not server.started and time.monotonic() < deadline:
        time.sleep(0.02)
    assert server.started

    base = f"http://127.0.0.1:{port}"
    try:
        with httpx.stream("GET", f"{base}/events", timeout=10) as stream:
            lines = stream.iter_lines()

            def read_event():
                name = None
                for line in lines:
                    if line.startswith("event: "):
                        name = line.split(": ", 1)[1]
                    elif line.startswith("data: ") and name:
                        return name, json.loads(line.split(": ", 1)[1])
                return None, None

            name, _ = read_event()
            assert name == "hello"
            r = httpx.post(f"{base}/positions",
                           json={"account": "alice", "side": "Long",
                                 "deposit": DEPOSIT}, timeout=10)
            assert r.status_code == 201
            httpx.post(f"{base}/admin/step", json={"blocks": 5}, timeout=10)
            httpx.post(f"{base}/admin/sweep", timeout=10)
            seen = {}
            for _ in range(60):
                name, payload = read_event()
                if name:
                    seen.setdefault(name, payload)
                if {"block", "price", "option", "settlement"} <= set(seen):
                    break
            assert {"block", "price", "option", "settlement"} <= set(seen)
            assert seen["option"]["owner"] == "alice"
            assert seen["settlement"]["optionId"] == 1
    finally:
        server.should_exit = True
        thread.join(timeout=10)


def test_session_config_file_and_env_overrides(tmp_path):
    cfg_path = tmp_path / "session.json"
    cfg_path.write_text(json.dumps({
        "port": 9100,
        "mode": "manual",
        "genesis": {"accounts": {"dana": str(10 ** 19)}},
        "market": {"marginPoints": 250, "lotSize": str(4 * 10 ** 14)},
        "pool": str(3 * 10 ** 18),
        "ticks": {"seed": 2, "seconds": 600, "start": 9000},
        "logPath": "log.jsonl",
    }))
    cfg = SessionConfig.load(cfg_path, env={})
    assert cfg.port == 9100
    assert cfg.market["marginPoints"] == 250
    assert cfg.log_path == str(tmp_path / "log.jsonl")

    cfg = SessionConfig.load(cfg_path, env={"VELOCITY_PORT": "9200",
                                            "VELOCITY_MODE": "auto",
                                            "VELOCITY_SEED": "17"})
    assert cfg.port == 9200
    assert cfg.mode == "auto"
    assert cfg.seed == 17

    session = Session(SessionConfig.load(cfg_path, env={}))
    assert "dana" in session.accounts
    assert session.sim.config.market.margin_points == 250
    session.close()


def test_dashboard_mounted_when_ui_dir_given(session):
    from pathlib import Path
    ui_dir = Path(__file__).resolve().parent.parent / "frontend"
    client = TestClient(create_app(session, ui_dir=ui_dir))
    r = client.get("/")
    assert r.status_code == 200
    assert "<html" in r.text
    assert client.get("/dist/main.js").status_code == 200


def test_crash_recovery_replays_identical_get_responses(tmp_path):
    log_path = str(tmp_path / "events.jsonl")
    cfg = SessionConfig(mode="manual", ticks=dict(WALK), log_path=log_path)
    session = Session(cfg)
    client = TestClient(create_app(session))
    client.post("/positions", json={"account": "alice", "side": "Long",
                                    "deposit": DEPOSIT})
    client.post("/admin/step", json={"blocks": 5})
    client.post("/admin/sweep")
    client.post("/positions", json={"account": "bob", "side": "Short",
                                    "deposit": DEPOSIT})
    status = client.get("/status").json()
    first, last = status["firstBlock"], status["lastBlock"]
    snapshots = {
        "status": status,
        "accounts": client.get("/accounts").json(),
        "options": client.get("/options").json(),
        "option1": client.get("/options/1").json(),
        "prices": client.get(f"/prices?from={first}&to={last}").json(),
    }
    session.close()

    recovered = Session(SessionConfig(mode="manual", ticks=dict(WALK),
                                      log_path=log_path))
    client2 = TestClient(create_app(recovered))
    assert client2.get("/status").json() == snapshots["status"]
    assert client2.get("/accounts").json() == snapshots["accounts"]
    assert client2.get("/options").json() == snapshots["options"]
    assert client2.get("/options/1").json() == snapshots["option1"]
    assert client2.get(f"/prices?from={first}&to={last}").json() == snapshots["prices"]
    # The recovered session keeps working.
    r = client2.post("/admin/step", json={"blocks": 2})
    assert r.status_code == 200
    r = client2.post("/positions", json={"account": "carol", "side": "Long",
                                         "deposit": DEPOSIT})
    assert r.status_code == 201
    recovered.close()
