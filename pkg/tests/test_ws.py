import threading
import urllib.error
import urllib.request

import pytest

from guidebot.bus import Broker, InProcClient
from guidebot.bus.gateway import WsBusClient, WsGateway
from guidebot.bus.websocket import accept_key
from guidebot.clock import RealScheduler


@pytest.fixture
def gateway():
    broker = Broker()
    gw = WsGateway(broker, port=0).start()
    sched = RealScheduler()
    yield broker, gw, sched
    gw.close()
    sched.shutdown()


def test_accept_key_rfc_example():
    # value pair from the protocol document's worked example
    assert accept_key("dGhlIHNhbXBsZSBub25jZQ==") == "s3pPLMBiTxaQ9kYGzzhZRbK+xOo="


def test_ws_subscribe_receives_bus_traffic(gateway):
    broker, gw, sched = gateway
    ws = WsBusClient("127.0.0.1", gw.port, "dash")
    ws.send_op({"op": "subscribe", "pattern": "lumen.brain.state", "id": "s1"})
    ack = ws.recv_obj()
    assert ack["op"] == "ok" and ack["re"] == "s1"

    pub = InProcClient(broker, "brain", sched)
    pub.publish("lumen.brain.state", {"from": "Idle", "to": "Greeting", "seq": 1},
                kind="event")
    frame = ws.recv_obj()
    assert frame["op"] == "deliver"
    assert frame["envelope"]["key"] == "lumen.brain.state"
    assert frame["envelope"]["payload"]["to"] == "Greeting"
    ws.close()


def test_ws_publish_reaches_bus_subscribers(gateway):
    broker, gw, sched = gateway
    got, ev = [], threading.Event()
    sub = InProcClient(broker, "listener", sched)
    sub.subscribe("lumen.visual.face", lambda e: (got.append(e), ev.set()))

    ws = WsBusClient("127.0.0.1", gw.port, "dash")
    ws.send_op({"op": "publish", "id": "p1", "envelope": {
        "key": "lumen.visual.face", "kind": "event", "ts": 10, "id": "f1",
        "payload": {"azimuth": 12.5, "elevation": -3.0},
    }})
    ack = ws.recv_obj()
    assert ack["op"] == "ok"
    assert ev.wait(2)
    assert got[0].payload["azimuth"] == 12.5
    ws.close()


def test_malformed_frame_keeps_connection_open(gateway):
    _, gw, _ = gateway
    ws = WsBusClient("127.0.0.1", gw.port, "dash")
    ws.ws.send_text("this is not json")
    err = ws.recv_obj()
    assert err["op"] == "error" and err["code"] == "bad-json"
    ws.send_op({"op": "nonsense", "id": "n1"})
    err = ws.recv_obj()
    assert err["op"] == "error" and err["code"] == "bad-op"
    # still alive
    ws.send_op({"op": "subscribe", "pattern": "lumen.#", "id": "s1"})
    assert ws.recv_obj()["op"] == "ok"
    ws.close()


def test_two_ws_clients_talk_through_bus(gateway):
    _, gw, _ = gateway
    w1 = WsBusClient("127.0.0.1", gw.port, "one")
    w2 = WsBusClient("127.0.0.1", gw.port, "two")
    w2.send_op({"op": "subscribe", "pattern": "lumen.audio.speech", "id": "s"})
    assert w2.recv_obj()["op"] == "ok"
    w1.send_op({"op": "publish", "envelope": {
        "key": "lumen.audio.speech", "kind": "event", "ts": 1, "id": "u1",
        "payload": {"text": "hello robot"},
    }})
    frame = w2.recv_obj()
    assert frame["envelope"]["payload"]["text"] == "hello robot"
    w1.close()
    w2.close()


def test_static_file_serving(tmp_path):
    (tmp_path / "index.html").write_text("<h1>panel</h1>")
    (tmp_path / "app.js").write_text("console.log('hi')")
    broker = Broker()
    gw = WsGateway(broker, port=0, static_dir=str(tmp_path)).start()
    try:
        base = f"http://127.0.0.1:{gw.port}"
        with urllib.request.urlopen(f"{base}/") as r:
            assert b"panel" in r.read()
        with urllib.request.urlopen(f"{base}/app.js") as r:
            assert r.headers["Content-Type"].startswith(("text/javascript", "application/javascript"))
        with pytest.raises(urllib.error.HTTPError) as exc:
            urllib.request.urlopen(f"{base}/missing.js")
        assert exc.value.code == 404
        with pytest.raises(urllib.error.HTTPError) as exc:
            urllib.request.urlopen(f"{base}/../secret")
        assert exc.value.code in (403, 404)
    finally:
        gw.close()


def test_no_static_dir_404s():
    broker = Broker()
    gw = WsGateway(broker, port=0).start()
    try:
        with pytest.raises(urllib.error.HTTPError) as exc:
            urllib.request.urlopen(f"http://127.0.0.1:{gw.port}/")
        assert exc.value.code == 404
    finally:
        gw.close()
