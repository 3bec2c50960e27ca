import threading

import pytest

from guidebot.bus import Broker, BrokerError, Envelope, InProcClient, RoutingKey
from guidebot.clock import RealScheduler, VirtualScheduler


@pytest.fixture
def vbus():
    broker = Broker()
    sched = VirtualScheduler()

    def client(name):
        return InProcClient(broker, name, sched)

    return broker, sched, client


def test_single_match_single_delivery(vbus):
    _, _, client = vbus
    pub, sub = client("pub"), client("sub")
    got = []
    sub.subscribe("avatar.#", got.append)
    pub.publish("avatar.nao.data.camera", {"seq": 0})
    assert len(got) == 1


def test_no_subscribers_is_fire_and_forget(vbus):
    _, _, client = vbus
    pub = client("pub")
    env = pub.publish("avatar.nao.data.camera", {"seq": 0})
    assert env.id  # publish succeeded, nothing delivered, no error


def test_duplicate_subscriptions_deliver_twice(vbus):
    _, _, client = vbus
    pub, sub = client("pub"), client("sub")
    got = []
    s1 = sub.subscribe("avatar.#", got.append)
    s2 = sub.subscribe("avatar.#", got.append)
    assert s1 != s2
    pub.publish("avatar.nao.data.sonar", {})
    assert len(got) == 2


def test_unsubscribe_stops_delivery(vbus):
    _, _, client = vbus
    pub, sub = client("pub"), client("sub")
    got = []
    sid = sub.subscribe("avatar.#", got.append)
    sub.unsubscribe(sid)
    pub.publish("avatar.nao.data.sonar", {})
    assert got == []


def test_unsubscribe_twice_errors(vbus):
    _, _, client = vbus
    sub = vbus[2]("sub")
    sid = sub.subscribe("avatar.#", lambda e: None)
    sub.unsubscribe(sid)
    with pytest.raises((BrokerError, KeyError)):
        sub.unsubscribe(sid)


def test_remove_one_sub_other_still_delivers(vbus):
    _, _, client = vbus
    pub, sub = client("pub"), client("sub")
    kept, dropped = [], []
    sub.subscribe("avatar.#", kept.append)
    sid = sub.subscribe("avatar.#", dropped.append)
    sub.unsubscribe(sid)
    pub.publish("avatar.nao.data.sonar", {})
    assert len(kept) == 1 and dropped == []


def test_no_retroactive_delivery(vbus):
    _, _, client = vbus
    pub, sub = client("pub"), client("sub")
    pub.publish("avatar.nao.data.sonar", {"seq": 0})
    got = []
    sub.subscribe("avatar.#", got.append)
    assert got == []


def test_publish_after_close_fails(vbus):
    _, _, client = vbus
    pub = client("pub")
    pub.close()
    with pytest.raises(BrokerError) as exc:
        pub.publish("avatar.nao.data.sonar", {})
    assert exc.value.code == "closed"


def test_oversized_payload_rejected(vbus):
    _, _, client = vbus
    pub = client("pub")
    with pytest.raises(BrokerError) as exc:
        pub.publish("avatar.nao.data.camera", {"blob": "x" * (1 << 20)})
    assert exc.value.code == "payload-too-large"


def test_namespace_policy():
    broker = Broker(enforce_namespaces=True)
    sched = VirtualScheduler()
    sub = InProcClient(broker, "sub", sched)
    sub.subscribe("avatar.nao.#", lambda e: None)
    sub.subscribe("lumen.#", lambda e: None)
    with pytest.raises(BrokerError) as exc:
        sub.subscribe("robot.#", lambda e: None)
    assert exc.value.code == "namespace-violation"
    with pytest.raises(BrokerError):
        sub.subscribe("#", lambda e: None)  # leading wildcard is not a namespace


def test_namespace_policy_off_by_default():
    broker = Broker()
    sub = InProcClient(broker, "sub", VirtualScheduler())
    sub.subscribe("#", lambda e: None)
    sub.subscribe("robot.#", lambda e: None)


def test_per_publisher_fifo_five_publishers(vbus):
    _, _, client = vbus
    sub = client("sub")
    got = []
    sub.subscribe("#", got.append)
    pubs = [client(f"pub{i}") for i in range(5)]
    for n in range(100):
        for i, p in enumerate(pubs):
            p.publish(f"stream{i}.data", {"src": i, "n": n})
    assert len(got) == 500
    per_source = {}
    for env in got:
        per_source.setdefault(env.payload["src"], []).append(env.payload["n"])
    for src, ns in per_source.items():
        assert ns == sorted(ns), f"stream {src} out of order"
        assert len(ns) == 100


def test_concurrent_publishers_real_threads():
    broker = Broker()
    sched = RealScheduler()
    sub = InProcClient(broker, "sub", sched)
    got = []
    lock = threading.Lock()

    def on_env(env):
        with lock:
            got.append((env.payload["src"], env.payload["n"]))

    sub.subscribe("#", on_env)
    n_each = 200

    def run(i):
        c = InProcClient(broker, f"p{i}", sched)
        for n in range(n_each):
            c.publish("load.test", {"src": i, "n": n})

    threads = [threading.Thread(target=run, args=(i,)) for i in range(5)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    sched.shutdown()
    assert len(got) == 5 * n_each
    per_source = {}
    for src, n in got:
        per_source.setdefault(src, []).append(n)
    for src, ns in per_source.items():
        assert ns == sorted(ns) and len(ns) == n_each


def test_ts_never_decreases_per_publisher(vbus):
    broker, sched, client = vbus
    pub, sub = client("pub"), client("sub")
    got = []
    sub.subscribe("#", got.append)
    sched.run_until(100)
    pub.publish("t.a", {})
    # hand-build an envelope with a stale ts; broker clamps it forward
    stale = Envelope(key=RoutingKey.parse("t.b"), kind="data", ts=5, id="x",
                     payload={}, reply_to=None)
    pub.publish_envelope(stale)
    assert [e.ts for e in got] == [100, 100]
