import threading
import time

import pytest

from guidebot.clock import RealScheduler, VirtualScheduler


class TestVirtualScheduler:
    def test_starts_at_zero(self):
        s = VirtualScheduler()
        assert s.now_ms() == 0
        assert s.virtual

    def test_fires_in_time_order(self):
        s = VirtualScheduler()
        fired = []
        s.call_later(30, lambda: fired.append(("b", s.now_ms())))
        s.call_later(10, lambda: fired.append(("a", s.now_ms())))
        s.call_later(20, lambda: fired.append(("mid", s.now_ms())))
        s.run_until(100)
        assert fired == [("a", 10), ("mid", 20), ("b", 30)]
        assert s.now_ms() == 100

    def test_same_time_fires_in_submission_order(self):
        s = VirtualScheduler()
        fired = []
        for tag in "abcde":
            s.call_later(5, lambda t=tag: fired.append(t))
        s.run_until(5)
        assert fired == list("abcde")

    def test_cancel(self):
        s = VirtualScheduler()
        fired = []
        h = s.call_later(10, lambda: fired.append("no"))
        h.cancel()
        s.run_until(50)
        assert fired == []

    def test_periodic(self):
        s = VirtualScheduler()
        ticks = []
        s.every(100, lambda: ticks.append(s.now_ms()))
        s.run_until(1000)
        assert ticks == [100, 200, 300, 400, 500, 600, 700, 800, 900, 1000]

    def test_periodic_cancel_stops_future_ticks(self):
        s = VirtualScheduler()
        ticks = []
        h = s.every(10, lambda: ticks.append(s.now_ms()))
        s.run_until(30)
        h.cancel()
        s.run_until(100)
        assert ticks == [10, 20, 30]

    def test_callback_scheduling_more_work_same_tick(self):
        s = VirtualScheduler()
        order = []

        def first():
            order.append("first")
            s.call_later(0, lambda: order.append("chained"))

        s.call_later(10, first)
        s.run_until(10)
        assert order == ["first", "chained"]

    def test_run_until_idle(self):
        s = VirtualScheduler()
        hits = []
        s.call_later(5, lambda: hits.append(1))
        s.call_later(500, lambda: hits.append(2))
        s.run_until_idle(limit_ms=10_000)
        assert hits == [1, 2]
        assert s.pending() == 0

    def test_call_at_in_past_clamps_to_now(self):
        s = VirtualScheduler()
        s.run_until(100)
        fired = []
        s.call_at(50, lambda: fired.append(s.now_ms()))
        s.run_until(100)
        assert fired == [100]


class TestRealScheduler:
    def test_now_advances(self):
        s = RealScheduler()
        t0 = s.now_ms()
        time.sleep(0.02)
        assert s.now_ms() >= t0 + 15
        s.shutdown()

    def test_call_later(self):
        s = RealScheduler()
        ev = threading.Event()
        s.call_later(30, ev.set)
        assert ev.wait(2)
        s.shutdown()

    def test_every_ticks_and_cancels(self):
        s = RealScheduler()
        hits = []
        lock = threading.Lock()

        def tick():
            with lock:
                hits.append(time.monotonic())

        h = s.every(20, tick)
        time.sleep(0.25)
        h.cancel()
        with lock:
            n = len(hits)
        assert 6 <= n <= 20, n
        time.sleep(0.1)
        with lock:
            assert len(hits) <= n + 1  # at most one straggler after cancel
        s.shutdown()

    def test_cancel_one_shot(self):
        s = RealScheduler()
        fired = threading.Event()
        h = s.call_later(50, fired.set)
        h.cancel()
        assert not fired.wait(0.15)
        s.shutdown()
