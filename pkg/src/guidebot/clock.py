"""Time sources and task scheduling.

Every component schedules its work (sensor ticks, command completions, FSM
timers) through the small scheduler interface below, so the same component
code runs either against wall time or against a deterministic virtual clock.
Times are integer milliseconds throughout; the virtual clock fires due tasks
in (time, creation order) so two runs of the same setup produce identical
event sequences.
"""

from __future__ import annotations

import heapq
import itertools
import threading
import time


class TaskHandle:
    """Cancellation token for a scheduled or periodic task."""

    __slots__ = ("_cancelled",)

    def __init__(self):
        self._cancelled = False

    def cancel(self):
        self._cancelled = True

    @property
    def cancelled(self) -> bool:
        return self._cancelled


class Scheduler:
    """Interface shared by VirtualScheduler and RealScheduler."""

    #: True when time only advances by explicit stepping.
    virtual: bool = False

    def now_ms(self) -> int:
        raise NotImplementedError

    def call_at(self, t_ms: int, fn, *args) -> TaskHandle:
        raise NotImplementedError

    def call_later(self, delay_ms: int, fn, *args) -> TaskHandle:
        return self.call_at(self.now_ms() + max(0, int(delay_ms)), fn, *args)

    def every(self, period_ms: int, fn, *args) -> TaskHandle:
        """Run fn repeatedly, first firing one period from now."""
        raise NotImplementedError

    def shutdown(self):
        """Stop periodic work; no-op for the virtual scheduler."""


class VirtualScheduler(Scheduler):
    """Deterministic discrete-event scheduler.

    Tasks fire only inside run_until()/run_for(), strictly ordered by
    (due time, insertion sequence); periodic tasks keep the sequence number
    of their registration, so coincident periodics fire in registration
    order.  now_ms() is the due time of the task currently firing, so work
    scheduled from inside a callback lands at a well-defined instant.
    """

    virtual = True

    def __init__(self, start_ms: int = 0):
        self._now = int(start_ms)
        self._heap: list = []
        self._seq = itertools.count()

    def now_ms(self) -> int:
        return self._now

    def call_at(self, t_ms: int, fn, *args) -> TaskHandle:
        handle = TaskHandle()
        t = max(int(t_ms), self._now)
        heapq.heappush(self._heap, (t, next(self._seq), handle, fn, args))
        return handle

    def every(self, period_ms: int, fn, *args) -> TaskHandle:
        period = int(period_ms)
        if period <= 0:
            raise ValueError("period_ms must be positive")
        handle = TaskHandle()
        # the sequence number is pinned at registration so that periodic
        # tasks due at the same instant always fire in registration order,
        # no matter when each one last re-queued itself
        seq = next(self._seq)

        def fire(due):
            if handle.cancelled:
                return
            fn(*args)
            if not handle.cancelled:
                heapq.heappush(
                    self._heap, (due + period, seq, handle, fire, (due + period,)))

        heapq.heappush(
            self._heap, (self._now + period, seq, handle, fire, (self._now + period,)))
        return handle

    def run_until(self, t_ms: int):
        """Fire every task due at or before t_ms, then set the clock to t_ms."""
        t_ms = int(t_ms)
        while self._heap and self._heap[0][0] <= t_ms:
            due, _, handle, fn, args = heapq.heappop(self._heap)
            self._now = due
            if not handle.cancelled:
                fn(*args)
        if t_ms > self._now:
            self._now = t_ms

    def run_for(self, dt_ms: int):
        self.run_until(self._now + int(dt_ms))

    def run_until_idle(self, limit_ms: int | None = None):
        """Drain the queue; stop at limit_ms if given (periodic tasks never drain)."""
        while self._heap:
            due = self._heap[0][0]
            if limit_ms is not None and due > limit_ms:
                self._now = max(self._now, int(limit_ms))
                return
            self.run_until(due)

    def pending(self) -> int:
        return sum(1 for (_, _, h, _, _) in self._heap if not h.cancelled)


class _PeriodicThread(threading.Thread):
    """Drift-corrected periodic runner: one thread per stream."""

    def __init__(self, period_ms: int, fn, args, handle: TaskHandle):
        super().__init__(daemon=True)
        self.period = period_ms / 1000.0
        self.fn = fn
        self.args = args
        self.handle = handle
        self._halt = threading.Event()

    def run(self):
        start = time.monotonic()
        k = 1
        while not self._halt.is_set() and not self.handle.cancelled:
            target = start + k * self.period
            delay = target - time.monotonic()
            if delay > 0 and self._halt.wait(delay):
                break
            if self.handle.cancelled:
                break
            self.fn(*self.args)
            k += 1

    def stop(self):
        self._halt.set()


class RealScheduler(Scheduler):
    """Wall-clock scheduler: periodic tasks get their own thread, one-shot
    tasks ride threading.Timer.  now_ms() is epoch milliseconds."""

    virtual = False

    def __init__(self):
        self._threads: list[_PeriodicThread] = []
        self._timers: list[threading.Timer] = []
        self._lock = threading.Lock()

    def now_ms(self) -> int:
        return int(time.time() * 1000)

    def call_at(self, t_ms: int, fn, *args) -> TaskHandle:
        return self.call_later(t_ms - self.now_ms(), fn, *args)

    def call_later(self, delay_ms: int, fn, *args) -> TaskHandle:
        handle = TaskHandle()

        def fire():
            if not handle.cancelled:
                fn(*args)

        timer = threading.Timer(max(0, delay_ms) / 1000.0, fire)
        timer.daemon = True
        with self._lock:
            self._timers = [t for t in self._timers if t.is_alive()]
            self._timers.append(timer)
        timer.start()
        return handle

    def every(self, period_ms: int, fn, *args) -> TaskHandle:
        if period_ms <= 0:
            raise ValueError("period_ms must be positive")
        handle = TaskHandle()
        thread = _PeriodicThread(period_ms, fn, args, handle)
        with self._lock:
            self._threads.append(thread)
        thread.start()
        return handle

    def shutdown(self):
        with self._lock:
            threads = list(self._threads)
            timers = list(self._timers)
            self._threads.clear()
            self._timers.clear()
        for t in timers:
            t.cancel()
        for th in threads:
            th.stop()
        for th in threads:
            th.join(timeout=1.0)
