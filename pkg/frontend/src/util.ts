/** Small scheduling helpers, injectable so tests can run on fake clocks. */

export interface Timers {
  now(): number;
  setTimeout(fn: () => void, ms: number): unknown;
  clearTimeout(handle: unknown): void;
}

export const realTimers: Timers = {
  now: () => Date.now(),
  setTimeout: (fn, ms) => setTimeout(fn, ms),
  clearTimeout: (h) => clearTimeout(h as Parameters<typeof clearTimeout>[0]),
};

/**
 * Rate limiter with a leading edge and a trailing edge.
 *
 * The first call runs immediately; while calls keep arriving faster than
 * `intervalMs`, the newest one is parked and fires when the window elapses,
 * so a continuous stream settles at exactly one call per interval and the
 * final position is never dropped.
 */
export class Throttle {
  private last = Number.NEGATIVE_INFINITY;
  private pending: (() => void) | null = null;
  private handle: unknown = null;

  constructor(private intervalMs: number, private timers: Timers) {}

  run(fn: () => void): void {
    const now = this.timers.now();
    const wait = this.last + this.intervalMs - now;
    if (wait <= 0 && this.handle === null) {
      this.last = now;
      fn();
      return;
    }
    this.pending = fn;
    if (this.handle === null) {
      this.handle = this.timers.setTimeout(() => this.fire(), Math.max(wait, 0));
    }
  }

  /** Drop anything parked without running it. */
  cancel(): void {
    if (this.handle !== null) this.timers.clearTimeout(this.handle);
    this.handle = null;
    this.pending = null;
  }

  private fire(): void {
    this.handle = null;
    const fn = this.pending;
    this.pending = null;
    if (fn !== null) {
      this.last = this.timers.now();
      fn();
    }
  }
}
