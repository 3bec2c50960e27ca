"""Replay, measurement, and demonstration tooling.

`scenario` replays scripted visitor sessions and records diffable
transcripts, `bench` measures bus round-trip latency, and `demo` runs the
whole stack against the canonical tour script.
"""

from .bench import BenchError, LatencyStats, percentile, run_loopback_bench
from .scenario import (
    RECORDED_PATTERNS,
    TOUR_WALK,
    ScenarioError,
    ScenarioResult,
    Step,
    build_tour_scenario,
    diff_transcripts,
    dump_scenario,
    load_scenario,
    parse_steps,
    play_in_proc,
    play_over_bus,
    read_transcript,
    scenario_duration_ms,
    write_transcript,
)
from .demo import run_demo

__all__ = [
    "BenchError",
    "LatencyStats",
    "RECORDED_PATTERNS",
    "ScenarioError",
    "ScenarioResult",
    "Step",
    "TOUR_WALK",
    "build_tour_scenario",
    "diff_transcripts",
    "dump_scenario",
    "load_scenario",
    "parse_steps",
    "percentile",
    "play_in_proc",
    "play_over_bus",
    "read_transcript",
    "run_demo",
    "run_loopback_bench",
    "scenario_duration_ms",
    "write_transcript",
]
