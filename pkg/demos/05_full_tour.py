"""
The canonical tour, checked against its golden transcript
=========================================================

The shipped scenario walks a visitor through every state of the
conversation table: greeting, introduction, a question, the exhibit
walk (with a staged stumble and recovery), a dance, a song, a tickle,
a farewell, and shutdown.  On the virtual clock the hour-long feel of
it runs in about a second, and the recorded transcript is byte-for-byte
identical on every run.
"""

from importlib.resources import files

from guidebot.harness import (
    TOUR_WALK,
    build_tour_scenario,
    diff_transcripts,
    play_in_proc,
)

steps = build_tour_scenario()
print(f"scenario: {len(steps)} steps over {steps[-1].t / 1000:.1f} s of session time")

result = play_in_proc(steps)

print("\nstate walk:")
previous = None
for ts, source, event, target in result.transitions:
    label = "start" if source is None else f"{source} --{event}-->"
    print(f"  [{ts / 1000:7.3f} s] {label} {target}")

walk = tuple(t[3] for t in result.transitions)
assert walk == TOUR_WALK, "the walk deviated from the canonical order"
print(f"\nvisited {len(set(walk))} distinct states in the canonical order")

# Compare against the golden recording that ships inside the package.
golden = files("guidebot.harness").joinpath(
    "data/tour.golden.jsonl").read_text(encoding="utf-8").splitlines()
problems = diff_transcripts(result.transcript, golden)
if problems:
    for p in problems:
        print(p)
    raise SystemExit("transcript deviates from golden")
print(f"transcript matches golden: {len(result.transcript)} lines")

# A second run produces the same bytes; that is the whole point of the
# virtual clock.
again = play_in_proc(steps)
assert again.transcript == result.transcript
print("second run identical")
