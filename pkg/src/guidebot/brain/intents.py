"""Keyword intent parser for visitor utterances.

Deliberately simple: case-insensitive whole-word keyword matching with a
fixed priority order, so "hi, can you dance?" is a dance request rather
than a greeting.  Anything unmatched comes back as `unknown` with zero
confidence, which the conversation table answers with a stock reply.
"""

from __future__ import annotations

import re
from dataclasses import dataclass


@dataclass(frozen=True)
class Intent:
    name: str
    confidence: float


def _kw(*words):
    # whole words or phrases; spaces match any whitespace run
    parts = [re.escape(w).replace(r"\ ", r"\s+") for w in words]
    return re.compile(r"\b(?:%s)\b" % "|".join(parts), re.IGNORECASE)


# checked in order; first hit wins
_RULES: tuple[tuple[str, re.Pattern], ...] = (
    ("request_dance", _kw("dance", "dancing")),
    ("request_sing", _kw("sing", "singing", "song")),
    ("ask_intro", _kw("who are you", "introduce", "your name")),
    ("ask_exhibit", _kw("exhibit", "project", "demo")),
    ("goodbye", _kw("bye", "goodbye", "farewell", "see you")),
    ("greet", _kw("hello", "hi", "hey")),
)

INTENTS = tuple(name for name, _ in _RULES) + ("unknown",)


def parse_intent(text) -> Intent:
    if isinstance(text, str):
        for name, pattern in _RULES:
            if pattern.search(text):
                return Intent(name, 1.0)
    return Intent("unknown", 0.0)
