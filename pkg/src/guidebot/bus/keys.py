"""Routing keys, binding patterns, and topic matching.

Keys are dot-separated words of lowercase alphanumerics and underscores.
Patterns additionally allow `*` (matches exactly one word) and `#` (matches
zero or more words).  Matching follows the usual topic-exchange semantics.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

_WORD_RE = re.compile(r"^[a-z0-9_]+$")


class InvalidKey(ValueError):
    """Routing key failed validation."""


class InvalidPattern(ValueError):
    """Binding pattern failed validation."""


@dataclass(frozen=True)
class RoutingKey:
    """Publisher-side address: one or more words, rendered dot-separated."""

    words: tuple[str, ...]

    def __post_init__(self):
        if not self.words:
            raise InvalidKey("routing key needs at least one word")
        for w in self.words:
            if not _WORD_RE.match(w):
                raise InvalidKey(f"bad routing key word: {w!r}")

    @classmethod
    def parse(cls, text: str) -> "RoutingKey":
        if not isinstance(text, str):
            raise InvalidKey(f"routing key must be a string, got {type(text).__name__}")
        return cls(tuple(text.split(".")))

    def render(self) -> str:
        return ".".join(self.words)

    def __str__(self) -> str:
        return self.render()


@dataclass(frozen=True)
class BindingPattern:
    """Subscriber-side filter: words plus `*` and `#` wildcards."""

    words: tuple[str, ...]

    def __post_init__(self):
        if not self.words:
            raise InvalidPattern("binding pattern needs at least one token")
        for w in self.words:
            if w not in ("*", "#") and not _WORD_RE.match(w):
                raise InvalidPattern(f"bad pattern token: {w!r}")

    @classmethod
    def parse(cls, text: str) -> "BindingPattern":
        if not isinstance(text, str):
            raise InvalidPattern(f"pattern must be a string, got {type(text).__name__}")
        return cls(tuple(text.split(".")))

    def render(self) -> str:
        return ".".join(self.words)

    def __str__(self) -> str:
        return self.render()

    @property
    def first_word_literal(self) -> str | None:
        """First token if it is a literal word, else None."""
        w = self.words[0]
        return None if w in ("*", "#") else w


def topic_match(pattern: BindingPattern | str, key: RoutingKey | str) -> bool:
    """True when the pattern's filter accepts the key.

    `*` consumes exactly one key word, `#` consumes zero or more.  Iterative
    two-pointer matcher with backtracking over the last `#`, the standard
    glob algorithm lifted from characters to words.
    """
    if isinstance(pattern, str):
        pattern = BindingPattern.parse(pattern)
    if isinstance(key, str):
        key = RoutingKey.parse(key)
    p, k = pattern.words, key.words
    pi = ki = 0
    star_pi = -1  # position just after the most recent '#'
    star_ki = 0
    while ki < len(k):
        if pi < len(p) and (p[pi] == "*" or p[pi] == k[ki]):
            pi += 1
            ki += 1
        elif pi < len(p) and p[pi] == "#":
            star_pi = pi + 1
            star_ki = ki
            pi += 1
        elif star_pi >= 0:
            # let the last '#' absorb one more key word
            star_ki += 1
            pi = star_pi
            ki = star_ki
        else:
            return False
    while pi < len(p) and p[pi] == "#":
        pi += 1
    return pi == len(p)


# Routing-key registry used by the shipped components.  Only the avatar/lumen
# namespace split is load-bearing; the concrete keys are this project's
# documented convention.
KEY_CAMERA = "avatar.nao.data.camera"
KEY_SONAR = "avatar.nao.data.sonar"
KEY_BATTERY = "avatar.nao.data.battery"
KEY_TACTILE = "avatar.nao.data.tactile"
KEY_JOINTS = "avatar.nao.data.joints"
KEY_COMMAND = "avatar.nao.command"
KEY_REPLY = "avatar.nao.reply"
KEY_FACE = "lumen.visual.face"
KEY_SPEECH = "lumen.audio.speech"
KEY_HEAD_MOTION = "lumen.motion.head"
KEY_BRAIN_STATE = "lumen.brain.state"
KEY_BRAIN_EVENT = "lumen.brain.event"
KEY_BRAIN_CONTROL = "lumen.brain.control"

#: Namespaces a binding pattern must open with when the broker enforces the
#: onboarding rule.
ALLOWED_NAMESPACES = ("avatar", "lumen")
