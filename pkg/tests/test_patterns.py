import itertools

import pytest
from hypothesis import given, strategies as st

from guidebot.bus import (
    BindingPattern,
    InvalidKey,
    InvalidPattern,
    RoutingKey,
    topic_match,
)
from oracles import topic_match_oracle


def m(pattern: str, key: str) -> bool:
    return topic_match(BindingPattern.parse(pattern), RoutingKey.parse(key))


class TestParsing:
    def test_simple_key(self):
        k = RoutingKey.parse("avatar.nao.data.camera")
        assert k.words == ("avatar", "nao", "data", "camera")
        assert str(k) == "avatar.nao.data.camera"

    def test_key_rejects_wildcards(self):
        with pytest.raises(InvalidKey):
            RoutingKey.parse("avatar.*.camera")
        with pytest.raises(InvalidKey):
            RoutingKey.parse("avatar.#")

    @pytest.mark.parametrize("bad", ["", ".", "a..b", "a.", ".a", "a.B", "a b", "a.-b"])
    def test_key_rejects_malformed(self, bad):
        with pytest.raises(InvalidKey):
            RoutingKey.parse(bad)

    def test_pattern_accepts_wildcards(self):
        p = BindingPattern.parse("avatar.*.data.#")
        assert p.words == ("avatar", "*", "data", "#")
        assert p.render() == "avatar.*.data.#"

    @pytest.mark.parametrize("bad", ["", "a..b", "a.**", "a.*b", "#a", "a.##.b"])
    def test_pattern_rejects_malformed(self, bad):
        with pytest.raises(InvalidPattern):
            BindingPattern.parse(bad)

    def test_first_word_literal(self):
        assert BindingPattern.parse("avatar.#").first_word_literal == "avatar"
        assert BindingPattern.parse("#").first_word_literal is None
        assert BindingPattern.parse("*.data").first_word_literal is None


class TestMatchExamples:
    def test_exact(self):
        assert m("avatar.nao.data.camera", "avatar.nao.data.camera")
        assert not m("avatar.nao.data.camera", "avatar.nao.data.sonar")

    def test_star_one_word(self):
        assert m("avatar.*.data.camera", "avatar.nao.data.camera")
        assert not m("avatar.*", "avatar.nao.data")
        assert not m("avatar.*", "avatar")

    def test_hash_zero_or_more(self):
        assert m("avatar.#", "avatar.nao.data.camera")
        assert m("avatar.#", "avatar")
        assert m("#", "a")
        assert m("#", "a.b.c.d.e")

    def test_hash_in_middle(self):
        assert m("a.#.z", "a.z")
        assert m("a.#.z", "a.b.c.z")
        assert not m("a.#.z", "a.b.c")

    def test_mixed(self):
        assert m("*.#", "a")
        assert m("*.#", "a.b.c")
        assert not m("*.*", "a")
        assert m("#.c", "a.b.c")
        assert not m("#.c", "c.a")

    def test_multiple_hashes(self):
        assert m("#.b.#", "a.b.c")
        assert m("#.b.#", "b")
        assert not m("#.b.#", "a.c")


WORDS = ["a", "b", "c"]
PATTERN_SYMBOLS = ["a", "b", "c", "*", "#"]


def all_keys(max_words: int):
    for n in range(1, max_words + 1):
        yield from (".".join(ws) for ws in itertools.product(WORDS, repeat=n))


def valid_patterns(max_words: int):
    for n in range(1, max_words + 1):
        for ws in itertools.product(PATTERN_SYMBOLS, repeat=n):
            yield ".".join(ws)


@given(
    st.lists(st.sampled_from(PATTERN_SYMBOLS), min_size=1, max_size=7),
    st.lists(st.sampled_from(WORDS), min_size=1, max_size=7),
)
def test_random_match_against_oracle(pwords, kwords):
    ps, ks = ".".join(pwords), ".".join(kwords)
    assert m(ps, ks) == topic_match_oracle(ps, ks)


@given(st.lists(st.from_regex(r"[a-z0-9_]{1,8}", fullmatch=True), min_size=1, max_size=6))
def test_key_roundtrip(words):
    key = ".".join(words)
    assert str(RoutingKey.parse(key)) == key
