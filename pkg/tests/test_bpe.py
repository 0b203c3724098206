from __future__ import annotations

import random

import pytest
from hypothesis import given, strategies as st

from oracles import bpe_oracle
from typometrics.bpe import (TokenizerError, TokenizerModel, TokenStream, fertility,
                             pretokenize, train_bpe)


def test_single_merge_example():
    m = train_bpe(["ab ab ac"], 4)
    assert m.merges == [("a", "b")]
    assert {"a", "b", "c", "ab"} <= set(m.vocab)


def test_no_capacity_for_merges():
    m = train_bpe(["x y z"], 3)
    assert m.merges == [] and sorted(m.vocab) == ["x", "y", "z"]


def test_only_candidate_pair():
    m = train_bpe(["aa aa"], 2)
    assert m.merges == [("a", "a")]


def test_encode_examples():
    m = train_bpe(["ab ab ac"], 4)
    s = m.encode("ab ac")
    assert m.tokens(s) == ["ab", "a", "c"]
    assert s.word_starts == [True, True, False]
    z = train_bpe(["x y z"], 3)
    assert z.tokens(z.encode("xyz")) == ["x", "y", "z"]
    assert len(m.encode("")) == 0


def test_decode_examples():
    m = train_bpe(["ab ab ac"], 4)
    assert m.decode(m.encode("ab ac")) == "ab ac"
    assert m.decode(TokenStream()) == ""
    bad = len(m.vocab) + 5
    with pytest.raises(TokenizerError, match=str(bad)):
        m.decode(TokenStream([bad], [True]))


def test_fertility_examples():
    m = train_bpe(["ab ab ac"], 4)
    assert m.truncated(1).merges == [("a", "b")]
    assert fertility(m, ["ab ac"]) == 1.5
    z = train_bpe(["a b c"], 3)
    assert fertility(z, ["a b c a"]) == 1.0
    z = train_bpe(["a b c"], 3)
    assert fertility(z, ["abc"]) == 3.0
    with pytest.raises(TokenizerError, match="no words in corpus"):
        fertility(z, ["   ", ""])


def test_errors():
    with pytest.raises(TokenizerError, match="empty corpus"):
        train_bpe(["", "  "], 10)
    with pytest.raises(TokenizerError, match="at least 3"):
        train_bpe(["abc"], 2)


def test_unknown_symbol_gets_reserved_id():
    m = train_bpe(["ab ab"], 3)
    s = m.encode("abq")
    assert s.ids[-1] == m.unk_id == len(m.vocab)
    assert m.decode(s) == "ab�"


def test_punct_split_rule():
    assert pretokenize("Hi, there!", "whitespace+punct-split") == ["Hi", ",", "there", "!"]
    with pytest.raises(TokenizerError):
        pretokenize("x", "bogus")


def test_matches_textbook_trainer_on_random_corpora():
    rng = random.Random(1)
    for _ in range(200):
        lines = [" ".join("".join(rng.choice("abcd") for _ in range(rng.randint(1, 6)))
                          for _ in range(rng.randint(1, 6))) for _ in range(rng.randint(1, 5))]
        target = rng.randint(4, 30)
        m = train_bpe(lines, target)
        vocab, merges = bpe_oracle(lines, target)
        assert m.merges == merges
        assert m.vocab == vocab


def test_serialization_round_trip(tmp_path):
    m = train_bpe(["the cat sat on the mat", "the hat"], 20)
    path = tmp_path / "m.json"
    m.save(path)
    again = TokenizerModel.load(path)
    assert again.dumps() == m.dumps()
    assert train_bpe(["the cat sat on the mat", "the hat"], 20).dumps() == m.dumps()


def test_model_invariants():
    m = train_bpe(["lowest lower newest widest low low"], 25)
    m.check()
    assert len(m.vocab) <= m.vocab_size_target
    assert sorted(m.token_to_id.values()) == list(range(len(m.vocab)))
    for a, b in m.merges:
        assert a in m.token_to_id and b in m.token_to_id


words = st.text(alphabet="abcde", min_size=1, max_size=8)
lines = st.lists(words, min_size=1, max_size=8).map(" ".join)


@given(corpus=st.lists(lines, min_size=1, max_size=6), target=st.integers(5, 40),
       probe=lines)
def test_round_trip_and_monotone_segmentation(corpus, target, probe):
    m = train_bpe(corpus, target)
    text = " ".join(probe.split())
    if all(ch in m.token_to_id for ch in text.replace(" ", "")):
        assert m.decode(m.encode(text)) == text
    full = len(m.encode(probe))
    for k in range(len(m.merges) + 1):
        assert len(m.truncated(k).encode(probe)) >= full
    assert fertility(m, corpus) >= 1.0
