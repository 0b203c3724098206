"""Monolingual character-level BPE: training, encoding, decoding, fertility."""

from __future__ import annotations

import heapq
import json
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from itertools import groupby
from pathlib import Path
from typing import Iterable, Iterator

FORMAT_VERSION = 1
PRETOKENIZER_RULES = ("whitespace", "whitespace+punct-split")
UNKNOWN_SYMBOL = "�"

Pair = tuple[str, str]


class TokenizerError(ValueError):
    pass


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch)[0] in "PS"


def pretokenize(text: str, rule: str = "whitespace") -> list[str]:
    """Split a line into pretokens (words)."""
    words = text.split()
    if rule == "whitespace":
        return words
    if rule != "whitespace+punct-split":
        raise TokenizerError(f"unknown pretokenizer rule {rule!r}")
    out = []
    for w in words:
        out.extend("".join(g) for _, g in groupby(w, key=_is_punct))
    return out


@dataclass
class TokenStream:
    ids: list[int] = field(default_factory=list)
    word_starts: list[bool] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.ids)

    def __post_init__(self):
        if len(self.ids) != len(self.word_starts):
            raise ValueError("ids and word_starts differ in length")
        if self.ids and not self.word_starts[0]:
            raise ValueError("first token of a nonempty stream must start a word")

    def extend(self, other: TokenStream) -> None:
        self.ids.extend(other.ids)
        self.word_starts.extend(other.word_starts)

    @property
    def word_count(self) -> int:
        return sum(self.word_starts)


class TokenizerModel:
    """Vocabulary plus ordered merges.

    Ids ``0 .. len(vocab)-1`` are the vocabulary; ``unk_id == len(vocab)`` is
    reserved for base symbols never seen in training and is not part of the
    vocabulary.
    """

    def __init__(self, vocab: list[str], merges: list[Pair], vocab_size_target: int,
                 pretokenizer_rule: str = "whitespace"):
        if pretokenizer_rule not in PRETOKENIZER_RULES:
            raise TokenizerError(f"unknown pretokenizer rule {pretokenizer_rule!r}")
        self.vocab = list(vocab)
        self.merges = [tuple(m) for m in merges]
        self.vocab_size_target = vocab_size_target
        self.pretokenizer_rule = pretokenizer_rule
        self.token_to_id = {t: i for i, t in enumerate(self.vocab)}
        if len(self.token_to_id) != len(self.vocab):
            raise TokenizerError("duplicate token in vocabulary")
        self._ranks = {m: r for r, m in enumerate(self.merges)}
        self._cache: dict[str, tuple[int, ...]] = {}

    @property
    def unk_id(self) -> int:
        return len(self.vocab)

    def __len__(self) -> int:
        return len(self.vocab)

    def check(self) -> None:
        """Raise TokenizerError unless the model invariants hold."""
        if len(self.vocab) > self.vocab_size_target:
            raise TokenizerError("vocabulary exceeds vocab_size_target")
        n_base = len(self.vocab) - len(_replay(self.vocab[:0], self.merges))
        replayed = _replay(self.vocab[:n_base], self.merges)
        if replayed != self.vocab:
            raise TokenizerError("replaying merges does not reproduce the vocabulary")
        for left, right in self.merges:
            if left not in self.token_to_id or right not in self.token_to_id:
                raise TokenizerError(f"merge part missing from vocabulary: {(left, right)!r}")

    def _segment(self, word: str) -> tuple[int, ...]:
        cached = self._cache.get(word)
        if cached is not None:
            return cached
        symbols = list(word)
        ranks = self._ranks
        while len(symbols) > 1:
            best = None
            best_rank = None
            for pair in zip(symbols, symbols[1:]):
                r = ranks.get(pair)
                if r is not None and (best_rank is None or r < best_rank):
                    best, best_rank = pair, r
            if best is None:
                break
            symbols = _merge_symbols(symbols, best)
        unk = self.unk_id
        ids = tuple(self.token_to_id.get(s, unk) for s in symbols)
        if len(self._cache) < 1_000_000:
            self._cache[word] = ids
        return ids

    def encode(self, text: str) -> TokenStream:
        ids: list[int] = []
        starts: list[bool] = []
        for word in pretokenize(text, self.pretokenizer_rule):
            seg = self._segment(word)
            ids.extend(seg)
            starts.append(True)
            starts.extend([False] * (len(seg) - 1))
        return TokenStream(ids, starts)

    def decode(self, stream: TokenStream) -> str:
        parts = []
        n = len(self.vocab)
        for i, (tid, start) in enumerate(zip(stream.ids, stream.word_starts)):
            if tid < 0 or tid > n:
                raise TokenizerError(f"unknown token id {tid}")
            if start and i:
                parts.append(" ")
            parts.append(UNKNOWN_SYMBOL if tid == n else self.vocab[tid])
        return "".join(parts)

    def tokens(self, stream: TokenStream) -> list[str]:
        return [UNKNOWN_SYMBOL if i == self.unk_id else self.vocab[i] for i in stream.ids]

    def to_dict(self) -> dict:
        return {
            "version": FORMAT_VERSION,
            "pretokenizer_rule": self.pretokenizer_rule,
            "vocab_size_target": self.vocab_size_target,
            "vocab": self.vocab,
            "merges": [list(m) for m in self.merges],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, separators=(",", ":"))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps() + "\n", encoding="utf-8")

    @classmethod
    def from_dict(cls, d: dict) -> TokenizerModel:
        if d.get("version") != FORMAT_VERSION:
            raise TokenizerError(f"unsupported model version {d.get('version')!r}")
        model = cls(d["vocab"], [tuple(m) for m in d["merges"]],
                    d.get("vocab_size_target", len(d["vocab"])), d["pretokenizer_rule"])
        model.check()
        return model

    @classmethod
    def load(cls, path: str | Path) -> TokenizerModel:
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def truncated(self, k: int) -> TokenizerModel:
        """The model obtained by stopping training after the first ``k`` merges."""
        merges = self.merges[:k]
        n_base = len(self.vocab) - len(_replay([], self.merges))
        return TokenizerModel(_replay(self.vocab[:n_base], merges), merges,
                              self.vocab_size_target, self.pretokenizer_rule)


def _replay(base: list[str], merges: list[Pair]) -> list[str]:
    vocab = list(base)
    seen = set(vocab)
    for left, right in merges:
        s = left + right
        if s not in seen:
            seen.add(s)
            vocab.append(s)
    return vocab


def _merge_symbols(symbols: list[str], pair: Pair) -> list[str]:
    a, b = pair
    out = []
    i = 0
    n = len(symbols)
    while i < n:
        if i + 1 < n and symbols[i] == a and symbols[i + 1] == b:
            out.append(a + b)
            i += 2
        else:
            out.append(symbols[i])
            i += 1
    return out


def count_words(corpus: Iterable[str], rule: str = "whitespace") -> Counter:
    counts: Counter = Counter()
    for line in corpus:
        counts.update(pretokenize(line, rule))
    return counts


def train_bpe(corpus: Iterable[str], vocab_size_target: int,
              pretokenizer_rule: str = "whitespace") -> TokenizerModel:
    """Greedy BPE over whitespace pretokens.

    The most frequent adjacent pair is merged until the vocabulary reaches
    ``vocab_size_target`` or no pair occurs at least twice. Frequency ties
    go to the lexicographically smallest ``(left, right)`` pair.
    """
    word_counts = count_words(corpus, pretokenizer_rule)
    if not word_counts:
        raise TokenizerError("empty corpus")
    alphabet = sorted({ch for w in word_counts for ch in w})
    if vocab_size_target < len(alphabet):
        raise TokenizerError(
            f"vocab_size_target {vocab_size_target} is smaller than the base alphabet; "
            f"at least {len(alphabet)} required")

    words = sorted(word_counts)
    freqs = [word_counts[w] for w in words]
    segs = [list(w) for w in words]

    pair_counts: dict[Pair, int] = {}
    where: dict[Pair, set[int]] = {}
    for wi, seg in enumerate(segs):
        f = freqs[wi]
        for p in zip(seg, seg[1:]):
            pair_counts[p] = pair_counts.get(p, 0) + f
            where.setdefault(p, set()).add(wi)
    heap = [(-c, p) for p, c in pair_counts.items()]
    heapq.heapify(heap)

    vocab = list(alphabet)
    known = set(vocab)
    merges: list[Pair] = []

    while len(vocab) < vocab_size_target and heap:
        neg, pair = heapq.heappop(heap)
        count = pair_counts.get(pair, 0)
        if count != -neg:
            continue  # stale entry
        if count < 2:
            break
        merges.append(pair)
        merged = pair[0] + pair[1]
        if merged not in known:
            known.add(merged)
            vocab.append(merged)

        touched: set[Pair] = set()
        for wi in sorted(where.pop(pair, ())):
            seg = segs[wi]
            new = _merge_symbols(seg, pair)
            if len(new) == len(seg):
                continue
            f = freqs[wi]
            for p in zip(seg, seg[1:]):
                pair_counts[p] -= f
                touched.add(p)
            for p in zip(new, new[1:]):
                pair_counts[p] = pair_counts.get(p, 0) + f
                where.setdefault(p, set()).add(wi)
                touched.add(p)
            segs[wi] = new
        for p in touched:
            c = pair_counts[p]
            if c > 0:
                heapq.heappush(heap, (-c, p))
            else:
                del pair_counts[p]
                where.pop(p, None)

    return TokenizerModel(vocab, merges, vocab_size_target, pretokenizer_rule)


def encode_lines(model: TokenizerModel, lines: Iterable[str]) -> Iterator[TokenStream]:
    for line in lines:
        yield model.encode(line)


def fertility(model: TokenizerModel, corpus: Iterable[str]) -> float:
    """Subword tokens per pretoken over the whole corpus."""
    n_tokens = 0
    n_words = 0
    for line in corpus:
        stream = model.encode(line)
        n_tokens += len(stream)
        n_words += stream.word_count
    if n_words == 0:
        raise TokenizerError("no words in corpus")
    return n_tokens / n_words
