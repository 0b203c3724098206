"""Pseudo-log-likelihood scoring and minimal-pair accuracy.

A scorer answers one question: the natural-log probability of the true
token at ``position`` given every other token of the sentence. Real masked
LMs, a subprocess speaking newline-delimited JSON, or count-based toys all
fit behind that call.
"""

from __future__ import annotations

import csv
import json
import math
import shlex
import subprocess
import threading
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Protocol, Sequence

from .bpe import TokenizerModel, TokenStream


class ScoringError(ValueError):
    pass


class MaskedScorer(Protocol):
    def score(self, tokens: Sequence[int], position: int) -> float: ...


def _ids(tokens) -> list[int]:
    return list(tokens.ids) if isinstance(tokens, TokenStream) else list(tokens)


def pseudo_log_likelihood(scorer: MaskedScorer, tokens) -> float:
    ids = _ids(tokens)
    if not ids:
        raise ScoringError("cannot score an empty token stream")
    scores = []
    for i in range(len(ids)):
        lp = scorer.score(ids, i)
        if not math.isfinite(lp):
            raise ScoringError(f"scorer returned non-finite log-probability at position {i}")
        scores.append(lp)
    # fsum is exactly rounded, hence independent of position order
    return math.fsum(scores)


def pseudo_perplexity(scorer: MaskedScorer, tokens) -> float:
    ids = _ids(tokens)
    return math.exp(-pseudo_log_likelihood(scorer, ids) / len(ids))


@dataclass(frozen=True)
class MinimalPair:
    id: str
    sentence_good: str
    sentence_bad: str
    phenomenon: str = ""

    def __post_init__(self):
        if not self.sentence_good or not self.sentence_bad:
            raise ScoringError(f"pair {self.id}: empty sentence")
        if self.sentence_good == self.sentence_bad:
            raise ScoringError(f"pair {self.id}: good and bad sentences are identical")


def read_pairs(path: str | Path) -> list[MinimalPair]:
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f, delimiter="\t", quoting=csv.QUOTE_NONE)
        missing = {"id", "sentence_good", "sentence_bad"} - set(reader.fieldnames or ())
        if missing:
            raise ScoringError(f"pairs file lacks columns: {', '.join(sorted(missing))}")
        return [MinimalPair(r["id"], r["sentence_good"], r["sentence_bad"],
                            r.get("phenomenon") or "") for r in reader]


@dataclass
class AccuracyReport:
    accuracy: float
    n_pairs: int
    correct: int
    ties: int
    by_phenomenon: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"accuracy": self.accuracy, "n_pairs": self.n_pairs, "correct": self.correct,
                "ties": self.ties, "by_phenomenon": dict(sorted(self.by_phenomenon.items()))}


def minimal_pair_accuracy(scorer: MaskedScorer, model: TokenizerModel,
                          pairs: Sequence[MinimalPair]) -> AccuracyReport:
    """Share of pairs where the good sentence has the higher PLL; ties count half."""
    if not pairs:
        raise ScoringError("no minimal pairs")
    credit: dict[str, float] = defaultdict(float)
    counts: Counter = Counter()
    correct = ties = 0
    for p in pairs:
        good, bad = model.encode(p.sentence_good), model.encode(p.sentence_bad)
        if not good.ids or not bad.ids:
            raise ScoringError(f"pair {p.id}: tokenization produced an empty stream")
        g = pseudo_log_likelihood(scorer, good)
        b = pseudo_log_likelihood(scorer, bad)
        counts[p.phenomenon] += 1
        if g > b:
            correct += 1
            credit[p.phenomenon] += 1.0
        elif g == b:
            ties += 1
            credit[p.phenomenon] += 0.5
    n = len(pairs)
    return AccuracyReport(
        accuracy=(correct + 0.5 * ties) / n,
        n_pairs=n, correct=correct, ties=ties,
        by_phenomenon={ph: credit[ph] / c for ph, c in counts.items()},
    )


class BagOfWordsScorer:
    """Position-free unigram scorer with add-one smoothing."""

    def __init__(self, counts: Counter, vocab_size: int):
        self.counts = counts
        self.vocab_size = vocab_size
        self.total = sum(counts.values())
        self._denom = math.log(self.total + vocab_size)

    def score(self, tokens: Sequence[int], position: int) -> float:
        return math.log(self.counts.get(tokens[position], 0) + 1) - self._denom


def bag_of_words_scorer(corpus: Iterable, vocab_size: int) -> BagOfWordsScorer:
    counts: Counter = Counter()
    for stream in corpus:
        counts.update(_ids(stream))
    return BagOfWordsScorer(counts, vocab_size)


class BigramScorer:
    """Masked-position scorer from add-alpha bigram counts.

    The masked token is scored by its left and right neighbours:
    p(x | l, r) ∝ p(x | l) · p(r | x), normalized over the vocabulary.
    Sentence edges are a boundary symbol.
    """

    def __init__(self, corpus: Iterable, vocab_size: int, alpha: float = 0.1):
        self.V = vocab_size + 1  # plus boundary
        self.bos = vocab_size
        self.alpha = alpha
        self.bigram: dict[int, Counter] = defaultdict(Counter)
        self.left_total: Counter = Counter()
        for stream in corpus:
            ids = [self.bos, *_ids(stream), self.bos]
            for a, b in zip(ids, ids[1:]):
                self.bigram[a][b] += 1
                self.left_total[a] += 1

    def cond(self, b: int, a: int) -> float:
        """p(b | a) with add-alpha smoothing."""
        row = self.bigram.get(a)
        c = row.get(b, 0) if row else 0
        return (c + self.alpha) / (self.left_total.get(a, 0) + self.alpha * self.V)

    def score(self, tokens: Sequence[int], position: int) -> float:
        left = tokens[position - 1] if position > 0 else self.bos
        right = tokens[position + 1] if position + 1 < len(tokens) else self.bos
        x = tokens[position]
        num = self.cond(x, left) * self.cond(right, x)
        den = sum(self.cond(y, left) * self.cond(right, y) for y in range(self.V - 1))
        return math.log(num / den)


class CommandScorer:
    """Scorer backed by a subprocess speaking newline-delimited JSON on stdio.

    Request ``{"tokens": [ids], "position": i}``, response ``{"logprob": x}``.
    """

    def __init__(self, command: str | Sequence[str]):
        argv = shlex.split(command) if isinstance(command, str) else list(command)
        self._proc = subprocess.Popen(argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                                      text=True, bufsize=1)
        self._lock = threading.Lock()

    def score(self, tokens: Sequence[int], position: int) -> float:
        req = json.dumps({"tokens": [int(t) for t in tokens], "position": int(position)})
        with self._lock:
            self._proc.stdin.write(req + "\n")
            self._proc.stdin.flush()
            line = self._proc.stdout.readline()
        if not line:
            raise ScoringError("scorer process closed its output")
        try:
            return float(json.loads(line)["logprob"])
        except (ValueError, KeyError, TypeError) as exc:
            raise ScoringError(f"bad scorer response {line.strip()!r}") from exc

    def close(self) -> None:
        if self._proc.poll() is None:
            self._proc.stdin.close()
            self._proc.wait(timeout=10)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
