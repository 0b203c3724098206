"""Minimal CoNLL-U reader for the columns the word-order metrics need."""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, TextIO

from .util import reservoir_sample

ID, FORM, LEMMA, UPOS, XPOS, FEATS, HEAD, DEPREL, DEPS, MISC = range(10)


class ConlluError(ValueError):
    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


@dataclass(frozen=True)
class DepToken:
    index: int
    form: str
    upos: str
    head: int
    deprel: str

    @property
    def base_deprel(self) -> str:
        return self.deprel.split(":", 1)[0]


@dataclass
class DepSentence:
    tokens: list[DepToken]
    sentence_id: str = ""

    def __len__(self) -> int:
        return len(self.tokens)

    def root(self) -> DepToken:
        return next(t for t in self.tokens if t.head == 0)

    def dependents(self) -> dict[int, list[DepToken]]:
        """Head index -> dependents in linear order (0 is the artificial root)."""
        deps: dict[int, list[DepToken]] = {}
        for t in self.tokens:
            deps.setdefault(t.head, []).append(t)
        return deps


@dataclass
class DepForest:
    sentences: list[DepSentence] = field(default_factory=list)
    dropped_count: int = 0
    diagnostics: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self) -> Iterator[DepSentence]:
        return iter(self.sentences)

    def __getitem__(self, i):
        return self.sentences[i]


def validate(tokens: list[DepToken]) -> str | None:
    """Return a reason the sentence is invalid, or None."""
    if not tokens:
        return "empty sentence"
    indices = [t.index for t in tokens]
    if indices != list(range(1, len(tokens) + 1)):
        return "token ids are not 1..n"
    n = len(tokens)
    roots = [t for t in tokens if t.head == 0]
    if len(roots) != 1:
        return f"{len(roots)} tokens with head 0"
    if roots[0].deprel != "root":
        return f"root token has deprel {roots[0].deprel!r}"
    for t in tokens:
        if t.head == t.index:
            return f"token {t.index} is its own head"
        if not 0 <= t.head <= n:
            return f"token {t.index} has head {t.head} outside sentence"
    # every chain must reach 0 within n steps
    heads = [0] + [t.head for t in tokens]
    state = [0] * (n + 1)  # 0 unvisited, 1 on path, 2 reaches root
    state[0] = 2
    for start in range(1, n + 1):
        path = []
        v = start
        while state[v] == 0:
            state[v] = 1
            path.append(v)
            v = heads[v]
        if state[v] == 1:
            return "cycle in head relation"
        for u in path:
            state[u] = 2
    return None


def _iter_blocks(lines: Iterable[str]) -> Iterator[tuple[int, list[tuple[int, str]]]]:
    block: list[tuple[int, str]] = []
    start = 0
    for lineno, raw in enumerate(lines, 1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            if block:
                yield start, block
                block = []
            continue
        if not block:
            start = lineno
        block.append((lineno, line))
    if block:
        yield start, block


def iter_conllu(lines: Iterable[str], diagnostics: list[str] | None = None
                ) -> Iterator[DepSentence | None]:
    """Yield one DepSentence per block, or None for a dropped sentence."""
    for start, block in _iter_blocks(lines):
        sent_id = ""
        tokens: list[DepToken] = []
        bad = None
        for lineno, line in block:
            if line.startswith("#"):
                if line.startswith("# sent_id"):
                    sent_id = line.split("=", 1)[-1].strip()
                continue
            cols = line.split("\t")
            if len(cols) != 10:
                raise ConlluError(f"expected 10 tab-separated columns, found {len(cols)}", lineno)
            tid = cols[ID]
            if "-" in tid or "." in tid:
                continue
            if bad:
                continue
            try:
                index = int(tid)
            except ValueError:
                bad = f"line {lineno}: non-integer ID {tid!r}"
                continue
            try:
                head = int(cols[HEAD])
            except ValueError:
                bad = f"line {lineno}: non-integer HEAD {cols[HEAD]!r}"
                continue
            tokens.append(DepToken(index, cols[FORM], cols[UPOS], head, cols[DEPREL]))
        if bad is None:
            bad = validate(tokens)
            if bad:
                bad = f"sentence at line {start}: {bad}"
        if bad:
            if diagnostics is not None:
                diagnostics.append(bad)
            yield None
        else:
            yield DepSentence(tokens, sent_id)


def parse_conllu(source: str | TextIO | Iterable[str]) -> DepForest:
    """Parse CoNLL-U text. Invalid sentences are dropped and counted."""
    if isinstance(source, str):
        source = io.StringIO(source)
    forest = DepForest()
    for sent in iter_conllu(source, forest.diagnostics):
        if sent is None:
            forest.dropped_count += 1
        else:
            forest.sentences.append(sent)
    return forest


def read_conllu(path: str | Path) -> DepForest:
    with open(path, encoding="utf-8") as f:
        return parse_conllu(f)


def take_sentences(forest: DepForest, n: int, seed: int | None = None) -> DepForest:
    """Uniform random subsample of ``n`` sentences; ``seed=None`` takes the first ``n``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if seed is None:
        chosen = forest.sentences[:n]
    else:
        chosen = reservoir_sample(forest.sentences, n, seed)
    return DepForest(list(chosen), forest.dropped_count, list(forest.diagnostics))


def to_conllu(forest: DepForest | Iterable[DepSentence]) -> str:
    """Serialize the modelled columns; unmodelled columns are written as ``_``."""
    out = []
    for sent in forest:
        if sent.sentence_id:
            out.append(f"# sent_id = {sent.sentence_id}")
        for t in sent.tokens:
            out.append("\t".join([str(t.index), t.form, "_", t.upos, "_", "_",
                                  str(t.head), t.deprel, "_", "_"]))
        out.append("")
    return "\n".join(out) + ("\n" if out else "")
