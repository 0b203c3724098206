"""Word-order flexibility from dependency treebanks.

HDE  conditional entropy of head-left vs head-right given
     (base relation, head UPOS, dependent UPOS).
ROE  conditional entropy of the linear arrangement of a head and its direct
     dependents given (head UPOS, sorted dependent relations).
SO-ROE  entropy of subject-before-object vs object-before-subject over
     clauses whose head has both an nsubj and an obj dependent.

All entropies are plug-in estimates in bits. Relation subtypes are folded
to their base relation.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field
from typing import Hashable, Iterable

from .conllu import DepForest, DepSentence
from .util import entropy_bits, fmt

HEAD_MARKER = "<HEAD>"


class WordOrderError(ValueError):
    pass


class ConditionalDistribution:
    """Counts of outcomes per condition."""

    def __init__(self, counts: dict | None = None):
        self.counts: dict[Hashable, Counter] = defaultdict(Counter)
        for cond, outcomes in (counts or {}).items():
            for o, c in outcomes.items():
                self.add(cond, o, c)

    def add(self, condition: Hashable, outcome: Hashable, count: int = 1) -> None:
        if count < 0:
            raise ValueError("counts must be non-negative")
        self.counts[condition][outcome] += count

    def merge(self, other: ConditionalDistribution) -> None:
        for cond, outcomes in other.counts.items():
            self.counts[cond].update(outcomes)

    @property
    def total(self) -> int:
        return sum(sum(c.values()) for c in self.counts.values())

    def __len__(self) -> int:
        return len(self.counts)


def conditional_entropy(dist: ConditionalDistribution) -> float:
    """H(outcome | condition) in bits, conditions weighted by frequency."""
    total = dist.total
    if total == 0:
        raise WordOrderError("conditional entropy of an empty distribution")
    h = 0.0
    for cond in sorted(dist.counts, key=repr):
        outcomes = dist.counts[cond]
        n = sum(outcomes.values())
        if n:
            h += n / total * entropy_bits(outcomes.values())
    return h


def head_direction_counts(forest: Iterable[DepSentence]) -> ConditionalDistribution:
    dist = ConditionalDistribution()
    for sent in forest:
        toks = sent.tokens
        for t in toks:
            if t.head == 0:
                continue
            head = toks[t.head - 1]
            direction = "head-left" if t.head < t.index else "head-right"
            dist.add((t.base_deprel, head.upos, t.upos), direction)
    return dist


def head_direction_entropy(forest: Iterable[DepSentence]) -> float:
    dist = head_direction_counts(forest)
    if dist.total == 0:
        raise WordOrderError("forest has no non-root tokens")
    return conditional_entropy(dist)


def relation_order_counts(forest: Iterable[DepSentence], max_dependents: int = 5
                          ) -> tuple[ConditionalDistribution, int]:
    """Arrangement counts plus the number of heads skipped for exceeding the cap."""
    dist = ConditionalDistribution()
    skipped = 0
    for sent in forest:
        for head_idx, deps in sent.dependents().items():
            if head_idx == 0:
                continue
            if len(deps) > max_dependents:
                skipped += 1
                continue
            head = sent.tokens[head_idx - 1]
            rels = [d.base_deprel for d in deps]
            arrangement = []
            placed = False
            for d, rel in zip(deps, rels):
                if not placed and d.index > head_idx:
                    arrangement.append(HEAD_MARKER)
                    placed = True
                arrangement.append(rel)
            if not placed:
                arrangement.append(HEAD_MARKER)
            dist.add((head.upos, tuple(sorted(rels))), tuple(arrangement))
    return dist, skipped


def relation_order_entropy(forest: Iterable[DepSentence], max_dependents: int = 5) -> float:
    dist, _ = relation_order_counts(forest, max_dependents)
    if dist.total == 0:
        raise WordOrderError("no subtrees with 1..max_dependents dependents")
    return conditional_entropy(dist)


def subject_object_orders(forest: Iterable[DepSentence], root_only: bool = False) -> Counter:
    """Counts of ``"SO"`` / ``"OS"`` over heads with both nsubj and obj dependents.

    A clause is SO when every subject precedes every object and OS in the
    reverse case; clauses whose subjects and objects interleave are counted
    under ``"mixed"`` and left out of the entropy.
    """
    orders: Counter = Counter()
    for sent in forest:
        for head_idx, deps in sent.dependents().items():
            if head_idx == 0:
                continue
            if root_only and sent.tokens[head_idx - 1].head != 0:
                continue
            subj = [d.index for d in deps if d.base_deprel == "nsubj"]
            obj = [d.index for d in deps if d.base_deprel == "obj"]
            if not subj or not obj:
                continue
            if subj[-1] < obj[0]:
                orders["SO"] += 1
            elif obj[-1] < subj[0]:
                orders["OS"] += 1
            else:
                orders["mixed"] += 1
    return orders


def _so_counts(orders: Counter) -> list[int]:
    return [orders[k] for k in ("SO", "OS") if orders[k]]


def subject_object_roe(forest: Iterable[DepSentence], root_only: bool = False) -> float:
    counts = _so_counts(subject_object_orders(forest, root_only))
    if not counts:
        raise WordOrderError("no clause has both nsubj and obj (so_clause_count = 0)")
    return entropy_bits(counts)


@dataclass
class WordOrderReport:
    hde: float
    roe: float
    so_roe: float
    sentence_count: int
    so_clause_count: int
    roe_skipped_heads: int = 0
    language: str = ""
    metadata: dict = field(default_factory=dict)

    CSV_HEADER = ("language", "hde", "roe", "so_roe", "sentences", "so_clauses")

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def csv_row(self) -> list[str]:
        return [self.language, fmt(self.hde), fmt(self.roe), fmt(self.so_roe),
                str(self.sentence_count), str(self.so_clause_count)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.CSV_HEADER)
        w.writerow(self.csv_row())
        return buf.getvalue()


def word_order_report(forest: DepForest | list[DepSentence], *, max_dependents: int = 5,
                      root_only: bool = False, language: str = "") -> WordOrderReport:
    """All three metrics; a metric with no qualifying events is reported as NaN."""
    sents = list(forest)
    if not sents:
        raise WordOrderError("empty forest")
    hd = head_direction_counts(sents)
    ro, skipped = relation_order_counts(sents, max_dependents)
    so = subject_object_orders(sents, root_only)
    return WordOrderReport(
        hde=conditional_entropy(hd) if hd.total else math.nan,
        roe=conditional_entropy(ro) if ro.total else math.nan,
        so_roe=entropy_bits(_so_counts(so)) if _so_counts(so) else math.nan,
        sentence_count=len(sents),
        so_clause_count=so["SO"] + so["OS"],
        roe_skipped_heads=skipped,
        language=language,
        metadata={
            "hde_condition": "(base deprel, head UPOS, dependent UPOS)",
            "roe_condition": "(head UPOS, sorted base deprels of dependents)",
            "roe_max_dependents": max_dependents,
            "so_clauses": "root predicate only" if root_only else "any head with nsubj and obj",
            "so_mixed_clauses": so["mixed"],
            "relation_subtypes": "folded to base relation (nsubj:pass counts as nsubj)",
            "estimator": "plug-in, base 2, no smoothing",
        },
    )
