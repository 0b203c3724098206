"""Diversity sampling of languages over categorical typological features.

Distances are normalized Hamming distances over jointly defined features.
Internally they are scaled by the least common multiple of all possible
denominators so objective sums are exact integers and ties are exact.
"""

from __future__ import annotations

import csv
import io
import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from itertools import combinations, islice
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .util import entropy_bits, fmt

MISSING = None
EXACT_MAX_LANGUAGES = 20


class SamplingError(ValueError):
    pass


@dataclass
class FeatureMatrix:
    languages: list[str]
    features: list[str]
    values: list[list[str | None]]

    def __post_init__(self):
        if len(set(self.languages)) != len(self.languages):
            raise SamplingError("duplicate language code")
        if len(self.values) != len(self.languages):
            raise SamplingError("matrix is not rectangular")
        for row in self.values:
            if len(row) != len(self.features):
                raise SamplingError("matrix is not rectangular")
        for j, f in enumerate(self.features):
            if all(row[j] is MISSING for row in self.values):
                raise SamplingError(f"feature {f} has no value in any language")
        self._index = {lang: i for i, lang in enumerate(self.languages)}

    def row(self, language: str) -> list[str | None]:
        try:
            return self.values[self._index[language]]
        except KeyError:
            raise SamplingError(f"unknown language {language!r}") from None

    def subset(self, languages: Sequence[str]) -> FeatureMatrix:
        return FeatureMatrix(list(languages), list(self.features),
                             [list(self.row(lang)) for lang in languages])

    @classmethod
    def from_csv(cls, source: str | Path | io.TextIOBase) -> FeatureMatrix:
        if isinstance(source, (str, Path)):
            with open(source, newline="", encoding="utf-8") as f:
                return cls._read(f)
        return cls._read(source)

    @classmethod
    def _read(cls, f) -> FeatureMatrix:
        reader = csv.reader(f)
        header = next(reader, None)
        if not header or header[0] != "language":
            raise SamplingError("feature CSV must start with a 'language' column")
        langs, rows = [], []
        for rec in reader:
            if not rec:
                continue
            if len(rec) != len(header):
                raise SamplingError(f"row for {rec[0]!r} has {len(rec)} cells, expected {len(header)}")
            langs.append(rec[0])
            rows.append([v.strip() if v.strip() not in ("", "?") else MISSING for v in rec[1:]])
        return cls(langs, header[1:], rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["language", *self.features])
        for lang, row in zip(self.languages, self.values):
            w.writerow([lang, *("" if v is MISSING else v for v in row)])
        return buf.getvalue()


def _compare(a: Sequence, b: Sequence) -> tuple[int, int]:
    """(disagreements, jointly defined features)."""
    dis = defined = 0
    for x, y in zip(a, b):
        if x is MISSING or y is MISSING:
            continue
        defined += 1
        dis += x != y
    return dis, defined


def pairwise_distance(matrix: FeatureMatrix, lang_a: str, lang_b: str) -> float:
    dis, defined = _compare(matrix.row(lang_a), matrix.row(lang_b))
    if defined == 0:
        raise SamplingError(f"{lang_a} and {lang_b} share no defined feature")
    return dis / defined


def pair_coverage(matrix: FeatureMatrix) -> dict[tuple[str, str], int]:
    """Jointly defined feature count per language pair."""
    return {(a, b): _compare(matrix.row(a), matrix.row(b))[1]
            for a, b in combinations(matrix.languages, 2)}


def _scaled_distances(matrix: FeatureMatrix, langs: Sequence[str]) -> np.ndarray:
    scale = math.lcm(*range(1, len(matrix.features) + 1))
    n = len(langs)
    rows = [matrix.row(lang) for lang in langs]
    D = np.zeros((n, n), dtype=np.int64)
    for i, j in combinations(range(n), 2):
        dis, defined = _compare(rows[i], rows[j])
        if defined == 0:
            raise SamplingError(f"{langs[i]} and {langs[j]} share no defined feature")
        D[i, j] = D[j, i] = dis * (scale // defined)
    return D


def _check_k(matrix: FeatureMatrix, k: int) -> None:
    if not 2 <= k <= len(matrix.languages):
        raise SamplingError(f"k must be in [2, {len(matrix.languages)}], got {k}")


def _exact(D: np.ndarray, k: int) -> tuple[int, ...]:
    n = D.shape[0]
    best_val = -1
    best: tuple[int, ...] = ()
    combos = combinations(range(n), k)
    pairs = list(combinations(range(k), 2))
    while True:
        chunk = np.array(list(islice(combos, 65536)), dtype=np.intp)
        if chunk.size == 0:
            break
        total = np.zeros(len(chunk), dtype=np.int64)
        for a, b in pairs:
            total += D[chunk[:, a], chunk[:, b]]
        i = int(np.argmax(total))  # first maximum = lexicographically smallest
        if total[i] > best_val:
            best_val = int(total[i])
            best = tuple(int(x) for x in chunk[i])
    return best


def _greedy(D: np.ndarray, k: int) -> list[int]:
    n = D.shape[0]
    # farthest pair; np.argmax over the upper triangle in row-major order
    # gives the lexicographically smallest pair on ties
    upper = np.triu(D + 1, 1)
    i, j = divmod(int(np.argmax(upper)), n)
    chosen = [i, j]
    gain = D[i] + D[j]
    available = np.ones(n, dtype=bool)
    available[[i, j]] = False
    while len(chosen) < k:
        cand = np.where(available, gain, -1)
        c = int(np.argmax(cand))
        chosen.append(c)
        available[c] = False
        gain = gain + D[c]
    return chosen


def select_maxsum(matrix: FeatureMatrix, k: int, mode: str = "greedy") -> list[str]:
    """Pick ``k`` languages maximizing the sum of pairwise distances.

    ``exact`` enumerates all k-subsets (at most 20 languages) and returns the
    lexicographically smallest optimum; ``greedy`` starts from the farthest
    pair and adds the language with the largest summed distance to the
    sample, in selection order. Ties go to the smallest language code.
    """
    _check_k(matrix, k)
    langs = sorted(matrix.languages)
    if mode == "exact":
        if len(langs) > EXACT_MAX_LANGUAGES:
            raise SamplingError(
                f"exact mode supports at most {EXACT_MAX_LANGUAGES} languages, got {len(langs)}")
        D = _scaled_distances(matrix, langs)
        return [langs[i] for i in _exact(D, k)]
    if mode == "greedy":
        D = _scaled_distances(matrix, langs)
        return [langs[i] for i in _greedy(D, k)]
    raise SamplingError(f"unknown mode {mode!r}")


def maxsum_objective(matrix: FeatureMatrix, sample: Sequence[str]) -> float:
    return sum(pairwise_distance(matrix, a, b) for a, b in combinations(sample, 2))


@dataclass
class SampleQualityReport:
    sample: list[str]
    mpd: float
    fvi: float
    fvo: float
    entropy: float
    metadata: dict = field(default_factory=dict)

    CSV_HEADER = ("k", "mpd", "fvi", "fvo", "entropy", "sample")

    def csv_row(self) -> list[str]:
        return [str(len(self.sample)), fmt(self.mpd), fmt(self.fvi), fmt(self.fvo),
                fmt(self.entropy), " ".join(self.sample)]

    def to_dict(self) -> dict:
        return asdict(self)


def quality(matrix: FeatureMatrix, sample: Sequence[str]) -> SampleQualityReport:
    """Saturation diagnostics of a sample.

    MPD      mean pairwise distance.
    FVI      attested (feature, value) pairs in the sample / in the frame.
    FVO      mean over features of (modal value count - 1) / (n - 1), where n
             is the number of sampled languages with the feature defined;
             features with n < 2 are skipped.
    Entropy  sum over features of the value entropy within the sample (bits).
    """
    sample = list(sample)
    if len(sample) < 2:
        raise SamplingError("sample must contain at least 2 languages")
    rows = [matrix.row(lang) for lang in sample]
    dists = [pairwise_distance(matrix, a, b) for a, b in combinations(sample, 2)]
    mpd = math.fsum(dists) / len(dists)

    frame_pairs = {(j, v) for row in matrix.values for j, v in enumerate(row) if v is not MISSING}
    sample_pairs = {(j, v) for row in rows for j, v in enumerate(row) if v is not MISSING}
    fvi = len(sample_pairs) / len(frame_pairs)

    overlaps = []
    entropy = 0.0
    for j in range(len(matrix.features)):
        vals = [row[j] for row in rows if row[j] is not MISSING]
        if not vals:
            continue
        counts = Counter(vals)
        entropy += entropy_bits(counts.values())
        if len(vals) >= 2:
            overlaps.append((max(counts.values()) - 1) / (len(vals) - 1))
    fvo = math.fsum(overlaps) / len(overlaps) if overlaps else 0.0
    return SampleQualityReport(sample, mpd, fvi, fvo, entropy, metadata={
        "distance": "normalized Hamming over jointly defined features",
        "fvo_definition": "artifact-defined: mean (modal count - 1)/(n - 1)",
        "entropy_definition": "artifact-defined: sum of per-feature value entropies (bits)",
    })


def saturation_curve(matrix: FeatureMatrix, k_max: int, mode: str = "greedy"
                     ) -> list[SampleQualityReport]:
    """Quality of MaxSum samples of size 2..k_max.

    In greedy mode samples are nested prefixes of one greedy run.
    """
    _check_k(matrix, k_max)
    if mode == "greedy":
        order = select_maxsum(matrix, k_max, "greedy")
        samples = [order[:k] for k in range(2, k_max + 1)]
    else:
        samples = [select_maxsum(matrix, k, mode) for k in range(2, k_max + 1)]
    return [quality(matrix, s) for s in samples]


def curve_csv(reports: Iterable[SampleQualityReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SampleQualityReport.CSV_HEADER)
    for r in reports:
        w.writerow(r.csv_row())
    return buf.getvalue()
