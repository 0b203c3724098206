"""Join metric tables with downstream scores: relative drops, rank correlation, scatter data."""

from __future__ import annotations

import csv
import io
import math
import random
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .util import fmt

POS_TYPES = ("no-pos", "absolute", "relative")
TASKS = ("ud", "wikiann", "sib200", "multiblimp")
# default metric x task grid for correlation runs
FIGURE_METRICS = ("av", "mattr", "eta", "hde", "so_roe")
DEFAULT_CONTRASTS = ("relative-vs-no-pos", "absolute-vs-no-pos")


class AnalysisError(ValueError):
    pass


class UndefinedCorrelation(AnalysisError):
    pass


@dataclass
class MetricTable:
    values: dict[tuple[str, str], float] = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def add(self, language: str, metric: str, value: float) -> None:
        key = (language, metric)
        if key in self.values:
            raise AnalysisError(f"duplicate metric {metric!r} for {language!r}")
        value = float(value)
        if not math.isfinite(value):
            raise AnalysisError(f"non-finite value for {key}")
        self.values[key] = value

    def get(self, language: str, metric: str) -> float | None:
        return self.values.get((language, metric))

    @property
    def languages(self) -> list[str]:
        return sorted({lang for lang, _ in self.values})

    @property
    def metrics(self) -> list[str]:
        return sorted({m for _, m in self.values})

    @classmethod
    def from_csv(cls, source) -> MetricTable:
        """Read wide (``language,<metric>,...``) or long (``language,metric,value``) CSV.

        Empty or non-numeric cells in the wide form are skipped.
        """
        rows = _read_csv(source)
        table = cls()
        if not rows:
            return table
        header = list(rows[0].keys())
        if header[0] != "language":
            raise AnalysisError("metric CSV must start with a 'language' column")
        if header == ["language", "metric", "value"]:
            for r in rows:
                table.add(r["language"], r["metric"], float(r["value"]))
            return table
        for r in rows:
            for m in header[1:]:
                try:
                    v = float(r[m])
                except (TypeError, ValueError):
                    continue
                if math.isfinite(v):
                    table.add(r["language"], m, v)
        return table


@dataclass
class PerformanceTable:
    scores: dict[tuple[str, str, str], float] = field(default_factory=dict)
    stddev: dict[tuple[str, str, str], float] = field(default_factory=dict)

    def add(self, language: str, task: str, pos_type: str, score: float,
            stddev: float | None = None) -> None:
        if pos_type not in POS_TYPES:
            raise AnalysisError(f"pos_type must be one of {POS_TYPES}, got {pos_type!r}")
        key = (language, task, pos_type)
        if key in self.scores:
            raise AnalysisError(f"duplicate score for {key}")
        score = float(score)
        if not math.isfinite(score):
            raise AnalysisError(f"non-finite score for {key}")
        self.scores[key] = score
        if stddev is not None:
            self.stddev[key] = float(stddev)

    def get(self, language: str, task: str, pos_type: str) -> float | None:
        return self.scores.get((language, task, pos_type))

    @property
    def languages(self) -> list[str]:
        return sorted({k[0] for k in self.scores})

    @classmethod
    def from_csv(cls, source) -> PerformanceTable:
        table = cls()
        for r in _read_csv(source):
            sd = r.get("stddev") or None
            table.add(r["language"], r["task"], r["pos_type"], float(r["score"]),
                      float(sd) if sd else None)
        return table


def _read_csv(source) -> list[dict]:
    if isinstance(source, (str, Path)):
        with open(source, newline="", encoding="utf-8") as f:
            return list(csv.DictReader(f))
    return list(csv.DictReader(source))


def reference_metrics() -> MetricTable:
    """Bundled per-language metric values for the seven-language sample."""
    with resources.files("typometrics").joinpath("data", "reference_metrics.csv").open() as f:
        table = MetricTable.from_csv(f)
    table.provenance = {"source": "reference_metrics.csv"}
    return table


def reference_performance() -> PerformanceTable:
    """Bundled downstream scores (UD LAS, WikiAnn F1, SIB-200 F1, MultiBLiMP accuracy)."""
    with resources.files("typometrics").joinpath("data", "reference_performance.csv").open() as f:
        return PerformanceTable.from_csv(f)


def relative_drop(perf: PerformanceTable, language: str, task: str,
                  baseline_pos: str = "relative", ablated_pos: str = "no-pos") -> float:
    base = perf.get(language, task, baseline_pos)
    abl = perf.get(language, task, ablated_pos)
    if base is None or abl is None:
        raise AnalysisError(f"missing score for {language}/{task}/{baseline_pos} or {ablated_pos}")
    if base == 0:
        raise AnalysisError(f"zero baseline score for {language}/{task}/{baseline_pos}")
    return (base - abl) / base


def average_ranks(xs: Sequence[float]) -> list[float]:
    """1-based ranks; tied values share the mean of their positions."""
    order = sorted(range(len(xs)), key=lambda i: xs[i])
    ranks = [0.0] * len(xs)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and xs[order[j + 1]] == xs[order[i]]:
            j += 1
        r = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = r
        i = j + 1
    return ranks


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    if len(xs) != len(ys):
        raise AnalysisError(f"length mismatch: {len(xs)} vs {len(ys)}")
    if len(xs) < 3:
        raise AnalysisError("need at least 3 observations")
    n = len(xs)
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    dx = [x - mx for x in xs]
    dy = [y - my for y in ys]
    sxx = math.fsum(d * d for d in dx)
    syy = math.fsum(d * d for d in dy)
    if sxx == 0 or syy == 0:
        raise UndefinedCorrelation("correlation undefined for a constant vector")
    r = math.fsum(a * b for a, b in zip(dx, dy)) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Pearson correlation of average-rank vectors."""
    if len(xs) != len(ys):
        raise AnalysisError(f"length mismatch: {len(xs)} vs {len(ys)}")
    return pearson(average_ranks(xs), average_ranks(ys))


def permutation_pvalue(xs: Sequence[float], ys: Sequence[float], n_perm: int = 10000,
                       seed: int = 0) -> float:
    """Two-sided permutation p-value for Spearman's rho."""
    rng = random.Random(seed)
    observed = abs(spearman(xs, ys))
    ys = list(ys)
    hits = 0
    for _ in range(n_perm):
        rng.shuffle(ys)
        try:
            if abs(spearman(xs, ys)) >= observed - 1e-12:
                hits += 1
        except UndefinedCorrelation:
            continue
    return (hits + 1) / (n_perm + 1)


def contrast_value(perf: PerformanceTable, language: str, task: str, contrast: str) -> float | None:
    """Score for a contrast: ``"<base>-vs-<ablated>"`` is a relative drop, a bare pos type a raw score."""
    if "-vs-" in contrast:
        base, abl = contrast.split("-vs-", 1)
        if perf.get(language, task, base) is None or perf.get(language, task, abl) is None:
            return None
        return relative_drop(perf, language, task, base, abl)
    if contrast not in POS_TYPES:
        raise AnalysisError(f"unknown contrast {contrast!r}")
    return perf.get(language, task, contrast)


@dataclass
class CorrelationReport:
    metric_name: str
    task: str
    pos_contrast: str
    spearman_rho: float
    pearson_r: float
    n: int
    dropped: int = 0
    defined: bool = True
    p_value: float | None = None
    languages: list[str] = field(default_factory=list)
    xs: list[float] = field(default_factory=list)
    ys: list[float] = field(default_factory=list)

    CSV_HEADER = ("metric", "task", "contrast", "spearman_rho", "pearson_r", "n", "dropped",
                  "defined", "p_value")

    def csv_row(self) -> list[str]:
        return [self.metric_name, self.task, self.pos_contrast, fmt(self.spearman_rho),
                fmt(self.pearson_r), str(self.n), str(self.dropped), str(self.defined).lower(),
                "" if self.p_value is None else fmt(self.p_value)]

    def to_dict(self) -> dict:
        return asdict(self)


def _joined(metrics: MetricTable, perf: PerformanceTable, metric: str, task: str,
            contrast: str) -> tuple[list[str], list[float], list[float], int]:
    candidates = sorted(set(metrics.languages) | set(perf.languages))
    langs, xs, ys = [], [], []
    dropped = 0
    for lang in candidates:
        x = metrics.get(lang, metric)
        y = contrast_value(perf, lang, task, contrast)
        if x is None or y is None:
            dropped += 1
            continue
        langs.append(lang)
        xs.append(x)
        ys.append(y)
    if len(langs) < 3:
        raise AnalysisError(
            f"{metric}/{task}/{contrast}: only {len(langs)} shared languages, need 3")
    return langs, xs, ys, dropped


def correlate_metrics(metrics: MetricTable, perf: PerformanceTable,
                      spec: Iterable[tuple[str, str, str]], *, permutations: int = 0,
                      seed: int = 0) -> list[CorrelationReport]:
    reports = []
    for metric, task, contrast in spec:
        langs, xs, ys, dropped = _joined(metrics, perf, metric, task, contrast)
        try:
            rho = spearman(xs, ys)
            r = pearson(xs, ys)
            defined = True
        except UndefinedCorrelation:
            rho = r = math.nan
            defined = False
        p = permutation_pvalue(xs, ys, permutations, seed) if permutations and defined else None
        reports.append(CorrelationReport(metric, task, contrast, rho, r, len(langs), dropped,
                                         defined, p, langs, xs, ys))
    return reports


def figure_grid(contrasts: Sequence[str] = DEFAULT_CONTRASTS) -> list[tuple[str, str, str]]:
    return [(m, t, c) for m in FIGURE_METRICS for t in TASKS for c in contrasts]


def read_spec(source) -> list[tuple[str, str, str]]:
    return [(r["metric"], r["task"], r["contrast"]) for r in _read_csv(source)]


def correlations_csv(reports: Iterable[CorrelationReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CorrelationReport.CSV_HEADER)
    for rep in reports:
        w.writerow(rep.csv_row())
    return buf.getvalue()


SCATTER_HEADER = ("language", "metric_value", "pos_type", "score")


def emit_scatter(metrics: MetricTable, perf: PerformanceTable, metric: str, task: str
                 ) -> list[tuple[str, float, str, float]]:
    """Long-form rows, grouped by pos type and sorted by metric value within a group."""
    rows = []
    shared = 0
    for pos in POS_TYPES:
        group = []
        for lang in sorted(set(metrics.languages) & set(perf.languages)):
            x = metrics.get(lang, metric)
            y = perf.get(lang, task, pos)
            if x is not None and y is not None:
                group.append((lang, x, pos, y))
        shared = max(shared, len(group))
        group.sort(key=lambda r: (r[1], r[0]))
        rows.extend(group)
    if shared < 3:
        raise AnalysisError(f"{metric}/{task}: fewer than 3 shared languages")
    return rows


def scatter_csv(rows: Iterable[tuple[str, float, str, float]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCATTER_HEADER)
    for lang, x, pos, y in rows:
        w.writerow([lang, fmt(x), pos, fmt(y)])
    return buf.getvalue()


def read_scatter(source) -> list[tuple[str, float, str, float]]:
    return [(r["language"], float(r["metric_value"]), r["pos_type"], float(r["score"]))
            for r in _read_csv(io.StringIO(source) if isinstance(source, str) else source)]
