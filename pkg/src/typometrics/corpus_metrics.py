"""Sliding-window morphological complexity proxies over subword token streams.

MATTR is the mean per-window type/token ratio. Accessor variety (AV) is, per
window, the mean over types of the number of distinct right neighbours
(successors) inside the window; accessor efficiency (eta) is the mean over
types with at least two distinct successors of H(successors) / log2(#distinct).
Successor relations never cross a window edge, and bigrams involving the
unknown id are left out of AV/eta (but the unknown token still counts for
MATTR and TTR).

Windows are evaluated by a compiled kernel when available, otherwise by a
pure-Python fallback; set ``TYPOMETRICS_PURE=1`` to force the fallback.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _window_py
from .bpe import TokenizerModel, TokenStream
from .util import fmt, reservoir_sample

try:
    if os.environ.get("TYPOMETRICS_PURE") == "1":
        raise ImportError("pure-Python kernel requested")
    from . import _window_ext
except ImportError:
    _window_ext = None

KERNELS = {"python": _window_py.scan}
if _window_ext is not None:
    KERNELS["compiled"] = _window_ext.scan
BACKEND = "compiled" if _window_ext is not None else "python"

# Windows per block sum; also the granularity of parallel partitions.
MIN_BLOCK = 4096


class WindowError(ValueError):
    def __init__(self, token_count: int, window_size: int):
        super().__init__(f"stream of {token_count} tokens is shorter than window {window_size}")
        self.token_count = token_count
        self.window_size = window_size


@dataclass(frozen=True)
class WindowConfig:
    window_size: int = 1000
    step: int = 1

    def __post_init__(self):
        if self.window_size < 2:
            raise ValueError("window_size must be >= 2")
        if not 1 <= self.step <= self.window_size:
            raise ValueError("step must satisfy 1 <= step <= window_size")

    @property
    def resync(self) -> int:
        return max(1, self.window_size // self.step)

    @property
    def block(self) -> int:
        r = self.resync
        return r * -(-MIN_BLOCK // r)

    def window_count(self, token_count: int) -> int:
        if token_count < self.window_size:
            return 0
        return (token_count - self.window_size) // self.step + 1


def _tables(window: int) -> tuple[np.ndarray, np.ndarray]:
    log2 = [0.0] + [math.log2(n) for n in range(1, window + 1)]
    xlogx = [0.0] + [c * math.log2(c) for c in range(1, window + 2)]
    dx = [xlogx[c + 1] - xlogx[c] for c in range(window + 1)]
    return np.array(log2), np.array(dx)


@dataclass
class WindowMetricsReport:
    mattr: float
    av: float
    eta: float
    ttr_global: float
    window_count: int
    token_count: int
    config: WindowConfig
    fertility: float | None = None
    eta_window_count: int = 0
    eta_undefined: bool = False
    language: str = ""
    metadata: dict = field(default_factory=dict)

    CSV_HEADER = ("language", "mattr", "av", "eta", "ttr", "fertility",
                  "window_size", "step", "tokens")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["config"] = asdict(self.config)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def csv_row(self) -> list[str]:
        fert = "" if self.fertility is None else fmt(self.fertility)
        return [self.language, fmt(self.mattr), fmt(self.av), fmt(self.eta),
                fmt(self.ttr_global), fert, str(self.config.window_size),
                str(self.config.step), str(self.token_count)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.CSV_HEADER)
        w.writerow(self.csv_row())
        return buf.getvalue()


class WindowAccumulator:
    """Single-pass window statistics over a token stream fed in chunks.

    Memory is bounded by the block size and the window, not by stream length.
    """

    def __init__(self, config: WindowConfig, unk_id: int = -1, left_accessor: bool = False,
                 backend: str | None = None):
        self.config = config
        self.unk_id = unk_id
        self.left_accessor = left_accessor
        self._scan = KERNELS[backend or BACKEND]
        self._log2, self._dx = _tables(config.window_size)
        self._pending: list[np.ndarray] = []
        self._pending_len = 0
        self._next_window = 0
        self._token_count = 0
        self._seen = np.zeros(0, dtype=bool)
        self._totals = np.zeros(5, dtype=np.float64)

    @property
    def token_count(self) -> int:
        return self._token_count

    def _mark_seen(self, ids: np.ndarray) -> None:
        if ids.size == 0:
            return
        top = int(ids.max())
        if top >= self._seen.size:
            grown = np.zeros(max(top + 1, 2 * self._seen.size), dtype=bool)
            grown[: self._seen.size] = self._seen
            self._seen = grown
        self._seen[ids] = True

    def feed(self, ids: Sequence[int] | np.ndarray) -> None:
        arr = np.asarray(ids, dtype=np.int64)
        if arr.size and arr.min() < 0:
            raise ValueError("token ids must be non-negative")
        self._token_count += arr.size
        self._mark_seen(arr)
        self._pending.append(arr)
        self._pending_len += arr.size
        cfg = self.config
        block = cfg.block
        need = (block - 1) * cfg.step + cfg.window_size
        if self._pending_len < need:
            return
        buf = np.concatenate(self._pending)
        offset = 0
        while buf.size - offset >= need:
            self._run(buf[offset: offset + need], block)
            offset += block * cfg.step
        rest = buf[offset:]
        self._pending = [rest]
        self._pending_len = rest.size

    def _run(self, tokens: np.ndarray, n_windows: int) -> None:
        cfg = self.config
        sums = self._scan(tokens, cfg.window_size, cfg.step, self.unk_id, self.left_accessor,
                          self._next_window, n_windows, cfg.block, cfg.resync,
                          self._log2, self._dx)
        for row in sums:
            self._totals += row
        self._next_window += n_windows

    def finish(self) -> WindowMetricsReport:
        cfg = self.config
        total_windows = cfg.window_count(self._token_count)
        if total_windows == 0:
            raise WindowError(self._token_count, cfg.window_size)
        remaining = total_windows - self._next_window
        if remaining > 0:
            buf = np.concatenate(self._pending)
            self._run(buf, remaining)
            self._pending = []
            self._pending_len = 0
        return _report(self._totals, total_windows, self._token_count,
                       int(self._seen.sum()), cfg, self.left_accessor)


def _report(totals, n_windows, token_count, n_types, cfg, left) -> WindowMetricsReport:
    distinct, av_sum, av_n, eta_sum, eta_n = totals
    eta_n = int(eta_n)
    return WindowMetricsReport(
        mattr=float(distinct) / (cfg.window_size * n_windows),
        av=float(av_sum / av_n) if av_n else 0.0,
        eta=float(eta_sum / eta_n) if eta_n else 0.0,
        ttr_global=n_types / token_count,
        window_count=n_windows,
        token_count=token_count,
        config=cfg,
        eta_window_count=eta_n,
        eta_undefined=eta_n == 0,
        metadata={
            "accessor": "left" if left else "right",
            "av_aggregation": "type-averaged within window, mean over windows",
            "eta_aggregation": "mean over types with >=2 distinct successors; "
                               "mean over windows where defined",
            "successors_cross_windows": False,
            "unknown_id_in_successor_stats": False,
            "entropy_base": 2,
        },
    )


def _as_ids(stream) -> np.ndarray:
    if isinstance(stream, TokenStream):
        stream = stream.ids
    return np.asarray(stream, dtype=np.int64)


def window_metrics(stream, config: WindowConfig = WindowConfig(), *, unk_id: int = -1,
                   left_accessor: bool = False, threads: int = 1,
                   backend: str | None = None) -> WindowMetricsReport:
    """All window metrics for an in-memory stream.

    Windows are split into block-aligned partitions across ``threads``
    workers; block sums are folded in window order, so the result does not
    depend on the thread count.
    """
    ids = _as_ids(stream)
    if ids.size and ids.min() < 0:
        raise ValueError("token ids must be non-negative")
    n = int(ids.size)
    total = config.window_count(n)
    if total == 0:
        raise WindowError(n, config.window_size)
    scan = KERNELS[backend or BACKEND]
    log2, dx = _tables(config.window_size)
    block, step, w = config.block, config.step, config.window_size
    n_blocks = -(-total // block)
    threads = max(1, min(threads, n_blocks))
    bounds = [n_blocks * i // threads for i in range(threads + 1)]

    def part(i: int) -> np.ndarray:
        b0, b1 = bounds[i], bounds[i + 1]
        j0 = b0 * block
        j1 = min(total, b1 * block)
        toks = ids[j0 * step: (j1 - 1) * step + w]
        return scan(toks, w, step, unk_id, left_accessor, j0, j1 - j0, block,
                    config.resync, log2, dx)

    if threads == 1:
        parts = [part(0)]
    else:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(part, range(threads)))
    totals = np.zeros(5, dtype=np.float64)
    for p in parts:
        for row in p:
            totals += row
    n_types = int(np.unique(ids).size)
    return _report(totals, total, n, n_types, config, left_accessor)


def mattr(stream, config: WindowConfig = WindowConfig()) -> float:
    return window_metrics(stream, config).mattr


def accessor_variety(stream, config: WindowConfig = WindowConfig(), *,
                     unk_id: int = -1, left_accessor: bool = False) -> tuple[float, float]:
    """Return ``(av, eta)``; eta is 0.0 when undefined in every window."""
    rep = window_metrics(stream, config, unk_id=unk_id, left_accessor=left_accessor)
    return rep.av, rep.eta


def global_ttr(stream) -> float:
    ids = _as_ids(stream)
    if ids.size == 0:
        raise ValueError("global TTR of an empty stream")
    return np.unique(ids).size / ids.size


def sample_lines(corpus: Iterable[str], n: int, seed: int) -> list[str]:
    """Reservoir-sample ``n`` lines in a single pass, deterministic per seed."""
    return reservoir_sample(corpus, n, seed)


def corpus_report(model: TokenizerModel, lines: Iterable[str], config: WindowConfig,
                  *, language: str = "", threads: int = 1,
                  left_accessor: bool = False) -> WindowMetricsReport:
    """Tokenize ``lines`` with ``model`` and compute every window metric plus fertility.

    Lines are concatenated into one stream, so windows may span line breaks.
    """
    ids: list[int] = []
    n_words = 0
    for line in lines:
        s = model.encode(line)
        ids.extend(s.ids)
        n_words += s.word_count
    if n_words == 0:
        raise ValueError("no words in corpus")
    rep = window_metrics(np.array(ids, dtype=np.int64), config, unk_id=model.unk_id,
                         left_accessor=left_accessor, threads=threads)
    rep.fertility = len(ids) / n_words
    rep.language = language
    return rep


def stream_report(chunks: Iterable[Sequence[int]], config: WindowConfig, *,
                  unk_id: int = -1, left_accessor: bool = False) -> WindowMetricsReport:
    """Window metrics over an arbitrarily long stream given as id chunks."""
    acc = WindowAccumulator(config, unk_id=unk_id, left_accessor=left_accessor)
    for chunk in chunks:
        acc.feed(chunk)
    return acc.finish()
