from __future__ import annotations

import hashlib
import math
import random
from collections import Counter
from pathlib import Path
from typing import Iterable, TypeVar

T = TypeVar("T")


def reservoir_sample(items: Iterable[T], n: int, seed: int) -> list[T]:
    """Uniform sample of ``min(n, len(items))`` items in one pass (Algorithm R).

    The sample is returned in original input order.
    """
    if n < 1:
        raise ValueError("sample size must be >= 1")
    rng = random.Random(seed)
    reservoir: list[tuple[int, T]] = []
    for i, item in enumerate(items):
        if i < n:
            reservoir.append((i, item))
        else:
            j = rng.randrange(i + 1)
            if j < n:
                reservoir[j] = (i, item)
    reservoir.sort(key=lambda p: p[0])
    return [item for _, item in reservoir]


def entropy_bits(counts: Iterable[int]) -> float:
    """Plug-in Shannon entropy (bits) of a count vector.

    Counts are summed in sorted order so the result does not depend on
    the order outcomes were seen in.
    """
    counts = sorted(c for c in counts if c > 0)
    total = sum(counts)
    if total == 0:
        raise ValueError("entropy of an empty distribution")
    h = 0.0
    for c in counts:
        p = c / total
        h -= p * math.log2(p)
    return h


def value_entropy(values: Iterable) -> float:
    return entropy_bits(Counter(values).values())


def file_digest(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def fmt(x) -> str:
    """Stable text form for CSV cells."""
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return repr(x)
    return str(x)
