"""Naive reference implementations used as test oracles.

Each oracle recomputes its quantity from scratch with the most direct
formula available and shares no code with the package.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from fractions import Fraction
from itertools import combinations


def _entropy_nat(counts) -> float:
    counts = [c for c in counts if c]
    n = sum(counts)
    return -sum(c / n * math.log(c / n) for c in counts)


def _bits(counts) -> float:
    return _entropy_nat(counts) / math.log(2)


def window_oracle(ids, window, step=1, unk=-1, left=False):
    """(mattr, av, eta, eta_windows) recomputing every window independently."""
    ids = list(ids)
    ttrs, avs, etas = [], [], []
    for s in range(0, len(ids) - window + 1, step):
        w = ids[s:s + window]
        ttrs.append(len(set(w)) / window)
        succ = defaultdict(Counter)
        for a, b in zip(w, w[1:]):
            if a == unk or b == unk:
                continue
            if left:
                succ[b][a] += 1
            else:
                succ[a][b] += 1
        if succ:
            avs.append(sum(len(c) for c in succ.values()) / len(succ))
        effs = [_entropy_nat(c.values()) / math.log(len(c)) for c in succ.values() if len(c) >= 2]
        if effs:
            etas.append(sum(effs) / len(effs))
    mean = lambda xs: sum(xs) / len(xs) if xs else 0.0  # noqa: E731
    return mean(ttrs), mean(avs), mean(etas), len(etas)


def hde_oracle(sentences) -> float:
    """H(direction | condition) as H(condition, direction) - H(condition)."""
    joint, marg = Counter(), Counter()
    for toks in sentences:
        for i, (upos, head, rel) in enumerate(toks, 1):
            if head == 0:
                continue
            cond = (rel.split(":")[0], toks[head - 1][0], upos)
            joint[cond, head < i] += 1
            marg[cond] += 1
    return _bits(joint.values()) - _bits(marg.values())


def roe_oracle(sentences, cap=5) -> float:
    joint, marg = Counter(), Counter()
    for toks in sentences:
        for h in range(1, len(toks) + 1):
            deps = [i for i, t in enumerate(toks, 1) if t[1] == h]
            if not deps or len(deps) > cap:
                continue
            rels = {i: toks[i - 1][2].split(":")[0] for i in deps}
            items = sorted(deps + [h])
            arrangement = tuple("HEAD" if i == h else rels[i] for i in items)
            cond = (toks[h - 1][0], tuple(sorted(rels.values())))
            joint[cond, arrangement] += 1
            marg[cond] += 1
    return _bits(joint.values()) - _bits(marg.values())


def so_roe_oracle(sentences, root_only=False) -> float | None:
    orders = Counter()
    for toks in sentences:
        for h in range(1, len(toks) + 1):
            if root_only and toks[h - 1][1] != 0:
                continue
            subj = [i for i, t in enumerate(toks, 1) if t[1] == h and t[2].split(":")[0] == "nsubj"]
            obj = [i for i, t in enumerate(toks, 1) if t[1] == h and t[2].split(":")[0] == "obj"]
            if subj and obj:
                if max(subj) < min(obj):
                    orders["SO"] += 1
                elif max(obj) < min(subj):
                    orders["OS"] += 1
    return _bits(orders.values()) if orders else None


def spearman_oracle(xs, ys) -> float:
    from scipy.stats import spearmanr
    return float(spearmanr(xs, ys).statistic)


def maxsum_oracle(rows: dict[str, list], k: int) -> list[str]:
    """Exhaustive MaxSum with exact rational distances; smallest subset on ties."""
    def dist(a, b):
        defined = [(x, y) for x, y in zip(rows[a], rows[b]) if x is not None and y is not None]
        return Fraction(sum(x != y for x, y in defined), len(defined))
    best, best_val = None, None
    for combo in combinations(sorted(rows), k):
        v = sum(dist(a, b) for a, b in combinations(combo, 2))
        if best_val is None or v > best_val:
            best, best_val = list(combo), v
    return best


def maxsum_value(rows: dict[str, list], sample) -> Fraction:
    total = Fraction(0)
    for a, b in combinations(sample, 2):
        defined = [(x, y) for x, y in zip(rows[a], rows[b]) if x is not None and y is not None]
        total += Fraction(sum(x != y for x, y in defined), len(defined))
    return total


def bpe_oracle(lines, target):
    """Textbook BPE: recount every pair from scratch after each merge."""
    words = Counter(w for line in lines for w in line.split())
    segs = {w: list(w) for w in words}
    vocab = sorted({c for w in words for c in w})
    merges = []
    while len(vocab) < target:
        counts = Counter()
        for w, seg in segs.items():
            for p in zip(seg, seg[1:]):
                counts[p] += words[w]
        if not counts:
            break
        best = min(counts, key=lambda p: (-counts[p], p))
        if counts[best] < 2:
            break
        merges.append(best)
        if best[0] + best[1] not in vocab:
            vocab.append(best[0] + best[1])
        for w, seg in segs.items():
            out, i = [], 0
            while i < len(seg):
                if i + 1 < len(seg) and (seg[i], seg[i + 1]) == best:
                    out.append(seg[i] + seg[i + 1])
                    i += 2
                else:
                    out.append(seg[i])
                    i += 1
            segs[w] = out
    return vocab, merges
