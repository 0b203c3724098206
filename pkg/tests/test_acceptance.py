"""Acceptance suite: one PASS/FAIL/SKIP line per criterion.

The lines are printed in the terminal summary (see conftest.py) and also
written to stdout as each criterion finishes.
"""

from __future__ import annotations

import gc
import math
import os
import random
import time
import tracemalloc
from pathlib import Path

import numpy as np
import pytest

from conftest import DEMO, random_forest, to_sentences
from oracles import (hde_oracle, maxsum_oracle, roe_oracle, so_roe_oracle, spearman_oracle,
                     window_oracle)
from typometrics.analysis import (UndefinedCorrelation, correlate_metrics, figure_grid,
                                  reference_metrics, reference_performance, relative_drop,
                                  spearman)
from typometrics.bpe import train_bpe
from typometrics.cli import run
from typometrics.conllu import DepForest, parse_conllu, read_conllu, take_sentences, to_conllu
from typometrics.corpus_metrics import WindowConfig, stream_report, window_metrics
from typometrics.mlm_scoring import BagOfWordsScorer, pseudo_log_likelihood
from typometrics.sampling import FeatureMatrix, quality, saturation_curve, select_maxsum
from typometrics.word_order import word_order_report

RESULTS: dict[int, tuple[str, str]] = {}


def record(n: int, ok: bool | None, detail: str) -> None:
    status = "SKIP" if ok is None else ("PASS" if ok else "FAIL")
    RESULTS[n] = (status, detail)
    print(f"\nACCEPTANCE {n} {status}: {detail}")


@pytest.fixture(autouse=True)
def _fail_line_on_error(request):
    """A criterion that raises before reporting still gets a FAIL line."""
    n = int(request.node.name.split("_")[2])
    yield
    rep = getattr(request.node, "rep_call", None)
    if n not in RESULTS and rep is not None and rep.failed:
        record(n, False, "raised before completing")


# 1 -------------------------------------------------------------------------

def _oracle_suites() -> dict[str, float]:
    """Worst absolute deviation per metric over >= 1000 random instances each."""
    rng = random.Random(2024)
    worst = {k: 0.0 for k in ("mattr", "av", "eta", "hde", "roe", "so_roe", "pll", "spearman")}
    for _ in range(1000):
        n_types = rng.randint(1, 15)
        w = rng.randint(2, 50)
        ids = [rng.randrange(n_types) for _ in range(rng.randint(w, 500))]
        rep = window_metrics(ids, WindowConfig(w))
        m, av, eta, _ = window_oracle(ids, w)
        worst["mattr"] = max(worst["mattr"], abs(rep.mattr - m))
        worst["av"] = max(worst["av"], abs(rep.av - av))
        worst["eta"] = max(worst["eta"], abs(rep.eta - eta))

        raw = random_forest(rng, rng.randint(2, 50))
        wo = word_order_report(to_sentences(raw))
        if not math.isnan(wo.hde):
            worst["hde"] = max(worst["hde"], abs(wo.hde - hde_oracle(raw)))
            worst["roe"] = max(worst["roe"], abs(wo.roe - roe_oracle(raw)))
        so = so_roe_oracle(raw)
        if so is not None:
            worst["so_roe"] = max(worst["so_roe"], abs(wo.so_roe - so))

        counts = {t: rng.randint(0, 20) for t in range(30)}
        scorer = BagOfWordsScorer(counts, 30)
        toks = [rng.randrange(30) for _ in range(rng.randint(1, 40))]
        naive = 0.0
        for i in range(len(toks)):
            naive += math.log(counts[toks[i]] + 1) - math.log(sum(counts.values()) + 30)
        worst["pll"] = max(worst["pll"], abs(pseudo_log_likelihood(scorer, toks) - naive))

        k = rng.randint(3, 20)
        xs = [rng.randint(0, 5) for _ in range(k)]
        ys = [rng.random() for _ in range(k)]
        try:
            r = spearman(xs, ys)
        except UndefinedCorrelation:
            continue
        worst["spearman"] = max(worst["spearman"], abs(r - spearman_oracle(xs, ys)))
    return worst


def _maxsum_matches(n_cases: int = 200) -> bool:
    rng = random.Random(99)
    for _ in range(n_cases):
        n = rng.randint(2, 12)
        nf = rng.randint(1, 6)
        rows = {f"L{i:02d}": [rng.choice("xyz") if i == 0 or rng.random() > 0.2 else None
                              for _ in range(nf)] for i in range(n)}
        for v in rows.values():
            v[0] = v[0] or "x"
        k = rng.randint(2, n)
        m = FeatureMatrix(list(rows), [f"f{j}" for j in range(len(rows["L00"]))],
                          [list(v) for v in rows.values()])
        if select_maxsum(m, k, "exact") != maxsum_oracle(rows, k):
            return False
    return True


def test_criterion_1_oracle_suites():
    t0 = time.perf_counter()
    worst = _oracle_suites()
    maxsum_ok = _maxsum_matches()
    elapsed = time.perf_counter() - t0
    ok = all(v <= 1e-12 for v in worst.values()) and maxsum_ok and elapsed < 300
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    record(1, ok, f"max |err| {detail}; exact MaxSum == enumeration: {maxsum_ok}; {elapsed:.1f} s")
    assert ok


# 2 -------------------------------------------------------------------------

def _mirror(sent):
    from typometrics.conllu import DepSentence, DepToken
    n = len(sent)
    flip = lambda i: 0 if i == 0 else n + 1 - i  # noqa: E731
    toks = sorted((DepToken(flip(t.index), t.form, t.upos, flip(t.head), t.deprel)
                   for t in sent.tokens), key=lambda t: t.index)
    return DepSentence(toks)


def _same(a, b) -> bool:
    return all((math.isnan(x) and math.isnan(y)) or x == y for x, y in zip(a, b))


def _invariants() -> dict[str, bool]:
    rng = random.Random(7)
    res = dict.fromkeys(["round_trip", "bow_permutation", "mirror", "duplication",
                         "sampling_relabel", "corpus_relabel", "fvi_monotone"], True)
    for _ in range(200):
        words = ["".join(rng.choice("abcdef") for _ in range(rng.randint(1, 7)))
                 for _ in range(rng.randint(1, 12))]
        model = train_bpe([" ".join(words)], rng.randint(6, 40))
        probe = " ".join(rng.sample(words, min(3, len(words))))
        res["round_trip"] &= model.decode(model.encode(probe)) == probe

        counts = {t: rng.randint(0, 9) for t in range(12)}
        s = BagOfWordsScorer(counts, 12)
        toks = [rng.randrange(12) for _ in range(rng.randint(1, 25))]
        shuffled = toks[:]
        rng.shuffle(shuffled)
        res["bow_permutation"] &= pseudo_log_likelihood(s, toks) == pseudo_log_likelihood(s, shuffled)

        forest = to_sentences(random_forest(rng, rng.randint(1, 30)))
        rep = word_order_report(forest)
        base = (rep.hde, rep.roe, rep.so_roe)
        mr = word_order_report([_mirror(x) for x in forest])
        dup = word_order_report(forest + forest)
        res["mirror"] &= _same(base, (mr.hde, mr.roe, mr.so_roe))
        res["duplication"] &= _same(base, (dup.hde, dup.roe, dup.so_roe))

        n = rng.randint(3, 9)
        nf = rng.randint(1, 5)
        vals = [[rng.choice("abc") for _ in range(nf)] for _ in range(n)]
        langs = [f"L{i}" for i in range(n)]
        m = FeatureMatrix(langs, [f"f{j}" for j in range(nf)], vals)
        bij = [dict(zip("abc", rng.sample("pqr", 3))) for _ in range(nf)]
        m2 = FeatureMatrix(langs, m.features, [[bij[j][v] for j, v in enumerate(r)] for r in vals])
        k = rng.randint(2, n)
        sa = select_maxsum(m, k, "exact")
        qa, qb = quality(m, sa), quality(m2, sa)
        res["sampling_relabel"] &= (set(sa) == set(select_maxsum(m2, k, "exact"))
                                    and (qa.mpd, qa.fvi, qa.fvo, qa.entropy)
                                    == (qb.mpd, qb.fvi, qb.fvo, qb.entropy))
        curve = saturation_curve(m, n)
        res["fvi_monotone"] &= all(a.fvi <= b.fvi for a, b in zip(curve, curve[1:]))

        ids = [rng.randrange(10) for _ in range(rng.randint(10, 200))]
        perm = list(range(10))
        rng.shuffle(perm)
        cfg = WindowConfig(rng.randint(2, 10))
        a = window_metrics(ids, cfg)
        b = window_metrics([perm[i] for i in ids], cfg)
        res["corpus_relabel"] &= all(abs(x - y) <= 1e-12 for x, y in
                                     [(a.mattr, b.mattr), (a.av, b.av), (a.eta, b.eta),
                                      (a.ttr_global, b.ttr_global)])
    return res


def test_criterion_2_invariants():
    res = _invariants()
    ok = all(res.values())
    record(2, ok, ", ".join(f"{k} {'ok' if v else 'BROKEN'}" for k, v in res.items()))
    assert ok


# 3 -------------------------------------------------------------------------

UD_TARGETS = {
    "UD_English-EWT": ("en_ewt", {"hde": 0.16, "so_roe": 0.20}),
    "UD_Tamil-TTB": ("ta_ttb", {"so_roe": 0.94}),
    "UD_Basque-BDT": ("eu_bdt", {"hde": 0.50}),
}


def _find_treebank(root: Path, name: str, code: str) -> Path | None:
    for base in (root / name, root):
        for split in ("train", "test", "dev"):
            p = base / f"{code}-ud-{split}.conllu"
            if p.exists():
                return p
    return None


def test_criterion_3_ud_word_order():
    root = Path(os.environ.get("TYPOMETRICS_UD_DIR", DEMO.parent / "data" / "ud"))
    found = {name: _find_treebank(root, name, code) for name, (code, _) in UD_TARGETS.items()}
    missing = [n for n, p in found.items() if p is None]
    if missing:
        record(3, None, f"treebanks not found under {root} ({', '.join(missing)}); "
                        "set TYPOMETRICS_UD_DIR to a UD v2.15 checkout")
        pytest.skip("UD treebanks unavailable")
    t0 = time.perf_counter()
    parts, ok = [], True
    for name, (code, targets) in UD_TARGETS.items():
        forest = take_sentences(read_conllu(found[name]), 1000, None)
        rep = word_order_report(forest)
        for metric, target in targets.items():
            got = getattr(rep, metric)
            good = abs(got - target) <= 0.10
            ok &= good
            parts.append(f"{code} {metric} {got:.3f} (ref {target:.2f})")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 120
    record(3, ok, "; ".join(parts) + f"; {elapsed:.1f} s")
    assert ok


# 4 -------------------------------------------------------------------------

def test_criterion_4_analysis_fixture():
    t0 = time.perf_counter()
    metrics, perf = reference_metrics(), reference_performance()
    drop = relative_drop(perf, "English", "ud", "relative", "no-pos")
    reports = correlate_metrics(metrics, perf, figure_grid())
    elapsed = time.perf_counter() - t0
    finite = all(r.n == 7 and math.isfinite(r.spearman_rho) and math.isfinite(r.pearson_r)
                 for r in reports)
    ok = abs(drop - 0.8398) <= 1e-4 and finite and elapsed < 1.0
    record(4, ok, f"relative_drop(English, ud) = {drop:.6f}; {len(reports)} grid cells finite "
                  f"over n=7: {finite}; {elapsed * 1000:.0f} ms")
    assert ok


# 5 -------------------------------------------------------------------------

def _chunks(total: int, seed: int, size: int = 1_000_000):
    rng = np.random.default_rng(seed)
    left = total
    while left:
        n = min(size, left)
        yield (rng.zipf(1.2, n) % 50_000).astype(np.int64)
        left -= n


def _peak(total: int) -> tuple[int, float]:
    gc.collect()
    tracemalloc.start()
    t0 = time.perf_counter()
    stream_report(_chunks(total, 1), WindowConfig(1000, 1))
    elapsed = time.perf_counter() - t0
    peak = tracemalloc.get_traced_memory()[1]
    tracemalloc.stop()
    return peak, elapsed


def _synthetic_conllu(n: int) -> str:
    forest = DepForest(to_sentences(random_forest(random.Random(5), n, 20)))
    return to_conllu(forest)


@pytest.mark.slow
def test_criterion_5_performance():
    t0 = time.perf_counter()
    rep = stream_report(_chunks(10_000_000, 0), WindowConfig(1000, 1))
    elapsed = time.perf_counter() - t0
    small_peak, _ = _peak(2_000_000)
    big_peak, _ = _peak(10_000_000)
    bounded = big_peak <= 1.25 * small_peak

    text = _synthetic_conllu(50_000)
    t1 = time.perf_counter()
    forest = parse_conllu(text)
    parse_s = time.perf_counter() - t1
    rate = len(forest) / parse_s * 60

    ok = (rep.token_count == 10_000_000 and elapsed < 60 and bounded and rate >= 50_000)
    record(5, ok, f"10M tokens in {elapsed:.1f} s; traced peak {small_peak / 2**20:.1f} MiB at 2M "
                  f"vs {big_peak / 2**20:.1f} MiB at 10M; CoNLL-U {rate:,.0f} sentences/min")
    assert ok


# 6 -------------------------------------------------------------------------

def test_criterion_6_pipeline_golden(tmp_path):
    golden = (DEMO / "golden" / "metrics.csv").read_bytes()
    runs = []
    for i, threads in enumerate(("1", "1", "2", "4")):
        out = tmp_path / f"run{i}"
        code = run(["pipeline", "--config", str(DEMO / "config.ini"), "--out-dir", str(out),
                    "--threads", threads])
        runs.append(code == 0 and (out / "metrics.csv").read_bytes() == golden)
    ok = all(runs)
    record(6, ok, f"{sum(runs)}/{len(runs)} runs (threads 1,1,2,4) byte-identical to golden")
    assert ok
