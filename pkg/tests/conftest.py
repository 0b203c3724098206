from __future__ import annotations

import random
import sys
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", max_examples=100, deadline=None)
settings.load_profile("default")

REPO = Path(__file__).resolve().parents[1]
DEMO = REPO / "demo"


def random_forest(rng: random.Random, n_sent: int, max_len: int = 9):
    """Random valid trees as lists of (upos, head, deprel) triples."""
    upos = ["NOUN", "VERB", "ADJ", "DET"]
    rels = ["nsubj", "obj", "amod", "det", "nsubj:pass", "obl"]
    forest = []
    for _ in range(n_sent):
        n = rng.randint(1, max_len)
        order = list(range(1, n + 1))
        rng.shuffle(order)
        heads = {order[0]: 0}
        for i, node in enumerate(order[1:], 1):
            heads[node] = order[rng.randrange(i)]
        forest.append([(rng.choice(upos), heads[i], "root" if heads[i] == 0 else rng.choice(rels))
                       for i in range(1, n + 1)])
    return forest


def to_sentences(forest):
    from typometrics.conllu import DepSentence, DepToken
    return [DepSentence([DepToken(i, f"w{i}", u, h, r) for i, (u, h, r) in enumerate(toks, 1)])
            for toks in forest]


@pytest.fixture
def demo_dir() -> Path:
    return DEMO


def pytest_terminal_summary(terminalreporter):
    results = getattr(sys.modules.get("test_acceptance"), "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        status, detail = results[n]
        terminalreporter.write_line(f"ACCEPTANCE {n} {status}: {detail}")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    setattr(item, f"rep_{rep.when}", rep)
