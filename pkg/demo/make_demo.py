"""Regenerate the toy inputs under demo/ from a fixed seed.

Three synthetic languages with different morphology and word order:
  isola  SVO, no inflection, rigid order
  aggla  SOV, stacked suffixes, rigid order
  libra  mixed SVO/SOV/OSV, moderate inflection

Run from the repository root:  python3 demo/make_demo.py
"""

from __future__ import annotations

import csv
import random
from pathlib import Path

HERE = Path(__file__).resolve().parent
SEED = 20240601

NOUNS = ["dom", "kal", "ver", "tas", "mir", "sul", "pen", "rok", "lif", "bar", "nek", "gop"]
VERBS = ["sa", "mo", "ri", "ke", "tu", "lo", "pa", "ni"]
ADJS = ["bel", "gru", "fim", "zor", "hat"]
DETS = ["el", "na"]
SUFFIXES = {
    "aggla": {"noun": ["", "ek", "ler", "ekler", "im", "imde"], "verb": ["", "di", "yor", "mis", "ecek", "diler"]},
    "libra": {"noun": ["", "a", "os"], "verb": ["", "it", "unt"]},
    "isola": {"noun": [""], "verb": [""]},
}
ORDERS = {"isola": [("S", "V", "O")], "aggla": [("S", "O", "V")],
          "libra": [("S", "V", "O"), ("S", "O", "V"), ("O", "S", "V"), ("V", "S", "O")]}


def noun_phrase(rng: random.Random, lang: str) -> list[tuple[str, str, str]]:
    """(form, upos, role) triples; role 'head' marks the noun."""
    out = []
    if lang != "aggla" and rng.random() < 0.6:
        out.append((rng.choice(DETS), "DET", "det"))
    if rng.random() < 0.4:
        out.append((rng.choice(ADJS), "ADJ", "amod"))
    out.append((rng.choice(NOUNS) + rng.choice(SUFFIXES[lang]["noun"]), "NOUN", "head"))
    if lang == "libra" and rng.random() < 0.3:
        # post-nominal adjective
        out.append((rng.choice(ADJS), "ADJ", "amod"))
    return out


def sentence(rng: random.Random, lang: str) -> list[tuple[str, str, int, str]]:
    """One sentence as (form, upos, head, deprel) rows, 1-based heads."""
    order = rng.choice(ORDERS[lang])
    transitive = rng.random() < 0.8
    parts = {"S": noun_phrase(rng, lang), "V": None,
             "O": noun_phrase(rng, lang) if transitive else None}
    verb = rng.choice(VERBS) + rng.choice(SUFFIXES[lang]["verb"])
    rows: list[list] = []
    spans = {}
    for slot in order:
        if slot == "V":
            spans["V"] = len(rows)
            rows.append([verb, "VERB", 0, "root"])
        elif parts[slot] is not None:
            start = len(rows)
            for form, upos, role in parts[slot]:
                rows.append([form, upos, None, role])
            spans[slot] = (start, len(rows))
    v = spans["V"] + 1
    for slot, rel in (("S", "nsubj"), ("O", "obj")):
        if slot not in spans:
            continue
        a, b = spans[slot]
        head = next(i for i in range(a, b) if rows[i][3] == "head") + 1
        for i in range(a, b):
            if rows[i][3] == "head":
                rows[i][2], rows[i][3] = v, rel
            else:
                rows[i][2] = head
    return [tuple(r) for r in rows]


def write_language(lang: str, rng: random.Random, n_lines: int, n_trees: int) -> None:
    with open(HERE / f"{lang}.txt", "w", encoding="utf-8") as f:
        for _ in range(n_lines):
            f.write(" ".join(r[0] for r in sentence(rng, lang)) + " .\n")
    with open(HERE / f"{lang}.conllu", "w", encoding="utf-8") as f:
        for k in range(n_trees):
            rows = sentence(rng, lang)
            f.write(f"# sent_id = {lang}-{k + 1}\n")
            f.write("# text = " + " ".join(r[0] for r in rows) + "\n")
            for i, (form, upos, head, rel) in enumerate(rows, 1):
                f.write(f"{i}\t{form}\t_\t{upos}\t_\t_\t{head}\t{rel}\t_\t_\n")
            f.write("\n")


def write_pairs(rng: random.Random) -> None:
    with open(HERE / "isola.pairs.tsv", "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, delimiter="\t", lineterminator="\n")
        w.writerow(["id", "sentence_good", "sentence_bad", "phenomenon"])
        for k in range(40):
            s, o = rng.choice(NOUNS), rng.choice(NOUNS)
            v = rng.choice(VERBS)
            if k % 2 == 0:
                w.writerow([f"p{k}", f"{s} {v} {o} .", f"{s} {v} {o} qqq .", "extra-token"])
            else:
                w.writerow([f"p{k}", f"el {s} {v} {o} .", f"el {s} {v} {o} zzzz .", "extra-token"])


def write_features(rng: random.Random) -> None:
    features = [f"F{j}" for j in range(1, 9)]
    with open(HERE / "features.csv", "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["language", *features])
        for i in range(14):
            row = [rng.choice("abc") if rng.random() > 0.1 else "" for _ in features]
            row[0] = row[0] or "a"
            w.writerow([f"l{i:02d}", *row])


def write_perf() -> None:
    scores = {
        "isola": {"no-pos": 70.0, "absolute": 84.0, "relative": 86.0},
        "aggla": {"no-pos": 40.0, "absolute": 80.0, "relative": 83.0},
        "libra": {"no-pos": 55.0, "absolute": 75.0, "relative": 77.0},
    }
    with open(HERE / "perf.csv", "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["language", "task", "pos_type", "score", "stddev"])
        for lang, by_pos in scores.items():
            for pos, s in by_pos.items():
                w.writerow([lang, "ud", pos, s, ""])


def main() -> None:
    rng = random.Random(SEED)
    for lang in ("isola", "aggla", "libra"):
        write_language(lang, rng, n_lines=3000, n_trees=300)
    write_pairs(rng)
    write_features(rng)
    write_perf()


if __name__ == "__main__":
    main()
