from __future__ import annotations

import json
import shutil
import subprocess
import sys

import pytest

from typometrics.cli import run


def test_help_and_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        run(["--help"])
    assert exc.value.code == 0
    assert run(["--bogus"]) == 1
    assert run(["frobnicate"]) == 1
    assert run(["sample", "--features", "x.csv", "--k", "two"]) == 1
    assert "usage" in capsys.readouterr().err


def test_data_error_exit_code(tmp_path):
    assert run(["parse", "--conllu", str(tmp_path / "missing.conllu")]) == 2
    bad = tmp_path / "bad.conllu"
    bad.write_text("1\tonly\tthree\n")
    assert run(["parse", "--conllu", str(bad)]) == 2


def test_tokenizer_train_and_encode(tmp_path, demo_dir, monkeypatch, capsys):
    model = tmp_path / "tok.json"
    assert run(["tokenizer", "train", "--input", str(demo_dir / "isola.txt"),
                "--vocab-size", "60", "--out", str(model)]) == 0
    assert (tmp_path / "tok.json.manifest.json").exists()
    import io
    monkeypatch.setattr(sys, "stdin", io.StringIO("dom sa kal .\n"))
    assert run(["tokenizer", "encode", "--model", str(model)]) == 0
    out = capsys.readouterr().out
    assert out.replace(" ", "").strip() == "domsakal."


def test_metrics_corpus_json_deterministic(tmp_path, demo_dir):
    model = tmp_path / "tok.json"
    run(["tokenizer", "train", "--input", str(demo_dir / "aggla.txt"), "--vocab-size", "80",
         "--out", str(model)])
    outs = []
    for i, threads in enumerate(("1", "3")):
        out = tmp_path / f"m{i}.json"
        assert run(["metrics", "corpus", "--model", str(model), "--input",
                    str(demo_dir / "aggla.txt"), "--sample", "500", "--window", "100",
                    "--seed", "3", "--threads", threads, "--out", str(out)]) == 0
        outs.append(json.loads(out.read_text()))
    assert outs[0]["report"] == outs[1]["report"]
    man = outs[0]["manifest"]
    assert man["subcommand"] == "metrics corpus" and man["seed"] == 3
    assert str(demo_dir / "aggla.txt") in man["inputs"]
    assert "wall_time_s" not in man
    side = json.loads((tmp_path / "m0.json.manifest.json").read_text())
    assert "wall_time_s" in side


def test_metrics_corpus_from_ids(tmp_path, capsys):
    ids = tmp_path / "ids.txt"
    ids.write_text("0 1 0 2\n")
    assert run(["metrics", "corpus", "--ids-input", str(ids), "--window", "4",
                "--format", "csv"]) == 0
    header, row = capsys.readouterr().out.splitlines()
    rec = dict(zip(header.split(","), row.split(",")))
    assert float(rec["av"]) == 1.5 and float(rec["eta"]) == 1.0
    assert run(["metrics", "corpus", "--window", "4"]) == 1


def test_metrics_ud_and_parse(demo_dir, capsys):
    assert run(["metrics", "ud", "--conllu", str(demo_dir / "isola.conllu"), "--sentences",
                "100", "--sequential", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("language,hde")
    assert lines[1].split(",")[3] == "0.0"  # rigid SVO
    assert run(["parse", "--conllu", str(demo_dir / "libra.conllu"), "--stats"]) == 0
    assert "sentences\t300" in capsys.readouterr().out


def test_sample_blimp_correlate_scatter(tmp_path, demo_dir, capsys):
    assert run(["sample", "--features", str(demo_dir / "features.csv"), "--k", "4",
                "--mode", "exact", "--curve", "--k-max", "6"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert len(payload["sample"]) == 4 and len(payload["curve"]) == 5

    model = tmp_path / "tok.json"
    run(["tokenizer", "train", "--input", str(demo_dir / "isola.txt"), "--vocab-size", "60",
         "--out", str(model)])
    capsys.readouterr()
    assert run(["blimp", "--model", str(model), "--pairs", str(demo_dir / "isola.pairs.tsv"),
                "--scorer", f"bow:{demo_dir / 'isola.txt'}"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["n_pairs"] == 40 and "extra-token" in rep["by_phenomenon"]
    assert run(["blimp", "--model", str(model), "--pairs", str(demo_dir / "isola.pairs.tsv"),
                "--scorer", "nope"]) == 1

    capsys.readouterr()
    assert run(["correlate"]) == 0
    rows = capsys.readouterr().out.splitlines()
    assert len(rows) == 1 + 40
    assert run(["scatter", "--metric", "mattr", "--task", "ud"]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 22


def test_pipeline_matches_golden(tmp_path, demo_dir):
    for threads in ("1", "4"):
        out = tmp_path / f"out{threads}"
        assert run(["pipeline", "--config", str(demo_dir / "config.ini"), "--out-dir", str(out),
                    "--threads", threads]) == 0
        assert (out / "metrics.csv").read_bytes() == (demo_dir / "golden" / "metrics.csv").read_bytes()
        assert (out / "sample.txt").exists() and (out / "correlations.csv").exists()


@pytest.mark.skipif(shutil.which("typometrics") is None, reason="console script not installed")
def test_console_script():
    res = subprocess.run(["typometrics", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip()
