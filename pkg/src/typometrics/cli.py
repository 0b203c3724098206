"""Command-line entry point: ``typometrics <subcommand> ...``.

Exit status is 0 on success, 1 on a usage error and 2 on a data error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .analysis import (AnalysisError, MetricTable, PerformanceTable, correlate_metrics,
                       correlations_csv, emit_scatter, figure_grid, read_spec,
                       reference_metrics, reference_performance, scatter_csv)
from .bpe import TokenizerError, TokenizerModel, train_bpe
from .conllu import ConlluError, read_conllu, take_sentences
from .corpus_metrics import WindowConfig, WindowError, corpus_report, sample_lines, stream_report
from .mlm_scoring import (CommandScorer, ScoringError, bag_of_words_scorer,
                          minimal_pair_accuracy, read_pairs)
from .sampling import (FeatureMatrix, SamplingError, curve_csv, quality, saturation_curve,
                       select_maxsum)
from .util import file_digest, fmt
from .word_order import WordOrderError, word_order_report

DATA_ERRORS = (TokenizerError, WindowError, ConlluError, WordOrderError, SamplingError,
               ScoringError, AnalysisError, OSError, ValueError, configparser.Error)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


@dataclass
class RunManifest:
    subcommand: str
    flags: dict
    inputs: dict = field(default_factory=dict)
    seed: int | None = None
    version: str = __version__
    wall_time_s: float | None = None

    def add_input(self, path) -> None:
        if path and path != "-":
            self.inputs[str(path)] = file_digest(path)

    def embedded(self) -> dict:
        """Manifest without wall time, so embedding it keeps outputs reproducible."""
        d = asdict(self)
        d.pop("wall_time_s")
        return d


def _manifest(args, name: str) -> RunManifest:
    flags = {k: v for k, v in sorted(vars(args).items()) if k not in ("func",)}
    flags = {k: (str(v) if isinstance(v, Path) else v) for k, v in flags.items()}
    return RunManifest(name, flags, seed=getattr(args, "seed", None))


def _write_sidecar(out: Path, manifest: RunManifest, started: float) -> None:
    manifest.wall_time_s = round(time.perf_counter() - started, 3)
    side = out.with_name(out.name + ".manifest.json")
    side.write_text(json.dumps(asdict(manifest), indent=2, sort_keys=True) + "\n")


def _emit(text: str, out: Path | None, manifest: RunManifest, started: float) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")
        _write_sidecar(out, manifest, started)


def _json(payload: dict, manifest: RunManifest) -> str:
    payload = dict(payload)
    payload["manifest"] = manifest.embedded()
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _lines(path: str):
    if path == "-":
        for line in sys.stdin:
            yield line.rstrip("\n")
        return
    with open(path, encoding="utf-8") as f:
        for line in f:
            yield line.rstrip("\n")


# tokenizer ------------------------------------------------------------------

def cmd_tokenizer_train(args, started) -> int:
    m = _manifest(args, "tokenizer train")
    m.add_input(args.input)
    model = train_bpe(_lines(args.input), args.vocab_size, args.pretokenizer)
    args.out.write_text(model.dumps() + "\n", encoding="utf-8")
    _write_sidecar(args.out, m, started)
    return 0


def cmd_tokenizer_encode(args, started) -> int:
    model = TokenizerModel.load(args.model)
    for line in sys.stdin:
        stream = model.encode(line)
        if args.ids:
            sys.stdout.write(" ".join(map(str, stream.ids)) + "\n")
        else:
            sys.stdout.write(" ".join(model.tokens(stream)) + "\n")
    return 0


# metrics --------------------------------------------------------------------

def cmd_metrics_corpus(args, started) -> int:
    m = _manifest(args, "metrics corpus")
    config = WindowConfig(args.window, args.step)
    if args.ids_input:
        m.add_input(args.ids_input)

        def chunks():
            for line in _lines(args.ids_input):
                if line.strip():
                    yield [int(t) for t in line.split()]
        rep = stream_report(chunks(), config, unk_id=args.unk_id,
                            left_accessor=args.left_accessor)
        rep.language = args.language
    else:
        if not args.model or not args.input:
            raise UsageError("metrics corpus: --model and --input are required "
                             "unless --ids-input is given")
        m.add_input(args.model)
        m.add_input(args.input)
        model = TokenizerModel.load(args.model)
        lines = sample_lines(_lines(args.input), args.sample, args.seed)
        rep = corpus_report(model, lines, config, language=args.language,
                            threads=args.threads, left_accessor=args.left_accessor)
    if args.format == "csv":
        text = rep.to_csv()
    else:
        text = _json({"report": rep.to_dict()}, m)
    _emit(text, args.out, m, started)
    return 0


def cmd_metrics_ud(args, started) -> int:
    m = _manifest(args, "metrics ud")
    m.add_input(args.conllu)
    forest = read_conllu(args.conllu)
    seed = None if args.sequential else args.seed
    subset = take_sentences(forest, args.sentences, seed)
    rep = word_order_report(subset, max_dependents=args.max_deps, root_only=args.root_only,
                            language=args.language)
    rep.metadata["dropped_sentences"] = forest.dropped_count
    rep.metadata["selection"] = "first n" if seed is None else "seeded random"
    text = rep.to_csv() if args.format == "csv" else _json({"report": rep.to_dict()}, m)
    _emit(text, args.out, m, started)
    return 0


def cmd_parse(args, started) -> int:
    t0 = time.perf_counter()
    forest = read_conllu(args.conllu)
    elapsed = time.perf_counter() - t0
    if args.stats:
        n_tokens = sum(len(s) for s in forest)
        print(f"sentences\t{len(forest)}")
        print(f"dropped\t{forest.dropped_count}")
        print(f"tokens\t{n_tokens}")
        print(f"seconds\t{elapsed:.3f}")
    for d in forest.diagnostics[: args.show_diagnostics]:
        print(d, file=sys.stderr)
    return 0


# sampling -------------------------------------------------------------------

def cmd_sample(args, started) -> int:
    m = _manifest(args, "sample")
    m.add_input(args.features)
    matrix = FeatureMatrix.from_csv(args.features)
    chosen = select_maxsum(matrix, args.k, args.mode)
    payload = {"sample": chosen, "quality": quality(matrix, chosen).to_dict()}
    if args.curve:
        reports = saturation_curve(matrix, args.k_max or args.k, args.mode)
        payload["curve"] = [r.to_dict() for r in reports]
        if args.curve_out:
            args.curve_out.write_text(curve_csv(reports), encoding="utf-8")
            _write_sidecar(args.curve_out, m, started)
    _emit(_json(payload, m), args.out, m, started)
    return 0


# blimp ----------------------------------------------------------------------

def _make_scorer(spec: str, model: TokenizerModel, manifest: RunManifest):
    kind, _, arg = spec.partition(":")
    if kind == "bow" and arg:
        manifest.add_input(arg)
        return bag_of_words_scorer((model.encode(l) for l in _lines(arg)), len(model))
    if kind == "cmd" and arg:
        return CommandScorer(arg)
    raise UsageError(f"--scorer must be bow:<corpus> or cmd:<command>, got {spec!r}")


def cmd_blimp(args, started) -> int:
    m = _manifest(args, "blimp")
    m.add_input(args.model)
    m.add_input(args.pairs)
    model = TokenizerModel.load(args.model)
    pairs = read_pairs(args.pairs)
    scorer = _make_scorer(args.scorer, model, m)
    try:
        rep = minimal_pair_accuracy(scorer, model, pairs)
    finally:
        if isinstance(scorer, CommandScorer):
            scorer.close()
    _emit(_json(rep.to_dict(), m), args.out, m, started)
    return 0


# analysis -------------------------------------------------------------------

def _tables(args, m: RunManifest) -> tuple[MetricTable, PerformanceTable]:
    if args.metrics:
        m.add_input(args.metrics)
        metrics = MetricTable.from_csv(args.metrics)
    else:
        metrics = reference_metrics()
    if args.perf:
        m.add_input(args.perf)
        perf = PerformanceTable.from_csv(args.perf)
    else:
        perf = reference_performance()
    return metrics, perf


def cmd_correlate(args, started) -> int:
    m = _manifest(args, "correlate")
    metrics, perf = _tables(args, m)
    if args.spec:
        m.add_input(args.spec)
        spec = read_spec(args.spec)
    else:
        spec = figure_grid()
    reports = correlate_metrics(metrics, perf, spec, permutations=args.permutations,
                                seed=args.seed)
    if args.format == "json":
        text = _json({"correlations": [r.to_dict() for r in reports]}, m)
    else:
        text = correlations_csv(reports)
    _emit(text, args.out, m, started)
    return 0


def cmd_scatter(args, started) -> int:
    m = _manifest(args, "scatter")
    metrics, perf = _tables(args, m)
    _emit(scatter_csv(emit_scatter(metrics, perf, args.metric, args.task)), args.out, m, started)
    return 0


# pipeline -------------------------------------------------------------------

PIPELINE_COLUMNS = ("language", "mattr", "av", "eta", "ttr", "fertility", "tokens",
                    "hde", "roe", "so_roe", "sentences", "blimp_bow")


def run_pipeline(config_path: Path, out_dir: Path | None = None, *, seed: int | None = None,
                 threads: int | None = None, manifest: RunManifest | None = None) -> Path:
    """Run the full metric pipeline described by an INI config; return the output dir."""
    cp = configparser.ConfigParser()
    if not cp.read(config_path, encoding="utf-8"):
        raise OSError(f"cannot read config {config_path}")
    base = config_path.parent
    p = cp["pipeline"]
    seed = p.getint("seed", 0) if seed is None else seed
    threads = p.getint("threads", 1) if threads is None else threads
    if manifest is not None:
        manifest.seed = seed
        for sec in cp.sections():
            for key in ("corpus", "conllu", "pairs", "features", "perf", "spec"):
                if key in cp[sec]:
                    manifest.add_input(base / cp[sec][key])
    out_dir = Path(out_dir) if out_dir else base / p.get("out_dir", "out")
    out_dir.mkdir(parents=True, exist_ok=True)
    window = WindowConfig(p.getint("window", 1000), p.getint("step", 1))
    n_lines = p.getint("sample", 250000)
    vocab_size = p.getint("vocab_size", 50000)
    n_sents = p.getint("sentences", 1000)
    rule = p.get("pretokenizer", "whitespace")

    rows = []
    languages = sorted(s.split(":", 1)[1] for s in cp.sections() if s.startswith("language:"))
    for lang in languages:
        sec = cp[f"language:{lang}"]
        lines = sample_lines(_lines(str(base / sec["corpus"])), n_lines, seed)
        model = train_bpe(lines, vocab_size, rule)
        model.save(out_dir / f"{lang}.tokenizer.json")
        rep = corpus_report(model, lines, window, language=lang, threads=threads)
        row = {"language": lang, "mattr": rep.mattr, "av": rep.av, "eta": rep.eta,
               "ttr": rep.ttr_global, "fertility": rep.fertility, "tokens": rep.token_count}
        if "conllu" in sec:
            forest = take_sentences(read_conllu(base / sec["conllu"]), n_sents, seed)
            wo = word_order_report(forest)
            row.update(hde=wo.hde, roe=wo.roe, so_roe=wo.so_roe, sentences=wo.sentence_count)
        if "pairs" in sec:
            scorer = bag_of_words_scorer((model.encode(l) for l in lines), len(model))
            acc = minimal_pair_accuracy(scorer, model, read_pairs(base / sec["pairs"]))
            row["blimp_bow"] = acc.accuracy
        rows.append(row)

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PIPELINE_COLUMNS)
    for row in rows:
        w.writerow(["" if row.get(c) is None else fmt(row[c]) for c in PIPELINE_COLUMNS])
    (out_dir / "metrics.csv").write_text(buf.getvalue(), encoding="utf-8")

    if cp.has_section("sampling"):
        s = cp["sampling"]
        matrix = FeatureMatrix.from_csv(base / s["features"])
        k = s.getint("k", 7)
        mode = s.get("mode", "greedy")
        chosen = select_maxsum(matrix, k, mode)
        (out_dir / "sample.txt").write_text("\n".join(chosen) + "\n", encoding="utf-8")
        (out_dir / "saturation.csv").write_text(
            curve_csv(saturation_curve(matrix, s.getint("k_max", k), mode)), encoding="utf-8")

    if cp.has_section("correlate"):
        c = cp["correlate"]
        metrics = MetricTable.from_csv(out_dir / "metrics.csv")
        perf = PerformanceTable.from_csv(base / c["perf"])
        spec = read_spec(base / c["spec"]) if "spec" in c else [
            (mt, t, con) for mt, t, con in figure_grid() if mt in metrics.metrics
            and any(k[1] == t for k in perf.scores)]
        reports = correlate_metrics(metrics, perf, spec)
        (out_dir / "correlations.csv").write_text(correlations_csv(reports), encoding="utf-8")
    return out_dir


def cmd_pipeline(args, started) -> int:
    m = _manifest(args, "pipeline")
    m.add_input(args.config)
    out_dir = run_pipeline(args.config, args.out_dir, seed=args.seed, threads=args.threads,
                           manifest=m)
    _write_sidecar(out_dir / "metrics.csv", m, started)
    print(out_dir / "metrics.csv")
    return 0


# parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="typometrics", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    tok = sub.add_parser("tokenizer", help="train or apply a BPE tokenizer")
    tsub = tok.add_subparsers(dest="tokenizer_command", required=True, parser_class=_Parser)
    tr = tsub.add_parser("train", help="train a BPE model on a line corpus")
    tr.add_argument("--input", required=True)
    tr.add_argument("--vocab-size", type=int, required=True)
    tr.add_argument("--pretokenizer", default="whitespace",
                    choices=["whitespace", "whitespace+punct-split"])
    tr.add_argument("--out", type=Path, required=True)
    tr.set_defaults(func=cmd_tokenizer_train)
    en = tsub.add_parser("encode", help="tokenize stdin to stdout")
    en.add_argument("--model", required=True)
    en.add_argument("--ids", action="store_true", help="print ids instead of token strings")
    en.set_defaults(func=cmd_tokenizer_encode)

    met = sub.add_parser("metrics", help="corpus or treebank metrics")
    msub = met.add_subparsers(dest="metrics_command", required=True, parser_class=_Parser)
    mc = msub.add_parser("corpus", help="MATTR, AV, eta, TTR and fertility")
    mc.add_argument("--model")
    mc.add_argument("--input")
    mc.add_argument("--ids-input", help="file of space-separated token ids (streamed)")
    mc.add_argument("--unk-id", type=int, default=-1)
    mc.add_argument("--sample", type=int, default=250000)
    mc.add_argument("--window", type=int, default=1000)
    mc.add_argument("--step", type=int, default=1)
    mc.add_argument("--seed", type=int, default=0)
    mc.add_argument("--threads", type=int, default=1)
    mc.add_argument("--left-accessor", action="store_true")
    mc.add_argument("--language", default="")
    mc.add_argument("--format", choices=["json", "csv"], default="json")
    mc.add_argument("--out", type=Path)
    mc.set_defaults(func=cmd_metrics_corpus)
    mu = msub.add_parser("ud", help="HDE, ROE and SO-ROE from a CoNLL-U file")
    mu.add_argument("--conllu", required=True)
    mu.add_argument("--sentences", type=int, default=1000)
    mu.add_argument("--seed", type=int, default=0)
    mu.add_argument("--sequential", action="store_true", help="take the first n sentences")
    mu.add_argument("--root-only", action="store_true")
    mu.add_argument("--max-deps", type=int, default=5)
    mu.add_argument("--language", default="")
    mu.add_argument("--format", choices=["json", "csv"], default="json")
    mu.add_argument("--out", type=Path)
    mu.set_defaults(func=cmd_metrics_ud)

    pa = sub.add_parser("parse", help="parse a CoNLL-U file")
    pa.add_argument("--conllu", required=True)
    pa.add_argument("--stats", action="store_true")
    pa.add_argument("--show-diagnostics", type=int, default=0, metavar="N")
    pa.set_defaults(func=cmd_parse)

    sa = sub.add_parser("sample", help="MaxSum language sampling")
    sa.add_argument("--features", required=True)
    sa.add_argument("--k", type=int, required=True)
    sa.add_argument("--mode", choices=["exact", "greedy"], default="greedy")
    sa.add_argument("--curve", action="store_true")
    sa.add_argument("--k-max", type=int)
    sa.add_argument("--curve-out", type=Path)
    sa.add_argument("--out", type=Path)
    sa.set_defaults(func=cmd_sample)

    bl = sub.add_parser("blimp", help="minimal-pair accuracy by pseudo-log-likelihood")
    bl.add_argument("--model", required=True)
    bl.add_argument("--pairs", required=True)
    bl.add_argument("--scorer", required=True, help="bow:<corpus.txt> or cmd:<command>")
    bl.add_argument("--out", type=Path)
    bl.set_defaults(func=cmd_blimp)

    co = sub.add_parser("correlate", help="rank correlation of metrics with score drops")
    co.add_argument("--metrics")
    co.add_argument("--perf")
    co.add_argument("--spec")
    co.add_argument("--permutations", type=int, default=0)
    co.add_argument("--seed", type=int, default=0)
    co.add_argument("--format", choices=["json", "csv"], default="csv")
    co.add_argument("--out", type=Path)
    co.set_defaults(func=cmd_correlate)

    sc = sub.add_parser("scatter", help="long-form scatter data for one metric and task")
    sc.add_argument("--metric", required=True)
    sc.add_argument("--task", required=True)
    sc.add_argument("--metrics")
    sc.add_argument("--perf")
    sc.add_argument("--out", type=Path)
    sc.set_defaults(func=cmd_scatter)

    pi = sub.add_parser("pipeline", help="run the full metric pipeline from a config file")
    pi.add_argument("--config", type=Path, required=True)
    pi.add_argument("--out-dir", type=Path)
    pi.add_argument("--seed", type=int)
    pi.add_argument("--threads", type=int)
    pi.set_defaults(func=cmd_pipeline)
    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    started = time.perf_counter()
    try:
        args = parser.parse_args(argv)
        return args.func(args, started)
    except UsageError as exc:
        print(str(exc).rstrip(), file=sys.stderr)
        return 1
    except DATA_ERRORS as exc:
        print(f"typometrics: error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
