"""Compare the compiled and pure-Python window kernels on a Zipfian stream.

    python3 benchmarks/bench_window.py --tokens 2000000 --window 1000
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from typometrics.corpus_metrics import KERNELS, WindowConfig, window_metrics


def zipf_stream(n: int, vocab: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    ranks = np.arange(1, vocab + 1, dtype=np.float64)
    p = 1.0 / ranks
    p /= p.sum()
    return rng.choice(vocab, size=n, p=p).astype(np.int64)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--tokens", type=int, default=1_000_000)
    ap.add_argument("--vocab", type=int, default=50_000)
    ap.add_argument("--window", type=int, default=1000)
    ap.add_argument("--step", type=int, default=1)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--python-tokens", type=int, default=200_000,
                    help="stream length for the slow pure-Python kernel")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    cfg = WindowConfig(args.window, args.step)
    results = {}
    for name in sorted(KERNELS):
        n = args.tokens if name == "compiled" else min(args.tokens, args.python_tokens)
        ids = zipf_stream(n, args.vocab, args.seed)
        t0 = time.perf_counter()
        rep = window_metrics(ids, cfg, threads=args.threads, backend=name)
        dt = time.perf_counter() - t0
        results[name] = (n, dt, rep)
        print(f"{name:9s} tokens={n:>10d}  {dt:8.3f} s  {n / dt / 1e6:8.3f} Mtok/s  "
              f"mattr={rep.mattr:.6f} av={rep.av:.6f} eta={rep.eta:.6f}")

    if len(results) == 2:
        n = results["python"][0]
        ids = zipf_stream(n, args.vocab, args.seed)
        a = window_metrics(ids, cfg, backend="compiled")
        b = results["python"][2]
        same = (a.mattr, a.av, a.eta) == (b.mattr, b.av, b.eta)
        speedup = (results["python"][1] / n) / (results["compiled"][1] / results["compiled"][0])
        print(f"identical on {n} tokens: {same}; per-token speedup x{speedup:.1f}")


if __name__ == "__main__":
    main()
