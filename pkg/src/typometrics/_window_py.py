"""Pure-Python sliding-window kernel (fallback for ``_window_ext``).

Both kernels perform the same floating-point operations in the same order,
so they agree bit for bit.
"""

from __future__ import annotations

import numpy as np

# Columns of the block-sum array returned by ``scan``.
DISTINCT, AV_SUM, AV_N, ETA_SUM, ETA_N = range(5)


def scan(tokens, window, step, unk_id, left, first_window, n_windows,
         block, resync, log2_table, dxlogx_table):
    """Evaluate windows ``first_window .. first_window + n_windows - 1``.

    ``tokens[0]`` is the first token of window ``first_window``. The state is
    rebuilt from scratch at every window index divisible by ``resync``, and
    per-window values are summed into one row per group of ``block`` windows
    (block boundaries are absolute window indices).
    """
    toks = [int(t) for t in tokens]
    log2 = [float(x) for x in log2_table]
    dx = [float(x) for x in dxlogx_table]
    nblocks = ((first_window % block) + n_windows + block - 1) // block if n_windows else 0
    out = np.zeros((nblocks, 5), dtype=np.float64)
    if n_windows == 0:
        return out

    cnt: dict[int, int] = {}
    pc: dict[tuple[int, int], int] = {}
    nsucc: dict[int, int] = {}
    ksucc: dict[int, int] = {}
    slog: dict[int, float] = {}
    eff: dict[int, float] = {}
    st = {"distinct": 0, "D": 0, "L": 0, "Q": 0, "sum_eff": 0.0}

    def refresh(o, k_before):
        k = ksucc.get(o, 0)
        if k >= 2:
            n = nsucc[o]
            new = (log2[n] - slog[o] / n) / log2[k]
        else:
            new = 0.0
        if k_before >= 2:
            st["sum_eff"] -= eff[o]
            st["Q"] -= 1
        if k >= 2:
            st["sum_eff"] += new
            st["Q"] += 1
        eff[o] = new

    def add_pair(a, b):
        if a == unk_id or b == unk_id:
            return
        o, nb = (b, a) if left else (a, b)
        key = (o, nb)
        c = pc.get(key, 0)
        pc[key] = c + 1
        k_before = ksucc.get(o, 0)
        if c == 0:
            st["D"] += 1
            ksucc[o] = k_before + 1
        n = nsucc.get(o, 0)
        if n == 0:
            st["L"] += 1
            slog[o] = 0.0
        nsucc[o] = n + 1
        slog[o] += dx[c]
        refresh(o, k_before)

    def remove_pair(a, b):
        if a == unk_id or b == unk_id:
            return
        o, nb = (b, a) if left else (a, b)
        key = (o, nb)
        c = pc[key] - 1
        k_before = ksucc[o]
        if c == 0:
            del pc[key]
            st["D"] -= 1
            ksucc[o] = k_before - 1
        else:
            pc[key] = c
        n = nsucc[o] - 1
        nsucc[o] = n
        if n == 0:
            st["L"] -= 1
            slog[o] = 0.0
        else:
            slog[o] -= dx[c]
        refresh(o, k_before)

    def add_tok(t):
        c = cnt.get(t, 0)
        if c == 0:
            st["distinct"] += 1
        cnt[t] = c + 1

    def remove_tok(t):
        c = cnt[t] - 1
        if c == 0:
            st["distinct"] -= 1
        cnt[t] = c

    def rebuild(s):
        for d in (cnt, pc, nsucc, ksucc, slog, eff):
            d.clear()
        for key in st:
            st[key] = 0.0 if key == "sum_eff" else 0
        add_tok(toks[s])
        for i in range(s + 1, s + window):
            add_tok(toks[i])
            add_pair(toks[i - 1], toks[i])

    base_block = first_window // block
    s = 0
    for j in range(first_window, first_window + n_windows):
        if j == first_window or j % resync == 0:
            s = (j - first_window) * step
            rebuild(s)
        else:
            for _ in range(step):
                remove_tok(toks[s])
                remove_pair(toks[s], toks[s + 1])
                e = s + window
                add_tok(toks[e])
                add_pair(toks[e - 1], toks[e])
                s += 1
        row = out[j // block - base_block]
        row[DISTINCT] += st["distinct"]
        if st["L"] > 0:
            row[AV_SUM] += st["D"] / st["L"]
            row[AV_N] += 1
        if st["Q"] > 0:
            row[ETA_SUM] += st["sum_eff"] / st["Q"]
            row[ETA_N] += 1
    return out
