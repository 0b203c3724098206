# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled sliding-window kernel. Mirrors ``_window_py.scan`` operation for operation."""

import numpy as np
cimport numpy as cnp
from libcpp.unordered_map cimport unordered_map
from libc.stdint cimport int64_t

cnp.import_array()


cdef struct State:
    int64_t distinct
    int64_t D
    int64_t L
    int64_t Q
    double sum_eff


cdef inline void _refresh(State* st, int64_t o, int64_t k_before,
                          int64_t[::1] nsucc, int64_t[::1] ksucc,
                          double[::1] slog, double[::1] eff,
                          const double[::1] log2) noexcept nogil:
    cdef int64_t k = ksucc[o]
    cdef int64_t n
    cdef double new
    if k >= 2:
        n = nsucc[o]
        new = (log2[n] - slog[o] / n) / log2[k]
    else:
        new = 0.0
    if k_before >= 2:
        st.sum_eff -= eff[o]
        st.Q -= 1
    if k >= 2:
        st.sum_eff += new
        st.Q += 1
    eff[o] = new


cdef inline void _add_pair(State* st, unordered_map[int64_t, int64_t]& pc, int64_t V,
                           int64_t a, int64_t b, int64_t unk, bint left,
                           int64_t[::1] nsucc, int64_t[::1] ksucc,
                           double[::1] slog, double[::1] eff,
                           const double[::1] log2, const double[::1] dx) noexcept nogil:
    cdef int64_t o, nb, key, c, k_before, n
    if a == unk or b == unk:
        return
    if left:
        o = b
        nb = a
    else:
        o = a
        nb = b
    key = o * V + nb
    c = pc[key]
    pc[key] = c + 1
    k_before = ksucc[o]
    if c == 0:
        st.D += 1
        ksucc[o] = k_before + 1
    n = nsucc[o]
    if n == 0:
        st.L += 1
        slog[o] = 0.0
    nsucc[o] = n + 1
    slog[o] += dx[c]
    _refresh(st, o, k_before, nsucc, ksucc, slog, eff, log2)


cdef inline void _remove_pair(State* st, unordered_map[int64_t, int64_t]& pc, int64_t V,
                              int64_t a, int64_t b, int64_t unk, bint left,
                              int64_t[::1] nsucc, int64_t[::1] ksucc,
                              double[::1] slog, double[::1] eff,
                              const double[::1] log2, const double[::1] dx) noexcept nogil:
    cdef int64_t o, nb, key, c, k_before, n
    if a == unk or b == unk:
        return
    if left:
        o = b
        nb = a
    else:
        o = a
        nb = b
    key = o * V + nb
    c = pc[key] - 1
    k_before = ksucc[o]
    if c == 0:
        pc.erase(key)
        st.D -= 1
        ksucc[o] = k_before - 1
    else:
        pc[key] = c
    n = nsucc[o] - 1
    nsucc[o] = n
    if n == 0:
        st.L -= 1
        slog[o] = 0.0
    else:
        slog[o] -= dx[c]
    _refresh(st, o, k_before, nsucc, ksucc, slog, eff, log2)


def scan(tokens, int64_t window, int64_t step, int64_t unk_id, bint left,
         int64_t first_window, int64_t n_windows, int64_t block, int64_t resync,
         log2_table, dxlogx_table):
    cdef const int64_t[::1] toks = np.ascontiguousarray(tokens, dtype=np.int64)
    cdef const double[::1] log2 = np.ascontiguousarray(log2_table, dtype=np.float64)
    cdef const double[::1] dx = np.ascontiguousarray(dxlogx_table, dtype=np.float64)
    cdef int64_t nblocks = 0
    if n_windows:
        nblocks = ((first_window % block) + n_windows + block - 1) // block
    out_arr = np.zeros((nblocks, 5), dtype=np.float64)
    if n_windows == 0:
        return out_arr
    cdef double[:, ::1] out = out_arr

    cdef int64_t V = max(int(np.max(toks)) if toks.shape[0] else 0, unk_id) + 1
    cdef int64_t[::1] cnt = np.zeros(V, dtype=np.int64)
    cdef int64_t[::1] nsucc = np.zeros(V, dtype=np.int64)
    cdef int64_t[::1] ksucc = np.zeros(V, dtype=np.int64)
    cdef double[::1] slog = np.zeros(V, dtype=np.float64)
    cdef double[::1] eff = np.zeros(V, dtype=np.float64)

    cdef unordered_map[int64_t, int64_t] pc
    cdef State st
    cdef int64_t j, s = 0, i, e, r, t, c, row
    cdef int64_t base_block = first_window // block
    cdef int64_t prev_s = -1
    cdef int64_t unk = unk_id

    with nogil:
        pc.reserve(<size_t>(2 * window))
        for j in range(first_window, first_window + n_windows):
            if j == first_window or j % resync == 0:
                s = (j - first_window) * step
                # zero only entries the previous state touched
                if prev_s >= 0:
                    for i in range(prev_s, prev_s + window):
                        t = toks[i]
                        cnt[t] = 0
                        nsucc[t] = 0
                        ksucc[t] = 0
                        slog[t] = 0.0
                        eff[t] = 0.0
                pc.clear()
                st.distinct = 0
                st.D = 0
                st.L = 0
                st.Q = 0
                st.sum_eff = 0.0
                t = toks[s]
                if cnt[t] == 0:
                    st.distinct += 1
                cnt[t] += 1
                for i in range(s + 1, s + window):
                    t = toks[i]
                    if cnt[t] == 0:
                        st.distinct += 1
                    cnt[t] += 1
                    _add_pair(&st, pc, V, toks[i - 1], t, unk, left,
                              nsucc, ksucc, slog, eff, log2, dx)
            else:
                for r in range(step):
                    t = toks[s]
                    c = cnt[t] - 1
                    if c == 0:
                        st.distinct -= 1
                    cnt[t] = c
                    _remove_pair(&st, pc, V, t, toks[s + 1], unk, left,
                                 nsucc, ksucc, slog, eff, log2, dx)
                    e = s + window
                    t = toks[e]
                    if cnt[t] == 0:
                        st.distinct += 1
                    cnt[t] += 1
                    _add_pair(&st, pc, V, toks[e - 1], t, unk, left,
                              nsucc, ksucc, slog, eff, log2, dx)
                    s += 1
            prev_s = s
            row = j // block - base_block
            out[row, 0] += <double>st.distinct
            if st.L > 0:
                out[row, 1] += <double>st.D / <double>st.L
                out[row, 2] += 1.0
            if st.Q > 0:
                out[row, 3] += st.sum_eff / <double>st.Q
                out[row, 4] += 1.0
    return out_arr
