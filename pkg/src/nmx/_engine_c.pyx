# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: scalar lane walks with early aborts.

Mirrors nmx._engine_py exactly; the parity test asserts bit-identical
results. Arrays are packed once per encoded game into flat buffers so the
inner loops are pure C index arithmetic.
"""

import numpy as np


cdef long long _NEG = -(1 << 62)


class _Packed:
    __slots__ = (
        "T", "A", "L",
        "args_flat", "next_flat", "stage_flat", "strides_flat", "term",
        "off_args", "off_next", "off_stage", "off_str",
        "O", "JA", "W", "nodes0", "obs", "wsel",
    )


def _pack(enc):
    packed = getattr(enc, "_packed_c", None)
    if packed is not None:
        return packed
    p = _Packed()
    T = enc.horizon
    agents = len(enc.agents)
    p.T = T
    p.A = agents
    p.L = int(enc.lane_nodes0.shape[0])
    args_parts, next_parts, stage_parts, stride_parts = [], [], [], []
    off_args, off_next, off_stage, off_str = [], [], [], []
    O, JA, W = [], [], []
    a_off = n_off = s_off = st_off = 0
    for t in range(T):
        arr = np.ascontiguousarray(enc.arg_ids[t], dtype=np.int32)
        off_args.append(a_off)
        a_off += arr.size
        args_parts.append(arr.reshape(-1))
        nxt = np.ascontiguousarray(enc.next_node[t], dtype=np.int32)
        off_next.append(n_off)
        n_off += nxt.size
        next_parts.append(nxt.reshape(-1))
        stg = np.ascontiguousarray(enc.stage_scaled[t], dtype=np.int64)
        off_stage.append(s_off)
        s_off += stg.size
        stage_parts.append(stg.reshape(-1))
        std = np.ascontiguousarray(enc.ja_strides[t], dtype=np.int64)
        off_str.append(st_off)
        st_off += std.size
        stride_parts.append(std)
        O.append(enc.arg_ids[t].shape[1])
        JA.append(enc.ja_counts[t])
        W.append(enc.next_node[t].shape[3])
    p.args_flat = (
        np.concatenate(args_parts) if args_parts else np.zeros(0, dtype=np.int32)
    )
    p.next_flat = (
        np.concatenate(next_parts) if next_parts else np.zeros(0, dtype=np.int32)
    )
    p.stage_flat = (
        np.concatenate(stage_parts) if stage_parts else np.zeros(0, dtype=np.int64)
    )
    p.strides_flat = (
        np.concatenate(stride_parts) if stride_parts else np.zeros(0, dtype=np.int64)
    )
    p.term = np.ascontiguousarray(enc.term_scaled, dtype=np.int64)
    p.off_args = np.array(off_args, dtype=np.int64)
    p.off_next = np.array(off_next, dtype=np.int64)
    p.off_stage = np.array(off_stage, dtype=np.int64)
    p.off_str = np.array(off_str, dtype=np.int64)
    p.O = np.array(O, dtype=np.int64)
    p.JA = np.array(JA, dtype=np.int64)
    p.W = np.array(W, dtype=np.int64)
    p.nodes0 = np.ascontiguousarray(enc.lane_nodes0, dtype=np.int32)
    p.obs = np.ascontiguousarray(enc.lane_obs, dtype=np.int32)
    p.wsel = np.ascontiguousarray(enc.lane_w, dtype=np.int32)
    enc._packed_c = p
    return p


cdef long long _eval(
    const int[::1] args_flat, const int[::1] next_flat,
    const long long[::1] stage_flat, const long long[::1] strides_flat,
    const long long[::1] term,
    const long long[::1] off_args, const long long[::1] off_next,
    const long long[::1] off_stage, const long long[::1] off_str,
    const long long[::1] O, const long long[::1] JA, const long long[::1] W,
    const int[::1] nodes0, const int[:, ::1] obs, const int[:, ::1] wsel,
    const long long[::1] assign,
    Py_ssize_t T, Py_ssize_t A, Py_ssize_t L,
    long long abort_at,
) noexcept nogil:
    cdef Py_ssize_t lane, t, a
    cdef long long worst = _NEG
    cdef long long cost, ja, node, o, base
    for lane in range(L):
        node = nodes0[lane]
        cost = 0
        for t in range(T):
            o = obs[t, lane]
            base = off_args[t] + (node * O[t] + o) * A
            ja = 0
            for a in range(A):
                ja += assign[args_flat[base + a]] * strides_flat[off_str[t] + a]
            cost += stage_flat[off_stage[t] + node * JA[t] + ja]
            node = next_flat[
                off_next[t] + ((node * O[t] + o) * JA[t] + ja) * W[t] + wsel[t, lane]
            ]
        cost += term[node]
        if cost > worst:
            worst = cost
            if abort_at != _NEG and worst >= abort_at:
                return worst
    return worst


def evaluate_assignment(enc, assign):
    p = _pack(enc)
    assign_arr = np.ascontiguousarray(assign, dtype=np.int64)
    if assign_arr.shape[0] == 0:
        assign_arr = np.zeros(1, dtype=np.int64)
    return int(
        _eval(
            p.args_flat, p.next_flat, p.stage_flat, p.strides_flat, p.term,
            p.off_args, p.off_next, p.off_stage, p.off_str,
            p.O, p.JA, p.W, p.nodes0, p.obs, p.wsel,
            assign_arr, p.T, p.A, p.L, _NEG,
        )
    )


def search_min_profile(enc, enum):
    p = _pack(enc)
    cdef Py_ssize_t npos = len(enum.order)
    num_args = len(enc.search_args)
    assign_np = np.zeros(max(num_args, 1), dtype=np.int64)
    order_np = np.array(enum.order, dtype=np.int64)
    counts_np = np.array(enum.counts, dtype=np.int64)
    digits_np = np.zeros(max(npos, 1), dtype=np.int64)

    cdef long long[::1] assign = assign_np
    cdef long long[::1] order = order_np
    cdef long long[::1] counts = counts_np
    cdef long long[::1] digits = digits_np

    cdef const int[::1] args_flat = p.args_flat
    cdef const int[::1] next_flat = p.next_flat
    cdef const long long[::1] stage_flat = p.stage_flat
    cdef const long long[::1] strides_flat = p.strides_flat
    cdef const long long[::1] term = p.term
    cdef const long long[::1] off_args = p.off_args
    cdef const long long[::1] off_next = p.off_next
    cdef const long long[::1] off_stage = p.off_stage
    cdef const long long[::1] off_str = p.off_str
    cdef const long long[::1] O = p.O
    cdef const long long[::1] JA = p.JA
    cdef const long long[::1] W = p.W
    cdef const int[::1] nodes0 = p.nodes0
    cdef const int[:, ::1] obs = p.obs
    cdef const int[:, ::1] wsel = p.wsel
    cdef Py_ssize_t T = p.T, A = p.A, L = p.L

    cdef long long best = _NEG
    cdef long long val
    cdef long long searched = 0
    cdef Py_ssize_t pos
    best_assign = None

    if npos == 0:
        val = _eval(
            args_flat, next_flat, stage_flat, strides_flat, term,
            off_args, off_next, off_stage, off_str, O, JA, W,
            nodes0, obs, wsel, assign, T, A, L, _NEG,
        )
        return int(val), np.zeros(num_args, dtype=np.int64), 1

    while True:
        searched += 1
        val = _eval(
            args_flat, next_flat, stage_flat, strides_flat, term,
            off_args, off_next, off_stage, off_str, O, JA, W,
            nodes0, obs, wsel, assign, T, A, L,
            best if best_assign is not None else _NEG,
        )
        if best_assign is None or val < best:
            best = val
            best_assign = assign_np[:num_args].copy()
        pos = npos - 1
        while pos >= 0:
            digits[pos] += 1
            if digits[pos] < counts[pos]:
                assign[order[pos]] = digits[pos]
                break
            digits[pos] = 0
            assign[order[pos]] = 0
            pos -= 1
        if pos < 0:
            return int(best), best_assign, int(searched)
