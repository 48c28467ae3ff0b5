"""Numpy fallback kernels: vectorized over primitive lanes."""

from __future__ import annotations

import numpy as np


def evaluate_assignment(enc, assign) -> int:
    assign = np.asarray(assign, dtype=np.int64)
    nodes = enc.lane_nodes0.astype(np.int64)
    cost = np.zeros(nodes.shape[0], dtype=np.int64)
    T = enc.horizon
    for t in range(T):
        obs = enc.lane_obs[t]
        args = enc.arg_ids[t][nodes, obs]  # [L, A]
        acts = assign[args]
        ja = acts @ enc.ja_strides[t]
        cost += enc.stage_scaled[t][nodes, ja]
        nodes = enc.next_node[t][nodes, obs, ja, enc.lane_w[t]].astype(np.int64)
    if T >= 0:
        cost += enc.term_scaled[nodes]
    return int(cost.max())


def search_min_profile(enc, enum):
    order = enum.order
    counts = enum.counts
    num_args = len(enc.search_args)
    assign = np.zeros(num_args, dtype=np.int64)
    if not order:
        return evaluate_assignment(enc, assign), assign, 1

    digits = [0] * len(order)
    best = None
    best_assign = None
    searched = 0
    while True:
        searched += 1
        val = evaluate_assignment(enc, assign)
        if best is None or val < best:
            best = val
            best_assign = assign.copy()
        # odometer: last canonical position varies fastest
        pos = len(digits) - 1
        while pos >= 0:
            digits[pos] += 1
            if digits[pos] < counts[pos]:
                assign[order[pos]] = digits[pos]
                break
            digits[pos] = 0
            assign[order[pos]] = 0
            pos -= 1
        if pos < 0:
            return best, best_assign, searched
