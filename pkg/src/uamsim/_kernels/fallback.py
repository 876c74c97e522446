"""Pure-Python kernels, bit-compatible with the compiled extension.

These are the reference implementations of the two hot loops. The
compiled twins in ``_core.pyx`` follow the exact same iteration order,
comparison direction and float arithmetic so that either backend yields
identical results for identical inputs.
"""

from __future__ import annotations

import math

import numpy as np


def held_karp(cost: np.ndarray):
    """Exact minimal closed tour over all nodes, depot fixed at index 0.

    ``cost`` is a dense (n, n) float64 matrix; missing arcs are +inf.
    Returns ``(total_cost, order)`` where ``order`` is an int64 array of
    length n starting at 0 (the closing arc back to 0 is implicit).
    Ties break toward the lowest node index. ``total_cost`` is +inf when
    no feasible tour exists.
    """
    c = np.ascontiguousarray(cost, dtype=np.float64)
    n = c.shape[0]
    m = n - 1  # free nodes 1..n-1, bit j <-> node j+1
    inf = math.inf
    size = 1 << m
    dp = [[inf] * m for _ in range(size)]
    parent = [[-1] * m for _ in range(size)]
    for j in range(m):
        dp[1 << j][j] = c[0, j + 1]
    for mask in range(1, size):
        row = dp[mask]
        for j in range(m):
            bit = 1 << j
            if not mask & bit:
                continue
            prev_mask = mask ^ bit
            if prev_mask == 0:
                continue
            prev_row = dp[prev_mask]
            best = inf
            best_k = -1
            for k in range(m):
                if not prev_mask & (1 << k):
                    continue
                cand = prev_row[k] + c[k + 1, j + 1]
                if cand < best:
                    best = cand
                    best_k = k
            row[j] = best
            parent[mask][j] = best_k
    full = size - 1
    best = inf
    best_j = -1
    for j in range(m):
        cand = dp[full][j] + c[j + 1, 0]
        if cand < best:
            best = cand
            best_j = j
    order = np.zeros(n, dtype=np.int64)
    if best_j >= 0 and best < inf:
        mask = full
        j = best_j
        pos = n - 1
        while j >= 0:
            order[pos] = j + 1
            pos -= 1
            nxt = parent[mask][j]
            mask ^= 1 << j
            j = nxt
    return float(best), order


def two_state_chain(u: np.ndarray, p_enter: float, p_exit: float, init_blocked: bool):
    """Blocked/clear Markov chain driven by pre-drawn uniforms.

    Step i transitions from the previous state using ``u[i]``: a clear
    link blocks when ``u[i] < p_enter``; a blocked link clears when
    ``u[i] < p_exit``. Returns a uint8 array of blocked indicators.
    """
    n = u.shape[0]
    blocked = np.empty(n, dtype=np.uint8)
    state = 1 if init_blocked else 0
    for i in range(n):
        ui = u[i]
        if state:
            if ui < p_exit:
                state = 0
        else:
            if ui < p_enter:
                state = 1
        blocked[i] = state
    return blocked
