# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the two hot loops.

Mirrors uamsim._kernels.fallback exactly: same iteration order, same
strict-< tie-breaking, same float64 arithmetic. Do not compile with
-ffast-math; infeasible arcs are +inf and must propagate.
"""

from libc.math cimport INFINITY

import numpy as np

cimport numpy as cnp

cnp.import_array()


def held_karp(cost):
    """Exact minimal closed tour, depot at index 0; see fallback.held_karp."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] c = np.ascontiguousarray(
        cost, dtype=np.float64
    )
    cdef Py_ssize_t n = c.shape[0]
    cdef Py_ssize_t m = n - 1
    cdef Py_ssize_t size = 1 << m
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] dp = np.full(
        (size, m), INFINITY, dtype=np.float64
    )
    cdef cnp.ndarray[cnp.int16_t, ndim=2, mode="c"] parent = np.full(
        (size, m), -1, dtype=np.int16
    )
    cdef Py_ssize_t mask, prev_mask, j, k, pos
    cdef long bit
    cdef double best, cand
    cdef long best_k, best_j, nxt

    for j in range(m):
        dp[1 << j, j] = c[0, j + 1]
    for mask in range(1, size):
        for j in range(m):
            bit = 1 << j
            if not mask & bit:
                continue
            prev_mask = mask ^ bit
            if prev_mask == 0:
                continue
            best = INFINITY
            best_k = -1
            for k in range(m):
                if not prev_mask & (1 << k):
                    continue
                cand = dp[prev_mask, k] + c[k + 1, j + 1]
                if cand < best:
                    best = cand
                    best_k = k
            dp[mask, j] = best
            parent[mask, j] = <cnp.int16_t> best_k

    cdef Py_ssize_t full = size - 1
    best = INFINITY
    best_j = -1
    for j in range(m):
        cand = dp[full, j] + c[j + 1, 0]
        if cand < best:
            best = cand
            best_j = j

    cdef cnp.ndarray[cnp.int64_t, ndim=1] order = np.zeros(n, dtype=np.int64)
    cdef long jj
    if best_j >= 0 and best < INFINITY:
        mask = full
        jj = best_j
        pos = n - 1
        while jj >= 0:
            order[pos] = jj + 1
            pos -= 1
            nxt = parent[mask, jj]
            mask ^= 1 << jj
            jj = nxt
    return float(best), order


def two_state_chain(u, double p_enter, double p_exit, init_blocked):
    """Blocked/clear chain over pre-drawn uniforms; see fallback.two_state_chain."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] uu = np.ascontiguousarray(
        u, dtype=np.float64
    )
    cdef Py_ssize_t n = uu.shape[0]
    cdef cnp.ndarray[cnp.uint8_t, ndim=1, mode="c"] blocked = np.empty(n, dtype=np.uint8)
    cdef int state = 1 if init_blocked else 0
    cdef Py_ssize_t i
    cdef double ui
    for i in range(n):
        ui = uu[i]
        if state:
            if ui < p_exit:
                state = 0
        else:
            if ui < p_enter:
                state = 1
        blocked[i] = <cnp.uint8_t> state
    return blocked
