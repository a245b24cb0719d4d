"""Numba-compiled inner loops.

Everything here is deterministic by construction: no RNG, no cross-thread
reductions, IEEE arithmetic (fastmath off), and each parallel iteration
writes only its own output row. Uniform draws are generated outside and
passed in, so results are identical for every worker count.
"""

import numpy as np
from numba import njit, prange


@njit(cache=True)
def construct_one(weights, start, draws, order):
    """Build one tour by roulette selection over the feasible weight row.

    Returns 0 on success, or the 1-based step index at which the feasible
    weights summed to zero or went non-finite.
    """
    n = weights.shape[0]
    visited = np.zeros(n, dtype=np.bool_)
    order[0] = start
    visited[start] = True
    current = start
    for step in range(1, n):
        row = weights[current]
        total = 0.0
        for j in range(n):
            if not visited[j]:
                total += row[j]
        if total <= 0.0 or not np.isfinite(total):
            return step
        draw = draws[step - 1]
        cum = 0.0
        chosen = -1
        last = -1
        for j in range(n):
            if not visited[j]:
                prob = row[j] / total
                if prob > 0.0:
                    last = j
                    cum += prob
                    if cum > draw:
                        chosen = j
                        break
        if chosen < 0:
            chosen = last  # final feasible city absorbs cumulative round-off
        order[step] = chosen
        visited[chosen] = True
        current = chosen
    return 0


@njit(parallel=True, cache=True)
def construct_block(weights, starts, draws, orders, status):
    for k in prange(starts.shape[0]):
        status[k] = construct_one(weights, starts[k], draws[k], orders[k])


@njit(cache=True)
def two_opt_inplace(dist, order):
    """First-improvement 2-opt: scan (i, j) lexicographically, reverse the
    improving segment, restart, until a full scan finds no improving move."""
    n = order.shape[0]
    improved = True
    while improved:
        improved = False
        for i in range(n - 1):
            a = order[i]
            b = order[i + 1]
            # j == n-1 together with i == 0 would cut the same closing edge twice
            j_stop = n if i > 0 else n - 1
            for j in range(i + 2, j_stop):
                c = order[j]
                d = order[(j + 1) % n]
                gain = dist[a, c] + dist[b, d] - dist[a, b] - dist[c, d]
                if gain < -1e-10:
                    lo = i + 1
                    hi = j
                    while lo < hi:
                        tmp = order[lo]
                        order[lo] = order[hi]
                        order[hi] = tmp
                        lo += 1
                        hi -= 1
                    improved = True
                    break
            if improved:
                break


@njit(parallel=True, cache=True)
def two_opt_block(dist, orders):
    for k in prange(orders.shape[0]):
        two_opt_inplace(dist, orders[k])
