"""Compiled inner loop advancing batches of truncated signatures.

Coefficients are stored flat per path: levels concatenated in order, level n
occupying offsets[n]:offsets[n+1] in lexicographic word order.  One step
multiplies each signature on the right by the tensor exponential of the
level-1 segment (dt, dW), evaluated with a Horner recursion over the
factorial series:

    R_M = S/M!,   R_{j} = S/j! + R_{j+1} (x) e,   S_new = R_0,

which costs O(d * total coefficients) per step instead of the O(M * total)
of the naive level convolution.

Each path is independent, so results are bitwise identical for any thread
count; reductions over paths are done by the callers in fixed order.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit, prange


def level_offsets(d: int, level_cap: int) -> np.ndarray:
    """offsets[n] = flat start of level n; offsets[level_cap + 1] = total size."""
    out = np.zeros(level_cap + 2, dtype=np.int64)
    for n in range(1, level_cap + 2):
        out[n] = out[n - 1] + d ** (n - 1)
    return out


def inverse_factorials(level_cap: int) -> np.ndarray:
    return np.array([1.0 / math.factorial(j) for j in range(level_cap + 1)])


def initial_batch(n_paths: int, d: int, level_cap: int) -> np.ndarray:
    """Flat signatures at time 0: the empty word only."""
    total = int(level_offsets(d, level_cap)[-1])
    out = np.zeros((n_paths, total))
    out[:, 0] = 1.0
    return out


@njit(cache=True, parallel=True)
def advance_batch(cur, nxt, dt, dW, offsets, d, level_cap, inv_fact):  # pragma: no cover - compiled
    n_paths = cur.shape[0]
    for p in prange(n_paths):
        sig = cur[p]
        R = nxt[p]
        R[0] = sig[0] * inv_fact[level_cap]
        for j in range(level_cap - 1, -1, -1):
            c = inv_fact[j]
            for n in range(level_cap - j, 0, -1):
                off_n = offsets[n]
                off_prev = offsets[n - 1]
                size_prev = off_n - off_prev
                for i in range(size_prev - 1, -1, -1):
                    r = R[off_prev + i]
                    base = off_n + i * d
                    R[base] = sig[base] * c + r * dt
                    for b in range(1, d):
                        R[base + b] = sig[base + b] * c + r * dW[p, b - 1]
            R[0] = sig[0] * c


def run_batch(
    increments: np.ndarray,
    dt: float,
    d: int,
    level_cap: int,
    per_step,
) -> None:
    """Drive a batch of paths through all steps.

    increments: (n_paths, steps, d - 1).  After each step k (1-based grid
    index), calls per_step(k, flat_signatures).  per_step is also called once
    with k = 0 for the initial state.
    """
    n_paths, steps, dims = increments.shape
    if dims != d - 1:
        raise ValueError(f"increments have {dims} noise columns, alphabet wants {d - 1}")
    offsets = level_offsets(d, level_cap)
    inv_fact = inverse_factorials(level_cap)
    cur = initial_batch(n_paths, d, level_cap)
    nxt = np.empty_like(cur)
    per_step(0, cur)
    for k in range(steps):
        dW = np.ascontiguousarray(increments[:, k, :])
        advance_batch(cur, nxt, dt, dW, offsets, d, level_cap, inv_fact)
        cur, nxt = nxt, cur
        per_step(k + 1, cur)
