"""Deterministic norms and moment bounds controlling truncation error.

The weight h_t(v) depends on a word only through its length n and its count
x of time letters:

    h_t(v) = C (n+1)^(-1/4) (2t)^((n+x)/2) / sqrt((n+x-1)!),

with the convention that the factorial of a nonpositive integer is one.  It
bounds sqrt(E sup_s<=t <v, sig_s>^2) for some C >= 2, is sub-multiplicative
over concatenation, and the weighted l1 norm built from it bounds the
expected sup of evaluation series, which is what the truncation-tail
diagnostic reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .signature import SignatureStream
from .tensor import TruncatedTensor
from .words import Word


@dataclass(frozen=True)
class HWeightConfig:
    """Constant C >= 2 of the sup-moment bound; the smallest value is the default."""

    c: float = 2.0

    def __post_init__(self):
        if self.c < 2.0:
            raise ValueError(f"the bound constant must be >= 2, got {self.c}")


def _guarded_factorial(k: int) -> float:
    """Factorial with the convention k! = 1 for k <= 0."""
    return 1.0 if k <= 0 else math.factorial(k)


def _h_weight_nx(n: int, x: int, t: float, c: float) -> float:
    if t == 0.0:
        return c if n + x == 0 else 0.0
    log_h = (
        math.log(c)
        - 0.25 * math.log(n + 1)
        + 0.5 * (n + x) * math.log(2.0 * t)
        - 0.5 * math.log(_guarded_factorial(n + x - 1))
    )
    return math.exp(log_h)


def h_weight(word, t: float, cfg: HWeightConfig = HWeightConfig()) -> float:
    """Weight h_t(v) for a single word."""
    if t < 0:
        raise ValueError(f"time must be >= 0, got {t}")
    w = word if isinstance(word, Word) else Word(tuple(word))
    return _h_weight_nx(w.n, w.ones, t, cfg.c)


@lru_cache(maxsize=None)
def _ones_count(d: int, n: int) -> np.ndarray:
    """Number of time letters per word at level n, in flat index order."""
    counts = np.zeros(d**n, dtype=np.int64)
    idx = np.arange(d**n)
    for j in range(n):
        counts += (idx // d**j) % d == 0
    return counts


def level_h_weights(d: int, n: int, t: float, cfg: HWeightConfig = HWeightConfig()) -> np.ndarray:
    """h_t over a whole level, in flat index order."""
    return np.array([_h_weight_nx(n, int(x), t, cfg.c) for x in _ones_count(d, n)])


def ah_norm(tensor: TruncatedTensor, t: float, cfg: HWeightConfig = HWeightConfig()) -> float:
    """Weighted l1 norm sum_v |l^v| h_t(v) over the retained levels."""
    total = 0.0
    for n in range(tensor.level_cap + 1):
        total += float(np.abs(tensor.levels[n]) @ level_h_weights(tensor.d, n, t, cfg))
    return total


def truncation_tail(
    tensor: TruncatedTensor, keep_level: int, horizon: float, cfg: HWeightConfig = HWeightConfig()
) -> float:
    """Upper bound on E sup_t |<l - l_truncated_at_keep_level, sig_t>| from the
    stored levels above keep_level."""
    if keep_level > tensor.level_cap:
        raise ValueError(
            f"keep level {keep_level} exceeds the stored cap {tensor.level_cap}"
        )
    total = 0.0
    for n in range(keep_level + 1, tensor.level_cap + 1):
        total += float(np.abs(tensor.levels[n]) @ level_h_weights(tensor.d, n, horizon, cfg))
    return total


def l2_bound(word, t: float) -> float:
    """Second-moment bound binom(2n,n) t^(n+x) / (n+x)! 2^(x-n)."""
    w = word if isinstance(word, Word) else Word(tuple(word))
    n, x = w.n, w.ones
    if t == 0.0:
        return 1.0 if n == 0 else 0.0
    log_b = (
        _log_binom(2 * n, n)
        + (n + x) * math.log(t)
        - math.lgamma(n + x + 1)
        + (x - n) * math.log(2.0)
    )
    return math.exp(log_b)


def _log_binom(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def lp_bound(word, t: float, p: int) -> float:
    """p-th absolute moment bound for a signature coordinate.

    Even p uses the product-of-binomials closed form; odd p interpolates the
    next even bound through Jensen's inequality.
    """
    if p < 1:
        raise ValueError(f"moment order must be >= 1, got {p}")
    w = word if isinstance(word, Word) else Word(tuple(word))
    if p % 2 == 1:
        return lp_bound(w, t, p + 1) ** (p / (p + 1))
    n, x = w.n, w.ones
    if n == 0:
        return 1.0
    if t == 0.0:
        return 0.0
    half = p // 2
    log_g = (
        sum(_log_binom(j * n, n) for j in range(2, p + 1))
        + half * (n + x) * math.log(t)
        - math.lgamma(half * (n + x) + 1)
        + half * (x - n) * math.log(2.0)
    )
    return math.exp(log_g)


def a_norm_pathwise(tensor: TruncatedTensor, stream: SignatureStream) -> np.ndarray:
    """Per-time partial-sum seminorm sum_n |sum_v l^v sig^v_t| along a stream."""
    cap = min(tensor.level_cap, stream.level_cap)
    out = np.zeros(stream.grid.steps + 1)
    for k, sig in enumerate(stream.sigs):
        out[k] = sum(
            abs(float(tensor.levels[n] @ sig.levels[n])) for n in range(cap + 1)
        )
    return out
