"""Arithmetic in the truncated tensor algebra over R^d.

A tensor is stored densely: one contiguous float64 array per word length
("level"), level n holding the d**n coefficients in lexicographic word
order.  Every product silently discards levels above the cap, so algebraic
identities are only claimed on the retained levels.

All operations are pure; tensors are treated as immutable after
construction and may be shared freely across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse

from .errors import DimensionMismatchError, ResolventDivergenceError
from .words import Word, iter_words

# Absolute slack used when the domination partial order is evaluated in
# floating point.
DOMINATION_SLACK = 1e-15


class TruncatedTensor:
    """Element of the tensor algebra truncated at word length ``level_cap``."""

    __slots__ = ("d", "level_cap", "levels")

    def __init__(self, d: int, level_cap: int, levels: list[np.ndarray]):
        self.d = d
        self.level_cap = level_cap
        self.levels = levels

    # -- constructors -------------------------------------------------------

    @classmethod
    def zeros(cls, d: int, level_cap: int) -> "TruncatedTensor":
        if d < 2:
            raise ValueError(f"alphabet needs d >= 2, got {d}")
        if level_cap < 0:
            raise ValueError(f"level cap must be >= 0, got {level_cap}")
        return cls(d, level_cap, [np.zeros(d**n) for n in range(level_cap + 1)])

    @classmethod
    def unit(cls, d: int, level_cap: int) -> "TruncatedTensor":
        """The empty word, the multiplicative unit of both products."""
        out = cls.zeros(d, level_cap)
        out.levels[0][0] = 1.0
        return out

    @classmethod
    def from_word(cls, d: int, level_cap: int, word, coeff: float = 1.0) -> "TruncatedTensor":
        w = word if isinstance(word, Word) else Word(tuple(word))
        out = cls.zeros(d, level_cap)
        if w.n <= level_cap:
            out.levels[w.n][w.index(d)] = coeff
        return out

    @classmethod
    def from_letter_coeffs(cls, d: int, level_cap: int, coeffs: Sequence[float]) -> "TruncatedTensor":
        """Linear combination of single letters, sum_i coeffs[i-1] * letter i."""
        if len(coeffs) != d:
            raise ValueError(f"need {d} letter coefficients, got {len(coeffs)}")
        out = cls.zeros(d, level_cap)
        if level_cap >= 1:
            out.levels[1][:] = np.asarray(coeffs, dtype=float)
        return out

    # -- basic accessors ----------------------------------------------------

    @property
    def scalar(self) -> float:
        """Coefficient of the empty word."""
        return float(self.levels[0][0])

    def coeff(self, word) -> float:
        w = word if isinstance(word, Word) else Word(tuple(word))
        if w.n > self.level_cap:
            return 0.0
        return float(self.levels[w.n][w.index(self.d)])

    def coefficient_count(self) -> int:
        return sum(lv.size for lv in self.levels)

    def copy(self) -> "TruncatedTensor":
        return TruncatedTensor(self.d, self.level_cap, [lv.copy() for lv in self.levels])

    def validate(self) -> None:
        expected = (self.d ** (self.level_cap + 1) - 1) // (self.d - 1)
        if self.coefficient_count() != expected:
            raise ValueError("level storage inconsistent with (d, level_cap)")
        for lv in self.levels:
            if not np.all(np.isfinite(lv)):
                raise ValueError("non-finite coefficient")

    def max_abs(self) -> float:
        return max(float(np.max(np.abs(lv))) if lv.size else 0.0 for lv in self.levels)

    # -- linear structure ----------------------------------------------------

    def __add__(self, other: "TruncatedTensor") -> "TruncatedTensor":
        _check_compatible(self, other)
        return TruncatedTensor(
            self.d, self.level_cap, [a + b for a, b in zip(self.levels, other.levels)]
        )

    def __sub__(self, other: "TruncatedTensor") -> "TruncatedTensor":
        _check_compatible(self, other)
        return TruncatedTensor(
            self.d, self.level_cap, [a - b for a, b in zip(self.levels, other.levels)]
        )

    def __neg__(self) -> "TruncatedTensor":
        return TruncatedTensor(self.d, self.level_cap, [-a for a in self.levels])

    def __mul__(self, scalar: float) -> "TruncatedTensor":
        s = float(scalar)
        return TruncatedTensor(self.d, self.level_cap, [s * a for a in self.levels])

    __rmul__ = __mul__

    # -- serialization -------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "d": self.d,
            "M": self.level_cap,
            "levels": [lv.tolist() for lv in self.levels],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "TruncatedTensor":
        levels = [np.asarray(lv, dtype=float) for lv in data["levels"]]
        out = cls(int(data["d"]), int(data["M"]), levels)
        out.validate()
        return out

    def __repr__(self) -> str:
        terms = []
        for n in range(min(self.level_cap, 3) + 1):
            for w in iter_words(self.d, n):
                c = self.levels[n][w.index(self.d)]
                if c != 0.0:
                    terms.append(f"{c:+.4g}*{w}")
                if len(terms) > 8:
                    return f"TruncatedTensor(d={self.d}, M={self.level_cap}, {' '.join(terms)} ...)"
        body = " ".join(terms) if terms else "0"
        return f"TruncatedTensor(d={self.d}, M={self.level_cap}, {body})"


def _check_compatible(a: TruncatedTensor, b: TruncatedTensor) -> None:
    if a.d != b.d or a.level_cap != b.level_cap:
        raise DimensionMismatchError(
            f"incompatible tensors: (d={a.d}, M={a.level_cap}) vs (d={b.d}, M={b.level_cap})"
        )


# -- products ---------------------------------------------------------------


def linear_combine(terms: Iterable[tuple[float, TruncatedTensor]]) -> TruncatedTensor:
    """Coefficient-wise weighted sum of tensors sharing (d, level_cap)."""
    terms = list(terms)
    if not terms:
        raise ValueError("linear_combine needs at least one term")
    first = terms[0][1]
    out = TruncatedTensor.zeros(first.d, first.level_cap)
    for scalar, tensor in terms:
        _check_compatible(first, tensor)
        for n in range(out.level_cap + 1):
            out.levels[n] += float(scalar) * tensor.levels[n]
    return out


def concat_mul(a: TruncatedTensor, b: TruncatedTensor) -> TruncatedTensor:
    """Concatenation (tensor) product; levels above the cap are dropped."""
    _check_compatible(a, b)
    out = TruncatedTensor.zeros(a.d, a.level_cap)
    for n in range(a.level_cap + 1):
        acc = out.levels[n]
        for k in range(n + 1):
            left = a.levels[k]
            right = b.levels[n - k]
            if not left.any() or not right.any():
                continue
            acc += np.multiply.outer(left, right).ravel()
    return out


def concat_pow(a: TruncatedTensor, k: int) -> TruncatedTensor:
    if k < 0:
        raise ValueError(f"power must be >= 0, got {k}")
    out = TruncatedTensor.unit(a.d, a.level_cap)
    for _ in range(k):
        out = concat_mul(out, a)
    return out


@lru_cache(maxsize=None)
def _digit_table(d: int, n: int) -> np.ndarray:
    """(d**n, n) array of base-d digits, most significant first."""
    idx = np.arange(d**n, dtype=np.int64)
    out = np.empty((d**n, n), dtype=np.int64)
    for j in range(n):
        out[:, j] = (idx // d ** (n - 1 - j)) % d
    return out


@lru_cache(maxsize=None)
def _shuffle_matrix(d: int, k: int, m: int) -> sparse.csr_matrix:
    """Sparse matrix taking the flattened outer product of a level-k and a
    level-m coefficient array to the level-(k+m) coefficients of their
    shuffle.  Row w counts, with multiplicity, the interleavings of (u, v)
    that produce w."""
    n = k + m
    powers = d ** np.arange(n - 1, -1, -1, dtype=np.int64)
    digits_k = _digit_table(d, k)
    digits_m = _digit_table(d, m)
    rows = []
    for positions in combinations(range(n), k):
        rest = [p for p in range(n) if p not in positions]
        left = digits_k @ powers[list(positions)]
        right = digits_m @ powers[rest]
        rows.append((left[:, None] + right[None, :]).ravel())
    row_idx = np.concatenate(rows)
    col_idx = np.tile(np.arange(d**k * d**m, dtype=np.int64), len(rows))
    data = np.ones(row_idx.size)
    mat = sparse.coo_matrix((data, (row_idx, col_idx)), shape=(d**n, d**k * d**m))
    return mat.tocsr()


def shuffle_mul(a: TruncatedTensor, b: TruncatedTensor) -> TruncatedTensor:
    """Shuffle product, the bilinear extension of word interleaving."""
    _check_compatible(a, b)
    d = a.d
    out = TruncatedTensor.zeros(d, a.level_cap)
    for n in range(a.level_cap + 1):
        acc = out.levels[n]
        for k in range(n + 1):
            left = a.levels[k]
            right = b.levels[n - k]
            if not left.any() or not right.any():
                continue
            if k == 0:
                acc += left[0] * right
            elif k == n:
                acc += right[0] * left
            else:
                outer = np.multiply.outer(left, right).ravel()
                acc += _shuffle_matrix(d, k, n - k) @ outer
    return out


def shuffle_pow(a: TruncatedTensor, k: int) -> TruncatedTensor:
    if k < 0:
        raise ValueError(f"power must be >= 0, got {k}")
    out = TruncatedTensor.unit(a.d, a.level_cap)
    for _ in range(k):
        out = shuffle_mul(out, a)
    return out


# -- series -----------------------------------------------------------------


def resolvent(q: TruncatedTensor) -> TruncatedTensor:
    """Geometric series sum_k q**k, the two-sided inverse of (unit - q).

    The scalar part is factored out so the remaining series terminates after
    level_cap products; requires |scalar part| < 1.
    """
    s = q.scalar
    if abs(s) >= 1.0:
        raise ResolventDivergenceError(f"|scalar part| = {abs(s)} >= 1")
    scale = 1.0 / (1.0 - s)
    nilpotent = q.copy()
    nilpotent.levels[0][0] = 0.0
    nilpotent = nilpotent * scale
    acc = TruncatedTensor.unit(q.d, q.level_cap)
    term = TruncatedTensor.unit(q.d, q.level_cap)
    for _ in range(q.level_cap):
        term = concat_mul(term, nilpotent)
        if term.max_abs() == 0.0:
            break
        acc = acc + term
    return acc * scale


def shuffle_exp(a: TruncatedTensor) -> TruncatedTensor:
    """Shuffle exponential sum_n a^(shuffle n) / n!.

    exp(scalar part) is factored out; the zero-scalar series terminates at
    level_cap terms.
    """
    s = a.scalar
    rest = a.copy()
    rest.levels[0][0] = 0.0
    acc = TruncatedTensor.unit(a.d, a.level_cap)
    term = TruncatedTensor.unit(a.d, a.level_cap)
    for n in range(1, a.level_cap + 1):
        term = shuffle_mul(term, rest) * (1.0 / n)
        if term.max_abs() == 0.0:
            break
        acc = acc + term
    return acc * math.exp(s)


# -- projections and pairing --------------------------------------------------


def project(tensor: TruncatedTensor, word) -> TruncatedTensor:
    """Drop the fixed terminal word: coefficient of v in the result equals the
    coefficient of v+word in the input.  The result keeps the same level cap,
    zero-padded above level_cap - len(word)."""
    w = word if isinstance(word, Word) else Word(tuple(word))
    d, cap = tensor.d, tensor.level_cap
    out = TruncatedTensor.zeros(d, cap)
    k = w.n
    if k > cap:
        return out
    suffix = w.index(d)
    for n in range(k, cap + 1):
        block = tensor.levels[n].reshape(d ** (n - k), d**k)
        out.levels[n - k][:] = block[:, suffix]
    return out


def pair(l: TruncatedTensor, g: TruncatedTensor) -> float:
    """Bracket sum_v l^v g^v over levels up to the smaller cap."""
    if l.d != g.d:
        raise DimensionMismatchError(f"alphabet mismatch: d={l.d} vs d={g.d}")
    total = 0.0
    for n in range(min(l.level_cap, g.level_cap) + 1):
        total += float(np.dot(l.levels[n], g.levels[n]))
    return total


# -- domination partial order -------------------------------------------------


@dataclass(frozen=True)
class DominationWitness:
    """Witness a, b for the sufficient representability condition.

    ``a_coeffs`` and ``b_coeffs`` are the d coefficients of two single-letter
    combinations; the witness tensor is a * exp_shuffle(b) when side is
    "left" and exp_shuffle(b) * a when side is "right".
    """

    a_coeffs: tuple[float, ...]
    b_coeffs: tuple[float, ...]
    side: str = "left"

    def tensor(self, d: int, level_cap: int) -> TruncatedTensor:
        if len(self.a_coeffs) != d or len(self.b_coeffs) != d:
            raise DimensionMismatchError("witness coefficient count must equal d")
        if self.side not in ("left", "right"):
            raise ValueError(f"side must be 'left' or 'right', got {self.side!r}")
        a = TruncatedTensor.from_letter_coeffs(d, level_cap, self.a_coeffs)
        eb = shuffle_exp(TruncatedTensor.from_letter_coeffs(d, level_cap, self.b_coeffs))
        return concat_mul(a, eb) if self.side == "left" else concat_mul(eb, a)


def dominates(q: TruncatedTensor, witness: DominationWitness) -> tuple[bool, Word | None]:
    """Check |q^v| <= witness^v for every retained word.

    Returns (True, None) when dominated, else (False, first violating word)
    in (level, lexicographic) order.  Comparisons carry a 1e-15 absolute
    slack for round-off.
    """
    bound = witness.tensor(q.d, q.level_cap)
    for n in range(q.level_cap + 1):
        bad = np.abs(q.levels[n]) > bound.levels[n] + DOMINATION_SLACK
        if bad.any():
            idx = int(np.argmax(bad))
            return False, Word.from_index(q.d, n, idx)
    return True, None


def dominated_coefficientwise(q: TruncatedTensor, p: TruncatedTensor) -> bool:
    """Plain partial-order check |q^v| <= p^v on all retained words."""
    _check_compatible(q, p)
    return all(
        bool(np.all(np.abs(q.levels[n]) <= p.levels[n] + DOMINATION_SLACK))
        for n in range(q.level_cap + 1)
    )
