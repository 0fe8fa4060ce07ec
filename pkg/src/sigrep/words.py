"""Words over the alphabet {1, ..., d} and their dense indexing.

Letter 1 plays the role of the time coordinate, letters 2..d the Brownian
coordinates.  Words of length n are stored in lexicographic order, so the
word (i_1, ..., i_n) sits at flat index sum((i_k - 1) * d**(n - k)).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator


@dataclass(frozen=True)
class Alphabet:
    """Alphabet size d >= 2; letter 1 is the dt component."""

    d: int

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"alphabet needs d >= 2, got {self.d}")

    @property
    def letters(self) -> range:
        return range(1, self.d + 1)

    @property
    def noise_letters(self) -> range:
        """Letters 2..d, one per Brownian coordinate."""
        return range(2, self.d + 1)


@dataclass(frozen=True)
class Word:
    """An immutable word; the empty tuple is the empty word."""

    letters: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "letters", tuple(int(i) for i in self.letters))

    @property
    def n(self) -> int:
        """Word length."""
        return len(self.letters)

    @property
    def ones(self) -> int:
        """Number of occurrences of letter 1 (the time letter)."""
        return sum(1 for i in self.letters if i == 1)

    def index(self, d: int) -> int:
        """Flat lexicographic index of the word among words of its length."""
        idx = 0
        for i in self.letters:
            if not 1 <= i <= d:
                raise ValueError(f"letter {i} outside alphabet of size {d}")
            idx = idx * d + (i - 1)
        return idx

    @classmethod
    def from_index(cls, d: int, n: int, index: int) -> "Word":
        letters = []
        for _ in range(n):
            letters.append(index % d + 1)
            index //= d
        return cls(tuple(reversed(letters)))

    def __add__(self, other: "Word") -> "Word":
        """Concatenation of words."""
        return Word(self.letters + other.letters)

    def __str__(self) -> str:
        return "".join(str(i) for i in self.letters) if self.letters else "e"


EMPTY_WORD = Word(())


def iter_words(d: int, n: int) -> Iterator[Word]:
    """All words of length n in lexicographic (= flat index) order."""
    for letters in itertools.product(range(1, d + 1), repeat=n):
        yield Word(letters)
