"""
Twin group words: parsing, products, the shortlex normal form and strand permutations.
"""

import itertools
import logging
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, List, Sequence, Tuple

import numpy as np

logger = logging.getLogger(__name__)

_HEADER = re.compile(r"\s*tw\s+(\d+)\s*:")
_TOKEN = re.compile(r"\S+")
_LETTER = re.compile(r"s(\d+)")


class WordError(ValueError):
    """Base class for malformed twin words."""


class WordSyntaxError(WordError):
    """Raised when a word does not match the `tw <n>: s<k> ...` grammar."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class GeneratorRangeError(WordError):
    """Raised when a generator index lies outside 1..n-1."""

    def __init__(self, letter: int, strands: int):
        super().__init__(f"generator s{letter} out of range for tw {strands} (allowed s1..s{strands - 1})")
        self.letter = letter
        self.strands = strands


class StrandMismatchError(WordError):
    """Raised when a binary operation receives words on different strand counts."""

    def __init__(self, left: int, right: int):
        super().__init__(f"strand count mismatch: {left} vs {right}")


@dataclass(frozen=True)
class TwinWord:
    """An element of TW_n written as a sequence of generator indices (leftmost = topmost)."""

    strands: int
    letters: Tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "letters", tuple(int(k) for k in self.letters))
        if self.strands < 1:
            raise WordError(f"strand count must be positive, got {self.strands}")
        for k in self.letters:
            if not 1 <= k <= self.strands - 1:
                raise GeneratorRangeError(k, self.strands)

    @classmethod
    def identity(cls, strands: int) -> "TwinWord":
        return cls(strands, ())

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        body = " ".join(f"s{k}" for k in self.letters)
        return f"tw {self.strands}:" + (f" {body}" if body else "")

    def shift(self, offset: int) -> "TwinWord":
        """Move the word `offset` strands to the right (I^offset ⊗ self)."""
        return TwinWord(self.strands + offset, tuple(k + offset for k in self.letters))

    def embed(self, strands: int) -> "TwinWord":
        """Same letters on a wider strand set (self ⊗ I^(strands - n))."""
        if strands < self.strands:
            raise WordError(f"cannot embed tw {self.strands} into tw {strands}")
        return TwinWord(strands, self.letters)

    @cached_property
    def normal(self) -> "TwinWord":
        return normal_form(self)

    @property
    def is_reduced(self) -> bool:
        return len(self.normal) == len(self)


@dataclass(frozen=True)
class StrandPermutation:
    """
    Permutation induced on strand positions.

    images[k - 1] is the bottom position reached by the strand entering at top
    position k, with letters applied top to bottom.
    """

    images: Tuple[int, ...]

    def __post_init__(self):
        if sorted(self.images) != list(range(1, len(self.images) + 1)):
            raise ValueError(f"not a permutation: {self.images}")

    @classmethod
    def identity(cls, size: int) -> "StrandPermutation":
        return cls(tuple(range(1, size + 1)))

    def __call__(self, position: int) -> int:
        return self.images[position - 1]

    def compose(self, after: "StrandPermutation") -> "StrandPermutation":
        """Apply self, then `after`."""
        return StrandPermutation(tuple(after(self(k)) for k in range(1, len(self.images) + 1)))

    def cycles(self) -> List[Tuple[int, ...]]:
        seen = set()
        result = []
        for start in range(1, len(self.images) + 1):
            if start in seen:
                continue
            cycle = []
            k = start
            while k not in seen:
                seen.add(k)
                cycle.append(k)
                k = self(k)
            result.append(tuple(cycle))
        return result

    def cycle_count(self) -> int:
        return len(self.cycles())


def parse_word(text: str) -> TwinWord:
    """
    Parse `tw <n>: s<k> s<k> ...`.

    Args:
        text: Word in the textual grammar, letters separated by whitespace

    Returns:
        TwinWord with letters in textual order

    Raises:
        WordSyntaxError: The text does not match the grammar
        GeneratorRangeError: A letter index is outside 1..n-1
    """
    header = _HEADER.match(text)
    if header is None:
        position = len(text) - len(text.lstrip())
        raise WordSyntaxError("expected 'tw <n>:'", position)
    strands = int(header.group(1))
    if strands < 1:
        raise WordSyntaxError("strand count must be positive", header.start(1))

    letters = []
    for token in _TOKEN.finditer(text, header.end()):
        letter = _LETTER.fullmatch(token.group())
        if letter is None:
            raise WordSyntaxError(f"unexpected token {token.group()!r}", token.start())
        letters.append(int(letter.group(1)))

    for k in letters:
        if not 1 <= k <= strands - 1:
            raise GeneratorRangeError(k, strands)
    return TwinWord(strands, tuple(letters))


def commute(i: int, j: int) -> bool:
    """Distinct generators commute iff their indices differ by more than one."""
    return abs(i - j) > 1


def _cancel_pairs(letters: Sequence[int]) -> List[int]:
    # Delete s_i u s_i where u commutes with s_i, until no such pair remains.
    word = list(letters)
    changed = True
    while changed:
        changed = False
        for p, i in enumerate(word):
            for q in range(p + 1, len(word)):
                if word[q] == i:
                    del word[q]
                    del word[p]
                    changed = True
                    break
                if not commute(word[q], i):
                    break
            if changed:
                break
    return word


def _least_linearization(letters: Sequence[int]) -> List[int]:
    # Greedy smallest available letter: lexicographically least word reachable by commutations.
    remaining = list(letters)
    result = []
    while remaining:
        best = None
        for p, k in enumerate(remaining):
            if all(commute(remaining[q], k) for q in range(p)):
                if best is None or k < remaining[best]:
                    best = p
        result.append(remaining.pop(best))
    return result


def normal_form(w: TwinWord) -> TwinWord:
    """Shortlex-least representative of w in TW_n."""
    reduced = _cancel_pairs(w.letters)
    return TwinWord(w.strands, tuple(_least_linearization(reduced)))


def multiply(a: TwinWord, b: TwinWord) -> TwinWord:
    """a on top of b; the result is not normalized."""
    if a.strands != b.strands:
        raise StrandMismatchError(a.strands, b.strands)
    return TwinWord(a.strands, a.letters + b.letters)


def inverse(w: TwinWord) -> TwinWord:
    return TwinWord(w.strands, tuple(reversed(w.letters)))


def tensor(a: TwinWord, b: TwinWord) -> TwinWord:
    """a occupies the left block of strands, b is shifted right by a.strands."""
    return TwinWord(a.strands + b.strands, a.letters + tuple(k + a.strands for k in b.letters))


def permutation(w: TwinWord) -> StrandPermutation:
    at = list(range(1, w.strands + 1))  # at[position - 1] = strand currently there
    for k in w.letters:
        at[k - 1], at[k] = at[k], at[k - 1]
    images = [0] * w.strands
    for position, strand in enumerate(at, start=1):
        images[strand - 1] = position
    return StrandPermutation(tuple(images))


def equal(a: TwinWord, b: TwinWord) -> bool:
    if a.strands != b.strands:
        raise StrandMismatchError(a.strands, b.strands)
    return normal_form(a) == normal_form(b)


def enumerate_words(strands: int, max_length: int) -> Iterator[TwinWord]:
    """Every word over TW_strands of length <= max_length, shortlex order."""
    generators = range(1, strands)
    for length in range(max_length + 1):
        if length and strands == 1:
            return
        for letters in itertools.product(generators, repeat=length):
            yield TwinWord(strands, letters)


def random_word(rng: np.random.Generator, strands: int, max_length: int,
                min_length: int = 0) -> TwinWord:
    if strands == 1:
        return TwinWord(1)
    length = int(rng.integers(min_length, max_length + 1))
    letters = rng.integers(1, strands, size=length)
    return TwinWord(strands, tuple(int(k) for k in letters))
