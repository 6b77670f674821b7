"""Reduced words in the free generators of a Schottky group.

A letter is a nonzero integer: +i is generator g_i, -i its inverse (1-based).
Words are tuples of letters; their string form uses a, b, c, ... for the
generators and A, B, C, ... for the inverses.
"""

from __future__ import annotations

import string
from typing import Iterable, Iterator, Sequence

import mpmath
import numpy as np

from hyperbolic_scattering.geometry.moebius import MoebiusMap, compose, length_from_trace

Word = tuple[int, ...]

_LOWER = string.ascii_lowercase


def letter_name(letter: int) -> str:
    if letter == 0 or abs(letter) > len(_LOWER):
        raise ValueError(f"Invalid letter: {letter}")
    ch = _LOWER[abs(letter) - 1]
    return ch if letter > 0 else ch.upper()


def word_to_str(word: Sequence[int]) -> str:
    return "".join(letter_name(x) for x in word)


def parse_word(text: str, rank: int) -> Word:
    out: list[int] = []
    for ch in text.strip():
        if ch.lower() not in _LOWER[:rank]:
            raise ValueError(f"Invalid letter {ch!r} in word {text!r} for rank {rank}")
        idx = _LOWER.index(ch.lower()) + 1
        out.append(idx if ch.islower() else -idx)
    return reduce_word(out)


def letter_key(letter: int) -> int:
    """Sort key giving the order a < A < b < B < ..."""
    return 2 * (abs(letter) - 1) + (0 if letter > 0 else 1)


def letters(rank: int) -> list[int]:
    return sorted([i for i in range(1, rank + 1)] + [-i for i in range(1, rank + 1)], key=letter_key)


def reduce_word(word: Iterable[int]) -> Word:
    out: list[int] = []
    for x in word:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def invert_word(word: Sequence[int]) -> Word:
    return tuple(-x for x in reversed(word))


def is_reduced(word: Sequence[int]) -> bool:
    return all(word[k + 1] != -word[k] for k in range(len(word) - 1))


def is_cyclically_reduced(word: Sequence[int]) -> bool:
    return is_reduced(word) and (len(word) <= 1 or word[0] != -word[-1])


def cyclically_reduce(word: Sequence[int]) -> Word:
    w = list(reduce_word(word))
    while len(w) > 1 and w[0] == -w[-1]:
        w = w[1:-1]
    return tuple(w)


def rotations(word: Sequence[int]) -> Iterator[Word]:
    n = len(word)
    for k in range(n):
        yield tuple(word[k:]) + tuple(word[:k])


def _keyed(word: Sequence[int]) -> tuple[int, ...]:
    return tuple(letter_key(x) for x in word)


def canonical(word: Sequence[int], oriented: bool = False) -> Word:
    """
    Lexicographically minimal representative of the cyclic word.

    In unoriented mode the rotations of the inverse word compete as well, so a
    closed geodesic and its reversal share one representative.
    """
    w = cyclically_reduce(word)
    if not w:
        return w
    candidates = list(rotations(w))
    if not oriented:
        candidates.extend(rotations(invert_word(w)))
    return min(candidates, key=_keyed)


def is_primitive(word: Sequence[int]) -> bool:
    """A cyclic word is primitive when it equals none of its proper rotations."""
    n = len(word)
    w = tuple(word)
    for k in range(1, n):
        if n % k == 0 and w[k:] + w[:k] == w:
            return False
    return True


def reduced_words(rank: int, length: int) -> Iterator[Word]:
    """All reduced words of the given length, in letter order."""
    alphabet = letters(rank)
    if length == 0:
        yield ()
        return

    def extend(prefix: Word) -> Iterator[Word]:
        if len(prefix) == length:
            yield prefix
            return
        for x in alphabet:
            if prefix and x == -prefix[-1]:
                continue
            yield from extend(prefix + (x,))

    yield from extend(())


def word_matrix(word: Sequence[int], generators: Sequence[MoebiusMap]) -> MoebiusMap:
    out = MoebiusMap.identity()
    for x in word:
        g = generators[abs(x) - 1]
        out = compose(out, g if x > 0 else g.inverse())
    return out


def _word_trace_extended(word: Sequence[int], generators: Sequence[MoebiusMap], dps: int) -> float:
    with mpmath.workdps(dps):
        mats = {}
        for i, g in enumerate(generators, start=1):
            m = mpmath.matrix([[g.a, g.b], [g.c, g.d]])
            mats[i] = m
            mats[-i] = mpmath.matrix([[g.d, -g.b], [-g.c, g.a]])
        acc = mpmath.eye(2)
        for x in word:
            acc = acc * mats[x]
        return float(abs(acc[0, 0] + acc[1, 1]))


def word_trace(
    word: Sequence[int],
    generators: Sequence[MoebiusMap],
    extended_after: int = 30,
) -> float:
    """|trace| of the word; switches to mpmath arithmetic for words longer than `extended_after`."""
    if len(word) > extended_after:
        return _word_trace_extended(word, generators, dps=40 + len(word))
    return abs(word_matrix(word, generators).trace)


def word_length(
    word: Sequence[int],
    generators: Sequence[MoebiusMap],
    extended_after: int = 30,
) -> float:
    return length_from_trace(word_trace(word, generators, extended_after))


def letter_from_key(key: int) -> int:
    """Inverse of `letter_key`."""
    idx = key // 2 + 1
    return idx if key % 2 == 0 else -idx


def letter_matrices(generators: Sequence[MoebiusMap]) -> np.ndarray:
    """Stack of letter matrices indexed by `letter_key`, shape (2r, 2, 2)."""
    r = len(generators)
    out = np.empty((2 * r, 2, 2))
    for i, g in enumerate(generators, start=1):
        out[letter_key(i)] = g.matrix
        out[letter_key(-i)] = g.inverse().matrix
    return out


def iter_word_levels(letter_mats: np.ndarray, max_length: int) -> Iterator[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """
    Yield (first_keys, last_keys, matrices) for all reduced words of length 1..max_length.

    `letter_mats` is a (2r, 2, 2) stack indexed by letter key; words of each
    level are extended on the right, so matrices are left-to-right products.
    """
    n_letters = letter_mats.shape[0]
    inverse_key = np.arange(n_letters) ^ 1
    first = np.arange(n_letters)
    last = np.arange(n_letters)
    cur = letter_mats.copy()
    for length in range(1, max_length + 1):
        yield first, last, cur
        if length == max_length:
            break
        parent, child = np.nonzero(inverse_key[last][:, None] != np.arange(n_letters)[None, :])
        cur = np.einsum("nij,njk->nik", cur[parent], letter_mats[child])
        first = first[parent]
        last = child
