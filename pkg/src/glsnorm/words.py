"""Digit words and the binary scheduling tree they index.

A word is a tuple of digits >= 1; the empty tuple is the empty word.  The
tree has root ``(1,)`` and gives every word two children: the left child
appends digit 1, the right child increments the last digit.  The depth of a
word is the sum of its digits, which equals the number of nodes on its root
path, so level n of the tree holds exactly the 2**(n-1) words whose digits
sum to n.

Edge probabilities come from a :class:`~glsnorm.prob.ProbabilitySequence`:
a left edge below a word ending in digit d carries the conditional digit
probability p_d and the right edge carries 1 - p_d.  The weight of a word is
the product of edge probabilities from the root, for which closed forms make
the cost O(number of digits).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterator

from .prob import ProbabilitySequence

Word = tuple[int, ...]

EPSILON: Word = ()

# Levels are materialized whole; 2**(DEFAULT_LEVEL_CAP - 1) words is the
# largest list this module will build.
DEFAULT_LEVEL_CAP = 22


class LevelCapExceeded(RuntimeError):
    """Raised when a requested level would materialize too many words."""


def parse_word(text: str) -> Word:
    """Parse a comma-separated digit string such as ``"1,2,1"``."""
    parts = text.strip().split(",")
    try:
        digits = tuple(int(p) for p in parts)
    except ValueError as exc:
        raise ValueError(f"not a word: {text!r}") from exc
    if not all(d >= 1 for d in digits):
        raise ValueError(f"word digits must be >= 1: {text!r}")
    return digits


def format_word(w: Word) -> str:
    """Render a word as comma-separated digits."""
    return ",".join(str(d) for d in w)


def depth(w: Word) -> int:
    """Sum of the digits; additive under concatenation."""
    return sum(w)


def increment_last(w: Word) -> Word:
    """The word with its final digit increased by one."""
    if not w:
        raise ValueError("empty word has no last digit")
    return w[:-1] + (w[-1] + 1,)


def children(w: Word) -> tuple[Word, Word]:
    """Left and right child: append digit 1, increment the last digit."""
    if not w:
        raise ValueError("empty word has no children")
    return w + (1,), increment_last(w)


def parent(w: Word) -> Word:
    """Invert the child step; undefined at the root ``(1,)``."""
    if not w or w == (1,):
        raise ValueError(f"word {w!r} has no parent")
    if w[-1] == 1:
        return w[:-1]
    return w[:-1] + (w[-1] - 1,)


def grandparent(w: Word) -> Word:
    """The unique word two tree levels up; requires depth(w) >= 3."""
    if depth(w) < 3:
        raise ValueError(f"word {w!r} has depth < 3 and no grandparent")
    return parent(parent(w))


def grandchildren(v: Word) -> tuple[Word, Word, Word, Word]:
    """The four words with grandparent v, already in lexicographic order."""
    if not v:
        raise ValueError("empty word has no grandchildren")
    vp = increment_last(v)
    return v + (1, 1), v + (2,), vp + (1,), increment_last(vp)


def iter_level(n: int) -> Iterator[Word]:
    """All words of depth n in lexicographic order (proper prefixes first)."""
    if n == 0:
        yield EPSILON
        return
    for d in range(1, n + 1):
        for rest in iter_level(n - d):
            yield (d,) + rest


def generation(n: int, cap: int = DEFAULT_LEVEL_CAP) -> list[Word]:
    """The 2**(n-1) words of depth n in lexicographic order.

    Raises :class:`LevelCapExceeded` when n exceeds the cap, which guards
    against materializing more than 2**(cap-1) words.
    """
    if n < 1:
        raise ValueError(f"level must be >= 1, got {n}")
    if n > cap:
        raise LevelCapExceeded(
            f"level {n} exceeds cap {cap} (2**{n - 1} words)"
        )
    return list(iter_level(n))


def word_measure(seq: ProbabilitySequence, w: Word) -> Fraction:
    """Product of the digit masses of w; 1 for the empty word."""
    m = Fraction(1)
    for d in w:
        m *= seq.length(d)
    return m


def path_weight(seq: ProbabilitySequence, w: Word) -> Fraction:
    """Product of edge probabilities from the root ``(1,)`` to w.

    Computed digitwise: the weight of a single digit d is tail(d), and
    prefixing a digit multiplies by that digit's mass, so
    ``path_weight(w) = word_measure(w[:-1]) * tail(w[-1])``.
    """
    if not w:
        raise ValueError("the empty word has no path weight")
    return word_measure(seq, w[:-1]) * seq.tail(w[-1])


def mean_word_length(seq: ProbabilitySequence, n: int) -> Fraction:
    """Weight-averaged word length over level n.

    Satisfies the recursion m(1) = 1 and
    ``m(n) = 1 + sum_{d<n} length(d) * m(n-d)``, obtained by splitting each
    level-n word at its first digit; equals the direct sum of
    ``path_weight(u) * len(u)`` over the level.  Strictly increasing in n.
    """
    if n < 1:
        raise ValueError(f"level must be >= 1, got {n}")
    table = [Fraction(0), Fraction(1)]
    for m in range(2, n + 1):
        acc = Fraction(1)
        for d in range(1, m):
            acc += seq.length(d) * table[m - d]
        table.append(acc)
    return table[n]
