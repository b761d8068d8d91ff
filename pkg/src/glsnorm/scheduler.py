"""Per-level word multiplicities and a grouped emission order.

Level n contributes exactly n! words.  Multiplicities come from largest
remainder apportionment against the exact quotas n! * weight(u): every word
receives the floor of its quota, and the leftover words go one each to the
largest fractional parts (ties broken by word order).  Every per-word count
error therefore lies in (-1, 1), and is zero whenever the quota is integral.

For n >= 3 the level is split into n(n-1) groups of (n-2)! words.  The run
list -- all level words in lexicographic order, each repeated its count --
keeps the four words sharing any grandparent contiguous, and dealing run
positions round-robin over the groups spreads each grandparent's run to
within one word per group.  Each group's grandparent counts then deviate
from (n-2)! * weight(grandparent) by strictly less than 1 + 4/(n(n-1)) < 2.

Plans are pure functions of (sequence, level): identical inputs produce
identical plans.  The emission order is never materialized; random access
works through prefix sums over the run list.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

from .prob import ProbabilitySequence
from .words import (
    DEFAULT_LEVEL_CAP,
    Word,
    generation,
    grandparent,
    path_weight,
)


@dataclass(frozen=True)
class DepthPlan:
    """Multiplicities and grouped emission order for one level."""

    n: int
    words: tuple[Word, ...]
    counts: dict[Word, int]
    _cumulative: tuple[int, ...] = field(repr=False)

    @property
    def total(self) -> int:
        """Number of words emitted at this level: n!."""
        return self._cumulative[-1] if self._cumulative else 0

    @property
    def group_count(self) -> int | None:
        """n(n-1) groups for n >= 3; no grouping below that."""
        return self.n * (self.n - 1) if self.n >= 3 else None

    @property
    def group_size(self) -> int | None:
        """(n-2)! words per group for n >= 3."""
        return math.factorial(self.n - 2) if self.n >= 3 else None

    @property
    def digit_total(self) -> int:
        """Digits contributed by this level: sum of count * len(word)."""
        return sum(c * len(w) for w, c in self.counts.items())

    def run_word(self, j: int) -> Word:
        """Word at 1-based position j of the run list (lex order with
        multiplicity)."""
        if not 1 <= j <= self.total:
            raise IndexError(f"run position {j} outside 1..{self.total}")
        return self.words[bisect_right(self._cumulative, j - 1)]

    def emission_word(self, j: int) -> Word:
        """Word at 1-based position j of the emission order."""
        if not 1 <= j <= self.total:
            raise IndexError(f"emission position {j} outside 1..{self.total}")
        if self.n < 3:
            return self.run_word(j)
        g, size = self.group_count, self.group_size
        k, t = divmod(j - 1, size)
        return self.run_word(k + t * g + 1)

    def emission(self) -> Iterator[Word]:
        """All n! words in emission order: groups 1..n(n-1) consecutively."""
        if self.n < 3:
            for w, c in zip(self.words, self._iter_counts()):
                for _ in range(c):
                    yield w
            return
        g, size = self.group_count, self.group_size
        cum, words = self._cumulative, self.words
        for k in range(g):
            for t in range(size):
                yield words[bisect_right(cum, k + t * g)]

    def groups(self) -> Iterator[list[Word]]:
        """The n(n-1) emission groups in order; empty iterator for n < 3."""
        if self.n < 3:
            return
        g, size = self.group_count, self.group_size
        cum, words = self._cumulative, self.words
        for k in range(g):
            yield [words[bisect_right(cum, k + t * g)] for t in range(size)]

    def _iter_counts(self) -> Iterator[int]:
        prev = 0
        for c in self._cumulative:
            yield c - prev
            prev = c


def plan_depth(
    seq: ProbabilitySequence, n: int, cap: int = DEFAULT_LEVEL_CAP
) -> DepthPlan:
    """Largest remainder apportionment of n! words over level n."""
    if n < 1:
        raise ValueError(f"level must be >= 1, got {n}")
    words = tuple(generation(n, cap))
    total = math.factorial(n)
    quotas = [total * path_weight(seq, w) for w in words]
    counts = [q.numerator // q.denominator for q in quotas]
    leftover = total - sum(counts)
    by_fraction = sorted(
        range(len(words)), key=lambda i: (counts[i] - quotas[i], words[i])
    )
    for i in by_fraction[:leftover]:
        counts[i] += 1
    cumulative = []
    acc = 0
    for c in counts:
        acc += c
        cumulative.append(acc)
    return DepthPlan(
        n=n,
        words=words,
        counts=dict(zip(words, counts)),
        _cumulative=tuple(cumulative),
    )


def plan_errors(
    plan: DepthPlan, seq: ProbabilitySequence
) -> tuple[dict[Word, Fraction], dict[tuple[int, Word], Fraction]]:
    """Exact count errors of a plan.

    Returns the per-word errors ``count - n! * weight`` over the whole level
    and, for n >= 3, the per-group grandparent errors
    ``group count - (n-2)! * weight(grandparent)`` keyed by (group, word).
    """
    n = plan.n
    total = math.factorial(n)
    word_errors = {
        w: plan.counts[w] - total * path_weight(seq, w) for w in plan.words
    }
    group_errors: dict[tuple[int, Word], Fraction] = {}
    if n >= 3:
        ancestors = generation(n - 2)
        share = math.factorial(n - 2)
        for k, group in enumerate(plan.groups(), start=1):
            tally: dict[Word, int] = {}
            for w in group:
                b = grandparent(w)
                tally[b] = tally.get(b, 0) + 1
            for b in ancestors:
                group_errors[(k, b)] = tally.get(b, 0) - share * path_weight(seq, b)
    return word_errors, group_errors
