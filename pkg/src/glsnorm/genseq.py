"""Streaming generation of the scheduled word sequence with index ledgers.

The digit sequence is the concatenation of the per-level emission orders for
levels 1..max_depth: level n contributes n! words, all before any word of
level n+1.  Generation streams word by word; memory stays proportional to
the current level's plan plus the ledgers, and the digit sequence itself is
never held in memory.

Practical sizing: depth 10 is about 4.04 million words, depth 11 about 43.9
million; the CLI warns above depth 11.

Dump format (text, bit-exact): a ``#depth <n>`` header line opens each level
block; every other line is one word, its digits as decimal integers joined
by commas (``1,1,2``); lines end with a single LF and carry no trailing
whitespace.  A summary JSON written alongside records the ledgers.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from typing import Callable, Iterator

from .prob import ProbabilitySequence
from .scheduler import plan_depth
from .words import DEFAULT_LEVEL_CAP, Word, format_word

_WRITE_BATCH = 1 << 16


@dataclass(frozen=True)
class LocatedDigit:
    """The word surrounding one digit of the generated sequence."""

    index: int
    depth: int
    group: int | None
    word_index: int
    word: Word
    offset: int

    @property
    def prefix(self) -> Word:
        """Digits of the containing word strictly before this one."""
        return self.word[: self.offset - 1]

    @property
    def suffix(self) -> Word:
        """Digits of the containing word from this one to its end."""
        return self.word[self.offset - 1 :]


class TreeSequence:
    """Ledgers of a generated sequence: digit counts and group ranges.

    ``digits_per_depth[n]`` counts the digits contributed by level n and
    ``digits_through_depth[n]`` accumulates them; for n >= 3,
    ``group_digit_ranges[n]`` lists the n(n-1) inclusive 1-based digit index
    intervals of the emission groups, which partition the level's digits.
    """

    def __init__(
        self,
        seq: ProbabilitySequence | None,
        max_depth: int,
        digits_per_depth: dict[int, int],
        group_digit_ranges: dict[int, list[tuple[int, int]]],
        cap: int = DEFAULT_LEVEL_CAP,
    ):
        self.seq = seq
        self.max_depth = max_depth
        self.cap = cap
        self.digits_per_depth = digits_per_depth
        self.group_digit_ranges = group_digit_ranges
        self.digits_through_depth: dict[int, int] = {}
        acc = 0
        for n in range(1, max_depth + 1):
            acc += digits_per_depth[n]
            self.digits_through_depth[n] = acc
        self.total_digits = acc
        self.total_words = sum(math.factorial(n) for n in range(1, max_depth + 1))

    def locate(self, i: int) -> LocatedDigit:
        """Find the word containing global digit index i (1-based).

        Walks the containing level's emission order, so the cost is linear
        in that level's word count.
        """
        if self.seq is None:
            raise ValueError("locate requires the generating sequence")
        if not 1 <= i <= self.total_digits:
            raise IndexError(f"digit index {i} outside 1..{self.total_digits}")
        n = 1
        while self.digits_through_depth[n] < i:
            n += 1
        rest = i - (self.digits_through_depth[n - 1] if n > 1 else 0)
        plan = plan_depth(self.seq, n, self.cap)
        j_in_level = 0
        for w in plan.emission():
            j_in_level += 1
            if rest <= len(w):
                break
            rest -= len(w)
        group = None
        if n >= 3:
            group = (j_in_level - 1) // plan.group_size + 1
        word_index = sum(math.factorial(m) for m in range(1, n)) + j_in_level
        return LocatedDigit(
            index=i,
            depth=n,
            group=group,
            word_index=word_index,
            word=w,
            offset=rest,
        )

    def summary(self) -> dict:
        """JSON-ready ledger: d, d_star, and per-level group ranges."""
        return {
            "max_depth": self.max_depth,
            "total_words": self.total_words,
            "total_digits": self.total_digits,
            "d": {str(n): c for n, c in sorted(self.digits_per_depth.items())},
            "d_star": {
                str(n): c for n, c in sorted(self.digits_through_depth.items())
            },
            "groups": {
                str(n): [[s, e] for s, e in ranges]
                for n, ranges in sorted(self.group_digit_ranges.items())
            },
        }

    @classmethod
    def from_summary(
        cls, data: dict, seq: ProbabilitySequence | None = None
    ) -> "TreeSequence":
        """Rebuild ledgers from a summary JSON object."""
        max_depth = int(data["max_depth"])
        per_depth = {int(n): int(c) for n, c in data["d"].items()}
        groups = {
            int(n): [(int(s), int(e)) for s, e in ranges]
            for n, ranges in data.get("groups", {}).items()
        }
        return cls(seq, max_depth, per_depth, groups)


def generate(
    seq: ProbabilitySequence,
    max_depth: int,
    sink: Callable[[int, Word], None] | None = None,
    cap: int = DEFAULT_LEVEL_CAP,
) -> TreeSequence:
    """Stream the scheduled words of levels 1..max_depth.

    ``sink(depth, word)`` is called once per emitted word, level blocks in
    order; level boundaries are exactly the calls where ``depth`` changes.
    Returns ledgers reflecting the emitted stream.
    """
    if max_depth < 1:
        raise ValueError(f"max_depth must be >= 1, got {max_depth}")
    digits_per_depth: dict[int, int] = {}
    group_ranges: dict[int, list[tuple[int, int]]] = {}
    digit_i = 0
    for n in range(1, max_depth + 1):
        plan = plan_depth(seq, n, cap)
        size = plan.group_size
        ranges: list[tuple[int, int]] = []
        block_start = digit_i
        group_start = digit_i + 1
        j = 0
        for w in plan.emission():
            j += 1
            digit_i += len(w)
            if sink is not None:
                sink(n, w)
            if size is not None and j % size == 0:
                ranges.append((group_start, digit_i))
                group_start = digit_i + 1
        digits_per_depth[n] = digit_i - block_start
        if size is not None:
            group_ranges[n] = ranges
    return TreeSequence(seq, max_depth, digits_per_depth, group_ranges, cap)


def iter_words(
    seq: ProbabilitySequence, max_depth: int, cap: int = DEFAULT_LEVEL_CAP
) -> Iterator[tuple[int, Word]]:
    """Yield (depth, word) pairs of the scheduled sequence in order."""
    for n in range(1, max_depth + 1):
        plan = plan_depth(seq, n, cap)
        for w in plan.emission():
            yield n, w


def iter_digits(
    seq: ProbabilitySequence, max_depth: int, cap: int = DEFAULT_LEVEL_CAP
) -> Iterator[int]:
    """Yield the digit stream of the scheduled sequence."""
    for _, w in iter_words(seq, max_depth, cap):
        yield from w


def write_dump(
    seq: ProbabilitySequence,
    max_depth: int,
    path: str | os.PathLike,
    summary_path: str | os.PathLike | None = None,
    cap: int = DEFAULT_LEVEL_CAP,
    config_sha256: str | None = None,
) -> TreeSequence:
    """Write the dump file and its summary JSON; returns the ledgers.

    ``summary_path`` defaults to the dump path with ``.summary.json``
    appended.  Output is byte-identical across runs with identical inputs.
    """
    if summary_path is None:
        summary_path = str(path) + ".summary.json"
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        batch: list[str] = []
        current_depth = 0

        def sink(n: int, w: Word) -> None:
            nonlocal current_depth
            if n != current_depth:
                if batch:
                    fh.write("\n".join(batch) + "\n")
                    batch.clear()
                fh.write(f"#depth {n}\n")
                current_depth = n
            batch.append(format_word(w))
            if len(batch) >= _WRITE_BATCH:
                fh.write("\n".join(batch) + "\n")
                batch.clear()

        ledger = generate(seq, max_depth, sink, cap)
        if batch:
            fh.write("\n".join(batch) + "\n")
    summary = ledger.summary()
    summary["system"] = seq.config()
    if config_sha256 is not None:
        summary["config_sha256"] = config_sha256
    with open(summary_path, "w", encoding="ascii", newline="\n") as fh:
        json.dump(summary, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return ledger


def read_dump_words(path: str | os.PathLike) -> Iterator[Word]:
    """Yield the words of a dump file in order, ignoring header lines.

    Raises ValueError with the offending line number on malformed content.
    """
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            try:
                w = tuple(int(p) for p in line.split(","))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: malformed word {line!r}") from exc
            if not all(d >= 1 for d in w):
                raise ValueError(f"{path}:{lineno}: word digits must be >= 1")
            yield w


def read_dump_digits(path: str | os.PathLike) -> Iterator[int]:
    """Yield the digit stream of a dump file."""
    for w in read_dump_words(path):
        yield from w
