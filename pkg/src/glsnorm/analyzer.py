"""Block frequency counting and structural verification of word dumps.

Counting uses the start-index convention: a pattern occurrence is counted at
checkpoint M when its start index lies in 1..M, even if the match extends
beyond M, so the stream is read up to len(pattern) - 1 digits past the last
checkpoint.  Overlapping occurrences all count.  All frequencies are exact
rationals; decimals appear only in rendered report columns.

Verification never trusts dump headers: word depths are recomputed from the
digits, and the level blocks are located purely by the factorial word-count
layout (level n occupies word positions sum_{m<n} m! + 1 .. sum_{m<=n} m!).
"""

from __future__ import annotations

import csv
import math
import os
from bisect import bisect_left
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .genseq import read_dump_words
from .prob import ProbabilitySequence, format_rational
from .words import (
    DEFAULT_LEVEL_CAP,
    LevelCapExceeded,
    Word,
    format_word,
    generation,
    grandparent,
    path_weight,
    word_measure,
)


@dataclass(frozen=True)
class FrequencyPoint:
    """One checkpoint of a pattern's frequency report.

    ``size`` is the number of start indices considered (the checkpoint M for
    cumulative points, the interval length for group points); ``position``
    is the last index of the counted range.
    """

    label: str
    position: int
    size: int
    count: int
    frequency: Fraction
    expected: Fraction
    deviation: Fraction
    truncated: bool = False


@dataclass(frozen=True)
class FrequencyReport:
    pattern: Word
    points: tuple[FrequencyPoint, ...]


def _check_patterns(patterns: Sequence[Word]) -> list[Word]:
    pats = [tuple(p) for p in patterns]
    for p in pats:
        if not p:
            raise ValueError("patterns must be nonempty words")
        if not all(isinstance(d, int) and d >= 1 for d in p):
            raise ValueError(f"pattern digits must be integers >= 1: {p!r}")
    return pats


def _check_checkpoints(
    checkpoints: Sequence[int | tuple[str, int]]
) -> list[tuple[str, int]]:
    normalized: list[tuple[str, int]] = []
    for c in checkpoints:
        if isinstance(c, tuple):
            label, m = c
        else:
            label, m = str(c), c
        if m < 1:
            raise ValueError(f"checkpoint {m} must be >= 1")
        normalized.append((label, int(m)))
    ms = [m for _, m in normalized]
    if ms != sorted(ms):
        raise ValueError("checkpoints must be sorted ascending")
    return normalized


def _count_at_checkpoints(
    digits: Iterable[int], patterns: list[Word], ms: list[int]
) -> tuple[list[list[int]], int]:
    """Single pass; returns per-pattern counts aligned with ms, and the
    stream length.  counts[p][c] = number of starts <= ms[c] (clipped to the
    available stream)."""
    n_pat, n_ck = len(patterns), len(ms)
    counts = [[-1] * n_ck for _ in range(n_pat)]
    run = [0] * n_pat
    # A match of pattern p with start s is complete once index s+len(p)-1 is
    # read, so the snapshot for checkpoint M is due at index M+len(p)-1.
    events = sorted(
        (m + len(p) - 1, pi, ci)
        for pi, p in enumerate(patterns)
        for ci, m in enumerate(ms)
    )
    ev, n_ev = 0, len(events)
    next_due = events[0][0] if events else 0
    width = max(len(p) for p in patterns)
    by_last: dict[int, list[tuple[int, Word, int]]] = {}
    for pi, p in enumerate(patterns):
        by_last.setdefault(p[-1], []).append((pi, p, len(p)))
    i = 0
    if width == 1:
        for d in digits:
            i += 1
            cands = by_last.get(d)
            if cands is not None:
                for pi, _, _ in cands:
                    run[pi] += 1
            while next_due == i:
                _, pi, ci = events[ev]
                counts[pi][ci] = run[pi]
                ev += 1
                next_due = events[ev][0] if ev < n_ev else 0
            if ev == n_ev:
                break
    else:
        tail: Word = ()
        for d in digits:
            i += 1
            tail = tail[-width + 1 :] + (d,) if len(tail) >= width else tail + (d,)
            cands = by_last.get(d)
            if cands is not None:
                for pi, p, lp in cands:
                    if lp == 1 or (len(tail) >= lp and tail[-lp:] == p):
                        run[pi] += 1
            while next_due == i:
                _, pi, ci = events[ev]
                counts[pi][ci] = run[pi]
                ev += 1
                next_due = events[ev][0] if ev < n_ev else 0
            if ev == n_ev:
                break
    # Checkpoints past the end of the stream get every match seen so far.
    while ev < n_ev:
        _, pi, ci = events[ev]
        counts[pi][ci] = run[pi]
        ev += 1
    return counts, i


def count_blocks(
    digits: Iterable[int],
    patterns: Sequence[Word],
    checkpoints: Sequence[int | tuple[str, int]],
    seq: ProbabilitySequence,
) -> list[FrequencyReport]:
    """Count pattern starts up to each checkpoint in a single pass."""
    pats = _check_patterns(patterns)
    cks = _check_checkpoints(checkpoints)
    ms = [m for _, m in cks]
    counts, length = _count_at_checkpoints(digits, pats, ms)
    reports = []
    for pi, p in enumerate(pats):
        mu = word_measure(seq, p)
        points = []
        for ci, (label, m) in enumerate(cks):
            c = counts[pi][ci]
            freq = Fraction(c, m)
            points.append(
                FrequencyPoint(
                    label=label,
                    position=m,
                    size=m,
                    count=c,
                    frequency=freq,
                    expected=mu,
                    deviation=freq - mu,
                    truncated=m > length,
                )
            )
        reports.append(FrequencyReport(pattern=p, points=tuple(points)))
    return reports


@dataclass(frozen=True)
class Shard:
    """A contiguous slice of the digit stream for shard-wise counting.

    ``digits`` must cover the owned index range (owned_lo, owned_hi] plus up
    to width-1 digits of context on each side for window warmup and spill;
    ``first_index`` is the absolute index of the first supplied digit.
    Matches are attributed to the shard owning their start index.
    """

    digits: Sequence[int]
    first_index: int
    owned_lo: int
    owned_hi: int


def _count_shard(
    shard: Shard, patterns: list[Word], ms: list[int]
) -> list[list[int]]:
    """Per-checkpoint start counts owned by one shard (diff-array free)."""
    n_pat, n_ck = len(patterns), len(ms)
    out = [[0] * n_ck for _ in range(n_pat)]
    width = max(len(p) for p in patterns)
    by_last: dict[int, list[tuple[int, Word, int]]] = {}
    for pi, p in enumerate(patterns):
        by_last.setdefault(p[-1], []).append((pi, p, len(p)))
    tail: Word = ()
    i = shard.first_index - 1
    lo, hi = shard.owned_lo, shard.owned_hi
    for d in shard.digits:
        i += 1
        tail = tail[-width + 1 :] + (d,) if len(tail) >= width else tail + (d,)
        cands = by_last.get(d)
        if cands is None:
            continue
        for pi, p, lp in cands:
            if lp == 1 or (len(tail) >= lp and tail[-lp:] == p):
                start = i - lp + 1
                if lo < start <= hi:
                    ci = bisect_left(ms, start)
                    if ci < n_ck:
                        out[pi][ci] += 1
    return out


def count_blocks_sharded(
    shards: Sequence[Shard],
    patterns: Sequence[Word],
    checkpoints: Sequence[int | tuple[str, int]],
    seq: ProbabilitySequence,
    threads: int = 1,
    total_length: int | None = None,
) -> list[FrequencyReport]:
    """Count over independent shards and merge; equals the single pass.

    Each match is counted by the shard owning its start index, so splitting
    a stream at any boundary (with window overlap carried across) yields the
    same counts as one pass.  Merge order does not matter.
    """
    pats = _check_patterns(patterns)
    cks = _check_checkpoints(checkpoints)
    ms = [m for _, m in cks]
    if total_length is None:
        total_length = max((s.owned_hi for s in shards), default=0)
    if threads > 1 and len(shards) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            partials = list(pool.map(lambda s: _count_shard(s, pats, ms), shards))
    else:
        partials = [_count_shard(s, pats, ms) for s in shards]
    # partials hold counts bucketed by first checkpoint >= start; accumulate
    # buckets into "starts <= M" totals.
    reports = []
    for pi, p in enumerate(pats):
        mu = word_measure(seq, p)
        acc = 0
        points = []
        for ci, (label, m) in enumerate(cks):
            acc += sum(part[pi][ci] for part in partials)
            freq = Fraction(acc, m)
            points.append(
                FrequencyPoint(
                    label=label,
                    position=m,
                    size=m,
                    count=acc,
                    frequency=freq,
                    expected=mu,
                    deviation=freq - mu,
                    truncated=m > total_length,
                )
            )
        reports.append(FrequencyReport(pattern=p, points=tuple(points)))
    return reports


@dataclass(frozen=True)
class DepthVerification:
    """Verification outcome for one level block."""

    n: int
    expected_words: int
    received_words: int
    depth_mismatches: int
    max_count_error: Fraction
    worst_word: Word | None
    max_group_error: Fraction | None
    worst_group: tuple[int, Word] | None
    layout_ok: bool
    count_margins_ok: bool
    group_margins_ok: bool | None

    @property
    def passed(self) -> bool:
        return self.layout_ok and self.count_margins_ok and self.group_margins_ok is not False


@dataclass
class TreePropertyReport:
    k1: Fraction
    k2: Fraction
    depths: list[DepthVerification]
    trailing_words: int = 0
    error: str | None = None

    @property
    def passed(self) -> bool:
        return (
            self.error is None
            and self.trailing_words == 0
            and all(d.passed for d in self.depths)
        )

    def failures(self) -> list[str]:
        """Human-readable list of everything that failed."""
        out = []
        if self.error:
            out.append(self.error)
        if self.trailing_words:
            out.append(f"{self.trailing_words} trailing words form no full block")
        for d in self.depths:
            if not d.layout_ok:
                out.append(
                    f"depth {d.n}: block shape violated "
                    f"({d.received_words} words, {d.depth_mismatches} wrong-depth)"
                )
            if not d.count_margins_ok:
                out.append(
                    f"depth {d.n}: count error {d.max_count_error} at word "
                    f"{format_word(d.worst_word)} outside (-{self.k1}, {self.k1})"
                )
            if d.group_margins_ok is False:
                k, b = d.worst_group
                out.append(
                    f"depth {d.n}: group {k} grandparent {format_word(b)} error "
                    f"{d.max_group_error} outside (-{self.k2}, {self.k2})"
                )
        return out


def _iter_source(source) -> Iterator[Word]:
    if callable(source):
        return iter(source())
    return read_dump_words(source)


def verify_tree_properties(
    source,
    seq: ProbabilitySequence,
    k1: Fraction = Fraction(2),
    k2: Fraction = Fraction(5),
    cap: int = DEFAULT_LEVEL_CAP,
) -> TreePropertyReport:
    """Check the block layout, per-word counts, and per-group grandparent
    counts of a word sequence against exact weight quotas.

    ``source`` is a dump path or a callable returning an iterable of words.
    Depths are recomputed from digits; headers are never trusted.  Every
    comparison is an exact rational one and the bounds are strict:
    count errors must lie inside (-k1, k1) and group errors inside
    (-k2, k2).
    """
    report = TreePropertyReport(k1=k1, k2=k2, depths=[])
    words = _iter_source(source)
    n = 0
    while True:
        n += 1
        expected = math.factorial(n)
        counts: dict[Word, int] = {}
        mismatches = 0
        group_size = math.factorial(n - 2) if n >= 3 else None
        group_count = n * (n - 1) if n >= 3 else None
        group_tallies: list[dict[Word, int]] | None = (
            [{} for _ in range(group_count)] if group_count else None
        )
        received = 0
        for w in words:
            received += 1
            counts[w] = counts.get(w, 0) + 1
            if sum(w) != n:
                mismatches += 1
            elif group_tallies is not None:
                g = group_tallies[(received - 1) // group_size]
                b = grandparent(w)
                g[b] = g.get(b, 0) + 1
            if received == expected:
                break
        if received == 0:
            break
        if received < expected:
            report.trailing_words = received
            report.error = (
                f"incomplete level block: depth {n} has {received} of "
                f"{expected} words"
            )
            break
        try:
            level = generation(n, cap)
        except LevelCapExceeded as exc:
            report.error = f"depth {n}: {exc}"
            break
        max_err, worst = Fraction(0), None
        for u in level:
            e = counts.get(u, 0) - expected * path_weight(seq, u)
            if abs(e) > max_err:
                max_err, worst = abs(e), u
        max_group_err: Fraction | None = None
        worst_group: tuple[int, Word] | None = None
        if group_tallies is not None:
            share = group_size
            ancestors = generation(n - 2, cap)
            max_group_err = Fraction(0)
            for k, tally in enumerate(group_tallies, start=1):
                for b in ancestors:
                    e = tally.get(b, 0) - share * path_weight(seq, b)
                    if abs(e) > max_group_err:
                        max_group_err, worst_group = abs(e), (k, b)
        report.depths.append(
            DepthVerification(
                n=n,
                expected_words=expected,
                received_words=received,
                depth_mismatches=mismatches,
                max_count_error=max_err,
                worst_word=worst,
                max_group_error=max_group_err,
                worst_group=worst_group,
                layout_ok=(received == expected and mismatches == 0),
                count_margins_ok=max_err < k1,
                group_margins_ok=(max_group_err < k2) if max_group_err is not None else None,
            )
        )
    return report


def derive_ledger(source) -> tuple[dict[int, int], dict[int, int], int]:
    """Digit counts per complete level of a word sequence.

    Returns (digits per depth, cumulative digits through depth, leftover
    word count).  Levels are located by the factorial layout alone.
    """
    per_depth: dict[int, int] = {}
    through: dict[int, int] = {}
    acc = 0
    n = 0
    leftover = 0
    words = _iter_source(source)
    while True:
        n += 1
        expected = math.factorial(n)
        received = 0
        block_digits = 0
        for w in words:
            received += 1
            block_digits += len(w)
            if received == expected:
                break
        if received < expected:
            leftover = received
            break
        acc += block_digits
        per_depth[n] = block_digits
        through[n] = acc
    return per_depth, through, leftover


def group_digit_intervals(source, depths: Sequence[int]) -> dict[int, list[tuple[int, int]]]:
    """Inclusive digit index ranges of the emission groups at the given
    depths, derived from the factorial layout of a word sequence."""
    wanted = set(depths)
    out: dict[int, list[tuple[int, int]]] = {}
    digit_i = 0
    n = 0
    words = _iter_source(source)
    done = False
    while not done:
        n += 1
        expected = math.factorial(n)
        size = math.factorial(n - 2) if n >= 3 else None
        track = n in wanted
        if track and n < 3:
            raise ValueError(f"depth {n} has no groups")
        ranges: list[tuple[int, int]] = []
        start = digit_i + 1
        received = 0
        for w in words:
            received += 1
            digit_i += len(w)
            if track and received % size == 0:
                ranges.append((start, digit_i))
                start = digit_i + 1
            if received == expected:
                break
        if received < expected:
            done = True
            if track and received:
                raise ValueError(f"depth {n} block incomplete; no group ranges")
        elif track:
            out[n] = ranges
        if received == 0:
            break
        if wanted and n >= max(wanted):
            break
    missing = wanted - out.keys()
    if missing:
        raise ValueError(f"depths {sorted(missing)} not complete in source")
    return out


def checkpoint_report(
    source,
    seq: ProbabilitySequence,
    patterns: Sequence[Word],
    group_depths: Sequence[int] = (),
    extra_checkpoints: Sequence[int] = (),
) -> tuple[list[FrequencyReport], list[FrequencyReport]]:
    """Frequencies at the structural checkpoints of a word sequence.

    Cumulative points cover 1..d_star(n) for every complete level n plus any
    ``extra_checkpoints``; group points cover each emission group interval
    of the requested depths.  Returns (cumulative reports, group reports).
    The source is read twice, so it must be a path or a re-iterable factory.
    """
    pats = _check_patterns(patterns)
    _, through, _ = derive_ledger(source)
    if not through:
        raise ValueError("source contains no complete level block")
    intervals = group_digit_intervals(source, group_depths) if group_depths else {}
    cumulative = [(f"dstar({n})", m) for n, m in sorted(through.items())]
    for m in extra_checkpoints:
        cumulative.append((f"at({m})", int(m)))
    # Group interval counts come from differences of cumulative start counts
    # at the interval edges.
    raw_ms: set[int] = {m for _, m in cumulative}
    for n, ranges in intervals.items():
        for s, e in ranges:
            if s > 1:
                raw_ms.add(s - 1)
            raw_ms.add(e)
    ordered_ms = sorted(raw_ms)
    position = {m: i for i, m in enumerate(ordered_ms)}

    def digits() -> Iterator[int]:
        for w in _iter_source(source):
            yield from w

    counts, length = _count_at_checkpoints(digits(), pats, ordered_ms)
    cum_reports: list[FrequencyReport] = []
    grp_reports: list[FrequencyReport] = []
    for pi, p in enumerate(pats):
        mu = word_measure(seq, p)
        points = []
        for label, m in sorted(cumulative, key=lambda lm: lm[1]):
            c = counts[pi][position[m]]
            freq = Fraction(c, m)
            points.append(
                FrequencyPoint(
                    label=label,
                    position=m,
                    size=m,
                    count=c,
                    frequency=freq,
                    expected=mu,
                    deviation=freq - mu,
                    truncated=m > length,
                )
            )
        cum_reports.append(FrequencyReport(pattern=p, points=tuple(points)))
        gpoints = []
        for n in sorted(intervals):
            for k, (s, e) in enumerate(intervals[n], start=1):
                hi = counts[pi][position[e]]
                lo = counts[pi][position[s - 1]] if s > 1 else 0
                size = e - s + 1
                freq = Fraction(hi - lo, size)
                gpoints.append(
                    FrequencyPoint(
                        label=f"group({n},{k})",
                        position=e,
                        size=size,
                        count=hi - lo,
                        frequency=freq,
                        expected=mu,
                        deviation=freq - mu,
                        truncated=e > length,
                    )
                )
        if gpoints:
            grp_reports.append(FrequencyReport(pattern=p, points=tuple(gpoints)))
    return cum_reports, grp_reports


@dataclass(frozen=True)
class USetStats:
    """How often a pattern heads the within-word suffix at one level.

    ``size`` counts the digit positions of level-n words whose word prefix
    has depth strictly below n - depth(pattern); ``matches`` counts those
    whose suffix starts with the pattern.  The ratio is undefined when no
    position qualifies.
    """

    level: int
    pattern: Word
    size: int
    matches: int

    @property
    def undefined(self) -> bool:
        return self.size == 0

    @property
    def ratio(self) -> Fraction | None:
        return None if self.size == 0 else Fraction(self.matches, self.size)


def u_set_stats(source, seq: ProbabilitySequence, pattern: Word, n: int) -> USetStats:
    """Suffix-availability statistics for one pattern at one level."""
    (pattern,) = _check_patterns([pattern])
    level_depth = sum(pattern)
    threshold = n - level_depth
    size = matches = 0
    m = 0
    words = _iter_source(source)
    while m < n:
        m += 1
        expected = math.factorial(m)
        received = 0
        for w in words:
            received += 1
            if m == n:
                running = 0
                for t, d in enumerate(w):
                    if running < threshold:
                        size += 1
                        if w[t : t + len(pattern)] == pattern:
                            matches += 1
                    running += d
            if received == expected:
                break
        if received < expected:
            raise ValueError(f"depth {n} not complete in source")
    return USetStats(level=n, pattern=pattern, size=size, matches=matches)


CSV_COLUMNS = [
    "pattern",
    "label",
    "M",
    "count",
    "NA_num",
    "NA_den",
    "mu_num",
    "mu_den",
    "abs_dev_decimal",
]


def frequency_rows(reports: Iterable[FrequencyReport]) -> Iterator[dict]:
    for rep in reports:
        for pt in rep.points:
            yield {
                "pattern": format_word(rep.pattern),
                "label": pt.label,
                "M": pt.size,
                "count": pt.count,
                "NA_num": pt.frequency.numerator,
                "NA_den": pt.frequency.denominator,
                "mu_num": pt.expected.numerator,
                "mu_den": pt.expected.denominator,
                "abs_dev_decimal": format(float(abs(pt.deviation)), ".12g"),
            }


def write_frequency_csv(
    reports: Iterable[FrequencyReport], path: str | os.PathLike
) -> None:
    with open(path, "w", encoding="ascii", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in frequency_rows(reports):
            writer.writerow(row)


def frequency_json(reports: Iterable[FrequencyReport]) -> list[dict]:
    """JSON mirror of the CSV rows, with exact rationals as p/q strings."""
    out = []
    for rep in reports:
        for pt in rep.points:
            out.append(
                {
                    "pattern": format_word(rep.pattern),
                    "label": pt.label,
                    "M": pt.size,
                    "position": pt.position,
                    "count": pt.count,
                    "na": format_rational(pt.frequency),
                    "mu": format_rational(pt.expected),
                    "deviation": format_rational(pt.deviation),
                    "abs_dev": float(abs(pt.deviation)),
                    "truncated": pt.truncated,
                }
            )
    return out
