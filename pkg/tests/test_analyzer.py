"""Frequency counting, structural verification, and checkpoint reports."""

import math
import random
from fractions import Fraction as F

import pytest

from glsnorm import (
    Shard,
    checkpoint_report,
    count_blocks,
    count_blocks_sharded,
    generate,
    iter_digits,
    iter_words,
    plan_depth,
    plan_errors,
    u_set_stats,
    verify_tree_properties,
    word_measure,
    write_dump,
)
from glsnorm.analyzer import (
    derive_ledger,
    frequency_json,
    frequency_rows,
    group_digit_intervals,
    write_frequency_csv,
)


def brute_count(stream, pattern, m):
    """Oracle: direct enumeration of start positions."""
    k = len(pattern)
    return sum(
        1 for s in range(1, m + 1) if tuple(stream[s - 1 : s - 1 + k]) == pattern
    )


def test_count_examples(luroth):
    reports = count_blocks([1, 1, 1, 2], [(1,)], [4], luroth)
    pt = reports[0].points[0]
    assert pt.count == 3
    assert pt.frequency == F(3, 4)

    reports = count_blocks([1, 1, 1, 2], [(5,)], [4], luroth)
    assert reports[0].points[0].count == 0

    reports = count_blocks([1, 1, 1], [(1, 1)], [3], luroth)
    pt = reports[0].points[0]
    assert pt.count == 2
    assert pt.frequency == F(2, 3)


def test_match_may_extend_past_checkpoint(luroth):
    # start index 3 <= M even though the match ends at 4
    reports = count_blocks([1, 2, 1, 1], [(1, 1)], [3], luroth)
    assert reports[0].points[0].count == 1


def test_counts_match_bruteforce(dyadic):
    rng = random.Random(90125)
    for _ in range(20):
        stream = [rng.randint(1, 4) for _ in range(rng.randint(5, 200))]
        patterns = [
            tuple(rng.randint(1, 4) for _ in range(rng.randint(1, 3)))
            for _ in range(4)
        ]
        checkpoints = sorted(rng.sample(range(1, len(stream) + 1), 3))
        reports = count_blocks(stream, patterns, checkpoints, dyadic)
        for rep in reports:
            for pt, m in zip(rep.points, checkpoints):
                assert pt.count == brute_count(stream, rep.pattern, m)


def test_checkpoint_beyond_stream_is_truncated(luroth):
    reports = count_blocks([1, 1, 1], [(1,)], [3, 10], luroth)
    first, second = reports[0].points
    assert not first.truncated
    assert second.truncated
    assert second.count == 3


def test_counting_input_validation(luroth):
    with pytest.raises(ValueError):
        count_blocks([1, 1], [()], [2], luroth)
    with pytest.raises(ValueError):
        count_blocks([1, 1], [(1,)], [2, 1], luroth)
    with pytest.raises(ValueError):
        count_blocks([1, 1], [(1,)], [0], luroth)


def test_shard_merge_equals_single_pass(dyadic):
    patterns = [(1,), (2,), (1, 1), (2, 1), (1, 2, 1)]
    width = max(len(p) for p in patterns)
    ledger = generate(dyadic, 6)
    stream = list(iter_digits(dyadic, 6))
    checkpoints = [ledger.digits_through_depth[n] for n in range(1, 7)]
    single = count_blocks(stream, patterns, checkpoints, dyadic)

    # split at depth boundaries, overlap carried across
    bounds = [0] + checkpoints
    shards = []
    for lo, hi in zip(bounds, bounds[1:]):
        first = max(0, lo - (width - 1))
        last = min(len(stream), hi + (width - 1))
        shards.append(
            Shard(
                digits=stream[first:last],
                first_index=first + 1,
                owned_lo=lo,
                owned_hi=hi,
            )
        )
    for threads in (1, 3):
        sharded = count_blocks_sharded(
            shards, patterns, checkpoints, dyadic, threads=threads,
            total_length=len(stream),
        )
        assert sharded == single


def test_shard_merge_at_arbitrary_splits(dyadic):
    # attribution by start index makes any split point safe, not just the
    # level boundaries
    rng = random.Random(777)
    patterns = [(1,), (1, 1), (2, 1, 1)]
    width = max(len(p) for p in patterns)
    stream = list(iter_digits(dyadic, 5))
    checkpoints = sorted(rng.sample(range(1, len(stream) + 1), 5))
    single = count_blocks(stream, patterns, checkpoints, dyadic)
    cuts = sorted(rng.sample(range(1, len(stream)), 6))
    bounds = [0] + cuts + [len(stream)]
    shards = []
    for lo, hi in zip(bounds, bounds[1:]):
        first = max(0, lo - (width - 1))
        last = min(len(stream), hi + (width - 1))
        shards.append(
            Shard(
                digits=stream[first:last],
                first_index=first + 1,
                owned_lo=lo,
                owned_hi=hi,
            )
        )
    sharded = count_blocks_sharded(
        shards, patterns, checkpoints, dyadic, total_length=len(stream)
    )
    assert sharded == single


def test_verify_canonical_sequences(presets):
    for seq in presets.values():
        report = verify_tree_properties(
            lambda: (w for _, w in iter_words(seq, 6)), seq
        )
        assert report.passed
        assert len(report.depths) == 6


def test_verify_fixture_dumps(fixture_dir, luroth, dyadic):
    assert verify_tree_properties(fixture_dir / "luroth_depth4.txt", luroth).passed
    assert verify_tree_properties(fixture_dir / "dyadic_depth4.txt", dyadic).passed


def test_verify_errors_match_plan_errors(dyadic):
    report = verify_tree_properties(
        lambda: (w for _, w in iter_words(dyadic, 6)), dyadic
    )
    for d in report.depths:
        word_errors, group_errors = plan_errors(plan_depth(dyadic, d.n), dyadic)
        assert d.max_count_error == max(abs(e) for e in word_errors.values())
        if d.n >= 3:
            assert d.max_group_error == max(abs(e) for e in group_errors.values())
    by_depth = {d.n: d.max_count_error for d in report.depths}
    assert by_depth[1] == 0
    assert by_depth[2] == 0
    assert by_depth[3] == F(1, 2)
    assert by_depth[4] == 0


def test_verify_detects_single_digit_mutation(fixture_dir, luroth):
    words = []
    for line in (fixture_dir / "luroth_depth4.txt").read_text().splitlines():
        if not line.startswith("#"):
            words.append(tuple(int(x) for x in line.split(",")))
    mutated = words.copy()
    mutated[9] = (2, 1, 1, 1)  # first depth-4 word, first digit bumped
    report = verify_tree_properties(lambda: mutated, luroth)
    assert not report.passed
    assert any(not d.layout_ok for d in report.depths)


def test_verify_detects_incomplete_block(luroth):
    words = [w for _, w in iter_words(luroth, 3)][:-1]
    report = verify_tree_properties(lambda: words, luroth)
    assert not report.passed
    assert report.error is not None
    assert report.trailing_words == 5


def test_verify_detects_count_margin_violation(dyadic):
    # depth-3 block with one word four times: error 4 - 3/2 = 5/2 >= 2
    words = [(1,), (1, 1), (2,)] + [(1, 1, 1)] * 4 + [(2, 1), (3,)]
    report = verify_tree_properties(lambda: words, dyadic)
    assert not report.passed
    d3 = report.depths[2]
    assert d3.layout_ok
    assert not d3.count_margins_ok
    assert d3.max_count_error == F(5, 2)
    assert d3.worst_word == (1, 1, 1)


def test_verify_detects_group_margin_violation(dyadic):
    # Reorder the depth-6 block so one group holds 24 words with the same
    # grandparent: group error 24 - 24/8 = 21 >= 5 while the counts and the
    # block shape stay intact.
    from glsnorm import grandparent

    words = [w for _, w in iter_words(dyadic, 6)]
    head = [w for _, w in iter_words(dyadic, 5)]
    block = words[len(head) :]
    target = (1, 1, 1, 1)
    favored = [w for w in block if grandparent(w) == target]
    rest = [w for w in block if grandparent(w) != target]
    reordered = head + favored + rest
    report = verify_tree_properties(lambda: reordered, dyadic)
    assert not report.passed
    d6 = report.depths[5]
    assert d6.layout_ok
    assert d6.count_margins_ok
    assert d6.group_margins_ok is False
    assert d6.max_group_error >= 5
    assert report.failures()


def test_verify_strictness_of_margins(dyadic):
    # exact error 1/2 at depth 3 passes k1 = 2 but fails k1 = 1/2
    source = lambda: (w for _, w in iter_words(dyadic, 3))
    assert verify_tree_properties(source, dyadic).passed
    tight = verify_tree_properties(source, dyadic, k1=F(1, 2))
    assert not tight.passed


def test_derive_ledger_matches_generator(dyadic):
    ledger = generate(dyadic, 5)
    per_depth, through, leftover = derive_ledger(
        lambda: (w for _, w in iter_words(dyadic, 5))
    )
    assert per_depth == ledger.digits_per_depth
    assert through == ledger.digits_through_depth
    assert leftover == 0


def test_group_intervals_match_generator(dyadic):
    ledger = generate(dyadic, 5)
    intervals = group_digit_intervals(
        lambda: (w for _, w in iter_words(dyadic, 5)), [3, 4, 5]
    )
    assert intervals == ledger.group_digit_ranges


def test_checkpoint_report_luroth(luroth):
    cumulative, groups = checkpoint_report(
        lambda: (w for _, w in iter_words(luroth, 4)),
        luroth,
        [(1,), (2,)],
        group_depths=[4],
    )
    ones = cumulative[0]
    assert ones.pattern == (1,)
    point2 = next(pt for pt in ones.points if pt.label == "dstar(2)")
    assert point2.count == 3
    assert point2.frequency == F(3, 4)
    assert point2.expected == F(1, 2)
    assert point2.deviation == F(1, 4)

    grp = groups[0]
    assert len(grp.points) == 12
    assert sum(pt.size for pt in grp.points) == 55
    # group counts cross-checked against direct enumeration
    digits = list(iter_digits(luroth, 4))
    for pt in grp.points:
        start = pt.position - pt.size + 1
        expected = sum(
            1 for s in range(start, pt.position + 1) if digits[s - 1 : s] == [1]
        )
        assert pt.count == expected


def test_checkpoint_report_extra_checkpoints(luroth):
    cumulative, _ = checkpoint_report(
        lambda: (w for _, w in iter_words(luroth, 3)),
        luroth,
        [(1,)],
        extra_checkpoints=[5],
    )
    labels = [pt.label for pt in cumulative[0].points]
    assert labels == ["dstar(1)", "dstar(2)", "at(5)", "dstar(3)"]


def test_checkpoint_report_rejects_empty_source(luroth):
    with pytest.raises(ValueError):
        checkpoint_report(lambda: [], luroth, [(1,)])


def test_u_set_stats_examples(luroth, dyadic):
    # level 1 with a depth-1 pattern: the prefix depth can never drop below 0
    stats = u_set_stats(lambda: (w for _, w in iter_words(luroth, 1)), luroth, (1,), 1)
    assert stats.size == 0
    assert stats.undefined
    assert stats.ratio is None

    stats = u_set_stats(lambda: (w for _, w in iter_words(dyadic, 2)), dyadic, (2,), 2)
    assert stats.size == 0
    assert stats.undefined

    stats = u_set_stats(lambda: (w for _, w in iter_words(dyadic, 3)), dyadic, (1,), 3)
    assert (stats.size, stats.matches, stats.ratio) == (10, 6, F(3, 5))


def test_u_set_stats_bruteforce(dyadic):
    # independent digit-walk over the depth-3 block
    pattern = (1,)
    words3 = [w for n, w in iter_words(dyadic, 3) if n == 3]
    size = matches = 0
    for w in words3:
        for t in range(len(w)):
            if sum(w[:t]) < 3 - 1:
                size += 1
                if w[t : t + 1] == pattern:
                    matches += 1
    stats = u_set_stats(lambda: (w for _, w in iter_words(dyadic, 3)), dyadic, pattern, 3)
    assert (stats.size, stats.matches) == (size, matches)


def test_u_set_stats_requires_complete_level(luroth):
    with pytest.raises(ValueError):
        u_set_stats(lambda: [(1,)], luroth, (1,), 2)


def test_frequency_csv_and_json(luroth, tmp_path):
    reports = count_blocks([1, 1, 1, 2], [(1,), (2,)], [("dstar(2)", 4)], luroth)
    path = tmp_path / "report.csv"
    write_frequency_csv(reports, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "pattern,label,M,count,NA_num,NA_den,mu_num,mu_den,abs_dev_decimal"
    assert lines[1] == "1,dstar(2),4,3,3,4,1,2,0.25"
    assert len(lines) == 3

    rows = list(frequency_rows(reports))
    assert rows[0]["NA_num"] == 3
    mirror = frequency_json(reports)
    assert mirror[0]["na"] == "3/4"
    assert mirror[0]["mu"] == "1/2"
    assert mirror[0]["deviation"] == "1/4"
    assert mirror[1]["pattern"] == "2"


def test_verify_from_file_and_from_memory_agree(dyadic, tmp_path):
    path = tmp_path / "seq.txt"
    write_dump(dyadic, 5, path)
    a = verify_tree_properties(path, dyadic)
    b = verify_tree_properties(lambda: (w for _, w in iter_words(dyadic, 5)), dyadic)
    assert a.passed and b.passed
    assert [(d.n, d.max_count_error, d.max_group_error) for d in a.depths] == [
        (d.n, d.max_count_error, d.max_group_error) for d in b.depths
    ]
