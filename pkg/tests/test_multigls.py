"""Composite digit enumeration and multidimensional projection."""

import itertools
from fractions import Fraction as F

import pytest

from glsnorm import (
    GeometricSequence,
    LurothSequence,
    ProductSystem,
    enumerate_bijection,
    iter_words,
    layout_right_to_left,
    verify_tree_properties,
    word_measure,
)
from glsnorm.analyzer import checkpoint_report


def dy():
    return layout_right_to_left(GeometricSequence("1/2"))


def lur():
    return layout_right_to_left(LurothSequence())


def grid_top(systems, m, grid):
    """Oracle: rank a bounded grid by exact product, lexicographic ties.

    Certifies its own sufficiency: the smallest returned product must beat
    every product escaping the grid (those have a coordinate > grid, hence
    are at most max_k length_k(grid+1) * prod_{j!=k} length_j(1))."""
    entries = []
    for vec in itertools.product(range(1, grid + 1), repeat=len(systems)):
        p = F(1)
        for sys, d in zip(systems, vec):
            p *= sys.seq.length(d)
        entries.append((p, vec))
    entries.sort(key=lambda pv: (-pv[0], pv[1]))
    top = entries[:m]
    escape = F(0)
    for k in range(len(systems)):
        bound = systems[k].seq.length(grid + 1)
        for j, sys in enumerate(systems):
            if j != k:
                bound *= sys.seq.length(1)
        escape = max(escape, bound)
    assert top[-1][0] > escape, "grid too small to certify the oracle"
    return [(vec, p) for p, vec in top]


def test_bijection_first_entries_dyadic_square():
    entries = enumerate_bijection([dy(), dy()], 3)
    assert entries[0] == ((1, 1), F(1, 4))
    assert entries[1] == ((1, 2), F(1, 8))
    assert entries[2] == ((2, 1), F(1, 8))


def test_bijection_single_system_is_identity():
    seq = LurothSequence()
    entries = enumerate_bijection([lur()], 8)
    for d, (vec, product) in enumerate(entries, start=1):
        assert vec == (d,)
        assert product == seq.length(d)
    assert entries[4][1] == F(1, 30)


def test_bijection_luroth_times_dyadic_head():
    entries = enumerate_bijection([lur(), dy()], 1)
    assert entries[0] == ((1, 1), F(1, 4))


@pytest.mark.parametrize(
    "systems,grid",
    [
        ([dy(), dy()], 96),
        ([lur(), dy()], 400),
        ([dy(), dy(), dy()], 48),
    ],
    ids=["dyadic2", "luroth-dyadic", "dyadic3"],
)
def test_bijection_matches_grid_oracle(systems, grid):
    entries = enumerate_bijection(systems, 1000)
    assert entries == grid_top(systems, 1000, grid)
    products = [p for _, p in entries]
    assert all(a >= b for a, b in zip(products, products[1:]))


def test_enumeration_is_prefix_closed():
    entries = enumerate_bijection([lur(), dy()], 500)
    seen = set()
    for vec, _ in entries:
        for k in range(len(vec)):
            if vec[k] > 1:
                smaller = vec[:k] + (vec[k] - 1,) + vec[k + 1 :]
                assert smaller in seen
        seen.add(vec)


def test_product_sequence_feeds_the_pipeline():
    product = ProductSystem([dy(), dy()])
    seq = product.as_sequence()
    assert seq.length(1) == F(1, 4)
    assert seq.length(2) == seq.length(3) == F(1, 8)
    assert seq.tail(2) == F(3, 4)
    report = verify_tree_properties(
        lambda: (w for _, w in iter_words(seq, 8)), seq
    )
    assert report.passed
    assert max(d.max_count_error for d in report.depths) <= 1
    assert max(
        d.max_group_error for d in report.depths if d.max_group_error is not None
    ) < 2


def test_composite_block_frequency_trend():
    product = ProductSystem([dy(), dy()])
    seq = product.as_sequence()
    cumulative, _ = checkpoint_report(
        lambda: (w for _, w in iter_words(seq, 8)), seq, [(1,), (2,)]
    )
    for report in cumulative:
        by_label = {pt.label: pt for pt in report.points}
        assert abs(by_label["dstar(8)"].deviation) < abs(
            by_label["dstar(4)"].deviation
        )
        assert by_label["dstar(8)"].expected == word_measure(seq, report.pattern)


def test_hat_transform_examples():
    product = ProductSystem([lur(), lur()])
    assert product.hat_transform((F(2, 5), F(2, 5))) == (F(2, 5), F(2, 5))
    assert product.hat_transform((F(0), F(0))) == (F(0), F(0))
    assert product.hat_transform((F(3, 4), F(2, 5))) == (F(1, 2), F(2, 5))
    with pytest.raises(ValueError):
        product.hat_transform((F(1, 2),))


def test_project_multi_single_system_matches_plain_projection():
    product = ProductSystem([lur()])
    digits = [1, 1, 2, 3]
    (res,) = product.project(digits)
    plain = lur().project(digits)
    assert (res.lower, res.width) == (plain.lower, plain.width)


def test_project_multi_dyadic_square():
    product = ProductSystem([dy(), dy()])
    results = product.project([1, 1])
    for res in results:
        assert res.lower == F(1, 2) + F(1, 2) * F(1, 2)
        assert res.width == F(1, 4)

    empty = product.project([])
    for res in empty:
        assert (res.lower, res.width) == (F(0), F(1))


def test_project_multi_demultiplexes_by_enumeration():
    product = ProductSystem([dy(), dy()])
    # composite digits 2 and 3 decode to vectors (1,2) and (2,1)
    results = product.project([2, 3])
    first = dy().project([1, 2])
    second = dy().project([2, 1])
    assert (results[0].lower, results[0].width) == (first.lower, first.width)
    assert (results[1].lower, results[1].width) == (second.lower, second.width)


def test_enumeration_cap_is_enforced():
    product = ProductSystem([dy(), dy()], enumeration_cap=10)
    product.ensure(10)
    with pytest.raises(ValueError):
        product.vector(11)


def test_composite_digit_validation():
    product = ProductSystem([dy(), dy()])
    with pytest.raises(ValueError):
        product.vector(0)
    with pytest.raises(ValueError):
        enumerate_bijection([dy()], 0)
    with pytest.raises(ValueError):
        ProductSystem([])


def test_composite_tail_is_incremental_and_positive():
    product = ProductSystem([lur(), dy()])
    seq = product.as_sequence()
    total = F(0)
    for d in range(1, 80):
        assert seq.tail(d) == 1 - total
        assert seq.tail(d) > 0
        total += seq.length(d)
