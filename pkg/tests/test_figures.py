"""Report figures render to files."""

from glsnorm import count_blocks, iter_digits, iter_words, verify_tree_properties
from glsnorm.figures import save_deviation_figure, save_error_margin_figure


def test_deviation_figure(luroth, tmp_path):
    digits = list(iter_digits(luroth, 5))
    reports = count_blocks(
        digits, [(1,), (2,), (1, 1)], [4, 16, 71, len(digits)], luroth
    )
    path = tmp_path / "deviation.png"
    save_deviation_figure(reports, path)
    assert path.exists()
    assert path.stat().st_size > 1000


def test_error_margin_figure(dyadic, tmp_path):
    report = verify_tree_properties(
        lambda: (w for _, w in iter_words(dyadic, 5)), dyadic
    )
    path = tmp_path / "margins.png"
    save_error_margin_figure(report, path)
    assert path.exists()
    assert path.stat().st_size > 1000
