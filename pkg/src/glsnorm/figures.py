"""Matplotlib renderings of frequency and verification reports.

Figures are drawn through the object-oriented API (no pyplot), so rendering
works headless and leaves the global backend untouched.
"""

from __future__ import annotations

import os
from typing import Iterable, Sequence

from matplotlib.figure import Figure

from .analyzer import FrequencyReport, TreePropertyReport
from .words import format_word


def save_deviation_figure(
    reports: Sequence[FrequencyReport],
    path: str | os.PathLike,
    title: str = "Block frequency deviation at structural checkpoints",
) -> None:
    """Log-log plot of |frequency - expected| against checkpoint size, one
    line per pattern."""
    fig = Figure(figsize=(7, 4.5))
    ax = fig.add_subplot(111)
    for rep in reports:
        xs = [pt.size for pt in rep.points]
        ys = [abs(float(pt.deviation)) for pt in rep.points]
        ax.plot(xs, ys, marker="o", label=format_word(rep.pattern))
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("digits counted")
    ax.set_ylabel("absolute deviation")
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(title="pattern", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)


def save_error_margin_figure(
    report: TreePropertyReport,
    path: str | os.PathLike,
    title: str = "Count error margins per depth",
) -> None:
    """Per-depth maximum count and group errors against their bounds."""
    fig = Figure(figsize=(7, 4.5))
    ax = fig.add_subplot(111)
    ns = [d.n for d in report.depths]
    word_errs = [float(d.max_count_error) for d in report.depths]
    ax.plot(ns, word_errs, marker="o", label="max |count error|")
    group_ns = [d.n for d in report.depths if d.max_group_error is not None]
    group_errs = [
        float(d.max_group_error)
        for d in report.depths
        if d.max_group_error is not None
    ]
    if group_ns:
        ax.plot(group_ns, group_errs, marker="s", label="max |group error|")
    ax.axhline(float(report.k1), linestyle="--", color="gray", label="word bound")
    ax.axhline(float(report.k2), linestyle=":", color="gray", label="group bound")
    ax.set_xlabel("depth")
    ax.set_ylabel("error")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)


def save_figures(reports: Iterable[FrequencyReport], path: str | os.PathLike) -> None:
    """Alias used by the report path: one deviation figure per run."""
    save_deviation_figure(list(reports), path)
