"""Digit sequences with prescribed block frequencies and their projections
to normal numbers in generalized Luroth (GLS) number systems.

The pipeline: exact rational probability sequences (:mod:`glsnorm.prob`)
weight a binary word tree (:mod:`glsnorm.words`); a deterministic scheduler
apportions n! copies of the depth-n words (:mod:`glsnorm.scheduler`); the
generator streams the scheduled words with index ledgers
(:mod:`glsnorm.genseq`); the analyzer counts block frequencies and verifies
the structural count margins (:mod:`glsnorm.analyzer`); and the GLS modules
project digit sequences to points of [0, 1] or [0, 1]^N
(:mod:`glsnorm.gls`, :mod:`glsnorm.multigls`).
"""

__version__ = "0.1.0"

from .prob import (
    GeometricSequence,
    HeadGeometricSequence,
    LurothSequence,
    ProbabilitySequence,
    format_rational,
    parse_rational,
)
from .words import (
    EPSILON,
    LevelCapExceeded,
    Word,
    children,
    depth,
    format_word,
    generation,
    grandchildren,
    grandparent,
    increment_last,
    mean_word_length,
    parent,
    parse_word,
    path_weight,
    word_measure,
)
from .scheduler import DepthPlan, plan_depth, plan_errors
from .genseq import (
    LocatedDigit,
    TreeSequence,
    generate,
    iter_digits,
    iter_words,
    read_dump_digits,
    read_dump_words,
    write_dump,
)
from .analyzer import (
    FrequencyPoint,
    FrequencyReport,
    Shard,
    TreePropertyReport,
    USetStats,
    checkpoint_report,
    count_blocks,
    count_blocks_sharded,
    u_set_stats,
    verify_tree_properties,
)
from .gls import (
    DigitExtraction,
    GlsSystem,
    ProjectionResult,
    SignMismatchError,
    layout_right_to_left,
)
from .multigls import ProductLengthSequence, ProductSystem, enumerate_bijection

__all__ = [
    "__version__",
    "ProbabilitySequence",
    "LurothSequence",
    "GeometricSequence",
    "HeadGeometricSequence",
    "parse_rational",
    "format_rational",
    "Word",
    "EPSILON",
    "LevelCapExceeded",
    "parse_word",
    "format_word",
    "depth",
    "children",
    "increment_last",
    "parent",
    "grandparent",
    "grandchildren",
    "generation",
    "path_weight",
    "word_measure",
    "mean_word_length",
    "DepthPlan",
    "plan_depth",
    "plan_errors",
    "TreeSequence",
    "LocatedDigit",
    "generate",
    "iter_words",
    "iter_digits",
    "write_dump",
    "read_dump_words",
    "read_dump_digits",
    "FrequencyPoint",
    "FrequencyReport",
    "Shard",
    "TreePropertyReport",
    "USetStats",
    "count_blocks",
    "count_blocks_sharded",
    "checkpoint_report",
    "u_set_stats",
    "verify_tree_properties",
    "GlsSystem",
    "DigitExtraction",
    "ProjectionResult",
    "SignMismatchError",
    "layout_right_to_left",
    "ProductSystem",
    "ProductLengthSequence",
    "enumerate_bijection",
]
