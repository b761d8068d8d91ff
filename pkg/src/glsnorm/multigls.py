"""N-dimensional GLS systems through an order-preserving digit bijection.

N coordinate systems induce a composite alphabet: index vectors in N^N are
enumerated best-first by the exact product of their coordinate masses
(largest first, ties to the lexicographically smallest vector), which yields
a nonincreasing composite probability sequence.  That sequence feeds the
ordinary one-dimensional pipeline unchanged; composite digits demultiplex
through the enumeration back into per-coordinate digit streams, so a
composite digit prefix projects to an axis-aligned box in [0, 1]^N.

Correctness of the best-first frontier relies on the coordinate masses
being nonincreasing: incrementing any coordinate never increases the
product, so the frontier always holds a vector of maximal product among the
unenumerated ones.
"""

from __future__ import annotations

import heapq
from fractions import Fraction
from typing import Iterable, Sequence

from .gls import GlsSystem, ProjectionResult
from .prob import DEFAULT_VALIDATION_HORIZON, ProbabilitySequence

DEFAULT_ENUMERATION_CAP = 1_000_000

IndexVector = tuple[int, ...]


class ProductSystem:
    """Coordinate systems plus the lazily enumerated digit bijection.

    Enumeration extends on demand up to ``enumeration_cap`` entries and is
    cached; extending mutates the cache and is not thread-safe, but reads of
    an already enumerated prefix are.
    """

    def __init__(
        self,
        systems: Sequence[GlsSystem],
        enumeration_cap: int = DEFAULT_ENUMERATION_CAP,
    ):
        if not systems:
            raise ValueError("at least one coordinate system is required")
        self.systems = tuple(systems)
        self.dims = len(self.systems)
        self.enumeration_cap = enumeration_cap
        self._entries: list[tuple[IndexVector, Fraction]] = []
        self._partial_sums: list[Fraction] = []  # cumulative product mass
        start = (1,) * self.dims
        self._heap: list[tuple[Fraction, IndexVector]] = [
            (-self._product(start), start)
        ]
        self._seen: set[IndexVector] = {start}

    def _product(self, vec: IndexVector) -> Fraction:
        p = Fraction(1)
        for sys, d in zip(self.systems, vec):
            p *= sys.seq.length(d)
        return p

    def ensure(self, m: int) -> None:
        """Extend the enumerated prefix to at least m entries."""
        if m > self.enumeration_cap:
            raise ValueError(
                f"composite digit {m} beyond enumeration cap "
                f"{self.enumeration_cap}"
            )
        while len(self._entries) < m:
            neg, vec = heapq.heappop(self._heap)
            product = -neg
            self._entries.append((vec, product))
            prev = self._partial_sums[-1] if self._partial_sums else Fraction(0)
            self._partial_sums.append(prev + product)
            for k in range(self.dims):
                nxt = vec[:k] + (vec[k] + 1,) + vec[k + 1 :]
                if nxt not in self._seen:
                    self._seen.add(nxt)
                    heapq.heappush(self._heap, (-self._product(nxt), nxt))

    def vector(self, d: int) -> IndexVector:
        """The index vector of composite digit d (1-based)."""
        if d < 1:
            raise ValueError(f"composite digit must be >= 1, got {d}")
        self.ensure(d)
        return self._entries[d - 1][0]

    def product_length(self, d: int) -> Fraction:
        """The mass of composite digit d: the product of its coordinate
        masses."""
        if d < 1:
            raise ValueError(f"composite digit must be >= 1, got {d}")
        self.ensure(d)
        return self._entries[d - 1][1]

    def entries(self, m: int) -> list[tuple[IndexVector, Fraction]]:
        """The first m (vector, product) pairs of the enumeration."""
        self.ensure(m)
        return self._entries[:m]

    def composite_tail(self, d: int) -> Fraction:
        """Remaining composite mass 1 - sum_{i<d} product(i), maintained
        incrementally; positive for every d since the full product measure
        sums to 1 over the whole lattice."""
        if d < 1:
            raise ValueError(f"composite digit must be >= 1, got {d}")
        if d == 1:
            return Fraction(1)
        self.ensure(d - 1)
        return 1 - self._partial_sums[d - 2]

    def hat_transform(self, point: Sequence[Fraction]) -> tuple[Fraction, ...]:
        """Componentwise interval map on [0, 1]^N."""
        if len(point) != self.dims:
            raise ValueError(f"expected {self.dims} coordinates, got {len(point)}")
        return tuple(sys.transform(x) for sys, x in zip(self.systems, point))

    def project(self, composite_digits: Iterable[int]) -> list[ProjectionResult]:
        """Demultiplex composite digits and project each coordinate.

        Returns one enclosing interval per coordinate; together they bound
        the axis-aligned box determined by the composite prefix.
        """
        streams: list[list[int]] = [[] for _ in range(self.dims)]
        for d in composite_digits:
            vec = self.vector(d)
            for k, dk in enumerate(vec):
                streams[k].append(dk)
        return [sys.project(s) for sys, s in zip(self.systems, streams)]

    def as_sequence(
        self, validation_horizon: int = DEFAULT_VALIDATION_HORIZON
    ) -> "ProductLengthSequence":
        """The composite masses as a probability sequence for the pipeline."""
        return ProductLengthSequence(self, validation_horizon)


class ProductLengthSequence(ProbabilitySequence):
    """Composite digit masses in enumeration order.

    Positive and nonincreasing by construction; tails come from the cached
    partial sums, so the closed-form tail contract holds exactly.
    """

    kind = "product"

    def __init__(
        self,
        product_system: ProductSystem,
        validation_horizon: int = DEFAULT_VALIDATION_HORIZON,
    ):
        self.product_system = product_system
        super().__init__(validation_horizon)

    def length(self, d: int) -> Fraction:
        return self.product_system.product_length(d)

    def tail(self, d: int) -> Fraction:
        return self.product_system.composite_tail(d)

    def config(self) -> dict:
        return {
            "kind": "product",
            "systems": [
                {**s.seq.config(), "signs": list(s.sign_prefix)}
                for s in self.product_system.systems
            ],
        }


def enumerate_bijection(
    systems: Sequence[GlsSystem], m: int
) -> list[tuple[IndexVector, Fraction]]:
    """First m entries of the composite digit enumeration: products
    nonincreasing, ties broken by lexicographically smallest vector."""
    if m < 1:
        raise ValueError(f"entry count must be >= 1, got {m}")
    return ProductSystem(systems, enumeration_cap=max(m, 1)).entries(m)
