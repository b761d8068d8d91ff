"""Exact rational probability sequences over the digits 1, 2, 3, ...

A probability sequence assigns every digit d >= 1 a positive rational mass
``length(d)``, nonincreasing in d, with total mass exactly 1.  The tail
``tail(d) = 1 - sum_{i<d} length(i)`` is always computed from a closed form,
never by summing d terms, so deep queries stay cheap and every identity can
be checked as an exact equality.

All arithmetic uses :class:`fractions.Fraction`; no floats appear anywhere.
"""

from __future__ import annotations

import json
from fractions import Fraction

DEFAULT_VALIDATION_HORIZON = 64


def parse_rational(value: str | int | Fraction) -> Fraction:
    """Parse a rational given as ``"p/q"``, ``"p"``, an int, or a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational: {value!r}") from exc
    raise ValueError(f"not a rational: {value!r}")


def format_rational(value: Fraction) -> str:
    """Render a Fraction as ``"p/q"`` (just ``"p"`` for integers)."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def _require_digit(d: int) -> None:
    if not isinstance(d, int) or d < 1:
        raise ValueError(f"digit index must be a positive integer, got {d!r}")


class ProbabilitySequence:
    """Base class for exact digit-mass sequences with closed-form tails.

    Subclasses implement :meth:`length` and :meth:`tail`; construction runs a
    validation sweep over the first ``validation_horizon`` digits and fails
    loudly on any violated invariant rather than deferring errors to deep
    queries.  Instances are immutable after construction and safe to share
    across threads.

    Irrational-valued sequences are out of scope for this backend; supporting
    them would need directed-rounding high-precision arithmetic and
    tolerance-based verification downstream.
    """

    kind: str = "abstract"

    def __init__(self, validation_horizon: int = DEFAULT_VALIDATION_HORIZON):
        self.validation_horizon = validation_horizon
        self._validate(validation_horizon)

    def length(self, d: int) -> Fraction:
        """Exact mass of digit d."""
        raise NotImplementedError

    def tail(self, d: int) -> Fraction:
        """Exact remaining mass 1 - sum_{i<d} length(i), from a closed form."""
        raise NotImplementedError

    def branch_probs(self, n: int) -> tuple[Fraction, Fraction]:
        """Conditional split at digit n: (length(n), tail(n+1)) / tail(n).

        The pair sums to 1 exactly; the first entry is the probability of
        seeing digit n given the digit is at least n.
        """
        _require_digit(n)
        t = self.tail(n)
        p = self.length(n) / t
        return p, 1 - p

    def config(self) -> dict:
        """JSON-ready config fragment reconstructing this sequence."""
        raise NotImplementedError

    def _validate(self, horizon: int) -> None:
        one = Fraction(1)
        if self.tail(1) != one:
            raise ValueError(f"{self.kind}: tail(1) must be 1, got {self.tail(1)}")
        for d in range(1, horizon + 1):
            ln = self.length(d)
            if not 0 < ln < 1:
                raise ValueError(f"{self.kind}: length({d}) = {ln} outside (0, 1)")
            if self.length(d + 1) > ln:
                raise ValueError(
                    f"{self.kind}: length({d + 1}) > length({d}) breaks monotonicity"
                )
            t, t_next = self.tail(d), self.tail(d + 1)
            if t_next != t - ln:
                raise ValueError(
                    f"{self.kind}: tail({d + 1}) != tail({d}) - length({d})"
                )
            if t_next <= 0:
                raise ValueError(f"{self.kind}: tail({d + 1}) = {t_next} not positive")

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.config()!r})"


class LurothSequence(ProbabilitySequence):
    """Masses 1/(d(d+1)); the tails telescope to 1/d."""

    kind = "luroth"

    def length(self, d: int) -> Fraction:
        _require_digit(d)
        return Fraction(1, d * (d + 1))

    def tail(self, d: int) -> Fraction:
        _require_digit(d)
        return Fraction(1, d)

    def config(self) -> dict:
        return {"kind": "luroth"}


class GeometricSequence(ProbabilitySequence):
    """Masses (1-r) * r**(d-1) for a ratio r in (0, 1); tails are r**(d-1)."""

    kind = "geometric"

    def __init__(
        self,
        ratio: str | Fraction,
        validation_horizon: int = DEFAULT_VALIDATION_HORIZON,
    ):
        ratio = parse_rational(ratio)
        if not 0 < ratio < 1:
            raise ValueError(f"geometric ratio must lie in (0, 1), got {ratio}")
        self.ratio = ratio
        super().__init__(validation_horizon)

    def length(self, d: int) -> Fraction:
        _require_digit(d)
        return (1 - self.ratio) * self.ratio ** (d - 1)

    def tail(self, d: int) -> Fraction:
        _require_digit(d)
        return self.ratio ** (d - 1)

    def config(self) -> dict:
        return {"kind": "geometric", "ratio": format_rational(self.ratio)}


class HeadGeometricSequence(ProbabilitySequence):
    """An explicit rational head followed by a geometric tail.

    The geometric part is scaled so the total mass is exactly 1, which pins
    its first value to (1 - sum(head)) * (1 - ratio); construction rejects
    heads whose last entry is smaller than that seam value, since no scaling
    could then keep the sequence nonincreasing.
    """

    kind = "head_plus_geometric"

    def __init__(
        self,
        head: list[str | Fraction],
        ratio: str | Fraction,
        validation_horizon: int = DEFAULT_VALIDATION_HORIZON,
    ):
        self.head = tuple(parse_rational(h) for h in head)
        if not self.head:
            raise ValueError("head must contain at least one value")
        ratio = parse_rational(ratio)
        if not 0 < ratio < 1:
            raise ValueError(f"geometric ratio must lie in (0, 1), got {ratio}")
        self.ratio = ratio
        # head_tails[i] = 1 - sum(head[:i]); the last entry is the tail mass
        tails = [Fraction(1)]
        for h in self.head:
            tails.append(tails[-1] - h)
        self._head_tails = tuple(tails)
        self._tail_mass = tails[-1]
        if self._tail_mass <= 0:
            raise ValueError("head mass must stay strictly below 1")
        seam = self._tail_mass * (1 - ratio)
        if seam > self.head[-1]:
            raise ValueError(
                f"seam value {seam} exceeds last head entry {self.head[-1]}; "
                "no geometric continuation stays nonincreasing"
            )
        super().__init__(validation_horizon)

    def length(self, d: int) -> Fraction:
        _require_digit(d)
        h = len(self.head)
        if d <= h:
            return self.head[d - 1]
        return self._tail_mass * (1 - self.ratio) * self.ratio ** (d - h - 1)

    def tail(self, d: int) -> Fraction:
        _require_digit(d)
        h = len(self.head)
        if d <= h + 1:
            return self._head_tails[d - 1]
        return self._tail_mass * self.ratio ** (d - h - 1)

    def config(self) -> dict:
        return {
            "kind": "head_plus_geometric",
            "head": [format_rational(h) for h in self.head],
            "ratio": format_rational(self.ratio),
        }


def from_config(fragment: dict | str) -> ProbabilitySequence:
    """Build a sequence from a config fragment (dict or JSON text).

    Recognized fragments::

        {"kind": "luroth"}
        {"kind": "geometric", "ratio": "1/2"}
        {"kind": "head_plus_geometric", "head": ["1/2", "1/6"], "ratio": "1/2"}

    Rationals are ``"p/q"`` strings.  An optional ``"validation_horizon"``
    key overrides the default sweep depth.
    """
    if isinstance(fragment, str):
        try:
            fragment = json.loads(fragment)
        except json.JSONDecodeError as exc:
            raise ValueError(f"invalid config JSON: {exc}") from exc
    if not isinstance(fragment, dict):
        raise ValueError(f"config fragment must be an object, got {fragment!r}")
    kind = fragment.get("kind")
    horizon = int(fragment.get("validation_horizon", DEFAULT_VALIDATION_HORIZON))
    if kind == "luroth":
        return LurothSequence(validation_horizon=horizon)
    if kind == "geometric":
        if "ratio" not in fragment:
            raise ValueError("geometric config requires a 'ratio' key")
        return GeometricSequence(fragment["ratio"], validation_horizon=horizon)
    if kind == "head_plus_geometric":
        missing = {"head", "ratio"} - fragment.keys()
        if missing:
            raise ValueError(f"head_plus_geometric config missing keys: {missing}")
        return HeadGeometricSequence(
            fragment["head"], fragment["ratio"], validation_horizon=horizon
        )
    raise ValueError(f"unknown sequence kind: {kind!r}")
