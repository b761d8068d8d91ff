"""One-dimensional GLS number systems.

A system partitions (0, 1] into half-open digit intervals laid out right to
left by decreasing mass: interval d is (tail(d+1), tail(d)], so its length
is exactly the digit mass length(d).  Each digit carries a flip flag; the
transformation rescales its interval onto [0, 1], reversing orientation when
the flag is set, and sends everything outside the partition (only x = 0
here) to 0.

Digit extraction iterates the transformation; projection inverts it exactly:
a finite digit prefix determines an interval of width equal to the product
of the digit masses, and only decimal digits stable across that whole
interval are certified.  All arithmetic is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .prob import ProbabilitySequence

LEFT_PARTITION = "left partition"


class SignMismatchError(ValueError):
    """A supplied sign disagrees with the system's flag for that digit."""


@dataclass(frozen=True)
class GlsSystem:
    """Right-to-left interval layout over a probability sequence.

    ``sign_prefix`` lists the flip flags of the first digits; all later
    digits have flag 0.  Immutable; all operations are pure.
    """

    seq: ProbabilitySequence
    sign_prefix: tuple[int, ...] = ()

    def __post_init__(self):
        if not all(s in (0, 1) for s in self.sign_prefix):
            raise ValueError("signs must be 0 or 1")

    def interval(self, d: int) -> tuple[Fraction, Fraction]:
        """The half-open interval (lower, upper] of digit d."""
        return self.seq.tail(d + 1), self.seq.tail(d)

    def sign(self, d: int) -> int:
        if d < 1:
            raise ValueError(f"digit must be >= 1, got {d}")
        return self.sign_prefix[d - 1] if d <= len(self.sign_prefix) else 0

    def digit_of(self, x: Fraction) -> int | None:
        """The digit whose interval contains x; None when x is outside the
        partition (x = 0)."""
        x = Fraction(x)
        if not 0 <= x <= 1:
            raise ValueError(f"point {x} outside [0, 1]")
        if x == 0:
            return None
        if self.seq.kind == "luroth":
            # tails are 1/d, so x in (1/(d+1), 1/d] has d = floor(1/x)
            return x.denominator // x.numerator
        d = 1
        while self.seq.tail(d + 1) >= x:
            d += 1
        return d

    def transform(self, x: Fraction) -> Fraction:
        """One application of the interval map; 0 outside the partition."""
        x = Fraction(x)
        d = self.digit_of(x)
        if d is None:
            return Fraction(0)
        lower, upper = self.interval(d)
        mass = self.seq.length(d)
        if self.sign(d) == 0:
            return (x - lower) / mass
        return (upper - x) / mass

    def extract_digits(self, x: Fraction, k: int) -> "DigitExtraction":
        """Up to k (digit, sign) pairs of the orbit of x.

        Stops early with reason "left partition" when the orbit exits the
        digit intervals (for example by hitting 0 under a flipped branch).
        """
        x = Fraction(x)
        if not 0 <= x <= 1:
            raise ValueError(f"point {x} outside [0, 1]")
        pairs: list[tuple[int, int]] = []
        for _ in range(k):
            d = self.digit_of(x)
            if d is None:
                return DigitExtraction(tuple(pairs), LEFT_PARTITION)
            s = self.sign(d)
            pairs.append((d, s))
            lower, upper = self.interval(d)
            mass = self.seq.length(d)
            x = (x - lower) / mass if s == 0 else (upper - x) / mass
        return DigitExtraction(tuple(pairs), None)

    def project(self, prefix: Iterable[int | tuple[int, int]]) -> "ProjectionResult":
        """Exact interval of the points whose expansion starts with the
        given digits.

        Entries may be bare digits or (digit, sign) pairs; supplied signs
        must match the system's flags.  The empty prefix yields [0, 1].
        Appending one digit d multiplies the width by exactly length(d) and
        nests the interval in the previous one.
        """
        anchor = Fraction(0)
        scale = Fraction(1)  # signed: carries the accumulated orientation
        for item in prefix:
            if isinstance(item, tuple):
                d, s = item
                if s != self.sign(d):
                    raise SignMismatchError(
                        f"digit {d} has sign {self.sign(d)}, got {s}"
                    )
            else:
                d = item
                s = self.sign(d)
            if d < 1:
                raise ValueError(f"digit must be >= 1, got {d}")
            lower, upper = self.interval(d)
            mass = self.seq.length(d)
            # Inverse branch: x = lower + mass*y (flag 0) or upper - mass*y.
            if s == 0:
                anchor += scale * lower
                scale *= mass
            else:
                anchor += scale * upper
                scale *= -mass
        end = anchor + scale
        return ProjectionResult(lower=min(anchor, end), width=abs(scale))


def layout_right_to_left(
    seq: ProbabilitySequence, sign_prefix: Sequence[int] = ()
) -> GlsSystem:
    """The system whose intervals descend from the right edge: the first
    interval ends at 1 and each next one abuts the previous on its left."""
    return GlsSystem(seq=seq, sign_prefix=tuple(sign_prefix))


@dataclass(frozen=True)
class DigitExtraction:
    pairs: tuple[tuple[int, int], ...]
    stop_reason: str | None

    @property
    def digits(self) -> tuple[int, ...]:
        return tuple(d for d, _ in self.pairs)

    @property
    def signs(self) -> tuple[int, ...]:
        return tuple(s for _, s in self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class ProjectionResult:
    """An exact enclosing interval [lower, lower + width] for a projection.

    A finite prefix never determines a point, so decimal output certifies
    only digits on which the whole interval agrees.
    """

    lower: Fraction
    width: Fraction

    @property
    def upper(self) -> Fraction:
        return self.lower + self.width

    def __contains__(self, x) -> bool:
        return self.lower <= Fraction(x) <= self.upper

    def certified_places(self, places: int) -> int:
        """Largest k <= places with the first k decimal digits certain."""
        k = 0
        lo, hi = self.lower, self.upper
        while k < places:
            p = 10 ** (k + 1)
            if (lo * p).__floor__() != (hi * p).__floor__():
                break
            k += 1
        return k

    def decimal(self, places: int = 10) -> tuple[str, int]:
        """Decimal rendering of the certified digits, up to ``places``.

        Returns (text, certified place count); the text shows only
        certified digits.
        """
        k = self.certified_places(places)
        digits = (self.lower * 10**k).__floor__()
        return "0." + str(digits).zfill(k) if k else "0.", k
