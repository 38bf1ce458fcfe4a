"""Plaintext chi-squared scoring of a binary feature against binary labels.

Everything is exact: the statistic is a ``Fraction`` and the confidence
thresholds are compared as rationals. This module is the oracle the protocol
is checked against.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from securechi2.errors import DataError, DegenerateTable, LengthMismatch, NegativeStatistic

BinaryVector = tuple[int, ...]


def binary_vector(values: Iterable[int]) -> BinaryVector:
    """Validate and freeze a nonempty 0/1 sequence."""
    vec = tuple(int(v) for v in values)
    if not vec:
        raise DataError("binary vector must be nonempty")
    if any(v not in (0, 1) for v in vec):
        raise DataError("binary vector entries must be 0 or 1")
    return vec


@dataclass(frozen=True)
class ContingencyTable:
    """Counts of (feature, class) pairs: a=(0,0), b=(0,1), c=(1,0), d=(1,1)."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if min(self.a, self.b, self.c, self.d) < 0:
            raise ValueError("counts must be non-negative")

    @property
    def n(self) -> int:
        return self.a + self.b + self.c + self.d

    def marginals(self) -> dict[str, int]:
        return {
            "A+C": self.a + self.c,
            "B+D": self.b + self.d,
            "A+B": self.a + self.b,
            "C+D": self.c + self.d,
        }

    def transpose(self) -> "ContingencyTable":
        """Table with feature and class roles swapped."""
        return ContingencyTable(self.a, self.c, self.b, self.d)


def build_table(f: Sequence[int], c: Sequence[int]) -> ContingencyTable:
    if len(f) != len(c):
        raise LengthMismatch(f"feature has {len(f)} entries, class has {len(c)}")
    counts = [0, 0, 0, 0]
    for fi, ci in zip(binary_vector(f), binary_vector(c)):
        counts[2 * fi + ci] += 1
    return ContingencyTable(*counts)


def _check_marginals(t: ContingencyTable) -> dict[str, int]:
    m = t.marginals()
    for name, value in m.items():
        if value == 0:
            raise DegenerateTable(name)
    return m


def chi2_exact(t: ContingencyTable) -> Fraction:
    """n(AD - BC)^2 / ((A+C)(A+B)(C+D)(B+D))."""
    m = _check_marginals(t)
    num = t.n * (t.a * t.d - t.b * t.c) ** 2
    return Fraction(num, m["A+C"] * m["A+B"] * m["C+D"] * m["B+D"])


def chi2_decomposed(t: ContingencyTable) -> Fraction:
    """The statistic as the three-term sum the protocol evaluates homomorphically.

    Uses AD - BC = nD - (B+D)(C+D), so only D, n and the two pairs of
    marginals appear.
    """
    m = _check_marginals(t)
    n, d = t.n, t.d
    ac, bd, ab, cd = m["A+C"], m["B+D"], m["A+B"], m["C+D"]
    return (
        Fraction(n**3, ab * cd) * Fraction(d * d, bd * ac)
        + Fraction(n * cd, ab) * Fraction(bd, ac)
        - Fraction(2 * n * n, ab) * Fraction(d, ac)
    )


class ConfidenceLevel(enum.Enum):
    BELOW_90 = ("below 90%", None)
    P90 = (">=90%", Fraction(271, 100))
    P95 = (">=95%", Fraction(384, 100))
    P99 = (">=99%", Fraction(663, 100))
    P99_5 = (">=99.5%", Fraction(788, 100))
    P99_9 = (">=99.9%", Fraction(1083, 100))

    def __init__(self, label, threshold):
        self.label = label
        self.threshold = threshold

    @property
    def rank(self) -> int:
        return list(ConfidenceLevel).index(self)

    def __lt__(self, other):
        if not isinstance(other, ConfidenceLevel):
            return NotImplemented
        return self.rank < other.rank

    def __le__(self, other):
        if not isinstance(other, ConfidenceLevel):
            return NotImplemented
        return self.rank <= other.rank

    def __str__(self):
        return self.label


def confidence(chi2: Fraction | int) -> ConfidenceLevel:
    """Confidence of rejecting independence; a value exactly on a threshold earns it."""
    chi2 = Fraction(chi2)
    if chi2 < 0:
        raise NegativeStatistic(f"chi-squared cannot be negative: {chi2}")
    for level in reversed(ConfidenceLevel):
        if level.threshold is not None and chi2 >= level.threshold:
            return level
    return ConfidenceLevel.BELOW_90


def format_decimal(q: Fraction, places: int = 6) -> str:
    """Display form, rounded half-even."""
    scaled = round(Fraction(q) * 10**places)  # Fraction.__round__ is half-even
    sign = "-" if scaled < 0 else ""
    whole, frac = divmod(abs(scaled), 10**places)
    return f"{sign}{whole}.{frac:0{places}d}" if places else f"{sign}{whole}"
