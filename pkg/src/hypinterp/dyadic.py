"""Dyadic intervals on translated grids, Carleson boxes and covering counts.

Intervals are stored as (generation, index, offset) with exact binary
endpoints (Fractions), so nesting queries never touch floating point.  The
index may be any integer: indices outside [0, 2^generation) address the
unit trees [offset + k, offset + k + 1) left and right of the root tree,
which the augmentation step of the pipeline needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

from .geometry import beta_halfplane

# Points up to this height locate into a generation-0 interval even though
# its box only reaches height 1; the anchor point 1/2 + 3i/2 relies on it.
ROOT_TOP_HEIGHT = Fraction(3, 2)


class GridMismatchError(ValueError):
    """Intervals from different grid offsets were combined."""


@dataclass(frozen=True, order=True)
class DyadicInterval:
    generation: int
    index: int
    offset: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        if self.generation < 0:
            raise ValueError("generation must be nonnegative")
        if not isinstance(self.offset, Fraction):
            object.__setattr__(self, "offset", Fraction(self.offset))
        if not 0 <= self.offset < 1:
            raise ValueError("grid offset must lie in [0, 1)")

    @property
    def length(self) -> Fraction:
        return Fraction(1, 2**self.generation)

    @property
    def left(self) -> Fraction:
        return self.offset + self.index * self.length

    @property
    def right(self) -> Fraction:
        return self.offset + (self.index + 1) * self.length

    def parent(self) -> Optional["DyadicInterval"]:
        if self.generation == 0:
            return None
        return DyadicInterval(self.generation - 1, self.index >> 1, self.offset)

    def ancestor(self, levels: int) -> "DyadicInterval":
        if levels < 0 or levels > self.generation:
            raise ValueError("ancestor level out of range")
        return DyadicInterval(self.generation - levels, self.index >> levels, self.offset)

    def children(self) -> tuple["DyadicInterval", "DyadicInterval"]:
        return (
            DyadicInterval(self.generation + 1, 2 * self.index, self.offset),
            DyadicInterval(self.generation + 1, 2 * self.index + 1, self.offset),
        )

    def root(self) -> "DyadicInterval":
        """Generation-0 interval of the unit tree this interval belongs to."""
        return DyadicInterval(0, self.index >> self.generation, self.offset)

    def contains_interval(self, other: "DyadicInterval") -> bool:
        if self.offset != other.offset:
            raise GridMismatchError("intervals live on different grids")
        k = other.generation - self.generation
        return k >= 0 and (other.index >> k) == self.index

    def contains_x(self, x: float) -> bool:
        return self.left <= x < self.right

    def __repr__(self) -> str:  # keeps pytest output readable
        return f"[{float(self.left):.6g},{float(self.right):.6g})@{self.generation}"


@dataclass(frozen=True)
class CarlesonBox:
    """Q(I) = {x + iy : x in I, 0 < y <= |I|}."""

    interval: DyadicInterval

    def contains(self, z: complex) -> bool:
        i = self.interval
        return i.contains_x(z.real) and 0.0 < z.imag <= float(i.length)


@dataclass(frozen=True)
class BoxGeometry:
    box: CarlesonBox
    center: complex

    @property
    def interval(self) -> DyadicInterval:
        return self.box.interval

    def in_top(self, z: complex) -> bool:
        i = self.interval
        ell = float(i.length)
        return i.contains_x(z.real) and 0.5 * ell < z.imag <= ell


def box_geometry(interval: DyadicInterval) -> BoxGeometry:
    """Carleson box, top half predicate and the top center (a+b)/2 + i 3(b-a)/4."""
    a, b = interval.left, interval.right
    center = complex((a + b) / 2) + 0.75j * float(b - a)
    return BoxGeometry(box=CarlesonBox(interval), center=center)


def box_center(interval: DyadicInterval) -> complex:
    return box_geometry(interval).center


def locate(z: complex, offset: Fraction | float = Fraction(0)) -> Optional[DyadicInterval]:
    """The unique grid interval whose top half contains z.

    The root generation is treated with a fattened top reaching height 3/2,
    so the anchor point 1/2 + 3i/2 locates into its unit interval.  Points
    above that height locate nowhere.
    """
    offset = Fraction(offset)
    y = z.imag
    if y <= 0.0 or y > float(ROOT_TOP_HEIGHT):
        return None
    if y > 0.5:
        generation = 0
    else:
        # unique n >= 1 with 2^{-n-1} < y <= 2^{-n}
        generation = -int(math.floor(math.log2(y)))
        if y > 2.0 ** (-generation):  # guard against log2 rounding at powers of two
            generation -= 1
        elif y <= 2.0 ** (-generation - 1):
            generation += 1
    index = math.floor((z.real - float(offset)) * 2**generation)
    return DyadicInterval(generation, index, offset)


@dataclass(frozen=True)
class IntervalFamily:
    intervals: frozenset[DyadicInterval]
    offset: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        if not isinstance(self.intervals, frozenset):
            object.__setattr__(self, "intervals", frozenset(self.intervals))
        if not isinstance(self.offset, Fraction):
            object.__setattr__(self, "offset", Fraction(self.offset))
        for i in self.intervals:
            if i.offset != self.offset:
                raise GridMismatchError("family members must share the grid offset")

    @classmethod
    def of(cls, intervals: Iterable[DyadicInterval], offset: Fraction | float = Fraction(0)) -> "IntervalFamily":
        return cls(frozenset(intervals), Fraction(offset))

    def __contains__(self, interval: DyadicInterval) -> bool:
        return interval in self.intervals

    def __len__(self) -> int:
        return len(self.intervals)

    def __iter__(self):
        return iter(sorted(self.intervals))

    def max_generation(self) -> int:
        return max((i.generation for i in self.intervals), default=0)

    def to_json(self) -> list[list[int]]:
        return [[i.generation, i.index] for i in sorted(self.intervals)]


def generation_count(family: IntervalFamily, interval: DyadicInterval, n: int) -> int:
    """#{J in family : J subset of `interval`, |J| = 2^-n |interval|}."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if interval.offset != family.offset:
        raise GridMismatchError("family and interval live on different grids")
    target = interval.generation + n
    return sum(
        1
        for j in family.intervals
        if j.generation == target and (j.index >> n) == interval.index
    )


@dataclass
class Lemma2Report:
    decomposition: list[DyadicInterval]
    bound: float
    count: int
    holds: bool
    hypothesis_ok: bool
    violations: list[DyadicInterval] = field(default_factory=list)


def lemma2_cover(
    family: IntervalFamily,
    interval: DyadicInterval,
    n: int,
    m_const: float,
    alpha: float,
) -> Lemma2Report:
    """Recursive half decomposition behind the geometric-series covering bound.

    At step j the remaining interval is split in two and a half whose count of
    generation-(interval.generation + n) descendants in `family` is at most
    m_const * 2^{(n-j) alpha} is peeled off.  When the halving hypothesis holds
    at every step, the total count over `interval` is at most
    2 m_const / (1 - 2^{-alpha}) * 2^{n alpha}.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if m_const <= 0.0:
        raise ValueError("m_const must be positive")
    decomposition: list[DyadicInterval] = []
    violations: list[DyadicInterval] = []
    remaining: Optional[DyadicInterval] = interval
    for j in range(n):
        if remaining is None:
            break
        threshold = m_const * 2.0 ** ((n - j) * alpha)
        first, second = remaining.children()
        counts = (
            generation_count(family, first, n - j - 1),
            generation_count(family, second, n - j - 1),
        )
        good = [h for h, c in zip((first, second), counts) if c <= threshold]
        if len(good) == 2:
            decomposition.extend((first, second))
            remaining = None
        elif len(good) == 1:
            decomposition.append(good[0])
            remaining = second if good[0] == first else first
        else:
            # hypothesis violated at this split; keep going with the lighter half
            violations.append(remaining)
            lighter = first if counts[0] <= counts[1] else second
            decomposition.append(second if lighter == first else first)
            remaining = lighter
    if remaining is not None:
        decomposition.append(remaining)
    count = generation_count(family, interval, n)
    bound = 2.0 * m_const / (1.0 - 2.0 ** (-alpha)) * 2.0 ** (n * alpha)
    return Lemma2Report(
        decomposition=decomposition,
        bound=bound,
        count=count,
        holds=count <= bound,
        hypothesis_ok=not violations,
        violations=violations,
    )


def halving_hypothesis_holds(
    family: IntervalFamily, interval: DyadicInterval, max_generation: int, m_const: float, alpha: float
) -> bool:
    """Brute-force check of the half-interval count hypothesis below `interval`."""
    stack = [interval]
    while stack:
        current = stack.pop()
        if current.generation >= max_generation:
            continue
        first, second = current.children()
        for n in range(1, max_generation - current.generation + 1):
            threshold = m_const * 2.0 ** (n * alpha)
            ok_first = generation_count(family, first, n - 1) <= threshold
            ok_second = generation_count(family, second, n - 1) <= threshold
            if not (ok_first or ok_second):
                return False
        stack.extend((first, second))
    return True


def nested_center_gap(inner: DyadicInterval, outer: DyadicInterval) -> float:
    """beta_disc-normalized distance of nested box centers minus the generation gap."""
    if not outer.contains_interval(inner):
        raise ValueError("inner interval must be contained in outer")
    k = inner.generation - outer.generation
    gap = 2.0 * beta_halfplane(box_center(inner), box_center(outer))
    return gap - k
