"""Self-maps T: X -> X and their Picard orbits.

Two representations: a total table on a finite carrier, or an ordered list of
pieces covering a real-line domain. Pieces are affine (a*x + b) with an
optional quadratic term (c*x**2) used only by the continuity checks; exact
fixed-point solving is restricted to affine pieces.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Mapping, Optional, Sequence, Union

import numpy as np

from errors import DomainError, InputError
from space import Carrier, Interval, Number, Point, Region, format_number, is_real, to_fraction

CONVERGED = "converged"
PERIODIC = "periodic"
DIVERGED = "diverged"
BUDGET_EXHAUSTED = "budget-exhausted"

DEFAULT_BUDGET = 10_000
DEFAULT_DIVERGENCE_BOUND = 1e12
# Below this magnitude squaring underflows, so the next iterate of a shrinking orbit can be a spurious 0.0.
UNDERFLOW_FLOOR = math.sqrt(np.finfo(float).tiny)


@dataclass(frozen=True)
class Piece:
    interval: Interval
    slope: Fraction = Fraction(0)
    intercept: Fraction = Fraction(0)
    quad: Fraction = Fraction(0)

    @property
    def is_affine(self) -> bool:
        return self.quad == 0

    def value(self, x: Number) -> Number:
        if isinstance(x, float):
            return float(self.quad) * x * x + float(self.slope) * x + float(self.intercept)
        exact = to_fraction(x)
        return self.quad * exact * exact + self.slope * exact + self.intercept

    def derivative(self, x: Fraction) -> Fraction:
        return 2 * self.quad * x + self.slope

    def limit_at(self, x: Fraction) -> Fraction:
        """Value of the piece's polynomial at x, i.e. the one-sided limit at an endpoint."""
        return self.quad * x * x + self.slope * x + self.intercept

    def is_nondecreasing_on(self, interval: Interval) -> bool:
        if self.is_affine:
            return self.slope >= 0 or interval.is_point
        # derivative is linear, so checking both ends of the interval suffices
        for end, sign in ((interval.lo, -1), (interval.hi, 1)):
            if end is None:
                if sign * self.quad < 0:
                    return False
            elif self.derivative(end) < 0:
                return False
        return True

    def max_abs_derivative(self, interval: Interval) -> Optional[Fraction]:
        if self.is_affine:
            return abs(self.slope)
        if interval.lo is None or interval.hi is None:
            return None
        return max(abs(self.derivative(interval.lo)), abs(self.derivative(interval.hi)))

    def image(self, interval: Interval) -> Interval:
        if interval.is_point:
            return Interval.point(self.limit_at(interval.lo))
        if self.is_affine:
            if self.slope == 0:
                return Interval.point(self.intercept)
            lo = None if interval.lo is None else self.limit_at(interval.lo)
            hi = None if interval.hi is None else self.limit_at(interval.hi)
            if self.slope > 0:
                return Interval(lo, hi, interval.lo_closed, interval.hi_closed)
            return Interval(hi, lo, interval.hi_closed, interval.lo_closed)
        candidates: list[tuple[Fraction, bool]] = []
        unbounded = False
        for end, closed in ((interval.lo, interval.lo_closed), (interval.hi, interval.hi_closed)):
            if end is None:
                unbounded = True
            else:
                candidates.append((self.limit_at(end), closed))
        vertex = -self.slope / (2 * self.quad)
        if interval.contains(vertex):
            candidates.append((self.limit_at(vertex), True))
        low = min(value for value, _ in candidates)
        high = max(value for value, _ in candidates)
        low_closed = any(closed for value, closed in candidates if value == low)
        high_closed = any(closed for value, closed in candidates if value == high)
        if unbounded and self.quad > 0:
            return Interval(low, None, low_closed, False)
        if unbounded:
            return Interval(None, high, False, high_closed)
        return Interval(low, high, low_closed, high_closed)

    def preimage(self, target: Interval) -> Interval:
        if not self.is_affine:
            raise InputError("Preimages are only computed for affine pieces.")
        if self.slope == 0:
            return self.interval if target.contains(self.intercept) else Interval(Fraction(1), Fraction(0))
        lo = None if target.lo is None else (target.lo - self.intercept) / self.slope
        hi = None if target.hi is None else (target.hi - self.intercept) / self.slope
        if self.slope > 0:
            solved = Interval(lo, hi, target.lo_closed, target.hi_closed)
        else:
            solved = Interval(hi, lo, target.hi_closed, target.lo_closed)
        return self.interval.intersect(solved)

    def order_region(self, sign: int = 1) -> list[Interval]:
        """Parts of the piece where x <= f(x) (sign=1) or f(x) <= x (sign=-1)."""
        if self.is_affine:
            gap = 1 - self.slope
            if gap == 0:
                return [self.interval] if sign * self.intercept >= 0 else []
            bound = self.intercept / gap
            if sign * gap > 0:
                half = Interval(None, bound, False, True)
            else:
                half = Interval(bound, None, True, False)
            part = self.interval.intersect(half)
            return [] if part.is_empty else [part]
        roots = sorted(set(self._fixed_point_roots()))
        found: list[Interval] = []
        cuts: list[Optional[Fraction]] = [None, *roots, None]
        for left, right in zip(cuts, cuts[1:]):
            span = Interval(left, right, left is not None, right is not None)
            if span.is_empty:
                continue
            sample = span.interior_sample()
            if sign * (self.limit_at(sample) - sample) >= 0:
                part = self.interval.intersect(span)
                if not part.is_empty:
                    found.append(part)
        return found

    def fixed_points(self) -> tuple[list[Interval], bool]:
        if self.is_affine:
            if self.slope == 1:
                return ([self.interval] if self.intercept == 0 else []), True
            solution = self.intercept / (1 - self.slope)
            return ([Interval.point(solution)] if self.interval.contains(solution) else []), True
        found: list[Interval] = []
        exact = True
        for root in self._fixed_point_roots():
            if self.limit_at(root) != root:
                exact = False
            if self.interval.contains(root):
                found.append(Interval.point(root))
        return found, exact

    def _fixed_point_roots(self) -> list[Fraction]:
        coefficients = [float(self.quad), float(self.slope - 1), float(self.intercept)]
        roots: list[Fraction] = []
        for root in np.roots(coefficients):
            if abs(root.imag) > 1e-12:
                continue
            guess = Fraction(float(root.real)).limit_denominator(10**6)
            if self.limit_at(guess) != guess:
                guess = Fraction(float(root.real))
            roots.append(guess)
        return roots

    def describe(self) -> str:
        terms: list[str] = []
        if self.quad:
            terms.append(f"{format_number(self.quad)}*x^2")
        if self.slope:
            terms.append("x" if self.slope == 1 else f"{format_number(self.slope)}*x")
        if self.intercept or not terms:
            terms.append(format_number(self.intercept))
        return f"{self.interval.describe()}: " + " + ".join(terms).replace("+ -", "- ")


@dataclass(frozen=True)
class SelfMap:
    kind: str
    carrier: Carrier = field(repr=False)
    images: tuple[str, ...] = ()
    pieces: tuple[Piece, ...] = ()

    @classmethod
    def from_table(cls, carrier: Carrier, mapping: Mapping[str, str]) -> "SelfMap":
        if not carrier.is_finite:
            raise InputError("Table maps need a finite carrier.")
        missing = [label for label in carrier.labels if label not in mapping]
        if missing:
            raise InputError(f"Map table is not total; no image for {missing}.")
        extra = [label for label in mapping if not carrier.contains(label)]
        if extra:
            raise InputError(f"Map table mentions unknown labels {extra}.")
        images = tuple(mapping[label] for label in carrier.labels)
        outside = [image for image in images if not carrier.contains(image)]
        if outside:
            raise InputError(f"Map table images outside the carrier: {outside}.")
        return cls(kind="table", carrier=carrier, images=images)

    @classmethod
    def from_images(cls, carrier: Carrier, images: Sequence[str]) -> "SelfMap":
        return cls.from_table(carrier, dict(zip(carrier.labels, images)))

    @classmethod
    def constant(cls, carrier: Carrier, value: Point) -> "SelfMap":
        carrier.require(value)
        if carrier.is_finite:
            return cls.from_table(carrier, {label: value for label in carrier.labels})
        return cls.piecewise(carrier, [Piece(carrier.domain, Fraction(0), to_fraction(value))])

    @classmethod
    def piecewise(cls, carrier: Carrier, pieces: Sequence[Piece]) -> "SelfMap":
        if carrier.is_finite:
            raise InputError("Piecewise maps need a real-line carrier.")
        problems = piece_cover_problems(carrier.domain, pieces)
        if problems:
            raise InputError("; ".join(problems))
        ordered = tuple(sorted(pieces, key=_piece_order))
        return cls(kind="piecewise", carrier=carrier, images=(), pieces=ordered)

    @property
    def is_affine(self) -> bool:
        return self.kind == "table" or all(piece.is_affine for piece in self.pieces)

    def piece_for(self, x: Number) -> Piece:
        for piece in self.pieces:
            if piece.interval.contains(x):
                return piece
        raise DomainError(f"Point {x!r} lies outside every map piece.")

    def __call__(self, x: Point) -> Point:
        if self.kind == "table":
            return self.images[self.carrier.index(x)]
        if not is_real(x):
            raise InputError(f"Point {x!r} is not a real number.")
        return self.piece_for(x).value(x)

    def power(self, n: int, x: Point) -> Point:
        value = x
        for _ in range(n):
            value = self(value)
        return value

    def boundaries(self) -> list[Fraction]:
        points: set[Fraction] = set()
        for piece in self.pieces:
            for end in (piece.interval.lo, piece.interval.hi):
                if end is not None:
                    points.add(end)
        return sorted(points)

    def describe(self) -> str:
        if self.kind == "table":
            return ", ".join(f"{x}->{y}" for x, y in zip(self.carrier.labels, self.images))
        return "; ".join(piece.describe() for piece in self.pieces)


def _piece_order(piece: Piece) -> tuple[int, Fraction, int]:
    lo = piece.interval.lo
    if lo is None:
        return (0, Fraction(0), 0)
    return (1, lo, 0 if piece.interval.lo_closed else 1)


def piece_cover_problems(domain: Interval, pieces: Sequence[Piece]) -> list[str]:
    problems: list[str] = []
    if not pieces:
        return ["map has no pieces"]
    ordered = sorted(pieces, key=_piece_order)
    for piece in ordered:
        if piece.interval.is_empty:
            problems.append(f"piece {piece.interval.describe()} is empty")
    clipped = [piece.interval.intersect(domain) for piece in ordered]
    live = [interval for interval in clipped if not interval.is_empty]
    if not live:
        return problems + ["no piece meets the domain"]
    first, last = live[0], live[-1]
    if first.lo != domain.lo or (domain.lo is not None and domain.lo_closed and not first.lo_closed):
        problems.append(f"pieces do not cover the left end of {domain.describe()}")
    if last.hi != domain.hi or (domain.hi is not None and domain.hi_closed and not last.hi_closed):
        problems.append(f"pieces do not cover the right end of {domain.describe()}")
    for left, right in zip(live, live[1:]):
        if left.hi is None or right.lo is None or left.hi != right.lo:
            if left.hi is not None and right.lo is not None and left.hi > right.lo:
                problems.append(f"pieces {left.describe()} and {right.describe()} overlap")
            else:
                problems.append(f"gap between pieces {left.describe()} and {right.describe()}")
            continue
        if left.hi_closed and right.lo_closed:
            problems.append(f"pieces {left.describe()} and {right.describe()} overlap at {format_number(left.hi)}")
        elif not left.hi_closed and not right.lo_closed:
            problems.append(f"point {format_number(left.hi)} is not covered by any piece")
    return problems


@dataclass(frozen=True)
class Orbit:
    start: Point
    values: tuple[Point, ...]
    status: str
    cycle_length: Optional[int] = None

    @property
    def steps(self) -> int:
        return len(self.values) - 1

    @property
    def last(self) -> Point:
        return self.values[-1]

    @property
    def cycle_start(self) -> Optional[int]:
        if self.cycle_length is None:
            return None
        return len(self.values) - 1 - self.cycle_length

    def describe_status(self) -> str:
        if self.status == PERIODIC:
            return f"periodic({self.cycle_length})"
        return self.status


StopRule = Callable[[Sequence[Point]], bool]


def orbit(
    mapping: SelfMap,
    x: Point,
    budget: int = DEFAULT_BUDGET,
    stop_rule: Optional[StopRule] = None,
    divergence_bound: float = DEFAULT_DIVERGENCE_BOUND,
) -> Orbit:
    """Record x, Tx, T^2x, ... until a repeat, the stop rule, divergence or the budget.

    On the real line a value repeated at once, or a shrinking value that
    reaches the underflow floor, ends the orbit as converged.
    """
    if budget < 1:
        raise InputError(f"Orbit budget must be at least 1, got {budget}.")
    mapping.carrier.require(x)
    numeric = not mapping.carrier.is_finite
    current: Point = float(x) if numeric else x
    values: list[Point] = [current]
    seen: dict[Point, int] = {current: 0}
    status = BUDGET_EXHAUSTED
    cycle: Optional[int] = None
    for step in range(1, budget + 1):
        previous, current = current, mapping(current)
        values.append(current)
        if numeric and (not math.isfinite(current) or abs(current) > divergence_bound):
            status = DIVERGED
            break
        if numeric and (current == previous or 0 < abs(current) < min(abs(previous), UNDERFLOW_FLOOR)):
            status = CONVERGED
            break
        if current in seen:
            status = PERIODIC
            cycle = step - seen[current]
            break
        seen[current] = step
        if stop_rule is not None and stop_rule(values):
            status = CONVERGED
            break
    logging.debug("orbit_stopped start=%r status=%s steps=%d", x, status, len(values) - 1)
    return Orbit(start=x, values=tuple(values), status=status, cycle_length=cycle)


def evaluate(mapping: SelfMap, x: Point) -> Point:
    return mapping(x)


def fixed_points(mapping: SelfMap) -> tuple[Union[frozenset, Region], bool]:
    if mapping.kind == "table":
        return frozenset(x for x in mapping.carrier.labels if mapping(x) == x), True
    region = Region()
    exact = True
    for piece in mapping.pieces:
        found, piece_exact = piece.fixed_points()
        exact = exact and piece_exact
        for interval in found:
            region = region.union(Region.of_interval(interval.intersect(mapping.carrier.domain)))
    if not exact:
        region = replace(region, heuristic=True)
    return region, exact
