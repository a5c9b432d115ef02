"""Carriers, pseudometric families and the algebra of basic entourages.

A uniformity is represented only through the family of pseudometrics that
generates it. Basic entourages are finite intersections of the strict balls
V(rho, r) = {(x, y): rho(x, y) < r}; membership is decided with exact
comparisons (floats are compared against exact rationals, no epsilon).
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from errors import ConfigError, InputError

Number = Union[Fraction, float, int]
Point = Union[str, Fraction, float, int]

FINITE = "finite"
REAL_LINE = "real-line"


def is_real(value: object) -> bool:
    return isinstance(value, (int, float, Fraction)) and not isinstance(value, bool)


def to_fraction(value: Number) -> Fraction:
    return value if isinstance(value, Fraction) else Fraction(value)


def format_number(value: Optional[Number]) -> str:
    if value is None:
        return "inf"
    if isinstance(value, Fraction):
        return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
    if isinstance(value, float) and value.is_integer():
        return str(int(value))
    return repr(value) if isinstance(value, float) else str(value)


@dataclass(frozen=True)
class Interval:
    """Interval of the real line; `None` bounds stand for -inf / +inf."""

    lo: Optional[Fraction] = None
    hi: Optional[Fraction] = None
    lo_closed: bool = False
    hi_closed: bool = False

    @classmethod
    def point(cls, value: Number) -> "Interval":
        exact = to_fraction(value)
        return cls(exact, exact, True, True)

    @classmethod
    def everything(cls) -> "Interval":
        return cls(None, None, False, False)

    @property
    def is_empty(self) -> bool:
        if self.lo is None or self.hi is None:
            return False
        if self.lo > self.hi:
            return True
        return self.lo == self.hi and not (self.lo_closed and self.hi_closed)

    @property
    def is_point(self) -> bool:
        return self.lo is not None and self.lo == self.hi and self.lo_closed and self.hi_closed

    def contains(self, x: Number) -> bool:
        if self.lo is not None:
            if x < self.lo or (x == self.lo and not self.lo_closed):
                return False
        if self.hi is not None:
            if x > self.hi or (x == self.hi and not self.hi_closed):
                return False
        return True

    def intersect(self, other: "Interval") -> "Interval":
        lo, lo_closed = self.lo, self.lo_closed
        if other.lo is not None and (lo is None or other.lo > lo or (other.lo == lo and not other.lo_closed)):
            lo, lo_closed = other.lo, other.lo_closed
        hi, hi_closed = self.hi, self.hi_closed
        if other.hi is not None and (hi is None or other.hi < hi or (other.hi == hi and not other.hi_closed)):
            hi, hi_closed = other.hi, other.hi_closed
        return Interval(lo, hi, lo_closed, hi_closed)

    def is_subset_of(self, other: "Interval") -> bool:
        if self.is_empty:
            return True
        return self.intersect(other) == self

    def describe(self) -> str:
        if self.is_empty:
            return "{}"
        if self.is_point:
            return "{" + format_number(self.lo) + "}"
        left = "[" if self.lo_closed and self.lo is not None else "("
        right = "]" if self.hi_closed and self.hi is not None else ")"
        lo = "-inf" if self.lo is None else format_number(self.lo)
        hi = "inf" if self.hi is None else format_number(self.hi)
        return f"{left}{lo}, {hi}{right}"

    def interior_sample(self) -> Fraction:
        if self.is_point:
            return self.lo
        if self.lo is None and self.hi is None:
            return Fraction(0)
        if self.lo is None:
            return self.hi - 1
        if self.hi is None:
            return self.lo + 1
        return (self.lo + self.hi) / 2


@dataclass(frozen=True)
class Carrier:
    kind: str
    labels: tuple[str, ...] = ()
    coords: tuple[Optional[Fraction], ...] = ()
    domain: Optional[Interval] = None
    grid: tuple[Number, ...] = ()
    _index: dict[str, int] = field(default_factory=dict, compare=False, repr=False)

    @classmethod
    def finite(cls, labels: Sequence[str], coords: Optional[Sequence[Optional[Number]]] = None) -> "Carrier":
        labels = tuple(labels)
        if not labels:
            raise InputError("A finite carrier needs at least one point.")
        if len(set(labels)) != len(labels):
            raise InputError("Finite carrier labels must be unique.")
        coord_values: tuple[Optional[Fraction], ...] = ()
        if coords is not None:
            if len(coords) != len(labels):
                raise InputError("Coordinate list length must match the label list.")
            coord_values = tuple(None if c is None else to_fraction(c) for c in coords)
        index = {label: position for position, label in enumerate(labels)}
        return cls(kind=FINITE, labels=labels, coords=coord_values, _index=index)

    @classmethod
    def real_line(cls, domain: Optional[Interval] = None, grid: Iterable[Number] = ()) -> "Carrier":
        domain = domain or Interval.everything()
        if domain.is_empty:
            raise InputError("The real-line domain must be nonempty.")
        grid = tuple(grid)
        for left, right in zip(grid, grid[1:]):
            if not left < right:
                raise InputError("The sample grid must be strictly increasing.")
        outside = [g for g in grid if not domain.contains(g)]
        if outside:
            raise InputError(f"Sample grid points outside the domain: {outside}")
        return cls(kind=REAL_LINE, domain=domain, grid=grid)

    @property
    def is_finite(self) -> bool:
        return self.kind == FINITE

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def points(self) -> tuple[Point, ...]:
        return self.labels if self.is_finite else self.grid

    def index(self, label: Point) -> int:
        self.require(label)
        return self._index[label]

    def coordinate(self, label: str) -> Optional[Fraction]:
        if not self.coords:
            return None
        return self.coords[self.index(label)]

    def contains(self, x: Point) -> bool:
        if self.is_finite:
            return isinstance(x, str) and x in self._index
        if not is_real(x):
            return False
        if isinstance(x, float) and not np.isfinite(x):
            return False
        return self.domain.contains(x)

    def require(self, x: Point) -> Point:
        if not self.contains(x):
            if self.is_finite:
                raise InputError(f"Unknown label {x!r}.")
            raise InputError(f"Point {x!r} lies outside the domain {self.domain.describe()}.")
        return x

    def describe(self) -> str:
        if self.is_finite:
            return "{" + ", ".join(self.labels) + "}"
        return self.domain.describe()


def pseudometric_violations(name: str, labels: Sequence[str], matrix: np.ndarray) -> list[str]:
    """Every axiom violation of a distance table, not just the first."""
    problems: list[str] = []
    size = len(labels)
    if matrix.shape != (size, size):
        return [f"pseudometric {name}: table is {matrix.shape[0]}x{matrix.shape[1]}, expected {size}x{size}"]
    if not np.all(np.isfinite(matrix)):
        problems.append(f"pseudometric {name}: table has non-finite entries")
        return problems
    for i in range(size):
        if matrix[i, i] != 0:
            problems.append(f"pseudometric {name}: nonzero diagonal at {labels[i]}")
    for i, j in zip(*np.nonzero(matrix < 0)):
        problems.append(f"pseudometric {name}: negative distance at ({labels[i]}, {labels[j]})")
    for i, j in zip(*np.nonzero(matrix != matrix.T)):
        if i < j:
            problems.append(f"pseudometric {name}: asymmetric at ({labels[i]}, {labels[j]})")
    # detour[i, j, k] = d(i, j) + d(j, k) must dominate d(i, k)
    detour = matrix[:, :, None] + matrix[None, :, :]
    broken = detour < matrix[:, None, :]
    for i, j, k in zip(*np.nonzero(broken)):
        if i < k:
            problems.append(
                f"pseudometric {name}: triangle inequality fails for "
                f"({labels[i]}, {labels[j]}, {labels[k]}): "
                f"{matrix[i, k]} > {matrix[i, j]} + {matrix[j, k]}"
            )
    return problems


@dataclass(frozen=True)
class Pseudometric:
    id: str
    kind: str
    carrier: Carrier = field(repr=False)
    table: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    scale: Fraction = Fraction(1)

    @classmethod
    def from_table(
        cls,
        name: str,
        carrier: Carrier,
        rows: Sequence[Sequence[Number]],
        validate: bool = True,
    ) -> "Pseudometric":
        if not carrier.is_finite:
            raise InputError("Table pseudometrics need a finite carrier.")
        matrix = np.array([[float(value) for value in row] for row in rows], dtype=float)
        if validate:
            problems = pseudometric_violations(name, carrier.labels, matrix)
            if problems:
                raise ConfigError(problems)
        matrix.setflags(write=False)
        return cls(id=name, kind="table", carrier=carrier, table=matrix)

    @classmethod
    def absolute_difference(cls, name: str, carrier: Carrier, scale: Number = 1) -> "Pseudometric":
        if carrier.is_finite:
            raise InputError("Expression pseudometrics need a real-line carrier.")
        factor = to_fraction(scale)
        if factor <= 0:
            raise InputError(f"pseudometric {name}: scale must be positive, got {scale}.")
        return cls(id=name, kind="expression", carrier=carrier, scale=factor)

    def __call__(self, x: Point, y: Point) -> Number:
        if self.kind == "table":
            return float(self.table[self.carrier.index(x), self.carrier.index(y)])
        self.carrier.require(x)
        self.carrier.require(y)
        return self.scale * abs(x - y)

    def matrix(self) -> np.ndarray:
        if self.kind != "table":
            raise InputError("Only table pseudometrics have a matrix.")
        return self.table


@dataclass(frozen=True)
class PseudometricFamily:
    members: tuple[Pseudometric, ...]
    separating: bool = False

    @classmethod
    def of(cls, members: Sequence[Pseudometric]) -> "PseudometricFamily":
        members = tuple(members)
        if not members:
            raise InputError("A pseudometric family needs at least one member.")
        ids = [member.id for member in members]
        if len(set(ids)) != len(ids):
            raise InputError(f"Duplicate pseudometric ids: {ids}")
        carrier = members[0].carrier
        if any(member.carrier != carrier for member in members):
            raise InputError("All pseudometrics of a family must share one carrier.")
        return cls(members=members, separating=_is_separating(carrier, members))

    @property
    def carrier(self) -> Carrier:
        return self.members[0].carrier

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(member.id for member in self.members)

    def get(self, name: str) -> Pseudometric:
        for member in self.members:
            if member.id == name:
                return member
        raise InputError(f"Unknown pseudometric id {name!r}.")

    def indistinguishable(self, x: Point, y: Point) -> bool:
        return all(member(x, y) == 0 for member in self.members)

    def unit_basis(self) -> tuple["BasicEntourage", ...]:
        return tuple(BasicEntourage.ball(self, member.id, 1) for member in self.members)


def _is_separating(carrier: Carrier, members: Sequence[Pseudometric]) -> bool:
    if not carrier.is_finite:
        return any(member.kind == "expression" for member in members)
    combined = np.zeros((carrier.size, carrier.size), dtype=bool)
    for member in members:
        combined |= member.matrix() > 0
    np.fill_diagonal(combined, True)
    return bool(combined.all())


@dataclass(frozen=True)
class BasicEntourage:
    family: PseudometricFamily = field(repr=False, compare=False)
    terms: tuple[tuple[str, Fraction], ...]

    def __post_init__(self) -> None:
        if not self.terms:
            raise InputError("A basic entourage needs at least one term.")
        for name, radius in self.terms:
            self.family.get(name)
            if not radius > 0:
                raise InputError(f"Entourage radius for {name} must be positive, got {radius}.")

    @classmethod
    def ball(cls, family: PseudometricFamily, name: str, radius: Number) -> "BasicEntourage":
        return cls(family, ((name, to_fraction(radius)),))

    @classmethod
    def of(cls, family: PseudometricFamily, terms: Iterable[tuple[str, Number]]) -> "BasicEntourage":
        return cls(family, tuple((name, to_fraction(radius)) for name, radius in terms))

    def contains(self, x: Point, y: Point) -> bool:
        return all(self.family.get(name)(x, y) < radius for name, radius in self.terms)

    def scale(self, alpha: Number) -> "BasicEntourage":
        if not is_real(alpha) or not alpha > 0:
            raise InputError(f"Entourage scaling factor must be positive, got {alpha!r}.")
        factor = to_fraction(alpha)
        return BasicEntourage(self.family, tuple((name, radius * factor) for name, radius in self.terms))

    def lambda_infimum(self, x: Point, y: Point) -> Fraction:
        """Least lambda* with (x, y) in lambda*V for every lambda > lambda* (never attained unless 0)."""
        return max(to_fraction(self.family.get(name)(x, y)) / radius for name, radius in self.terms)

    def gauge(self) -> "MinkowskiGauge":
        return MinkowskiGauge(self)

    def diameter(self, points: Sequence[Point]) -> Fraction:
        if len(points) < 2:
            return Fraction(0)
        carrier = self.family.carrier
        worst = Fraction(0)
        for name, radius in self.terms:
            member = self.family.get(name)
            if member.kind == "expression":
                spread = to_fraction(max(points)) - to_fraction(min(points))
                value = member.scale * spread / radius
            else:
                idx = np.array([carrier.index(p) for p in points])
                value = to_fraction(float(member.matrix()[np.ix_(idx, idx)].max())) / radius
            worst = max(worst, value)
        return worst

    def describe(self) -> str:
        return " & ".join(f"V({name}, {format_number(radius)})" for name, radius in self.terms)


@dataclass(frozen=True)
class MinkowskiGauge:
    source: BasicEntourage

    def __call__(self, x: Point, y: Point) -> Fraction:
        return self.source.lambda_infimum(x, y)

    def matrix(self) -> np.ndarray:
        carrier = self.source.family.carrier
        if not carrier.is_finite:
            raise InputError("Gauge matrices exist only on finite carriers.")
        values = np.zeros((carrier.size, carrier.size), dtype=float)
        for name, radius in self.source.terms:
            values = np.maximum(values, self.source.family.get(name).matrix() / float(radius))
        return values


def contains(entourage: BasicEntourage, x: Point, y: Point) -> bool:
    return entourage.contains(x, y)


def scale(entourage: BasicEntourage, alpha: Number) -> BasicEntourage:
    return entourage.scale(alpha)


def lambda_infimum(entourage: BasicEntourage, x: Point, y: Point) -> Fraction:
    return entourage.lambda_infimum(x, y)


def minkowski_gauge(entourage: BasicEntourage) -> MinkowskiGauge:
    return entourage.gauge()


def compose_bound_check(
    entourage: BasicEntourage,
    alpha: Number,
    beta: Number,
    sample: Iterable[tuple[Point, Point, Point]],
) -> bool:
    """alphaV o betaV must sit inside (alpha+beta)V on every sampled triple."""
    first = entourage.scale(alpha)
    second = entourage.scale(beta)
    combined = entourage.scale(to_fraction(alpha) + to_fraction(beta))
    for x, y, z in sample:
        if first.contains(x, y) and second.contains(y, z) and not combined.contains(x, z):
            logging.warning(
                "entourage_composition_failed alpha=%s beta=%s triple=%r", alpha, beta, (x, y, z)
            )
            return False
    return True


def all_triples(carrier: Carrier) -> Iterable[tuple[Point, Point, Point]]:
    return itertools.product(carrier.labels, repeat=3)


@dataclass(frozen=True)
class RegionPart:
    interval: Interval
    excluded: tuple[Fraction, ...] = ()

    @property
    def is_empty(self) -> bool:
        if self.interval.is_empty:
            return True
        return self.interval.is_point and self.interval.lo in self.excluded

    def contains(self, x: Number) -> bool:
        return self.interval.contains(x) and x not in self.excluded

    def describe(self) -> str:
        text = self.interval.describe()
        if self.excluded:
            text += "∖{" + ", ".join(format_number(e) for e in self.excluded) + "}"
        return text

    def sample(self) -> Fraction:
        centre = self.interval.interior_sample()
        candidate, offset = centre, Fraction(1, 2)
        while not self.contains(candidate):
            candidate = centre + offset
            offset = -offset if offset > 0 else -offset / 2
        return candidate


@dataclass(frozen=True)
class Region:
    """Finite union of punctured intervals plus isolated points of the real line."""

    parts: tuple[RegionPart, ...] = ()
    points: tuple[Fraction, ...] = ()
    heuristic: bool = False

    @classmethod
    def of_interval(cls, interval: Interval, excluded: Iterable[Number] = ()) -> "Region":
        return cls(parts=(RegionPart(interval, tuple(to_fraction(e) for e in excluded)),)).normalized()

    @classmethod
    def of_points(cls, points: Iterable[Number]) -> "Region":
        return cls(points=tuple(to_fraction(p) for p in points)).normalized()

    @property
    def is_empty(self) -> bool:
        return not self.parts and not self.points

    def contains(self, x: Number) -> bool:
        return x in self.points or any(part.contains(x) for part in self.parts)

    def union(self, other: "Region") -> "Region":
        return Region(
            parts=self.parts + other.parts,
            points=self.points + other.points,
            heuristic=self.heuristic or other.heuristic,
        ).normalized()

    def normalized(self) -> "Region":
        parts: list[RegionPart] = []
        points: set[Fraction] = set(self.points)
        for part in self.parts:
            if part.is_empty:
                continue
            if part.interval.is_point:
                points.add(part.interval.lo)
                continue
            excluded = tuple(sorted(e for e in set(part.excluded) if part.interval.contains(e)))
            parts.append(RegionPart(part.interval, excluded))
        # an isolated point may fill a hole punched in a part
        healed: list[RegionPart] = []
        for part in parts:
            filled = [e for e in part.excluded if e in points]
            if filled:
                part = RegionPart(part.interval, tuple(e for e in part.excluded if e not in filled))
            healed.append(part)
        stray = sorted(p for p in points if not any(part.contains(p) for part in healed))
        healed.sort(key=lambda part: _interval_key(part.interval))
        return Region(parts=tuple(dict.fromkeys(healed)), points=tuple(stray), heuristic=self.heuristic)

    def members(self) -> tuple[Fraction, ...]:
        if self.parts:
            raise InputError("Region is not a finite set of points.")
        return self.points

    def samples(self) -> list[Fraction]:
        return [part.sample() for part in self.parts] + list(self.points)

    def describe(self) -> str:
        if self.is_empty:
            return "{}"
        if not self.parts:
            return "{" + ", ".join(format_number(p) for p in self.points) + "}"
        items: list[tuple[tuple, str]] = [(_interval_key(part.interval), part.describe()) for part in self.parts]
        items += [(_interval_key(Interval.point(p)), "{" + format_number(p) + "}") for p in self.points]
        items.sort(key=lambda item: item[0])
        return " ∪ ".join(text for _, text in items)


def _interval_key(interval: Interval) -> tuple[int, Fraction, int]:
    if interval.lo is None:
        return (0, Fraction(0), 0)
    return (1, interval.lo, 0 if interval.lo_closed else 1)


@dataclass(frozen=True)
class UniformSpace:
    family: PseudometricFamily
    sequentially_complete: bool = True
    property_star_declared: Optional[bool] = None

    @property
    def carrier(self) -> Carrier:
        return self.family.carrier

    @property
    def complete(self) -> bool:
        # finite uniform spaces are always sequentially complete
        return self.carrier.is_finite or self.sequentially_complete
