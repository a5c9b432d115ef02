"""Contraction certificates, continuity taxonomy, Cauchy machinery and Picard classification.

Everything on finite carriers is decided exactly. On real-line carriers the
per-piece algebra is exact; anything that needs orbit probes is reported with
`heuristic=True`.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Optional, Sequence

import numpy as np

from errors import InputError, InternalConsistencyError, PreconditionError
from graph import (
    COMPLETE,
    DIAGONAL,
    INTERVAL_ORDER,
    ORDER_COMPARABLE,
    ORDER_LEQ,
    UNDIRECTED,
    Component,
    DirectedGraph,
    Path,
    PointSet,
    component,
    components_meeting,
    describe_set,
    is_weakly_connected,
    point_set_contains,
    point_set_equals_carrier,
    point_set_size,
    reverse,
    undirected_closure,
    x_t_set,
)
from maps import CONVERGED, PERIODIC, Orbit, Piece, SelfMap, StopRule, fixed_points, orbit
from space import (
    BasicEntourage,
    Interval,
    Number,
    Point,
    PseudometricFamily,
    RegionPart,
    UniformSpace,
    format_number,
    to_fraction,
)

HOLDS = "holds"
VIOLATED = "violated"
NOT_DETERMINED = "not-determined"

PLAIN = "plain"
G_CONTINUITY = "G-continuity"

ROUTE_STAR = "completeness+property-star"
ROUTE_ORBITAL = "completeness+orbital-continuity"
ROUTE_ORBITAL_G = "completeness+orbital-G-continuity"
ROUTE_NONE = "none"

SUBSEQUENCE_PATTERNS = (
    ("n", lambda k: k),
    ("2n", lambda k: 2 * k),
    ("n^2", lambda k: k * k),
)
LIMIT_RUN = 4


@dataclass(frozen=True)
class ProbeSettings:
    budget: int = 10_000
    window: int = 16
    eps: Fraction = Fraction(1, 10**6)
    divergence_bound: float = 1e12
    slack: Fraction = Fraction(1, 10**6)
    tiny: Fraction = Fraction(1, 10**12)


@dataclass(frozen=True)
class Verdict:
    state: str
    basis: str = ""
    heuristic: bool = False
    witness: Optional[dict[str, Any]] = None

    @classmethod
    def holding(cls, basis: str, heuristic: bool = False, witness: Optional[dict] = None) -> "Verdict":
        return cls(HOLDS, basis, heuristic, witness)

    @classmethod
    def violating(cls, basis: str, witness: Optional[dict] = None, heuristic: bool = False) -> "Verdict":
        return cls(VIOLATED, basis, heuristic, witness)

    @classmethod
    def unknown(cls, basis: str = "", heuristic: bool = False) -> "Verdict":
        return cls(NOT_DETERMINED, basis, heuristic)

    @property
    def holds(self) -> bool:
        return self.state == HOLDS

    @property
    def violated(self) -> bool:
        return self.state == VIOLATED

    def to_dict(self) -> dict[str, Any]:
        return {"state": self.state, "basis": self.basis, "heuristic": self.heuristic, "witness": self.witness}


@dataclass(frozen=True)
class ContractionVerdict:
    preserves_edges: bool
    alpha_star: Optional[Fraction]
    zero_edge_ok: bool
    trivial_graph: bool = False
    heuristic: bool = False
    edge_counterexample: Optional[dict[str, Any]] = None
    zero_edge_counterexample: Optional[dict[str, Any]] = None
    alpha_witness: Optional[dict[str, Any]] = None

    @property
    def is_contraction(self) -> bool:
        return self.preserves_edges and self.zero_edge_ok and self.alpha_star is not None and self.alpha_star < 1

    @property
    def near_miss(self) -> bool:
        return self.alpha_star == 1

    def to_dict(self) -> dict[str, Any]:
        return {
            "preserves_edges": self.preserves_edges,
            "edge_counterexample": self.edge_counterexample,
            "alpha_star": "unbounded" if self.alpha_star is None else self.alpha_star,
            "alpha_witness": self.alpha_witness,
            "zero_edge_ok": self.zero_edge_ok,
            "zero_edge_counterexample": self.zero_edge_counterexample,
            "is_contraction": self.is_contraction,
            "near_miss": self.near_miss,
            "trivial_graph": self.trivial_graph,
            "heuristic": self.heuristic,
        }


@dataclass(frozen=True)
class ContinuityProfile:
    continuous: Verdict
    orbitally_continuous: Verdict
    orbitally_g_continuous: Verdict
    nonexpansive: Verdict
    equicontinuous_powers: Verdict
    property_star: Verdict

    def to_dict(self) -> dict[str, Any]:
        return {
            "continuous": self.continuous.to_dict(),
            "orbitally_continuous": self.orbitally_continuous.to_dict(),
            "orbitally_G_continuous": self.orbitally_g_continuous.to_dict(),
            "nonexpansive": self.nonexpansive.to_dict(),
            "equicontinuous_powers": self.equicontinuous_powers.to_dict(),
            "property_star": self.property_star.to_dict(),
        }


@dataclass(frozen=True)
class CauchyResult:
    cauchy: bool
    index: Optional[int] = None

    def describe(self) -> str:
        return f"cauchy({self.index})" if self.cauchy else "not-within-budget"


@dataclass(frozen=True)
class PathBound:
    radius: Fraction
    lambdas: tuple[Fraction, ...]
    alpha: Fraction
    steps: int
    member: bool


@dataclass(frozen=True)
class TildeCheck:
    original: ContractionVerdict
    reversed: ContractionVerdict
    undirected: ContractionVerdict

    @property
    def consistent(self) -> bool:
        if not self.original.is_contraction:
            return True
        return self.reversed.is_contraction and self.undirected.is_contraction


@dataclass(frozen=True)
class ProbeOutcome:
    start: Point
    status: str
    steps: int
    limit: Optional[Point]
    component: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "start": self.start,
            "status": self.status,
            "steps": self.steps,
            "limit": self.limit,
            "component": self.component,
        }


@dataclass(frozen=True)
class RestrictedVerdict:
    component: Component
    seed: Point
    verdict: Verdict
    limit: Optional[Point]

    def to_dict(self) -> dict[str, Any]:
        return {
            "component": self.component.describe(),
            "seed": self.seed,
            "limit": self.limit,
            "verdict": self.verdict.to_dict(),
        }


@dataclass
class ClassificationReport:
    fixed_points: PointSet
    fixed_points_exact: bool
    x_t: PointSet
    components_meeting_x_t: list[Component]
    route: str = ROUTE_NONE
    picard: Verdict = field(default_factory=Verdict.unknown)
    picard_limit: Optional[Point] = None
    weakly_picard: Verdict = field(default_factory=Verdict.unknown)
    subset_weakly_picard: Optional[Verdict] = None
    subset: Optional[str] = None
    cardinality_check: Optional[bool] = None
    restricted_picard: list[RestrictedVerdict] = field(default_factory=list)
    theorem_basis: dict[str, str] = field(default_factory=dict)
    probes: list[ProbeOutcome] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    order_corollary: Optional[dict[str, Any]] = None
    equicontinuity_extension: Optional[bool] = None

    @property
    def fixed_point_count(self) -> Optional[int]:
        return point_set_size(self.fixed_points)

    def to_dict(self) -> dict[str, Any]:
        return {
            "fixed_points": describe_set(self.fixed_points),
            "fixed_point_count": self.fixed_point_count,
            "fixed_points_exact": self.fixed_points_exact,
            "x_t": describe_set(self.x_t),
            "components_meeting_x_t": [c.describe() for c in self.components_meeting_x_t],
            "cardinality_check": self.cardinality_check,
            "route": self.route,
            "picard": self.picard.to_dict(),
            "picard_limit": self.picard_limit,
            "weakly_picard": self.weakly_picard.to_dict(),
            "subset": self.subset,
            "subset_weakly_picard": None if self.subset_weakly_picard is None else self.subset_weakly_picard.to_dict(),
            "restricted_picard": [r.to_dict() for r in self.restricted_picard],
            "theorem_basis": dict(self.theorem_basis),
            "probes": [p.to_dict() for p in self.probes],
            "notes": list(self.notes),
            "order_corollary": self.order_corollary,
            "equicontinuity_extension": self.equicontinuity_extension,
        }


def exact_value(value: Number) -> Fraction:
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float):
        return Fraction(repr(value))
    return to_fraction(value)


def probe_entourages(basis: Sequence[BasicEntourage], eps: Number) -> tuple[BasicEntourage, ...]:
    return tuple(entourage.scale(eps) for entourage in basis)


def convergence_rule(entourages: Sequence[BasicEntourage], window: int) -> StopRule:
    """Fires once the last window+1 values lie pairwise inside every entourage."""

    def rule(values: Sequence[Point]) -> bool:
        if len(values) < window + 1:
            return False
        tail = values[-(window + 1):]
        return all(entourage.diameter(tail) < 1 for entourage in entourages)

    return rule


# ---------------------------------------------------------------- contraction


def check_contraction(
    mapping: SelfMap, graph: DirectedGraph, family: PseudometricFamily, log_level: int = logging.WARNING
) -> ContractionVerdict:
    if graph.is_finite:
        verdict = _finite_contraction(mapping, graph, family)
    else:
        verdict = _real_line_contraction(mapping, graph)
    if verdict.near_miss:
        logging.log(log_level, "contraction_near_miss alpha_star=1 graph=%s", graph.describe())
    if verdict.heuristic:
        logging.log(log_level, "contraction_heuristic graph=%s", graph.describe())
    return verdict


def _finite_contraction(mapping: SelfMap, graph: DirectedGraph, family: PseudometricFamily) -> ContractionVerdict:
    edge_counterexample = None
    zero_counterexample = None
    best: Optional[Fraction] = None
    witness = None
    for x, y in graph.edges():
        tx, ty = mapping(x), mapping(y)
        if edge_counterexample is None and not graph.has_edge(tx, ty):
            edge_counterexample = {"edge": [x, y], "image": [tx, ty]}
        for member in family.members:
            before = exact_value(member(x, y))
            after = exact_value(member(tx, ty))
            if before == 0:
                if after != 0 and zero_counterexample is None:
                    zero_counterexample = {"edge": [x, y], "pseudometric": member.id, "image_distance": after}
                continue
            ratio = after / before
            if best is None or ratio > best:
                best = ratio
                witness = {"edge": [x, y], "pseudometric": member.id, "ratio": ratio}
    return ContractionVerdict(
        preserves_edges=edge_counterexample is None,
        alpha_star=Fraction(0) if best is None else best,
        zero_edge_ok=zero_counterexample is None,
        trivial_graph=graph.has_only_loops,
        edge_counterexample=edge_counterexample,
        zero_edge_counterexample=zero_counterexample,
        alpha_witness=witness,
    )


def _real_line_contraction(mapping: SelfMap, graph: DirectedGraph) -> ContractionVerdict:
    preserves, edge_witness = _real_line_preserves_edges(mapping, graph)
    hull = _edge_hull(graph)
    if hull is None:
        alpha, witness, heuristic = Fraction(0), None, False
    else:
        excluded = graph.order_set.excluded if graph.kind == INTERVAL_ORDER else ()
        alpha, witness, heuristic = _stretch_bound(mapping, graph, hull, excluded)
    # scaled absolute differences vanish only on the diagonal
    return ContractionVerdict(
        preserves_edges=preserves,
        alpha_star=alpha,
        zero_edge_ok=True,
        trivial_graph=graph.has_only_loops,
        heuristic=heuristic,
        edge_counterexample=edge_witness,
        alpha_witness=witness,
    )


def _edge_hull(graph: DirectedGraph) -> Optional[Interval]:
    if graph.has_only_loops:
        return None
    domain = graph.carrier.domain
    if graph.kind == INTERVAL_ORDER:
        return graph.order_set.interval.intersect(domain)
    return domain


def _segments(mapping: SelfMap, hull: Interval) -> list[tuple[Piece, Interval]]:
    found = []
    for piece in mapping.pieces:
        seg = piece.interval.intersect(hull)
        if not seg.is_empty:
            found.append((piece, seg))
    return found


def _jumps(segments: Sequence[tuple[Piece, Interval]]) -> list[tuple[Fraction, Fraction, Fraction]]:
    """(p, limit from the left piece, limit from the right piece) wherever they differ."""
    jumps = []
    for (left, left_seg), (right, right_seg) in zip(segments, segments[1:]):
        if left_seg.hi is None or left_seg.hi != right_seg.lo:
            continue
        p = left_seg.hi
        from_left, from_right = left.limit_at(p), right.limit_at(p)
        if from_left != from_right:
            jumps.append((p, from_left, from_right))
    return jumps


def _pair_in(seg: Interval, excluded: Sequence[Fraction] = ()) -> tuple[Fraction, Fraction]:
    part = RegionPart(seg, tuple(excluded))
    x = part.sample()
    target = x + 1 if seg.hi is None else seg.hi
    y = (x + target) / 2
    while not part.contains(y) or y == x:
        y = (x + y) / 2
    return x, y


def _stretch_bound(
    mapping: SelfMap,
    graph: DirectedGraph,
    hull: Interval,
    excluded: Sequence[Fraction],
) -> tuple[Optional[Fraction], Optional[dict], bool]:
    segments = _segments(mapping, hull)
    jumps = _jumps(segments)
    if jumps:
        p, left, right = jumps[0]
        return None, {"point": p, "left_limit": left, "right_limit": right}, False
    best = Fraction(0)
    witness = None
    heuristic = False
    for piece, seg in segments:
        if seg.is_point:
            continue
        if not piece.is_affine:
            heuristic = True
            ratio, pair = _grid_stretch(mapping, graph, seg)
            if ratio is not None and ratio > best:
                best, witness = ratio, {"x": pair[0], "y": pair[1], "ratio": ratio, "sampled": True}
            continue
        bound = abs(piece.slope)
        if bound > best or witness is None:
            x, y = _pair_in(seg, excluded)
            if bound >= best:
                best = bound
                witness = {"x": x, "y": y, "ratio": bound, "piece": piece.describe()}
    return best, witness, heuristic


def _grid_stretch(
    mapping: SelfMap, graph: DirectedGraph, seg: Interval
) -> tuple[Optional[Fraction], Optional[tuple[Fraction, Fraction]]]:
    points = [to_fraction(g) for g in graph.carrier.grid if seg.contains(g)]
    best, pair = None, None
    for x, y in itertools.combinations(points, 2):
        if not (graph.has_edge(x, y) or graph.has_edge(y, x)):
            continue
        ratio = abs(mapping(x) - mapping(y)) / abs(x - y)
        if best is None or ratio > best:
            best, pair = ratio, (x, y)
    return best, pair


def _real_line_preserves_edges(mapping: SelfMap, graph: DirectedGraph) -> tuple[bool, Optional[dict]]:
    kind = graph.kind
    if kind in (COMPLETE, ORDER_COMPARABLE, DIAGONAL):
        return True, None
    if kind == ORDER_LEQ:
        if graph.orientation == UNDIRECTED:
            return True, None
        return _monotone(mapping, graph.carrier.domain, ())
    order_set = graph.order_set
    hull = order_set.interval.intersect(graph.carrier.domain)
    segments = _segments(mapping, hull)
    if hull.is_empty or hull.is_point or _constant_on(segments):
        return True, None
    for piece, seg in segments:
        image = piece.image(seg)
        if not image.is_subset_of(order_set.interval):
            x = _escaping_point(piece, seg, order_set.interval)
            return False, {"x": x, "Tx": piece.limit_at(x), "reason": "image leaves the order region"}
        for hole in order_set.excluded:
            for pre in _preimages(piece, seg, hole):
                if pre not in order_set.excluded:
                    return False, {"x": pre, "Tx": hole, "reason": "maps onto an excluded point"}
    if graph.orientation != UNDIRECTED:
        return _monotone(mapping, hull, order_set.excluded)
    return True, None


def _constant_on(segments: Sequence[tuple[Piece, Interval]]) -> bool:
    values = set()
    for piece, seg in segments:
        if seg.is_point:
            values.add(piece.limit_at(seg.lo))
        elif piece.is_affine and piece.slope == 0:
            values.add(piece.intercept)
        else:
            return False
    return len(values) <= 1


def _escaping_point(piece: Piece, seg: Interval, target: Interval) -> Fraction:
    candidates: list[Fraction] = []
    for end, closed in ((seg.lo, seg.lo_closed), (seg.hi, seg.hi_closed)):
        if end is not None:
            candidates.append(end if closed else None)
    candidates.append(seg.interior_sample())
    if seg.lo is not None:
        candidates += [seg.lo + Fraction(1, 10**k) for k in range(1, 10)]
    if seg.hi is not None:
        candidates += [seg.hi - Fraction(1, 10**k) for k in range(1, 10)]
    if seg.lo is None or seg.hi is None:
        centre = seg.interior_sample()
        candidates += [centre + 10**k for k in range(1, 13)] + [centre - 10**k for k in range(1, 13)]
    for candidate in candidates:
        if candidate is not None and seg.contains(candidate) and not target.contains(piece.limit_at(candidate)):
            return candidate
    return seg.interior_sample()


def _preimages(piece: Piece, seg: Interval, value: Fraction) -> list[Fraction]:
    if piece.is_affine:
        if piece.slope == 0:
            return [seg.interior_sample()] if piece.intercept == value and not seg.is_point else []
        pre = (value - piece.intercept) / piece.slope
        return [pre] if seg.contains(pre) else []
    found = []
    for root in np.roots([float(piece.quad), float(piece.slope), float(piece.intercept - value)]):
        if abs(root.imag) > 1e-12:
            continue
        guess = Fraction(float(root.real)).limit_denominator(10**6)
        if seg.contains(guess) and piece.limit_at(guess) == value:
            found.append(guess)
    return found


def _monotone(mapping: SelfMap, hull: Interval, excluded: Sequence[Fraction]) -> tuple[bool, Optional[dict]]:
    segments = _segments(mapping, hull)
    for piece, seg in segments:
        if seg.is_point or piece.is_nondecreasing_on(seg):
            continue
        if piece.is_affine:
            x, y = _pair_in(seg, excluded)
            return False, {"edge": [x, y], "image": [piece.limit_at(x), piece.limit_at(y)], "reason": "decreasing"}
        return False, {"piece": piece.describe(), "reason": "decreasing"}
    for p, left, right in _jumps(segments):
        if left > right:
            return False, {"point": p, "left_limit": left, "right_limit": right, "reason": "downward jump"}
    return True, None


# ------------------------------------------------------------------ continuity


def check_continuity(mapping: SelfMap, family: PseudometricFamily) -> Verdict:
    carrier = mapping.carrier
    if carrier.is_finite:
        for x, y in itertools.combinations(carrier.labels, 2):
            if family.indistinguishable(x, y) and not family.indistinguishable(mapping(x), mapping(y)):
                return Verdict.violating("exact", {"x": x, "y": y, "Tx": mapping(x), "Ty": mapping(y)})
        return Verdict.holding("exact")
    segments = _segments(mapping, carrier.domain)
    for (left, left_seg), (right, right_seg) in zip(segments, segments[1:]):
        if left_seg.hi is None or left_seg.hi != right_seg.lo:
            continue
        p = left_seg.hi
        value = mapping(p)
        for piece, side in ((left, "-"), (right, "+")):
            limit = piece.limit_at(p)
            if limit != value:
                return Verdict.violating(
                    "exact",
                    {
                        "point": p,
                        "sequence": _sequence_text(p, side),
                        "image_limit": limit,
                        "image_at_point": value,
                    },
                )
    return Verdict.holding("exact")


def _sequence_text(p: Fraction, side: str) -> str:
    if p == 0:
        return "1/n" if side == "+" else "-1/n"
    return f"{format_number(p)} {side} 1/n"


def check_orbital_continuity(
    mapping: SelfMap,
    family: PseudometricFamily,
    graph: Optional[DirectedGraph] = None,
    mode: str = PLAIN,
    probes: Iterable[Point] = (),
    settings: ProbeSettings = ProbeSettings(),
    basis: Optional[Sequence[BasicEntourage]] = None,
) -> Verdict:
    if mode not in (PLAIN, G_CONTINUITY):
        raise InputError(f"Unknown orbital continuity mode {mode!r}.")
    if mode == G_CONTINUITY and graph is None:
        raise InputError("Orbital G-continuity needs a graph.")
    carrier = mapping.carrier
    if carrier.is_finite:
        return _finite_orbital_continuity(mapping, family)
    if mode == G_CONTINUITY and graph.has_only_loops:
        return Verdict.holding("only constant subsequences have consecutive edges")
    if check_continuity(mapping, family).holds:
        return Verdict.holding("implied by continuity")
    engine = _OrbitProbe(mapping, family, basis, settings)
    for x in _probe_starts(carrier, probes):
        values = engine.extended(x)
        for name, pattern in SUBSEQUENCE_PATTERNS:
            indices = list(itertools.takewhile(lambda i: i < len(values), (pattern(k) for k in itertools.count(1))))
            subsequence = [values[i] for i in indices]
            if mode == G_CONTINUITY and not all(
                graph.has_edge(a, b) for a, b in zip(subsequence, subsequence[1:])
            ):
                continue
            settled = engine.limit_of_sequence(subsequence)
            if settled is None:
                continue
            start, y = settled
            image = mapping(y)
            shifted = [values[i + 1] for i in indices[start:start + LIMIT_RUN] if i + 1 < len(values)]
            if not all(engine.same_point(v, image) for v in shifted):
                return Verdict.violating(
                    "probe",
                    {"x": x, "y": y, "pattern": f"p_n = {name}", "T_y": image, "images_tend_to": shifted[-1]},
                    heuristic=True,
                )
    return Verdict.holding("holds-on-probes", heuristic=True)


def _finite_orbital_continuity(mapping: SelfMap, family: PseudometricFamily) -> Verdict:
    labels = mapping.carrier.labels
    for x in labels:
        path = orbit(mapping, x, budget=len(labels) + 1)
        for z in set(path.values[path.cycle_start:]):
            for y in labels:
                if family.indistinguishable(y, z) and not family.indistinguishable(mapping(y), mapping(z)):
                    return Verdict.violating("exact", {"x": x, "y": y, "recurring": z})
    return Verdict.holding("exact")


def check_nonexpansive(mapping: SelfMap, family: PseudometricFamily) -> Verdict:
    carrier = mapping.carrier
    if carrier.is_finite:
        for x, y in itertools.product(carrier.labels, repeat=2):
            for member in family.members:
                if member(mapping(x), mapping(y)) > member(x, y):
                    return Verdict.violating("exact", {"x": x, "y": y, "pseudometric": member.id})
        return Verdict.holding("exact")
    continuity = check_continuity(mapping, family)
    if continuity.violated:
        return Verdict.violating("exact", continuity.witness)
    for piece, seg in _segments(mapping, carrier.domain):
        if seg.is_point:
            continue
        bound = piece.max_abs_derivative(seg)
        if bound is None or bound > 1:
            if piece.is_affine:
                x, y = _pair_in(seg)
                return Verdict.violating("exact", {"x": x, "y": y, "slope": piece.slope})
            return Verdict.violating("exact", {"piece": piece.describe(), "reason": "derivative exceeds 1"})
    return Verdict.holding("exact")


def check_equicontinuous_powers(mapping: SelfMap, family: PseudometricFamily, nonexpansive: Verdict) -> Verdict:
    if mapping.carrier.is_finite and family.separating:
        return Verdict.holding("finite separated uniformity is discrete")
    if nonexpansive.holds:
        return Verdict.holding("implied by nonexpansive")
    return Verdict.unknown("no decision procedure")


def check_property_star(
    space: UniformSpace,
    graph: DirectedGraph,
    mapping: Optional[SelfMap] = None,
    probes: Iterable[Point] = (),
    settings: ProbeSettings = ProbeSettings(),
    basis: Optional[Sequence[BasicEntourage]] = None,
) -> Verdict:
    family = space.family
    if family.carrier.is_finite:
        if family.separating:
            return Verdict.holding("finite-auto")
        return Verdict.unknown("finite carrier is not separated")
    if not space.property_star_declared:
        return Verdict.unknown("declared")
    if mapping is None:
        return Verdict.holding("declared")
    engine = _OrbitProbe(mapping, family, basis, settings)
    for x in _probe_starts(family.carrier, probes):
        if not graph.has_edge(x, mapping(x)):
            continue
        limit = engine.limit(x)
        values = engine.orbit(x).values
        if limit is None or not all(graph.has_edge(a, b) for a, b in zip(values, values[1:])):
            continue
        tail = values[-(settings.window + 1):]
        if not any(graph.has_edge(v, limit) for v in tail):
            logging.warning("property_star_falsified start=%s limit=%s", x, limit)
            return Verdict.violating("falsified", {"start": x, "limit": limit}, heuristic=True)
    return Verdict.holding("declared")


def check_profile(
    mapping: SelfMap,
    graph: DirectedGraph,
    space: UniformSpace,
    probes: Iterable[Point] = (),
    settings: ProbeSettings = ProbeSettings(),
    basis: Optional[Sequence[BasicEntourage]] = None,
) -> ContinuityProfile:
    family = space.family
    probes = tuple(probes)
    continuous = check_continuity(mapping, family)
    orbital = check_orbital_continuity(mapping, family, graph, PLAIN, probes, settings, basis)
    orbital_g = check_orbital_continuity(mapping, family, graph, G_CONTINUITY, probes, settings, basis)
    nonexpansive = check_nonexpansive(mapping, family)
    profile = ContinuityProfile(
        continuous=continuous,
        orbitally_continuous=orbital,
        orbitally_g_continuous=orbital_g,
        nonexpansive=nonexpansive,
        equicontinuous_powers=check_equicontinuous_powers(mapping, family, nonexpansive),
        property_star=check_property_star(space, graph, mapping, probes, settings, basis),
    )
    if (continuous.holds and orbital.violated) or (orbital.holds and orbital_g.violated):
        raise InternalConsistencyError("Continuity implication chain broken: " + repr(profile.to_dict()))
    return profile


# ------------------------------------------------------------ Cauchy machinery


def detect_cauchy(path: Orbit, basis: Sequence[BasicEntourage], window: int) -> CauchyResult:
    if not basis:
        raise InputError("detect_cauchy needs at least one basis entourage.")
    if window < 1:
        raise InputError(f"Window must be positive, got {window}.")
    family = basis[0].family
    if family.carrier.is_finite:
        return _finite_cauchy(path, basis)
    values = _extend(path, len(path.values) + window)
    if len(values) < window + 1:
        return CauchyResult(False)
    spans = np.lib.stride_tricks.sliding_window_view(np.asarray(values, dtype=float), window + 1)
    spread = spans.max(axis=1) - spans.min(axis=1)
    inside = np.ones(len(spread), dtype=bool)
    for entourage in basis:
        for name, radius in entourage.terms:
            inside &= spread * float(family.get(name).scale) < float(radius)
    hits = np.flatnonzero(inside)
    if not hits.size:
        return CauchyResult(False)
    return CauchyResult(True, int(hits[0]))


def _finite_cauchy(path: Orbit, basis: Sequence[BasicEntourage]) -> CauchyResult:
    if path.status != PERIODIC:
        return CauchyResult(False)
    anchor = path.last

    def settled(value: Point) -> bool:
        return all(entourage.lambda_infimum(value, anchor) == 0 for entourage in basis)

    if not all(settled(v) for v in path.values[path.cycle_start:]):
        return CauchyResult(False)
    index = len(path.values) - 1
    while index > 0 and settled(path.values[index - 1]):
        index -= 1
    return CauchyResult(True, index)


def _extend(path: Orbit, length: int) -> list[Point]:
    values = list(path.values)
    if path.status == PERIODIC:
        while len(values) < length:
            values.append(values[-path.cycle_length])
    elif path.status == CONVERGED:
        values.extend([path.last] * (length - len(values)))
    return values


def cauchy_equivalent(a: Orbit, b: Orbit, basis: Sequence[BasicEntourage], window: int) -> bool:
    if not (detect_cauchy(a, basis, window).cauchy and detect_cauchy(b, basis, window).cauchy):
        return False
    family = basis[0].family
    if family.carrier.is_finite:
        return all(entourage.lambda_infimum(a.last, b.last) == 0 for entourage in basis)
    length = max(len(a.values), len(b.values))
    xs, ys = _extend(a, length), _extend(b, length)
    common = min(len(xs), len(ys))
    return all(entourage.contains(xs[common - 1], ys[common - 1]) for entourage in basis)


# ------------------------------------------------------------------ path bound


def admissible_alpha(alpha_star: Optional[Fraction], slack: Fraction = ProbeSettings.slack) -> Fraction:
    if alpha_star is None or alpha_star >= 1:
        raise PreconditionError(f"No admissible contraction constant for alpha*={alpha_star}.")
    if alpha_star == 0:
        return min(slack, Fraction(1, 2))
    candidate = alpha_star * (1 + slack)
    return candidate if candidate < 1 else (1 + alpha_star) / 2


def path_weight_bound(
    mapping: SelfMap,
    graph: DirectedGraph,
    path: Path,
    entourage: BasicEntourage,
    n: int,
    alpha: Number,
    slack: Number = ProbeSettings.slack,
    tiny: Number = ProbeSettings.tiny,
) -> PathBound:
    alpha = to_fraction(alpha)
    if not 0 < alpha < 1:
        raise PreconditionError(f"Contraction constant must lie in (0, 1), got {alpha}.")
    if n < 1:
        raise InputError(f"Power must be a positive integer, got {n}.")
    closure = undirected_closure(graph)
    for x, y in path.pairs():
        if not closure.has_edge(x, y):
            raise InputError(f"Path step {x!r} -> {y!r} is not an edge of the undirected closure.")
    for x in path.vertices:
        graph.carrier.require(x)
    slack, tiny = to_fraction(slack), to_fraction(tiny)
    lambdas = tuple(max(entourage.lambda_infimum(x, y), tiny) * (1 + slack) for x, y in path.pairs())
    radius = sum(lambdas, Fraction(0)) if lambdas else tiny
    first, last = path.vertices[0], path.vertices[-1]
    member = entourage.scale(alpha**n * radius).contains(mapping.power(n, first), mapping.power(n, last))
    if not member:
        logging.warning("path_bound_failed path=%s n=%d alpha=%s", path.describe(), n, alpha)
    return PathBound(radius=radius, lambdas=lambdas, alpha=alpha, steps=n, member=member)


def geometric_tail_bound(alpha: Number, radius: Number) -> Fraction:
    alpha, radius = to_fraction(alpha), to_fraction(radius)
    if not 0 <= alpha < 1:
        raise PreconditionError(f"Series needs 0 <= alpha < 1, got {alpha}.")
    return alpha * radius / (1 - alpha)


def geometric_partial_sum(alpha: Number, radius: Number, terms: int) -> Fraction:
    alpha, radius = to_fraction(alpha), to_fraction(radius)
    return sum((alpha**k * radius for k in range(1, terms + 1)), Fraction(0))


# -------------------------------------------------------------- fixed points


def find_fixed_points(mapping: SelfMap) -> PointSet:
    found, exact = fixed_points(mapping)
    if not exact:
        logging.warning("fixed_points_inexact map=%s", mapping.describe())
    return found


def check_invariance(mapping: SelfMap, graph: DirectedGraph, x0: Point) -> Optional[bool]:
    """Whether [x0] is T-invariant; None when T x0 falls outside [x0]."""
    members = component(graph, x0)
    if not point_set_contains(members, mapping(x0)):
        return None
    if graph.is_finite:
        return all(mapping(x) in members for x in members)
    samples = list(members.samples()) + [g for g in graph.carrier.grid if members.contains(g)]
    return all(members.contains(mapping(to_fraction(x))) for x in samples)


def check_tilde_invariance(
    mapping: SelfMap, graph: DirectedGraph, family: PseudometricFamily, log_level: int = logging.WARNING
) -> TildeCheck:
    return TildeCheck(
        original=check_contraction(mapping, graph, family, log_level),
        reversed=check_contraction(mapping, reverse(graph), family, log_level),
        undirected=check_contraction(mapping, undirected_closure(graph), family, log_level),
    )


def build_disconnection_counterexample(graph: DirectedGraph, x0: Point, y0: Point) -> SelfMap:
    """Two-valued map: [x0] collapses to x0, everything else to y0."""
    if not graph.is_finite:
        raise InputError("The disconnection map is built on finite carriers only.")
    if is_weakly_connected(graph):
        raise PreconditionError("The graph is weakly connected; no disconnection map exists.")
    members = component(graph, x0)
    if y0 in members:
        raise PreconditionError(f"{x0!r} and {y0!r} lie in the same component.")
    table = {x: (x0 if x in members else y0) for x in graph.carrier.labels}
    return SelfMap.from_table(graph.carrier, table)


def check_equicontinuity_extension(
    mapping: SelfMap,
    family: PseudometricFamily,
    subset: Iterable[Point],
    x_star: Point,
) -> bool:
    carrier = mapping.carrier
    if not carrier.is_finite or not family.separating:
        raise PreconditionError("The extension check runs on finite separated carriers only.")
    subset = list(subset)
    for x in subset:
        carrier.require(x)
    # on a finite separated carrier the closure of anything dense is the whole carrier
    for x in dict.fromkeys(subset + list(carrier.labels)):
        path = orbit(mapping, x, budget=carrier.size + 1)
        if path.cycle_length != 1 or path.last != x_star:
            return False
    return True


# -------------------------------------------------------------- classification


class _OrbitProbe:
    def __init__(
        self,
        mapping: SelfMap,
        family: PseudometricFamily,
        basis: Optional[Sequence[BasicEntourage]],
        settings: ProbeSettings,
    ) -> None:
        self.mapping = mapping
        self.family = family
        self.settings = settings
        self.entourages = probe_entourages(tuple(basis or family.unit_basis()), settings.eps)
        self.rule = convergence_rule(self.entourages, settings.window)
        self._orbits: dict[Point, Orbit] = {}
        self.fixed, _ = fixed_points(mapping)
        candidates: set[Fraction] = set()
        if not mapping.carrier.is_finite:
            candidates.update(self.fixed.points)
            candidates.update(mapping.boundaries())
            candidates.update(to_fraction(g) for g in mapping.carrier.grid)
        self.candidates = sorted(candidates)

    def orbit(self, x: Point) -> Orbit:
        if x not in self._orbits:
            self._orbits[x] = orbit(
                self.mapping,
                x,
                budget=self.settings.budget,
                stop_rule=self.rule,
                divergence_bound=self.settings.divergence_bound,
            )
        return self._orbits[x]

    def extended(self, x: Point) -> list[Point]:
        path = self.orbit(x)
        return _extend(path, len(path.values) + 4 * LIMIT_RUN)

    def same_point(self, a: Point, b: Point) -> bool:
        if self.mapping.carrier.is_finite:
            return self.family.indistinguishable(a, b)
        return all(entourage.contains(a, b) for entourage in self.entourages)

    def snap(self, value: Point) -> Point:
        if self.mapping.carrier.is_finite or not self.candidates:
            return value
        nearest = min(self.candidates, key=lambda c: abs(float(c) - float(value)))
        return nearest if self.same_point(value, nearest) else value

    def limit(self, x: Point) -> Optional[Point]:
        path = self.orbit(x)
        if self.mapping.carrier.is_finite:
            if path.status != PERIODIC:
                return None
            cycle = path.values[path.cycle_start:]
            if all(self.family.indistinguishable(v, path.last) for v in cycle):
                return path.last
            return None
        if path.status == CONVERGED or (path.status == PERIODIC and path.cycle_length == 1):
            return self.snap(path.last)
        return None

    def limit_of_sequence(self, values: Sequence[Point]) -> Optional[tuple[int, Point]]:
        """First (index, point) where `LIMIT_RUN` consecutive values settle next to a known point."""
        for start in range(len(values) - LIMIT_RUN + 1):
            candidate = self.snap(values[start])
            if candidate is values[start] and candidate not in self.candidates:
                continue
            if all(self.same_point(v, candidate) for v in values[start:start + LIMIT_RUN]):
                return start, candidate
        return None

    def is_fixed(self, y: Point) -> bool:
        if isinstance(self.fixed, frozenset):
            return y in self.fixed
        if isinstance(y, Fraction) and self.fixed.contains(y):
            return True
        return self.same_point(self.mapping(y), y)

    def outcome(self, x: Point, graph: DirectedGraph) -> ProbeOutcome:
        path = self.orbit(x)
        return ProbeOutcome(
            start=x,
            status=path.describe_status(),
            steps=path.steps,
            limit=self.limit(x),
            component=describe_set(component(graph, x)),
        )


def _probe_starts(carrier, probes: Iterable[Point]) -> list[Point]:
    if carrier.is_finite:
        return list(carrier.labels)
    starts = {to_fraction(p) for p in carrier.grid}
    starts.update(to_fraction(p) for p in probes if carrier.contains(p))
    return sorted(starts)


def _select_route(space: UniformSpace, profile: ContinuityProfile) -> str:
    if not space.family.separating or not space.complete:
        return ROUTE_NONE
    if profile.property_star.holds:
        return ROUTE_STAR
    if profile.orbitally_continuous.holds:
        return ROUTE_ORBITAL
    if profile.orbitally_g_continuous.holds:
        return ROUTE_ORBITAL_G
    return ROUTE_NONE


def classify(
    mapping: SelfMap,
    graph: DirectedGraph,
    space: UniformSpace,
    profile: ContinuityProfile,
    verdict: ContractionVerdict,
    probes: Iterable[Point] = (),
    settings: ProbeSettings = ProbeSettings(),
    basis: Optional[Sequence[BasicEntourage]] = None,
) -> ClassificationReport:
    family = space.family
    carrier = family.carrier
    fixed, exact = fixed_points(mapping)
    x_t = x_t_set(graph, mapping)
    report = ClassificationReport(
        fixed_points=fixed,
        fixed_points_exact=exact,
        x_t=x_t,
        components_meeting_x_t=components_meeting(graph, x_t),
    )
    engine = _OrbitProbe(mapping, family, basis, settings)
    starts = _probe_starts(carrier, probes)
    report.probes = [engine.outcome(x, graph) for x in starts]
    heuristic = not carrier.is_finite
    if heuristic:
        report.notes.append("real-line verdicts backed by grid probes are heuristic")
    if verdict.trivial_graph:
        report.notes.append("trivial-graph: every edge is a loop, so B2 is vacuous")
    if not verdict.is_contraction:
        report.notes.append("not a Banach G-contraction; only descriptive fields are reported")
        return report

    route = _select_route(space, profile)
    report.route = route
    if not family.separating:
        report.notes.append("uniformity is not separated; no theorem route applies")
    if not carrier.is_finite:
        report.notes.append("completeness is modeled as declared sequential completeness")
    if route == ROUTE_NONE:
        _probe_only_verdicts(report, engine, starts, fixed, heuristic)
        return report

    connected = is_weakly_connected(graph)
    if route == ROUTE_ORBITAL:
        seeds = [x for x in starts if point_set_contains(component(graph, x), mapping(x))]
    else:
        seeds = [x for x in starts if point_set_contains(x_t, x)]
        if not carrier.is_finite:
            seeds += [s for s in x_t.samples() if s not in seeds]
    report.restricted_picard = _restricted_verdicts(route, graph, engine, starts, seeds, heuristic)

    subset_members = [c.members for c in _distinct_components(graph, seeds)]
    report.subset = " ∪ ".join(describe_set(m) for m in subset_members) or "{}"
    subset_basis = f"{route}:weakly-picard-on-union"
    report.subset_weakly_picard = Verdict.holding(subset_basis, heuristic=heuristic)
    report.theorem_basis["subset_weakly_picard"] = subset_basis
    for x in starts:
        if any(point_set_contains(m, x) for m in subset_members):
            limit = engine.limit(x)
            if limit is not None and not engine.is_fixed(limit):
                raise InternalConsistencyError(f"Orbit from {x!r} in the weakly Picard union settles on non-fixed {limit!r}.")

    if route == ROUTE_STAR and carrier.is_finite:
        report.cardinality_check = len(fixed) == len(report.components_meeting_x_t)
        if not report.cardinality_check:
            raise InternalConsistencyError(
                f"|Fix(T)|={len(fixed)} but {len(report.components_meeting_x_t)} components meet X_T."
            )

    _global_verdicts(report, route, engine, starts, fixed, x_t, connected, graph, heuristic)
    report.order_corollary = _order_corollary(graph, route, fixed, x_t)
    if carrier.is_finite and family.separating and report.fixed_point_count == 1:
        (x_star,) = tuple(fixed)
        report.equicontinuity_extension = check_equicontinuity_extension(mapping, family, carrier.labels, x_star)
    return report


def _distinct_components(graph: DirectedGraph, seeds: Sequence[Point]) -> list[Component]:
    found: list[Component] = []
    for seed in seeds:
        if any(c.contains(seed) for c in found):
            continue
        found.append(Component(members=component(graph, seed), representative=seed))
    return found


def _restricted_verdicts(
    route: str,
    graph: DirectedGraph,
    engine: _OrbitProbe,
    starts: Sequence[Point],
    seeds: Sequence[Point],
    heuristic: bool,
) -> list[RestrictedVerdict]:
    results = []
    for comp in _distinct_components(graph, seeds):
        seed = comp.representative
        limit = engine.limit(seed)
        basis = f"{route}:restricted-picard"
        if limit is None:
            if not heuristic:
                raise InternalConsistencyError(f"Orbit from {seed!r} does not settle although the route licenses it.")
            logging.warning("restricted_limit_not_detected seed=%s", seed)
            verdict = Verdict.unknown(basis + " (limit not detected within budget)", heuristic=True)
            results.append(RestrictedVerdict(comp, seed, verdict, None))
            continue
        for y in starts:
            if comp.contains(y):
                other = engine.limit(y)
                if other is not None and not engine.same_point(other, limit):
                    raise InternalConsistencyError(
                        f"Orbits from {seed!r} and {y!r} in one component settle on {limit!r} and {other!r}."
                    )
        if comp.contains(limit):
            verdict = Verdict.holding(basis, heuristic=heuristic)
        else:
            if route == ROUTE_STAR:
                raise InternalConsistencyError(f"Limit {limit!r} escapes the component of {seed!r}.")
            verdict = Verdict.violating(
                basis,
                {"seed": seed, "limit": limit, "reason": "limit lies outside the component"},
                heuristic=heuristic,
            )
        results.append(RestrictedVerdict(comp, seed, verdict, limit))
    return results


def _global_verdicts(
    report: ClassificationReport,
    route: str,
    engine: _OrbitProbe,
    starts: Sequence[Point],
    fixed: PointSet,
    x_t: PointSet,
    connected: bool,
    graph: DirectedGraph,
    heuristic: bool,
) -> None:
    count = point_set_size(fixed)
    licensed = connected and (route == ROUTE_ORBITAL or not _is_empty(x_t))
    if count != 1:
        report.picard = Verdict.violating(
            "fixed-point-count", {"fixed_points": describe_set(fixed), "count": count if count is not None else "infinite"}
        )
        report.theorem_basis["picard"] = "fixed-point-count"
    elif licensed:
        (x_star,) = tuple(fixed) if isinstance(fixed, frozenset) else fixed.points
        report.picard = Verdict.holding(f"{route}:picard-when-connected", heuristic=heuristic)
        report.picard_limit = x_star
        report.theorem_basis["picard"] = f"{route}:picard-when-connected"
        for x in starts:
            limit = engine.limit(x)
            if limit is None and heuristic:
                continue
            if limit is None or not engine.same_point(limit, x_star):
                raise InternalConsistencyError(f"Picard verdict contradicted by the orbit from {x!r}.")
    else:
        report.picard = _probe_picard(engine, starts, heuristic)
        report.theorem_basis["picard"] = report.picard.basis

    if report.picard.holds:
        report.weakly_picard = Verdict.holding("picard-implies-weakly-picard", heuristic=report.picard.heuristic)
    elif _weakly_licensed(route, engine, starts, graph, x_t):
        report.weakly_picard = Verdict.holding(f"{route}:weakly-picard-on-carrier", heuristic=heuristic)
    else:
        report.weakly_picard = _probe_weakly_picard(engine, starts, heuristic)
    report.theorem_basis["weakly_picard"] = report.weakly_picard.basis
    report.theorem_basis["restricted_picard"] = f"{route}:restricted-picard"


def _weakly_licensed(route: str, engine: _OrbitProbe, starts, graph: DirectedGraph, x_t: PointSet) -> bool:
    carrier = graph.carrier
    if route == ROUTE_ORBITAL:
        if not carrier.is_finite:
            return False
        return all(point_set_contains(component(graph, x), engine.mapping(x)) for x in carrier.labels)
    return point_set_equals_carrier(x_t, carrier)


def _is_empty(points: PointSet) -> bool:
    return not points if isinstance(points, frozenset) else points.is_empty


def _probe_picard(engine: _OrbitProbe, starts: Sequence[Point], heuristic: bool) -> Verdict:
    limits = []
    for x in starts:
        limit = engine.limit(x)
        if limit is None or not engine.is_fixed(limit):
            return Verdict.violating(
                "probe" if heuristic else "exhaustive-orbits",
                {"start": x, "status": engine.orbit(x).describe_status()},
                heuristic=heuristic,
            )
        limits.append(limit)
    if limits and all(engine.same_point(limits[0], other) for other in limits):
        if heuristic:
            return Verdict.unknown("probes agree on one limit", heuristic=True)
        return Verdict.holding("exhaustive-orbits")
    return Verdict.violating("probe" if heuristic else "exhaustive-orbits", {"limits": limits}, heuristic=heuristic)


def _probe_weakly_picard(engine: _OrbitProbe, starts: Sequence[Point], heuristic: bool) -> Verdict:
    for x in starts:
        limit = engine.limit(x)
        if limit is None or not engine.is_fixed(limit):
            return Verdict.violating(
                "probe" if heuristic else "exhaustive-orbits",
                {"start": x, "status": engine.orbit(x).describe_status()},
                heuristic=heuristic,
            )
    if heuristic:
        return Verdict.unknown("every probe settles on a fixed point", heuristic=True)
    return Verdict.holding("exhaustive-orbits")


def _probe_only_verdicts(
    report: ClassificationReport, engine: _OrbitProbe, starts: Sequence[Point], fixed: PointSet, heuristic: bool
) -> None:
    count = point_set_size(fixed)
    if count != 1:
        report.picard = Verdict.violating(
            "fixed-point-count", {"fixed_points": describe_set(fixed), "count": count if count is not None else "infinite"}
        )
    else:
        report.picard = _probe_picard(engine, starts, heuristic)
    report.weakly_picard = (
        Verdict.holding("picard-implies-weakly-picard", heuristic=heuristic)
        if report.picard.holds
        else _probe_weakly_picard(engine, starts, heuristic)
    )
    report.theorem_basis = {"picard": report.picard.basis, "weakly_picard": report.weakly_picard.basis}


def _order_corollary(graph: DirectedGraph, route: str, fixed: PointSet, x_t: PointSet) -> Optional[dict[str, Any]]:
    if graph.kind not in (ORDER_LEQ, ORDER_COMPARABLE, INTERVAL_ORDER):
        return None
    criterion = not _is_empty(x_t)
    exists = not _is_empty(fixed)
    licensed = route in (ROUTE_STAR, ROUTE_ORBITAL_G)
    if licensed and criterion != exists:
        raise InternalConsistencyError("Order criterion disagrees with the fixed point set.")
    relation = "comparable to" if graph.kind == ORDER_COMPARABLE else "below"
    return {
        "criterion": f"some x0 lies {relation} T x0",
        "criterion_met": criterion,
        "fixed_point_exists": exists,
        "licensed": licensed,
    }
