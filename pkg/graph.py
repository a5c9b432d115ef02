from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Optional, Union

import networkx as nx

from errors import InputError
from maps import SelfMap, fixed_points
from space import Carrier, Interval, Number, Point, Region, RegionPart, format_number, to_fraction

EXPLICIT = "explicit"
COMPLETE = "complete"
DIAGONAL = "diagonal-only"
ORDER_LEQ = "order-leq"
ORDER_COMPARABLE = "order-comparable"
INTERVAL_ORDER = "custom-interval-order"
PREDICATES = (COMPLETE, DIAGONAL, ORDER_LEQ, ORDER_COMPARABLE, INTERVAL_ORDER)

FORWARD = "forward"
REVERSED = "reversed"
UNDIRECTED = "undirected"

PointSet = Union[frozenset, Region]


@dataclass(frozen=True)
class Path:
    vertices: tuple[Point, ...]

    @property
    def length(self) -> int:
        return len(self.vertices) - 1

    def pairs(self) -> list[tuple[Point, Point]]:
        return list(zip(self.vertices, self.vertices[1:]))

    def describe(self) -> str:
        return " -> ".join(_label(v) for v in self.vertices)


@dataclass(frozen=True)
class Component:
    members: PointSet
    representative: Point
    singletons: bool = False

    @property
    def size(self) -> Optional[int]:
        if isinstance(self.members, frozenset):
            return len(self.members)
        if self.singletons or self.members.parts:
            return None
        return len(self.members.points)

    def contains(self, x: Point) -> bool:
        return x in self.members if isinstance(self.members, frozenset) else self.members.contains(x)

    def describe(self) -> str:
        if self.singletons:
            return f"singletons over {self.members.describe()}"
        return describe_set(self.members)


@dataclass(frozen=True)
class DirectedGraph:
    carrier: Carrier = field(repr=False)
    kind: str
    orientation: str = FORWARD
    order_set: Optional[RegionPart] = None
    digraph: Optional[nx.DiGraph] = field(default=None, repr=False, compare=False)

    @classmethod
    def explicit(cls, carrier: Carrier, edges: Iterable[tuple[str, str]]) -> "DirectedGraph":
        if not carrier.is_finite:
            raise InputError("Explicit edge lists need a finite carrier.")
        digraph = nx.DiGraph()
        digraph.add_nodes_from(carrier.labels)
        for x, y in edges:
            carrier.require(x)
            carrier.require(y)
            digraph.add_edge(x, y)
        missing = [x for x in carrier.labels if not digraph.has_edge(x, x)]
        if missing:
            digraph.add_edges_from((x, x) for x in missing)
            logging.info("graph_loops_inserted count=%d labels=%s", len(missing), ",".join(missing))
        return cls(carrier=carrier, kind=EXPLICIT, digraph=digraph)

    @classmethod
    def predicate(
        cls,
        carrier: Carrier,
        kind: str,
        order_set: Optional[RegionPart] = None,
    ) -> "DirectedGraph":
        if kind not in PREDICATES:
            raise InputError(f"Unknown graph predicate {kind!r}; expected one of {', '.join(PREDICATES)}.")
        if kind == INTERVAL_ORDER and order_set is None:
            raise InputError("The interval-order predicate needs a region.")
        graph = cls(carrier=carrier, kind=kind, order_set=order_set)
        if not carrier.is_finite:
            return graph
        digraph = nx.DiGraph()
        digraph.add_nodes_from(carrier.labels)
        for x in carrier.labels:
            for y in carrier.labels:
                if x == y or graph._coordinate_edge(x, y):
                    digraph.add_edge(x, y)
        return replace(graph, digraph=digraph)

    @property
    def is_finite(self) -> bool:
        return self.carrier.is_finite

    def _coordinate_edge(self, x: str, y: str) -> bool:
        if self.kind == COMPLETE:
            return True
        if self.kind == DIAGONAL:
            return False
        cx, cy = self.carrier.coordinate(x), self.carrier.coordinate(y)
        if cx is None or cy is None:
            return False
        return self._base(cx, cy)

    def _base(self, x: Number, y: Number) -> bool:
        if x == y or self.kind in (COMPLETE, ORDER_COMPARABLE):
            return True
        if self.kind == ORDER_LEQ:
            return x <= y
        if self.kind == INTERVAL_ORDER:
            return self.order_set.contains(x) and self.order_set.contains(y) and x <= y
        return False

    def has_edge(self, x: Point, y: Point) -> bool:
        if self.is_finite:
            return self.digraph.has_edge(x, y)
        if not (self.carrier.contains(x) and self.carrier.contains(y)):
            return False
        if self.orientation == FORWARD:
            return self._base(x, y)
        if self.orientation == REVERSED:
            return self._base(y, x)
        return self._base(x, y) or self._base(y, x)

    def edges(self) -> list[tuple[str, str]]:
        if not self.is_finite:
            raise InputError("Edge lists exist only on finite carriers.")
        order = self.carrier.index
        return sorted(self.digraph.edges(), key=lambda edge: (order(edge[0]), order(edge[1])))

    @property
    def has_only_loops(self) -> bool:
        if self.is_finite:
            return all(x == y for x, y in self.digraph.edges())
        if self.kind == DIAGONAL or self.carrier.domain.is_point:
            return True
        if self.kind == INTERVAL_ORDER:
            restricted = RegionPart(self.order_set.interval.intersect(self.carrier.domain), self.order_set.excluded)
            return restricted.is_empty or (restricted.interval.is_point)
        return False

    @property
    def region(self) -> Optional[Region]:
        if self.order_set is None:
            return None
        return Region(parts=(self.order_set,)).normalized()

    def describe(self) -> str:
        if self.is_finite and self.kind == EXPLICIT:
            text = ", ".join(f"{x}->{y}" for x, y in self.edges() if x != y) or "loops only"
        elif self.kind == INTERVAL_ORDER:
            text = f"{self.kind} on {self.order_set.describe()}"
        else:
            text = self.kind
        return text if self.orientation == FORWARD else f"{text} ({self.orientation})"


def _label(x: Point) -> str:
    return x if isinstance(x, str) else format_number(x)


def describe_set(points: PointSet) -> str:
    if isinstance(points, Region):
        return points.describe()
    return "{" + ", ".join(sorted(_label(p) for p in points)) + "}"


def undirected_closure(graph: DirectedGraph) -> DirectedGraph:
    if graph.is_finite:
        closed = graph.digraph.copy()
        closed.add_edges_from((y, x) for x, y in graph.digraph.edges())
        return replace(graph, orientation=UNDIRECTED, digraph=closed)
    return replace(graph, orientation=UNDIRECTED)


def reverse(graph: DirectedGraph) -> DirectedGraph:
    if graph.is_finite:
        flipped = {FORWARD: REVERSED, REVERSED: FORWARD, UNDIRECTED: UNDIRECTED}[graph.orientation]
        return replace(graph, orientation=flipped, digraph=graph.digraph.reverse(copy=True))
    flipped = {FORWARD: REVERSED, REVERSED: FORWARD, UNDIRECTED: UNDIRECTED}[graph.orientation]
    return replace(graph, orientation=flipped)


def component(graph: DirectedGraph, x: Point) -> PointSet:
    graph.carrier.require(x)
    if graph.is_finite:
        undirected = graph.digraph.to_undirected(as_view=True)
        return frozenset(nx.node_connected_component(undirected, x))
    domain = graph.carrier.domain
    exact = to_fraction(x)
    if graph.kind in (COMPLETE, ORDER_LEQ, ORDER_COMPARABLE):
        return Region.of_interval(domain)
    if graph.kind == INTERVAL_ORDER and graph.order_set.contains(exact):
        return Region.of_interval(graph.order_set.interval.intersect(domain), graph.order_set.excluded)
    return Region.of_points([exact])


def is_weakly_connected(graph: DirectedGraph) -> bool:
    """Finite carriers answer exactly; real lines are labeled heuristic by callers."""
    if graph.is_finite:
        return nx.is_weakly_connected(graph.digraph)
    domain = graph.carrier.domain
    if graph.kind in (COMPLETE, ORDER_LEQ, ORDER_COMPARABLE):
        answer = True
    elif graph.kind == DIAGONAL:
        answer = domain.is_point
    else:
        answer = domain.is_subset_of(graph.order_set.interval) and not any(
            domain.contains(e) for e in graph.order_set.excluded
        )
    grid = graph.carrier.grid
    if grid:
        anchor = component(graph, grid[0])
        sampled = all(anchor.contains(g) for g in grid)
        if sampled != answer:
            logging.warning("connectivity_grid_disagrees structural=%s sampled=%s", answer, sampled)
    return answer


def find_path(graph: DirectedGraph, x: Point, y: Point) -> Optional[Path]:
    """Shortest path from x to y in the undirected closure; BFS visits neighbors in carrier order."""
    graph.carrier.require(x)
    graph.carrier.require(y)
    if x == y:
        return Path((x,))
    closure = undirected_closure(graph)
    if not graph.is_finite:
        return Path((x, y)) if closure.has_edge(x, y) else None
    order = graph.carrier.index
    predecessors = dict(
        nx.bfs_predecessors(closure.digraph, x, sort_neighbors=lambda nodes: sorted(nodes, key=order))
    )
    if y not in predecessors:
        return None
    walk = [y]
    while walk[-1] != x:
        walk.append(predecessors[walk[-1]])
    return Path(tuple(reversed(walk)))


def x_t_set(graph: DirectedGraph, mapping: SelfMap) -> PointSet:
    """X_T = {x : (x, Tx) in E(G)}."""
    if graph.is_finite:
        return frozenset(x for x in graph.carrier.labels if graph.has_edge(x, mapping(x)))
    domain = graph.carrier.domain
    if graph.kind in (COMPLETE, ORDER_COMPARABLE):
        return Region.of_interval(domain)
    fixed, _ = fixed_points(mapping)
    if graph.kind == DIAGONAL:
        return fixed
    signs = {FORWARD: (1,), REVERSED: (-1,), UNDIRECTED: (1, -1)}[graph.orientation]
    found = fixed
    for sign in signs:
        for piece in mapping.pieces:
            if graph.kind == ORDER_LEQ:
                for interval in piece.order_region(sign):
                    found = found.union(Region.of_interval(interval.intersect(domain)))
            else:
                found = found.union(_interval_order_part(graph, piece, sign))
    return found


def _interval_order_part(graph: DirectedGraph, piece, sign: int) -> Region:
    order_set = graph.order_set
    domain = graph.carrier.domain
    if not piece.is_affine:
        inside = [
            g
            for g in graph.carrier.grid
            if piece.interval.contains(g) and graph.has_edge(g, piece.value(to_fraction(g)))
        ]
        logging.info("x_t_grid_fallback piece=%s points=%d", piece.interval.describe(), len(inside))
        return replace(Region.of_points(inside), heuristic=True)
    base = piece.preimage(order_set.interval).intersect(order_set.interval).intersect(domain)
    if base.is_empty:
        return Region()
    excluded: list[Fraction] = list(order_set.excluded)
    for hole in order_set.excluded:
        if piece.slope != 0:
            excluded.append((hole - piece.intercept) / piece.slope)
        elif piece.intercept == hole:
            return Region()
    result = Region()
    for interval in piece.order_region(sign):
        result = result.union(Region.of_interval(interval.intersect(base), excluded))
    return result


def components_meeting(graph: DirectedGraph, points: PointSet) -> list[Component]:
    if graph.is_finite:
        seen: list[Component] = []
        for x in sorted(points, key=graph.carrier.index):
            if any(c.contains(x) for c in seen):
                continue
            seen.append(Component(members=component(graph, x), representative=x))
        return seen
    if points.is_empty:
        return []
    if graph.kind in (COMPLETE, ORDER_LEQ, ORDER_COMPARABLE):
        return [Component(members=Region.of_interval(graph.carrier.domain), representative=points.samples()[0])]
    found: list[Component] = []
    singles: list[Fraction] = list(points.points)
    for part in points.parts:
        if graph.kind == DIAGONAL:
            found.append(Component(members=Region(parts=(part,)), representative=part.sample(), singletons=True))
            continue
        order_set = graph.order_set
        inside = RegionPart(part.interval.intersect(order_set.interval), part.excluded + order_set.excluded)
        if not inside.is_empty:
            singles.append(inside.sample())
        for remainder in _outside(part.interval, order_set.interval):
            outside = RegionPart(remainder, part.excluded)
            if outside.is_empty:
                continue
            if remainder.is_point:
                singles.append(remainder.lo)
            else:
                found.append(Component(members=Region(parts=(outside,)), representative=outside.sample(), singletons=True))
        singles.extend(e for e in order_set.excluded if part.contains(e))
    for x in sorted(set(singles)):
        if any(c.contains(x) and not c.singletons for c in found):
            continue
        found.append(Component(members=component(graph, x), representative=x))
    found.sort(key=lambda c: to_fraction(c.representative))
    return found


def _outside(interval: Interval, hole: Interval) -> list[Interval]:
    pieces: list[Interval] = []
    if hole.lo is not None:
        pieces.append(interval.intersect(Interval(None, hole.lo, False, not hole.lo_closed)))
    if hole.hi is not None:
        pieces.append(interval.intersect(Interval(hole.hi, None, not hole.hi_closed, False)))
    return [p for p in pieces if not p.is_empty]


def point_set_contains(points: PointSet, x: Point) -> bool:
    return x in points if isinstance(points, frozenset) else points.contains(x)


def point_set_equals_carrier(points: PointSet, carrier: Carrier) -> bool:
    if carrier.is_finite:
        return points == frozenset(carrier.labels)
    domain = carrier.domain
    return any(part.interval.intersect(domain) == domain and not any(domain.contains(e) for e in part.excluded)
               for part in points.parts)


def point_set_size(points: PointSet) -> Optional[int]:
    if isinstance(points, frozenset):
        return len(points)
    return None if points.parts else len(points.points)

