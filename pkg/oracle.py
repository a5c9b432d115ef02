from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterator, Optional, Sequence

import numpy as np

from analysis import (
    G_CONTINUITY,
    PLAIN,
    admissible_alpha,
    build_disconnection_counterexample,
    cauchy_equivalent,
    check_contraction,
    check_invariance,
    check_orbital_continuity,
    check_tilde_invariance,
    exact_value,
    path_weight_bound,
)
from errors import EnumerationBudgetError, InputError, PreconditionError
from graph import DirectedGraph, component, find_path, is_weakly_connected, x_t_set
from maps import SelfMap, fixed_points, orbit
from space import BasicEntourage, Carrier, Pseudometric, PseudometricFamily

DEFAULT_MAX_CARRIER = 4
DEFAULT_SEED = 1729
DEFAULT_GRID_DENSITY = 64
DEFAULT_TRIALS = 200
ALPHA_GRID = tuple(Fraction(k, 8) for k in range(1, 8))

CONNECTIVITY = "connectivity-equivalence"
POINTWISE_REDUCTION = "pointwise-reduction"
FIXED_POINT_CARDINALITY = "fixed-point-cardinality"
PATH_BOUND = "path-bound"


@dataclass(frozen=True)
class FiniteInstance:
    name: str
    family: PseudometricFamily
    graph: DirectedGraph

    def __post_init__(self) -> None:
        if not self.family.carrier.is_finite:
            raise InputError("Finite instances need a finite carrier.")
        if self.graph.carrier != self.family.carrier:
            raise InputError("Graph and pseudometrics must share the carrier.")

    @property
    def carrier(self) -> Carrier:
        return self.family.carrier

    @property
    def separating(self) -> bool:
        return self.family.separating


@dataclass
class TheoremVerdict:
    theorem_id: str
    holds: bool
    counterexample: Optional[dict[str, Any]] = None
    statistics: dict[str, int] = field(default_factory=dict)
    details: dict[str, Any] = field(default_factory=dict)
    seed: Optional[int] = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "theorem_id": self.theorem_id,
            "holds": self.holds,
            "counterexample": self.counterexample,
            "statistics": dict(self.statistics),
            "details": dict(self.details),
            "seed": self.seed,
        }


def _map_record(instance: FiniteInstance, mapping: SelfMap, **extra: Any) -> dict[str, Any]:
    record = {"instance": instance.name, "map": mapping.describe(), "images": list(mapping.images)}
    record.update(extra)
    return record


# ------------------------------------------------------------------- instances


def table_instance(
    name: str,
    labels: Sequence[str],
    rows: Sequence[Sequence[float]],
    edges: Sequence[tuple[str, str]],
) -> FiniteInstance:
    carrier = Carrier.finite(labels)
    family = PseudometricFamily.of([Pseudometric.from_table("d", carrier, rows)])
    return FiniteInstance(name, family, DirectedGraph.explicit(carrier, edges))


def chain_instance(size: int = 3) -> FiniteInstance:
    labels = [f"p{i}" for i in range(size)]
    rows = [[abs(i - j) for j in range(size)] for i in range(size)]
    edges = [(labels[i], labels[i + 1]) for i in range(size - 1)]
    return table_instance(f"chain-{size}", labels, rows, edges)


def two_component_instance() -> FiniteInstance:
    labels = ["a", "b", "c", "d"]
    rows = [[0, 1, 2, 3], [1, 0, 1, 2], [2, 1, 0, 1], [3, 2, 1, 0]]
    return table_instance("two-component", labels, rows, [("a", "b"), ("c", "d")])


def isolated_pair_instance() -> FiniteInstance:
    return table_instance("isolated-pair", ["a", "b"], [[0, 1], [1, 0]], [])


def planted_reduction_instance() -> tuple[FiniteInstance, SelfMap]:
    """Edge (p, q) at distance 0.8 stretched to 0.9; rejected for alpha=1/2 at radius 0.85."""
    labels = ["p", "q", "s"]
    rows = [[0, 0.8, 0.9], [0.8, 0, 0.5], [0.9, 0.5, 0]]
    carrier = Carrier.finite(labels)
    family = PseudometricFamily.of([Pseudometric.from_table("d", carrier, rows)])
    instance = FiniteInstance("planted-stretch", family, DirectedGraph.predicate(carrier, "complete"))
    return instance, SelfMap.from_table(carrier, {"p": "p", "q": "s", "s": "s"})


def non_separated_instance() -> FiniteInstance:
    return table_instance("non-separated", ["a", "b", "c"], [[0, 0, 1], [0, 0, 1], [1, 1, 0]], [("a", "b")])


def random_instance(
    rng: np.random.Generator,
    size: int,
    edge_probability: float = 0.4,
    name: Optional[str] = None,
) -> FiniteInstance:
    cells = rng.choice(100, size=size, replace=False)
    coords = np.stack([cells // 10, cells % 10], axis=1)
    rows = np.abs(coords[:, None, :] - coords[None, :, :]).sum(axis=2)
    labels = [f"x{i}" for i in range(size)]
    edges = [
        (labels[i], labels[j])
        for i in range(size)
        for j in range(size)
        if i != j and rng.random() < edge_probability
    ]
    return table_instance(name or f"random-{size}", labels, rows.tolist(), edges)


# ----------------------------------------------------------------- enumeration


def enumerate_maps(instance: FiniteInstance, max_carrier: int = DEFAULT_MAX_CARRIER) -> Iterator[SelfMap]:
    carrier = instance.carrier
    budget = max_carrier**max_carrier
    count = carrier.size**carrier.size
    if count > budget:
        raise EnumerationBudgetError(carrier.size, count, budget)
    for images in itertools.product(carrier.labels, repeat=carrier.size):
        yield SelfMap.from_images(carrier, images)


def enumerate_contractions(
    instance: FiniteInstance, max_carrier: int = DEFAULT_MAX_CARRIER
) -> Iterator[tuple[SelfMap, Fraction]]:
    total = found = 0
    for mapping in enumerate_maps(instance, max_carrier):
        total += 1
        verdict = check_contraction(mapping, instance.graph, instance.family, logging.DEBUG)
        if verdict.is_contraction:
            found += 1
            yield mapping, verdict.alpha_star
    logging.info("oracle_enumeration instance=%s maps=%d contractions=%d", instance.name, total, found)


def _limit(mapping: SelfMap, x: str) -> Optional[str]:
    path = orbit(mapping, x, budget=mapping.carrier.size + 1)
    return path.last if path.cycle_length == 1 else None


# ------------------------------------------------------- connectivity theorem


def verify_connectivity_equivalence(
    instance: FiniteInstance, max_carrier: int = DEFAULT_MAX_CARRIER
) -> TheoremVerdict:
    """Weak connectivity vs. Cauchy-equivalent orbits vs. at most one fixed point."""
    carrier, family, graph = instance.carrier, instance.family, instance.graph
    basis = family.unit_basis()
    connected = is_weakly_connected(graph)
    all_equivalent = at_most_one = common_limit = True
    witnesses: dict[str, dict] = {}
    stats = {"maps": carrier.size**carrier.size, "contractions": 0}
    for mapping, _ in enumerate_contractions(instance, max_carrier):
        stats["contractions"] += 1
        orbits = {x: orbit(mapping, x, budget=carrier.size + 1) for x in carrier.labels}
        if all_equivalent:
            for x, y in itertools.combinations(carrier.labels, 2):
                if not cauchy_equivalent(orbits[x], orbits[y], basis, window=1):
                    all_equivalent = False
                    witnesses["ii"] = _map_record(instance, mapping, starts=[x, y])
                    break
        fixed, _ = fixed_points(mapping)
        if at_most_one and len(fixed) > 1:
            at_most_one = False
            witnesses["iii"] = _map_record(instance, mapping, fixed_points=sorted(fixed))
        limits = {_limit(mapping, x) for x in carrier.labels}
        if common_limit and (None in limits or len(limits) != 1):
            common_limit = False
            witnesses["iv"] = _map_record(instance, mapping, limits=sorted(str(v) for v in limits))

    details: dict[str, Any] = {
        "i_weakly_connected": connected,
        "ii_cauchy_equivalent": all_equivalent,
        "iii_at_most_one_fixed_point": at_most_one,
        "iv_common_limit": common_limit,
        "separating": instance.separating,
    }
    if instance.separating:
        holds = connected == all_equivalent == at_most_one == common_limit
    else:
        # only "at most one fixed point => connected" survives without separation
        holds = connected or not at_most_one
        details["checked_direction"] = "iii => i"

    counterexample = None
    if not connected:
        x0 = carrier.labels[0]
        y0 = next(y for y in carrier.labels if y not in component(graph, x0))
        built = build_disconnection_counterexample(graph, x0, y0)
        verdict = check_contraction(built, graph, family)
        fixed, _ = fixed_points(built)
        orbital = check_orbital_continuity(built, family, graph, PLAIN)
        orbital_g = check_orbital_continuity(built, family, graph, G_CONTINUITY)
        details["disconnection_map"] = _map_record(
            instance,
            built,
            alpha_star=verdict.alpha_star,
            is_contraction=verdict.is_contraction,
            fixed_points=sorted(fixed),
            orbitally_continuous=orbital.state,
            orbitally_G_continuous=orbital_g.state,
        )
        holds = (
            holds
            and verdict.is_contraction
            and verdict.alpha_star == 0
            and len(fixed) >= 2
            and orbital.holds
            and orbital_g.holds
        )
    if not holds:
        counterexample = next(iter(witnesses.values()), details.get("disconnection_map"))
    return TheoremVerdict(CONNECTIVITY, holds, counterexample, stats, details)


# ---------------------------------------------------------- pointwise reduction


def pointwise_criterion(instance: FiniteInstance, mapping: SelfMap, alpha: Fraction) -> bool:
    """rho(Tx, Ty) <= alpha * rho(x, y) on every edge and pseudometric."""
    for x, y in instance.graph.edges():
        for member in instance.family.members:
            if exact_value(member(mapping(x), mapping(y))) > alpha * exact_value(member(x, y)):
                return False
    return True


def critical_radii(instance: FiniteInstance, mapping: SelfMap, alpha: Fraction, density: int) -> list[Fraction]:
    distances = [exact_value(v) for member in instance.family.members for v in member.matrix().ravel()]
    top = max(distances) if any(distances) else Fraction(1)
    radii = {2 * top * k / density for k in range(1, density + 1)}
    nudge = Fraction(1, 10**9)
    for x, y in instance.graph.edges():
        for member in instance.family.members:
            before = exact_value(member(x, y))
            after = exact_value(member(mapping(x), mapping(y)))
            if before > 0:
                radii.update({before * (1 - nudge), before * (1 + nudge)})
            ceiling = after / alpha
            if ceiling > before:
                radii.add((before + ceiling) / 2)
    return sorted(r for r in radii if r > 0)


def direct_refutation(
    instance: FiniteInstance, mapping: SelfMap, alpha: Fraction, radii: Sequence[Fraction]
) -> Optional[dict[str, Any]]:
    """First (edge, pseudometric, radius) with (x, y) in V but (Tx, Ty) outside alpha*V."""
    balls = [
        (member.id, radius, entourage, entourage.scale(alpha))
        for member in instance.family.members
        for radius in radii
        for entourage in (BasicEntourage.ball(instance.family, member.id, radius),)
    ]
    for x, y in instance.graph.edges():
        tx, ty = mapping(x), mapping(y)
        for name, radius, entourage, shrunk in balls:
            if entourage.contains(x, y) and not shrunk.contains(tx, ty):
                return {"edge": [x, y], "pseudometric": name, "radius": radius}
    return None


def verify_pointwise_reduction(
    instance: FiniteInstance,
    grid_density: int = DEFAULT_GRID_DENSITY,
    max_carrier: int = DEFAULT_MAX_CARRIER,
) -> TheoremVerdict:
    """The per-edge inequality agrees with the entourage-quantified definition."""
    stats = {"maps": 0, "checks": 0, "disagreements": 0}
    counterexample = None
    for mapping in enumerate_maps(instance, max_carrier):
        stats["maps"] += 1
        verdict = check_contraction(mapping, instance.graph, instance.family, logging.DEBUG)
        alphas = set(ALPHA_GRID)
        if verdict.alpha_star is not None and 0 < verdict.alpha_star < 1:
            alphas.add(verdict.alpha_star)
        for alpha in sorted(alphas):
            stats["checks"] += 1
            pointwise = pointwise_criterion(instance, mapping, alpha)
            refutation = direct_refutation(instance, mapping, alpha, critical_radii(instance, mapping, alpha, grid_density))
            if pointwise != (refutation is None):
                stats["disagreements"] += 1
                if counterexample is None:
                    counterexample = _map_record(
                        instance, mapping, alpha=alpha, pointwise=pointwise, refutation=refutation
                    )
    return TheoremVerdict(
        POINTWISE_REDUCTION,
        stats["disagreements"] == 0,
        counterexample,
        stats,
        {"grid_density": grid_density, "alpha_grid": list(ALPHA_GRID)},
    )


# ---------------------------------------------------- fixed point cardinality


def verify_fixed_point_cardinality(
    instance: FiniteInstance, max_carrier: int = DEFAULT_MAX_CARRIER
) -> TheoremVerdict:
    if not instance.separating:
        raise PreconditionError("Cardinality checks need a separating family.")
    carrier, graph = instance.carrier, instance.graph
    connected = is_weakly_connected(graph)
    stats = {"contractions": 0, "failures": 0}
    failures: dict[str, dict] = {}

    def fail(assertion: str, mapping: SelfMap, **extra: Any) -> None:
        stats["failures"] += 1
        failures.setdefault(assertion, _map_record(instance, mapping, assertion=assertion, **extra))

    for mapping, _ in enumerate_contractions(instance, max_carrier):
        stats["contractions"] += 1
        fixed, _ = fixed_points(mapping)
        x_t = x_t_set(graph, mapping)
        components = {component(graph, x) for x in x_t}
        limits = {x: _limit(mapping, x) for x in carrier.labels}
        if len(fixed) != len(components):
            fail("cardinality", mapping, fixed_points=len(fixed), components=len(components))
        for members in components:
            inside = [z for z in fixed if z in members]
            if len(inside) != 1 or any(limits[y] != inside[0] for y in members):
                fail("restricted-picard", mapping, component=sorted(members))
        picard = len(fixed) == 1 and all(limits[x] in fixed for x in carrier.labels)
        if x_t and connected and not picard:
            fail("picard-when-connected", mapping)
        if bool(fixed) != bool(x_t):
            fail("existence", mapping, x_t=sorted(x_t))
        if (len(fixed) == 1) != (len(components) == 1):
            fail("uniqueness", mapping, x_t=sorted(x_t))
        union = frozenset().union(*components) if components else frozenset()
        if any(limits[x] not in fixed for x in union):
            fail("weakly-picard-on-union", mapping)
        if x_t == frozenset(carrier.labels) and any(limits[x] not in fixed for x in carrier.labels):
            fail("weakly-picard-on-carrier", mapping)
        for x in carrier.labels:
            if check_invariance(mapping, graph, x) is False:
                fail("component-invariance", mapping, start=x)
        if not check_tilde_invariance(mapping, graph, instance.family, logging.DEBUG).consistent:
            fail("reverse-and-closure", mapping)
    counterexample = next(iter(failures.values()), None)
    return TheoremVerdict(
        FIXED_POINT_CARDINALITY,
        not failures,
        counterexample,
        stats,
        {"failed_assertions": sorted(failures), "weakly_connected": connected},
    )


# ------------------------------------------------------------------ path bound


def verify_path_bound(
    instance: FiniteInstance,
    trials: int = DEFAULT_TRIALS,
    seed: int = DEFAULT_SEED,
    max_power: int = 10,
    max_carrier: int = DEFAULT_MAX_CARRIER,
) -> TheoremVerdict:
    contractions = list(enumerate_contractions(instance, max_carrier))
    if not contractions:
        raise PreconditionError(f"Instance {instance.name} admits no contraction.")
    carrier, family, graph = instance.carrier, instance.family, instance.graph
    pairs = [(x, y) for x in carrier.labels for y in carrier.labels if y in component(graph, x)]
    rng = np.random.default_rng(seed)
    stats = {"trials": 0, "failures": 0}
    counterexample = None
    for _ in range(trials):
        mapping, alpha_star = contractions[int(rng.integers(len(contractions)))]
        x, y = pairs[int(rng.integers(len(pairs)))]
        member = family.members[int(rng.integers(len(family.members)))]
        radius = Fraction(int(rng.integers(1, 41)), 10)
        entourage = BasicEntourage.ball(family, member.id, radius)
        n = int(rng.integers(1, max_power + 1))
        path = find_path(graph, x, y)
        alpha = admissible_alpha(alpha_star)
        bound = path_weight_bound(mapping, graph, path, entourage, n, alpha)
        stats["trials"] += 1
        if not bound.member:
            stats["failures"] += 1
            if counterexample is None:
                counterexample = _map_record(
                    instance, mapping, path=list(path.vertices), n=n, alpha=alpha, radius=bound.radius
                )
    return TheoremVerdict(PATH_BOUND, stats["failures"] == 0, counterexample, stats, {"max_power": max_power}, seed)


def validate_instance(
    instance: FiniteInstance,
    seed: int = DEFAULT_SEED,
    max_carrier: int = DEFAULT_MAX_CARRIER,
    grid_density: int = DEFAULT_GRID_DENSITY,
    trials: int = DEFAULT_TRIALS,
) -> list[TheoremVerdict]:
    verdicts = [
        verify_connectivity_equivalence(instance, max_carrier),
        verify_pointwise_reduction(instance, grid_density, max_carrier),
    ]
    if instance.separating:
        verdicts.append(verify_fixed_point_cardinality(instance, max_carrier))
    verdicts.append(verify_path_bound(instance, trials, seed, max_carrier=max_carrier))
    for verdict in verdicts:
        logging.info("oracle_verdict theorem=%s holds=%s", verdict.theorem_id, verdict.holds)
    return verdicts
