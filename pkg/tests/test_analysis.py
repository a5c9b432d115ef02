from __future__ import annotations

import unittest
from fractions import Fraction

from analysis import (
    G_CONTINUITY,
    PLAIN,
    ROUTE_ORBITAL,
    ROUTE_STAR,
    ProbeSettings,
    admissible_alpha,
    build_disconnection_counterexample,
    cauchy_equivalent,
    check_contraction,
    check_continuity,
    check_equicontinuity_extension,
    check_invariance,
    check_nonexpansive,
    check_orbital_continuity,
    check_profile,
    check_property_star,
    check_tilde_invariance,
    classify,
    convergence_rule,
    detect_cauchy,
    find_fixed_points,
    geometric_partial_sum,
    geometric_tail_bound,
    path_weight_bound,
    probe_entourages,
)
from errors import InputError, PreconditionError
from graph import Path, describe_set
from maps import CONVERGED, DIVERGED, SelfMap, fixed_points, orbit
from oracle import chain_instance, isolated_pair_instance, two_component_instance
from space import UniformSpace
from space_config import parse_config


def classify_config(name: str):
    config = parse_config(name)
    verdict = check_contraction(config.mapping, config.graph, config.family)
    profile = check_profile(config.mapping, config.graph, config.space, config.probes, config.settings, config.basis)
    report = classify(
        config.mapping, config.graph, config.space, profile, verdict, config.probes, config.settings, config.basis
    )
    return verdict, profile, report


class ContractionTests(unittest.TestCase):
    def test_interval_order_example(self) -> None:
        config = parse_config("paper-final-example")
        verdict = check_contraction(config.mapping, config.graph, config.family)
        self.assertTrue(verdict.preserves_edges)
        self.assertEqual(verdict.alpha_star, Fraction(1, 3))
        self.assertTrue(verdict.is_contraction)
        self.assertFalse(verdict.heuristic)

    def test_finite_alpha_star_is_exact(self) -> None:
        config = parse_config("complete-graph-G0")
        verdict = check_contraction(config.mapping, config.graph, config.family)
        self.assertEqual(verdict.alpha_star, Fraction(1, 2))
        self.assertEqual(verdict.alpha_witness["edge"], ["b", "c"])

    def test_ratio_one_is_a_near_miss(self) -> None:
        instance = chain_instance(3)
        shift = SelfMap.from_images(instance.carrier, ["p1", "p2", "p2"])
        with self.assertLogs(level="WARNING") as logs:
            verdict = check_contraction(shift, instance.graph, instance.family)
        self.assertTrue(verdict.preserves_edges)
        self.assertTrue(verdict.near_miss)
        self.assertFalse(verdict.is_contraction)
        self.assertTrue(any("contraction_near_miss" in line for line in logs.output))

    def test_edge_not_preserved(self) -> None:
        instance = two_component_instance()
        mapping = SelfMap.from_images(instance.carrier, ["c", "a", "c", "c"])
        verdict = check_contraction(mapping, instance.graph, instance.family)
        self.assertFalse(verdict.preserves_edges)
        self.assertEqual(verdict.edge_counterexample, {"edge": ["a", "b"], "image": ["c", "a"]})

    def test_loops_only_graph_is_flagged_trivial(self) -> None:
        instance = isolated_pair_instance()
        swap = SelfMap.from_images(instance.carrier, ["b", "a"])
        verdict = check_contraction(swap, instance.graph, instance.family)
        self.assertTrue(verdict.is_contraction)
        self.assertTrue(verdict.trivial_graph)
        self.assertEqual(verdict.alpha_star, 0)

    def test_jump_inside_the_edge_hull_is_unbounded(self) -> None:
        config = parse_config("orbital-continuity-ex1")
        verdict = check_contraction(config.mapping, config.graph, config.family)
        self.assertIsNone(verdict.alpha_star)
        self.assertFalse(verdict.is_contraction)
        self.assertEqual(verdict.to_dict()["alpha_star"], "unbounded")

    def test_reverse_and_closure_keep_the_verdict(self) -> None:
        config = parse_config("complete-graph-G0")
        self.assertTrue(check_tilde_invariance(config.mapping, config.graph, config.family).consistent)
        instance = two_component_instance()
        mapping = SelfMap.from_images(instance.carrier, ["a", "a", "d", "d"])
        tilde = check_tilde_invariance(mapping, instance.graph, instance.family)
        self.assertTrue(tilde.reversed.is_contraction)
        self.assertTrue(tilde.undirected.is_contraction)


class ContinuityTests(unittest.TestCase):
    def test_discontinuous_but_orbitally_continuous(self) -> None:
        config = parse_config("orbital-continuity-ex1")
        continuity = check_continuity(config.mapping, config.family)
        self.assertTrue(continuity.violated)
        self.assertEqual(continuity.witness["sequence"], "1/n")
        self.assertEqual(continuity.witness["image_limit"], 1)
        self.assertEqual(continuity.witness["image_at_point"], 0)
        orbital = check_orbital_continuity(config.mapping, config.family, config.graph, PLAIN, config.probes)
        self.assertTrue(orbital.holds)
        self.assertTrue(orbital.heuristic)

    def test_orbit_returning_to_a_jump(self) -> None:
        config = parse_config("orbital-continuity-ex2")
        orbital = check_orbital_continuity(config.mapping, config.family, config.graph, PLAIN, config.probes)
        self.assertTrue(orbital.violated)
        self.assertEqual(orbital.witness["x"], 0)
        self.assertEqual(orbital.witness["y"], 0)
        self.assertEqual(orbital.witness["pattern"], "p_n = n")
        self.assertEqual(orbital.witness["T_y"], 1)
        g_orbital = check_orbital_continuity(config.mapping, config.family, config.graph, G_CONTINUITY)
        self.assertTrue(g_orbital.holds)
        self.assertFalse(g_orbital.heuristic)

    def test_g_mode_needs_a_graph(self) -> None:
        config = parse_config("orbital-continuity-ex2")
        with self.assertRaises(InputError):
            check_orbital_continuity(config.mapping, config.family, None, G_CONTINUITY)

    def test_finite_profile(self) -> None:
        config = parse_config("complete-graph-G0")
        profile = check_profile(config.mapping, config.graph, config.space)
        self.assertTrue(profile.continuous.holds)
        self.assertTrue(profile.orbitally_continuous.holds)
        self.assertTrue(profile.orbitally_g_continuous.holds)
        self.assertTrue(profile.nonexpansive.holds)
        self.assertEqual(profile.property_star.basis, "finite-auto")

    def test_nonexpansive_fails_on_steep_piece(self) -> None:
        config = parse_config("paper-final-example")
        verdict = check_nonexpansive(config.mapping, config.family)
        self.assertTrue(verdict.violated)
        self.assertEqual(verdict.witness["slope"], 2)

    def test_property_star_is_declared_on_the_real_line(self) -> None:
        config = parse_config("paper-final-example")
        verdict = check_property_star(config.space, config.graph)
        self.assertEqual(verdict.state, "not-determined")
        declared = UniformSpace(config.family, True, True)
        self.assertTrue(check_property_star(declared, config.graph).holds)


class CauchyTests(unittest.TestCase):
    def setUp(self) -> None:
        self.config = parse_config("paper-final-example")
        self.basis = probe_entourages(self.config.family.unit_basis(), Fraction(1, 10**6))
        self.rule = convergence_rule(self.basis, 16)

    def probe(self, start: int):
        return orbit(self.config.mapping, Fraction(start), budget=10_000, stop_rule=self.rule)

    def test_converging_orbit_is_cauchy_within_forty_steps(self) -> None:
        result = detect_cauchy(self.probe(3), self.basis, 16)
        self.assertTrue(result.cauchy)
        self.assertLessEqual(result.index, 40)
        self.assertAlmostEqual(self.probe(3).last, 2.5, places=9)

    def test_diverging_orbit(self) -> None:
        path = self.probe(-1)
        self.assertEqual(path.status, DIVERGED)
        self.assertFalse(detect_cauchy(path, self.basis, 16).cauchy)

    def test_equivalence(self) -> None:
        self.assertTrue(cauchy_equivalent(self.probe(3), self.probe(4), self.basis, 16))
        self.assertFalse(cauchy_equivalent(self.probe(3), self.probe(-1), self.basis, 16))
        self.assertFalse(cauchy_equivalent(self.probe(3), self.probe(5), self.basis, 16))

    def test_shrinking_orbit_stops_before_underflow(self) -> None:
        config = parse_config("orbital-continuity-ex2")
        basis = probe_entourages(config.family.unit_basis(), Fraction(1, 10**6))
        path = orbit(config.mapping, Fraction(1, 2), stop_rule=convergence_rule(basis, 16))
        self.assertEqual(path.status, CONVERGED)
        self.assertEqual(path.last, 2.0**-1023)
        result = detect_cauchy(path, basis, 16)
        self.assertEqual((result.cauchy, result.index), (True, 4))

    def test_finite_orbits_settle_exactly(self) -> None:
        instance = chain_instance(3)
        mapping = SelfMap.constant(instance.carrier, "p1")
        path = orbit(mapping, "p0", budget=4)
        result = detect_cauchy(path, instance.family.unit_basis(), 1)
        self.assertEqual((result.cauchy, result.index), (True, 1))


class PathBoundTests(unittest.TestCase):
    def test_admissible_alpha(self) -> None:
        with self.assertRaises(PreconditionError):
            admissible_alpha(None)
        with self.assertRaises(PreconditionError):
            admissible_alpha(Fraction(1))
        self.assertEqual(admissible_alpha(Fraction(0)), ProbeSettings.slack)
        chosen = admissible_alpha(Fraction(1, 3))
        self.assertTrue(Fraction(1, 3) < chosen < 1)

    def test_chain_radius_is_sum_of_lambdas(self) -> None:
        instance = chain_instance(3)
        mapping = SelfMap.constant(instance.carrier, "p1")
        entourage = instance.family.unit_basis()[0]
        bound = path_weight_bound(
            mapping, instance.graph, Path(("p0", "p1", "p2")), entourage, 1, Fraction(1, 2)
        )
        self.assertTrue(bound.member)
        self.assertEqual(bound.radius, 2 * (1 + ProbeSettings.slack))

    def test_same_point_path(self) -> None:
        instance = chain_instance(3)
        mapping = SelfMap.constant(instance.carrier, "p1")
        bound = path_weight_bound(mapping, instance.graph, Path(("p2",)), instance.family.unit_basis()[0], 3, Fraction(1, 2))
        self.assertTrue(bound.member)
        self.assertEqual(bound.radius, ProbeSettings.tiny)

    def test_path_must_follow_the_closure(self) -> None:
        instance = chain_instance(3)
        mapping = SelfMap.constant(instance.carrier, "p1")
        with self.assertRaises(InputError):
            path_weight_bound(mapping, instance.graph, Path(("p0", "p2")), instance.family.unit_basis()[0], 1, Fraction(1, 2))

    def test_geometric_tail_matches_partial_sums(self) -> None:
        tail = geometric_tail_bound(Fraction(1, 3), 2)
        self.assertEqual(tail, 1)
        self.assertLess(abs(float(tail - geometric_partial_sum(Fraction(1, 3), 2, 40))), 1e-9)
        with self.assertRaises(PreconditionError):
            geometric_tail_bound(1, 2)


class StructureTests(unittest.TestCase):
    def test_disconnection_counterexample(self) -> None:
        instance = two_component_instance()
        built = build_disconnection_counterexample(instance.graph, "a", "c")
        self.assertEqual(built.images, ("a", "a", "c", "c"))
        verdict = check_contraction(built, instance.graph, instance.family)
        self.assertTrue(verdict.is_contraction)
        self.assertEqual(verdict.alpha_star, 0)
        self.assertEqual(fixed_points(built)[0], frozenset({"a", "c"}))

    def test_disconnection_counterexample_preconditions(self) -> None:
        chain = chain_instance(3)
        with self.assertRaises(PreconditionError):
            build_disconnection_counterexample(chain.graph, "p0", "p2")
        two = two_component_instance()
        with self.assertRaises(PreconditionError):
            build_disconnection_counterexample(two.graph, "a", "b")

    def test_component_invariance(self) -> None:
        instance = two_component_instance()
        mapping = SelfMap.from_images(instance.carrier, ["a", "a", "d", "d"])
        self.assertTrue(check_invariance(mapping, instance.graph, "b"))
        crossing = SelfMap.from_images(instance.carrier, ["c", "c", "c", "c"])
        self.assertIsNone(check_invariance(crossing, instance.graph, "a"))
        self.assertTrue(check_invariance(crossing, instance.graph, "d"))

    def test_equicontinuity_extension(self) -> None:
        instance = isolated_pair_instance()
        swap = SelfMap.from_images(instance.carrier, ["b", "a"])
        self.assertFalse(check_equicontinuity_extension(swap, instance.family, ["a"], "a"))
        constant = SelfMap.constant(instance.carrier, "b")
        self.assertTrue(check_equicontinuity_extension(constant, instance.family, ["a"], "b"))


class ClassificationTests(unittest.TestCase):
    def test_interval_order_example(self) -> None:
        verdict, profile, report = classify_config("paper-final-example")
        self.assertTrue(profile.continuous.holds)
        self.assertEqual(report.route, ROUTE_ORBITAL)
        self.assertEqual(describe_set(report.fixed_points), "{0, 5/2, 5}")
        self.assertTrue(report.fixed_points_exact)
        self.assertTrue(report.picard.violated)
        self.assertEqual(report.picard.basis, "fixed-point-count")
        self.assertTrue(report.weakly_picard.violated)
        by_component = {r.component.describe(): r for r in report.restricted_picard}
        self.assertTrue(by_component["[1, 4]∖{5/2}"].verdict.violated)
        self.assertEqual(by_component["[1, 4]∖{5/2}"].limit, Fraction(5, 2))
        for name in ("{0}", "{5/2}", "{5}"):
            self.assertTrue(by_component[name].verdict.holds)

    def test_two_components_give_two_fixed_points(self) -> None:
        _, _, report = classify_config("two-component-finite")
        self.assertEqual(report.route, ROUTE_STAR)
        self.assertEqual(report.fixed_points, frozenset({"a", "d"}))
        self.assertTrue(report.cardinality_check)
        self.assertTrue(report.picard.violated)
        self.assertTrue(report.weakly_picard.holds)
        self.assertEqual(len(report.restricted_picard), 2)
        self.assertTrue(all(r.verdict.holds for r in report.restricted_picard))

    def test_complete_graph_is_picard(self) -> None:
        _, _, report = classify_config("complete-graph-G0")
        self.assertTrue(report.picard.holds)
        self.assertEqual(report.picard_limit, "a")
        self.assertTrue(report.weakly_picard.holds)
        self.assertTrue(report.equicontinuity_extension)

    def test_non_contraction_reports_only_descriptive_fields(self) -> None:
        _, _, report = classify_config("orbital-continuity-ex1")
        self.assertTrue(any("not a Banach G-contraction" in note for note in report.notes))
        self.assertEqual(report.picard.state, "not-determined")

    def test_find_fixed_points_on_table(self) -> None:
        config = parse_config("constant-map")
        self.assertEqual(find_fixed_points(config.mapping), frozenset({"b"}))


if __name__ == "__main__":
    unittest.main()
