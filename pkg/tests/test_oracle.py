from __future__ import annotations

import logging
import unittest
from fractions import Fraction

import numpy as np

from analysis import check_contraction, exact_value
from errors import EnumerationBudgetError, InputError, PreconditionError
from oracle import (
    CONNECTIVITY,
    FIXED_POINT_CARDINALITY,
    PATH_BOUND,
    POINTWISE_REDUCTION,
    FiniteInstance,
    chain_instance,
    critical_radii,
    direct_refutation,
    enumerate_contractions,
    enumerate_maps,
    isolated_pair_instance,
    non_separated_instance,
    planted_reduction_instance,
    pointwise_criterion,
    random_instance,
    table_instance,
    two_component_instance,
    validate_instance,
    verify_connectivity_equivalence,
    verify_fixed_point_cardinality,
    verify_path_bound,
    verify_pointwise_reduction,
)
from space_config import bundled_config_names, parse_config


class EnumerationTests(unittest.TestCase):
    def test_loops_only_pair_admits_every_map(self) -> None:
        found = list(enumerate_contractions(isolated_pair_instance()))
        self.assertEqual(len(found), 4)
        self.assertTrue(all(alpha == 0 for _, alpha in found))

    def test_single_point_carrier(self) -> None:
        single = table_instance("single", ["a"], [[0]], [])
        self.assertEqual(len(list(enumerate_contractions(single))), 1)

    def test_chain_contractions_match_the_pointwise_test(self) -> None:
        instance = chain_instance(3)
        expected = 0
        for mapping in enumerate_maps(instance):
            verdict = check_contraction(mapping, instance.graph, instance.family)
            if verdict.preserves_edges and pointwise_criterion(instance, mapping, Fraction(1, 2)):
                expected += 1
        self.assertEqual(len(list(enumerate_contractions(instance))), expected)
        self.assertGreater(expected, 0)

    def test_near_misses_are_logged_at_debug_while_enumerating(self) -> None:
        with self.assertLogs(level="DEBUG") as logs:
            list(enumerate_contractions(chain_instance(3)))
        near_misses = [r for r in logs.records if r.getMessage().startswith("contraction_near_miss")]
        self.assertTrue(near_misses)
        self.assertTrue(all(r.levelno == logging.DEBUG for r in near_misses))
        self.assertFalse(any(r.levelno >= logging.WARNING for r in logs.records))

    def test_budget_is_enforced(self) -> None:
        with self.assertRaises(EnumerationBudgetError) as ctx:
            list(enumerate_maps(chain_instance(5), max_carrier=4))
        self.assertEqual(ctx.exception.carrier_size, 5)

    def test_instance_must_be_finite(self) -> None:
        config = parse_config("paper-final-example")
        with self.assertRaises(InputError):
            FiniteInstance("line", config.family, config.graph)


class ConnectivityTests(unittest.TestCase):
    def test_connected_chain(self) -> None:
        verdict = verify_connectivity_equivalence(chain_instance(3))
        self.assertEqual(verdict.theorem_id, CONNECTIVITY)
        self.assertTrue(verdict.holds)
        self.assertTrue(verdict.details["i_weakly_connected"])
        self.assertTrue(verdict.details["iii_at_most_one_fixed_point"])

    def test_disconnected_graph_builds_a_two_fixed_point_map(self) -> None:
        verdict = verify_connectivity_equivalence(two_component_instance())
        self.assertTrue(verdict.holds)
        self.assertFalse(verdict.details["ii_cauchy_equivalent"])
        built = verdict.details["disconnection_map"]
        self.assertEqual(built["images"], ["a", "a", "c", "c"])
        self.assertEqual(built["alpha_star"], 0)
        self.assertEqual(built["fixed_points"], ["a", "c"])

    def test_non_separated_checks_one_direction(self) -> None:
        verdict = verify_connectivity_equivalence(non_separated_instance())
        self.assertTrue(verdict.holds)
        self.assertFalse(verdict.details["separating"])
        self.assertEqual(verdict.details["checked_direction"], "iii => i")


class PointwiseReductionTests(unittest.TestCase):
    def test_planted_stretch_is_refuted_directly(self) -> None:
        instance, mapping = planted_reduction_instance()
        alpha = Fraction(1, 2)
        self.assertFalse(pointwise_criterion(instance, mapping, alpha))
        refutation = direct_refutation(instance, mapping, alpha, [Fraction(17, 20)])
        self.assertEqual(refutation["edge"], ["p", "q"])
        self.assertEqual(refutation["radius"], Fraction(17, 20))

    def test_radius_grid_finds_the_planted_stretch(self) -> None:
        instance, mapping = planted_reduction_instance()
        alpha = Fraction(1, 2)
        radii = critical_radii(instance, mapping, alpha, 64)
        refutation = direct_refutation(instance, mapping, alpha, radii)
        self.assertEqual(refutation["edge"], ["p", "q"])
        self.assertGreater(refutation["radius"], Fraction(4, 5))
        self.assertLessEqual(refutation["radius"], Fraction(9, 5))
        verdict = verify_pointwise_reduction(instance, grid_density=64)
        self.assertTrue(verdict.holds, verdict.counterexample)
        self.assertEqual(verdict.statistics["maps"], 27)

    def test_matrix_scalars_are_read_exactly(self) -> None:
        instance, _ = planted_reduction_instance()
        scalar = instance.family.members[0].matrix().ravel()[1]
        self.assertIsInstance(scalar, np.floating)
        self.assertEqual(exact_value(scalar), Fraction(4, 5))
        self.assertEqual(exact_value(np.int64(3)), 3)

    def test_agreement_at_full_grid_density(self) -> None:
        instances = (chain_instance(3), two_component_instance(), random_instance(np.random.default_rng(5), 4))
        for instance in instances:
            with self.subTest(instance=instance.name):
                verdict = verify_pointwise_reduction(instance, grid_density=64)
                self.assertEqual(verdict.theorem_id, POINTWISE_REDUCTION)
                self.assertTrue(verdict.holds, verdict.counterexample)
                self.assertEqual(verdict.statistics["disagreements"], 0)


class CardinalityTests(unittest.TestCase):
    def test_two_components(self) -> None:
        verdict = verify_fixed_point_cardinality(two_component_instance())
        self.assertEqual(verdict.theorem_id, FIXED_POINT_CARDINALITY)
        self.assertTrue(verdict.holds, verdict.counterexample)
        self.assertEqual(verdict.details["failed_assertions"], [])
        self.assertGreater(verdict.statistics["contractions"], 0)

    def test_needs_separation(self) -> None:
        with self.assertRaises(PreconditionError):
            verify_fixed_point_cardinality(non_separated_instance())


class PathBoundTests(unittest.TestCase):
    def test_randomized_trials_are_reproducible(self) -> None:
        first = verify_path_bound(chain_instance(3), trials=25, seed=7)
        second = verify_path_bound(chain_instance(3), trials=25, seed=7)
        self.assertEqual(first.theorem_id, PATH_BOUND)
        self.assertTrue(first.holds, first.counterexample)
        self.assertEqual(first.to_dict(), second.to_dict())
        self.assertEqual(first.seed, 7)

    def test_random_four_point_instances(self) -> None:
        rng = np.random.default_rng(1729)
        for index in range(3):
            instance = random_instance(rng, 4, name=f"random-4-{index}")
            with self.subTest(instance=instance.name):
                verdict = verify_path_bound(instance, trials=200, seed=index)
                self.assertTrue(verdict.holds, verdict.counterexample)
                self.assertEqual(verdict.statistics, {"trials": 200, "failures": 0})


class BundledInstanceTests(unittest.TestCase):
    def test_theorems_hold_on_every_finite_fixture(self) -> None:
        for name in bundled_config_names():
            config = parse_config(name)
            if not config.is_finite:
                continue
            instance = FiniteInstance(config.name, config.family, config.graph)
            with self.subTest(name=name):
                self.assertTrue(verify_connectivity_equivalence(instance).holds)
                self.assertTrue(verify_fixed_point_cardinality(instance).holds)


class ValidateInstanceTests(unittest.TestCase):
    def test_runs_every_verifier_on_separated_instances(self) -> None:
        with self.assertLogs(level="INFO") as logs:
            verdicts = validate_instance(isolated_pair_instance(), seed=3, trials=10, grid_density=8)
        self.assertEqual(
            [v.theorem_id for v in verdicts],
            [CONNECTIVITY, POINTWISE_REDUCTION, FIXED_POINT_CARDINALITY, PATH_BOUND],
        )
        self.assertTrue(all(v.holds for v in verdicts))
        self.assertTrue(any("oracle_verdict" in line for line in logs.output))

    def test_skips_cardinality_without_separation(self) -> None:
        verdicts = validate_instance(non_separated_instance(), trials=5, grid_density=8)
        self.assertNotIn(FIXED_POINT_CARDINALITY, [v.theorem_id for v in verdicts])


if __name__ == "__main__":
    unittest.main()
