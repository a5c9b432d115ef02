from __future__ import annotations

import unittest
from fractions import Fraction

from errors import DomainError, InputError
from maps import BUDGET_EXHAUSTED, CONVERGED, DIVERGED, PERIODIC, Piece, SelfMap, evaluate, fixed_points, orbit
from space import Carrier, Interval


def three_piece_map() -> SelfMap:
    carrier = Carrier.real_line()
    return SelfMap.piecewise(
        carrier,
        [
            Piece(Interval(None, Fraction(1), False, False), slope=Fraction(2)),
            Piece(Interval(Fraction(1), Fraction(4), True, True), Fraction(1, 3), Fraction(5, 3)),
            Piece(Interval(Fraction(4), None, False, False), Fraction(2), Fraction(-5)),
        ],
    )


class TableMapTests(unittest.TestCase):
    def test_requires_total_table(self) -> None:
        carrier = Carrier.finite(["a", "b"])
        with self.assertRaises(InputError):
            SelfMap.from_table(carrier, {"a": "b"})
        with self.assertRaises(InputError):
            SelfMap.from_table(carrier, {"a": "b", "b": "z"})

    def test_two_cycle_orbit(self) -> None:
        carrier = Carrier.finite(["a", "b"])
        swap = SelfMap.from_images(carrier, ["b", "a"])
        path = orbit(swap, "a", budget=10)
        self.assertEqual(path.status, PERIODIC)
        self.assertEqual(path.describe_status(), "periodic(2)")
        self.assertEqual(path.values, ("a", "b", "a"))
        self.assertEqual(fixed_points(swap), (frozenset(), True))

    def test_budget_must_be_positive(self) -> None:
        carrier = Carrier.finite(["a"])
        with self.assertRaises(InputError):
            orbit(SelfMap.constant(carrier, "a"), "a", budget=0)


class PiecewiseMapTests(unittest.TestCase):
    def test_evaluates_exactly(self) -> None:
        mapping = three_piece_map()
        self.assertEqual(evaluate(mapping, Fraction(4)), 3)
        self.assertEqual(evaluate(mapping, Fraction(5, 2)), Fraction(5, 2))
        self.assertEqual(evaluate(mapping, Fraction(-1)), -2)
        self.assertEqual(mapping.power(2, Fraction(5)), 5)

    def test_pieces_must_cover_the_domain(self) -> None:
        with self.assertRaises(InputError) as ctx:
            SelfMap.piecewise(
                Carrier.real_line(),
                [
                    Piece(Interval(None, Fraction(1), False, False)),
                    Piece(Interval(Fraction(1), None, False, False)),
                ],
            )
        self.assertIn("not covered", str(ctx.exception))

    def test_point_outside_every_piece(self) -> None:
        carrier = Carrier.real_line(Interval(Fraction(0), None, True, False))
        mapping = SelfMap.piecewise(carrier, [Piece(Interval(Fraction(0), None, True, False), intercept=Fraction(1))])
        with self.assertRaises(DomainError):
            mapping.piece_for(-1)

    def test_fixed_points_are_exact_per_affine_piece(self) -> None:
        found, exact = fixed_points(three_piece_map())
        self.assertTrue(exact)
        self.assertEqual(found.describe(), "{0, 5/2, 5}")

    def test_quadratic_fixed_points(self) -> None:
        carrier = Carrier.real_line(Interval(Fraction(0), None, True, False))
        mapping = SelfMap.piecewise(
            carrier,
            [
                Piece(Interval(Fraction(0), Fraction(0), True, True), intercept=Fraction(1)),
                Piece(Interval(Fraction(0), None, False, False), quad=Fraction(1, 2)),
            ],
        )
        found, _ = fixed_points(mapping)
        self.assertEqual(found.members(), (Fraction(2),))


class OrbitTests(unittest.TestCase):
    def test_diverging_orbit(self) -> None:
        path = orbit(three_piece_map(), Fraction(-1))
        self.assertEqual(path.status, DIVERGED)
        self.assertLess(path.last, -1e12)

    def test_fixed_start_converges_at_once(self) -> None:
        path = orbit(three_piece_map(), Fraction(5))
        self.assertEqual(path.status, CONVERGED)
        self.assertEqual(path.values, (5.0, 5.0))

    def test_fixed_start_on_a_finite_carrier_is_periodic(self) -> None:
        carrier = Carrier.finite(["a", "b"])
        path = orbit(SelfMap.constant(carrier, "a"), "a")
        self.assertEqual(path.describe_status(), "periodic(1)")

    def test_budget_exhausted_without_stop_rule(self) -> None:
        path = orbit(three_piece_map(), Fraction(3), budget=5)
        self.assertEqual(path.status, BUDGET_EXHAUSTED)
        self.assertEqual(path.steps, 5)

    def test_stop_rule_ends_the_orbit(self) -> None:
        path = orbit(three_piece_map(), Fraction(3), stop_rule=lambda values: len(values) > 3)
        self.assertEqual(path.status, "converged")
        self.assertEqual(path.steps, 3)


if __name__ == "__main__":
    unittest.main()
