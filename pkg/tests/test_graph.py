from __future__ import annotations

import unittest
from fractions import Fraction

from graph import (
    REVERSED,
    DirectedGraph,
    component,
    components_meeting,
    describe_set,
    find_path,
    is_weakly_connected,
    reverse,
    undirected_closure,
    x_t_set,
)
from maps import SelfMap
from oracle import chain_instance, two_component_instance
from space import Carrier
from space_config import parse_config


class ExplicitGraphTests(unittest.TestCase):
    def test_loops_are_inserted_and_logged(self) -> None:
        carrier = Carrier.finite(["a", "b"])
        with self.assertLogs(level="INFO") as logs:
            graph = DirectedGraph.explicit(carrier, [("a", "b")])
        self.assertTrue(any("graph_loops_inserted count=2" in line for line in logs.output))
        self.assertTrue(graph.has_edge("a", "a"))
        self.assertTrue(graph.has_edge("b", "b"))
        self.assertFalse(graph.has_edge("b", "a"))

    def test_reverse_and_closure(self) -> None:
        graph = chain_instance(3).graph
        flipped = reverse(graph)
        self.assertEqual(flipped.orientation, REVERSED)
        self.assertTrue(flipped.has_edge("p1", "p0"))
        self.assertFalse(flipped.has_edge("p0", "p1"))
        closed = undirected_closure(graph)
        self.assertTrue(closed.has_edge("p1", "p0"))
        self.assertTrue(closed.has_edge("p0", "p1"))

    def test_components_and_connectivity(self) -> None:
        self.assertTrue(is_weakly_connected(chain_instance(3).graph))
        graph = two_component_instance().graph
        self.assertFalse(is_weakly_connected(graph))
        self.assertEqual(component(graph, "a"), frozenset({"a", "b"}))
        self.assertEqual(component(graph, "d"), frozenset({"c", "d"}))

    def test_find_path_runs_against_edge_direction(self) -> None:
        chain = chain_instance(3).graph
        self.assertEqual(find_path(chain, "p2", "p0").vertices, ("p2", "p1", "p0"))
        self.assertEqual(find_path(chain, "p1", "p1").length, 0)
        self.assertIsNone(find_path(two_component_instance().graph, "a", "c"))

    def test_x_t_on_finite_graph(self) -> None:
        instance = two_component_instance()
        mapping = SelfMap.from_images(instance.carrier, ["a", "a", "d", "d"])
        x_t = x_t_set(instance.graph, mapping)
        self.assertEqual(x_t, frozenset({"a", "c", "d"}))
        self.assertEqual(len(components_meeting(instance.graph, x_t)), 2)


class IntervalOrderGraphTests(unittest.TestCase):
    def setUp(self) -> None:
        self.config = parse_config("paper-final-example")
        self.graph = self.config.graph

    def test_component_of_a_region_point(self) -> None:
        self.assertEqual(describe_set(component(self.graph, Fraction(4))), "[1, 4]∖{5/2}")
        self.assertEqual(describe_set(component(self.graph, Fraction(5, 2))), "{5/2}")
        self.assertEqual(describe_set(component(self.graph, Fraction(7))), "{7}")
        self.assertFalse(is_weakly_connected(self.graph))

    def test_edges_follow_the_order_inside_the_region(self) -> None:
        self.assertTrue(self.graph.has_edge(Fraction(1), Fraction(3)))
        self.assertFalse(self.graph.has_edge(Fraction(3), Fraction(1)))
        self.assertFalse(self.graph.has_edge(Fraction(1), Fraction(5, 2)))
        self.assertTrue(self.graph.has_edge(Fraction(7), Fraction(7)))

    def test_x_t_and_components_meeting_it(self) -> None:
        x_t = x_t_set(self.graph, self.config.mapping)
        self.assertEqual(describe_set(x_t), "{0} ∪ [1, 5/2] ∪ {5}")
        meeting = components_meeting(self.graph, x_t)
        self.assertEqual(
            [c.describe() for c in meeting],
            ["{0}", "[1, 4]∖{5/2}", "{5/2}", "{5}"],
        )


if __name__ == "__main__":
    unittest.main()
