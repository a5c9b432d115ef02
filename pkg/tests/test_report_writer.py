from __future__ import annotations

import json
import tempfile
import unittest
from fractions import Fraction
from pathlib import Path

from analysis import Verdict
from report_writer import REPORT_SCHEMA, VERSION, AnalysisReport, to_jsonable
from space import Interval, Region


class ToJsonableTests(unittest.TestCase):
    def test_fractions_and_sets(self) -> None:
        payload = {"alpha": Fraction(1, 3), "fixed": frozenset({"b", "a"}), "bound": float("inf")}
        self.assertEqual(to_jsonable(payload), {"alpha": "1/3", "fixed": ["a", "b"], "bound": "inf"})

    def test_regions_keep_their_description(self) -> None:
        region = Region.of_interval(Interval(Fraction(1), Fraction(4), True, True), [Fraction(5, 2)])
        encoded = to_jsonable(region)
        self.assertEqual(encoded["description"], "[1, 4]∖{5/2}")
        self.assertEqual(encoded["points"], [])

    def test_objects_with_to_dict(self) -> None:
        encoded = to_jsonable(Verdict.holding("exact"))
        self.assertEqual(encoded["state"], "holds")
        self.assertFalse(encoded["heuristic"])


class AnalysisReportTests(unittest.TestCase):
    def test_document_and_exit_code(self) -> None:
        report = AnalysisReport("check", "constant-map", "abc123", 1729)
        report.add_section("contraction", {"alpha_star": Fraction(0), "is_contraction": True})
        self.assertEqual(report.exit_code, 0)
        report.record_violation("picard")
        report.record_violation("picard")
        document = report.document()
        self.assertEqual(document["schema"], REPORT_SCHEMA)
        self.assertEqual(document["provenance"]["version"], VERSION)
        self.assertEqual(document["provenance"]["seed"], 1729)
        self.assertEqual(document["sections"]["contraction"]["alpha_star"], "0")
        self.assertEqual(document["violations"], ["picard"])
        self.assertEqual(document["exit_code"], 1)

    def test_text_rendering(self) -> None:
        report = AnalysisReport("iterate", "paper-final-example", "ff", None)
        report.add_section("orbits", [{"start": Fraction(3), "cauchy": "cauchy(12)"}])
        text = report.render_text()
        self.assertIn("config: paper-final-example", text)
        self.assertIn("seed: -", text)
        self.assertIn("start: 3", text)

    def test_writes_json_file(self) -> None:
        report = AnalysisReport("classify", "two-component-finite", "00", 7)
        report.add_section("classification", {"route": "completeness+property-star"})
        with tempfile.TemporaryDirectory() as tmpdir:
            target = report.write(Path(tmpdir) / "reports" / "run.json")
            saved = json.loads(target.read_text(encoding="utf-8"))
        self.assertEqual(saved["sections"]["classification"]["route"], "completeness+property-star")
        self.assertEqual(saved["provenance"]["command"], "classify")


if __name__ == "__main__":
    unittest.main()
