from __future__ import annotations

import os
import unittest
from fractions import Fraction

from config_utils import env_name, parse_number, read_bool_env, read_float_env, read_int_env, read_number_env


class ParseNumberTests(unittest.TestCase):
    def test_exact_forms(self) -> None:
        self.assertEqual(parse_number("5/2"), Fraction(5, 2))
        self.assertEqual(parse_number("-0.25"), Fraction(-1, 4))
        self.assertEqual(parse_number("1e-6"), Fraction(1, 10**6))

    def test_rejects_non_finite(self) -> None:
        for raw in ("inf", "-inf", "nan", ""):
            with self.subTest(raw=raw):
                with self.assertRaises(ValueError):
                    parse_number(raw)


class EnvReaderTests(unittest.TestCase):
    def test_prefix_and_fallbacks(self) -> None:
        keys = ("GCONTRACT_WINDOW", "GCONTRACT_EPS", "GCONTRACT_JSON", "GCONTRACT_DIVERGENCE_BOUND")
        previous = {key: os.environ.get(key) for key in keys}
        try:
            self.assertEqual(env_name("WINDOW"), "GCONTRACT_WINDOW")
            os.environ["GCONTRACT_WINDOW"] = "-3"
            self.assertEqual(read_int_env("WINDOW", 16), 16)
            os.environ["GCONTRACT_EPS"] = "1/1000"
            self.assertEqual(read_number_env("EPS", None), Fraction(1, 1000))
            os.environ["GCONTRACT_JSON"] = "yes"
            self.assertTrue(read_bool_env("JSON", False))
            os.environ["GCONTRACT_DIVERGENCE_BOUND"] = "not-a-number"
            self.assertEqual(read_float_env("DIVERGENCE_BOUND", 1e12), 1e12)
        finally:
            for key, value in previous.items():
                if value is None:
                    os.environ.pop(key, None)
                else:
                    os.environ[key] = value


if __name__ == "__main__":
    unittest.main()
