import io
import sys
import json
import math
import unittest as ut
from fractions import Fraction

import cvplan as cv

pr = cv.printer


class TestNormalize(ut.TestCase):
    def test_builtins(self):
        plan = cv.cv_variance.j_for_effectiveness(0.3, 0.9)
        value = pr.normalize({"plan": plan, "f": Fraction(1, 4), "x": math.nan})
        self.assertEqual(value["plan"]["J"], 21)
        self.assertEqual(value["f"], 0.25)
        self.assertIsNone(value["x"])


class TestFormats(ut.TestCase):
    def setUp(self) -> None:
        self.result = {
            "n1_opt": 50,
            "rho": 0.49,
            "curve": [{"n1": 50, "v": 0.04}, {"n1": 51, "v": math.inf}],
        }
        self.header = {"command": "plan-split", "seed": 42}

    def test_json(self):
        payload = json.loads(pr.string(self.result, "json", self.header))
        self.assertEqual(payload["config"]["seed"], 42)
        self.assertEqual(payload["result"]["curve"][1]["v"], "inf")
        self.assertEqual(json.loads(pr.string([1, 2])), [1, 2])

    def test_text(self):
        text = pr.string(self.result, "text", self.header)
        lines = text.splitlines()
        self.assertEqual(lines[0].split(), ["#", "command", "plan-split"])
        self.assertIn("[curve]", lines)
        self.assertEqual(lines[-1].split(), ["51", "inf"])

    def test_csv(self):
        text = pr.string(self.result, "csv", self.header)
        self.assertEqual(
            text.splitlines(),
            ["# command=plan-split", "# seed=42", "n1,v", "50,0.04", "51,inf"],
        )
        self.assertEqual(
            pr.string({"J": 4, "rr": None}, "csv").splitlines(), ["J,rr", "4,"]
        )

    def test_unknown(self):
        self.assertRaises(
            cv.errors.InvalidConfig,
            lambda: pr.format({}, io.StringIO(), "yaml"),
        )


if __name__ == "__main__":
    result = ut.main(exit=False)
    sys.exit(len(result.result.failures))
