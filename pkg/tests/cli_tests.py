import os
import io
import sys
import json
import tempfile
import unittest as ut
from contextlib import redirect_stderr, redirect_stdout

import pandas as pd

import cvplan as cv
from cvplan import cli


def write_design(path: str, X, y):
    columns = {f"x{i}": X[:, i] for i in range(1, X.shape[1])}
    columns["y"] = y
    pd.DataFrame(columns).to_csv(path, index=False)


class CliCase(ut.TestCase):
    def setUp(self) -> None:
        self.dir = tempfile.TemporaryDirectory()
        self.out = os.path.join(self.dir.name, "out")
        self.stderr = io.StringIO()

    def tearDown(self) -> None:
        self.dir.cleanup()

    def run_cli(self, *argv: str) -> int:
        with redirect_stderr(self.stderr):
            return cli.run([*argv, "--out", self.out])

    def output(self) -> str:
        with open(self.out) as r:
            return r.read()

    def payload(self):
        return json.loads(self.output())


class TestPlanning(CliCase):
    def test_resamples(self):
        self.assertEqual(
            self.run_cli("plan-resamples", "--rho", "0.3", "--pi", "0.9"), 0
        )
        payload = self.payload()
        self.assertEqual(payload["result"]["J"], 21)
        self.assertEqual(payload["config"]["command"], "plan-resamples")
        self.assertEqual(
            self.run_cli("plan-resamples", "--rho", "0.5", "--r", "0.1"), 0
        )
        self.assertEqual(self.payload()["result"]["J"], 4)

    def test_split(self):
        status = self.run_cli(
            "plan-split", "--theoretical", "0,2,4,0", "--n", "100"
        )
        self.assertEqual(status, 0)
        result = self.payload()["result"]
        self.assertEqual(result["n1_opt"], 50)
        self.assertEqual(result["params"]["beta"], 2.0)

    def test_split_from_data(self):
        sample = os.path.join(self.dir.name, "sample.csv")
        x = cv.montecarlo.distributions.sample(
            cv.montecarlo.distributions.normal(), 200, seed=3
        )
        pd.DataFrame({"x": x}).to_csv(sample, index=False)
        status = self.run_cli("plan-split", "--data", sample, "--column", "x")
        self.assertEqual(status, 0)
        self.assertEqual(self.payload()["result"]["n1_opt"], 100)

    def test_folds(self):
        status = self.run_cli(
            "plan-folds", "--theoretical", "0,2,1,-3,301", "--format", "text"
        )
        self.assertEqual(status, 0)
        text = self.output()
        self.assertIn("k_opt", text)
        self.assertIn("[curve]", text)

    def test_csv(self):
        status = self.run_cli(
            "plan-resamples", "--rho", "0.2", "--pi", "0.95", "--format",
            "csv",
        )
        self.assertEqual(status, 0)
        lines = self.output().splitlines()
        self.assertTrue(lines[0].startswith("# command=plan-resamples"))
        data = [line for line in lines if not line.startswith("#")]
        header = data[0].split(",")
        row = dict(zip(header, data[1].split(",")))
        self.assertEqual(row["J"], "76")


class TestPlannersOnData(CliCase):
    def test_regression(self):
        path = os.path.join(self.dir.name, "reg.csv")
        X, y = cv.regression_planner.regression_dataset(40, seed=1)
        write_design(path, X, y)
        status = self.run_cli(
            "regression-plan", "--data", path, "--response", "y",
        )
        self.assertEqual(status, 0)
        result = self.payload()["result"]
        self.assertEqual((result["n"], result["p"]), (40, X.shape[1]))
        self.assertEqual(result["n1_opt"], 20)
        self.assertEqual(result["k_opt"], 40)

    def test_logistic(self):
        path = os.path.join(self.dir.name, "logit.csv")
        curve = os.path.join(self.dir.name, "curve.csv")
        X, y = cv.logistic_planner.logistic_dataset(40, seed=3)
        write_design(path, X, y)
        status = self.run_cli(
            "logistic-plan", "--data", path, "--response", "y",
            "--curve-csv", curve,
        )
        self.assertEqual(status, 0)
        result = self.payload()["result"]
        self.assertEqual(len(result["curve"]), 20)
        self.assertIn(result["n1_opt"], range(20, 40))
        self.assertEqual(len(pd.read_csv(curve)), 20)


class TestOracle(CliCase):
    def test_pass(self):
        self.assertEqual(self.run_cli("oracle-check", "--n", "6", "--n1", "3"), 0)
        rows = self.payload()["result"]
        self.assertTrue(all(row["status"] == "PASS" for row in rows))


class TestSimulate(CliCase):
    def test_resampling_table(self):
        self.assertEqual(self.run_cli("simulate", "--table", "T10"), 0)
        rows = self.payload()["result"]
        self.assertEqual([row["n1"] for row in rows], [50, 75, 80, 85, 90])

    def test_free_form(self):
        status = self.run_cli(
            "simulate", "--loss", "squared", "--dist", "N(0,1)", "--n", "40",
            "--n1", "20", "--reps", "50", "--seed", "3",
        )
        self.assertEqual(status, 0)
        payload = self.payload()
        self.assertEqual(payload["config"]["seed"], 3)
        self.assertEqual(payload["result"]["reps"], 50)

    def test_missing_arguments(self):
        self.assertEqual(self.run_cli("simulate", "--loss", "squared"), 1)
        self.assertIn("InvalidConfig", self.stderr.getvalue())

    def test_training_size_below_half(self):
        status = self.run_cli(
            "simulate", "--loss", "squared", "--dist", "N(0,1)", "--n", "100",
            "--n1", "10", "--reps", "20",
        )
        self.assertEqual(status, 1)
        self.assertIn("InvalidGeometry", self.stderr.getvalue())
        self.assertFalse(os.path.exists(self.out))


class TestFailures(CliCase):
    def test_invalid_input(self):
        status = self.run_cli("plan-resamples", "--rho", "0.3", "--pi", "1.5")
        self.assertEqual(status, 1)
        self.assertIn("InvalidPi", self.stderr.getvalue())
        self.assertFalse(os.path.exists(self.out))

    def test_missing_file(self):
        status = self.run_cli(
            "regression-plan", "--data", os.path.join(self.dir.name, "none"),
            "--response", "y",
        )
        self.assertEqual(status, 1)

    def test_usage_errors(self):
        self.assertEqual(self.run_cli("plan-resamples", "--rho", "0.3"), 2)
        self.assertEqual(self.run_cli("no-such-command"), 2)

    def test_version(self):
        with redirect_stdout(io.StringIO()) as out:
            self.assertEqual(cli.run(["--version"]), 0)
        self.assertIn(cv.__version__, out.getvalue())


if __name__ == "__main__":
    result = ut.main(exit=False)
    sys.exit(len(result.result.failures))
