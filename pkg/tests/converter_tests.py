import io
import sys
import unittest as ut

import pandas as pd

import cvplan as cv

cn = cv.converter


class TestTables(ut.TestCase):
    def test_read(self):
        frame = cn.read_table(io.StringIO("x,y\n1,2\n3,4\n"))
        self.assertEqual(list(frame.columns), ["x", "y"])
        self.assertIs(cn.read_table(frame), frame)
        for text, message in (
            ("", "Cannot read"),
            ("x,y\n", "no rows"),
            ("x,y\n1,a\n", "numeric"),
            ("x,y\n1,\n2,3\n", "missing"),
        ):
            with self.subTest(text=text):
                self.assertRaisesRegex(
                    cv.errors.InvalidParams,
                    message,
                    lambda: cn.read_table(io.StringIO(text)),
                )

    def test_sample_column(self):
        frame = pd.DataFrame({"x": [1.0, 2.0]})
        self.assertEqual(cn.sample_column(frame).tolist(), [1.0, 2.0])
        wide = frame.assign(y=[0.0, 1.0])
        self.assertEqual(cn.sample_column(wide, "y").tolist(), [0.0, 1.0])
        self.assertRaises(cv.errors.InvalidParams, lambda: cn.sample_column(wide))
        self.assertRaisesRegex(
            cv.errors.InvalidParams,
            "No column 'z'",
            lambda: cn.sample_column(wide, "z"),
        )

    def test_design(self):
        frame = pd.DataFrame({"a": [1.0, 2.0], "b": [3.0, 5.0], "y": [0.0, 1.0]})
        X, y = cn.design_matrix(frame, "y", ["b"], intercept=False)
        self.assertEqual(X.tolist(), [[3.0], [5.0]])
        X, _ = cn.design_matrix(frame, "y")
        self.assertEqual(X.shape, (2, 3))
        self.assertRaises(
            cv.errors.InvalidParams,
            lambda: cn.design_matrix(frame, "y", [], intercept=False),
        )


class TestParams(ut.TestCase):
    def test_parse(self):
        params = cn.parse_params("0, 2, 4, 0")
        self.assertEqual((params.beta, params.gamma, params.n), (2.0, 4.0, None))
        self.assertEqual(cn.parse_params("4,2,4,0,100").n, 100)
        for text in ("1,2,3", "a,b,c,d", "0,2,4,0,1.5"):
            with self.subTest(text=text):
                self.assertRaises(
                    cv.errors.InvalidParams, lambda: cn.parse_params(text)
                )


if __name__ == "__main__":
    result = ut.main(exit=False)
    sys.exit(len(result.result.failures))
