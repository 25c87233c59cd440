import csv
import io
import json
import math

import numpy as np
import pytest

from superosc import eval_product
from superosc.cli import parse_grid, parse_number, run_captured


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestParsing:
    def test_grid(self):
        np.testing.assert_allclose(parse_grid("-1:1:5"), [-1, -0.5, 0, 0.5, 1])
        np.testing.assert_allclose(parse_grid("2:2:1"), [2.0])

    @pytest.mark.parametrize("bad", ["1:0:5", "0:1:0", "0:1", "a:b:c"])
    def test_bad_grid_exit_1(self, bad):
        code, out, err = run_captured(["eval", "--n", "5", "--a", "2", f"--x-grid={bad}"])
        assert code == 1 and out == ""
        assert err.startswith("superosc: error:") and err.count("\n") == 1

    def test_fraction(self):
        assert parse_number("5/2") == 2.5


class TestCommands:
    def test_eval_example(self):
        code, out, _ = run_captured(["eval", "--n", "20", "--a", "4", "--x-grid", "-1:1:201"])
        assert code == 0
        r = rows(out)
        assert len(r) == 201
        assert list(r[0]) == ["x", "re_F", "im_F", "abs_err"]
        x = float(r[50]["x"])
        np.testing.assert_allclose(complex(float(r[50]["re_F"]), float(r[50]["im_F"])),
                                   eval_product(20, 4, x), rtol=1e-12)

    def test_identity_check_example(self):
        code, out, _ = run_captured(["identity-check", "--n-max", "6", "--p-max", "6", "--a", "2"])
        assert code == 0
        assert all(r["match"] == "True" for r in rows(out))

    def test_pointer_example_figure_convention(self):
        code, out, _ = run_captured(["pointer", "--N", "20", "--delta", "0.25", "--q-grid", "-2:3:500",
                                     "--convention", "binomial", "--output", "json"])
        assert code == 0
        doc = json.loads(out)
        assert len(doc["rows"]) == 500
        assert abs(doc["meta"]["argmax"] - math.sqrt(2)) < 0.1

    def test_coeffs_exact_column(self):
        code, out, _ = run_captured(["coeffs", "--n", "3", "--a", "2"])
        assert code == 0
        assert [r["coeff_exact"] for r in rows(out)] == ["27/8", "-27/8", "9/8", "-1/8"]

    def test_weak_named(self):
        code, out, _ = run_captured(["weak", "--observable", "sigma-xi", "--pre", "up-x",
                                     "--post", "up-y", "--output", "json"])
        assert code == 0
        assert json.loads(out)["meta"]["weak_value_re"] == pytest.approx(math.sqrt(2))

    def test_weak_orthogonal_is_domain_error(self):
        code, _, err = run_captured(["weak", "--observable", "sigma-x", "--pre", "up-z",
                                     "--post", "down-z"])
        assert code == 1 and "orthogonal" in err

    def test_spectral_multiple_n(self):
        code, out, _ = run_captured(["spectral", "--n", "10", "100", "--a", "2",
                                     "--window", "compact:1"])
        assert code == 0
        assert [r["n"] for r in rows(out)] == ["10", "100"]

    def test_wigner_column(self):
        code, out, _ = run_captured(["wigner", "--what", "column", "--ell", "1/2", "--theta", "0.8"])
        assert code == 0
        np.testing.assert_allclose([float(r["d"]) for r in rows(out)],
                                   [-math.sin(0.4), math.cos(0.4)])

    def test_machine_precision_violation(self):
        code, _, err = run_captured(["eval", "--n", "40", "--a", "4", "--x-grid", "0:1:3",
                                     "--form", "sum", "--precision-bits", "0"])
        assert code == 1 and "precision" in err.lower()

    def test_unknown_flag(self):
        code, _, err = run_captured(["eval", "--bogus"])
        assert code == 1 and err.count("\n") == 1

    def test_output_is_deterministic(self):
        argv = ["evolve", "--law", "free", "--n", "30", "--a", "2", "--x-grid", "0:1:4", "--t", "0.1"]
        assert run_captured(argv) == run_captured(argv)

    def test_verify_all_subset(self):
        code, out, _ = run_captured(["verify-all", "--only", "3"])
        doc = json.loads(out)
        assert code == 0 and doc["passed"]
        assert [c["id"] for c in doc["checks"]] == [3]

    def test_verify_all_failure_exit_2(self):
        code, out, _ = run_captured(["verify-all", "--only", "4"])
        assert code == 2 and not json.loads(out)["passed"]
