import json
import math
import os
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from superosc import DomainError, PrecisionPolicy, PrecisionViolation, kernels
from superosc import _pykernels as py
from superosc.errors import ConvergenceError
from superosc.precision import (
    MACHINE_CANCELLATION_BITS,
    as_fraction,
    prototype_cancellation_bits,
    prototype_coeffs_double,
    prototype_coeffs_exact,
    prototype_coeffs_mp,
    prototype_log_abs_coeffs,
    required_bits,
    resolve,
)
from superosc.quadrature import adaptive_simpson, integrate


class TestPolicy:
    def test_auto_selection(self):
        assert resolve(None, 5.0) is None
        assert resolve(None, MACHINE_CANCELLATION_BITS + 1) == required_bits(14)

    def test_machine_violation_message_names_budget(self):
        with pytest.raises(PrecisionViolation, match="needs >= 124"):
            resolve(PrecisionPolicy.machine(), 60)

    def test_too_few_extended_bits(self):
        with pytest.raises(PrecisionViolation):
            resolve(PrecisionPolicy.extended(80), 60)
        assert resolve(PrecisionPolicy.extended(300), 60) == 300

    def test_bad_policies(self):
        with pytest.raises(DomainError):
            PrecisionPolicy("quad")
        with pytest.raises(DomainError):
            PrecisionPolicy("machine-compensated", 64)

    def test_cancellation_bits(self):
        assert prototype_cancellation_bits(30, 4) == 60
        assert prototype_cancellation_bits(30, 0.5) == 0

    def test_as_fraction(self):
        assert as_fraction(2.5) == Fraction(5, 2)
        assert as_fraction(Fraction(1, 3)) == Fraction(1, 3)


class TestCoefficientBackends:
    def test_mp_and_double_match_exact(self):
        exact = prototype_coeffs_exact(40, 3)
        mp = prototype_coeffs_mp(40, 3, 200)
        np.testing.assert_allclose([float(v) for v in mp], [float(v) for v in exact], rtol=1e-15)
        np.testing.assert_allclose(prototype_coeffs_double(40, 3), [float(v) for v in exact],
                                   rtol=1e-15)

    def test_double_cache_is_read_only(self):
        c = prototype_coeffs_double(10, 2)
        with pytest.raises(ValueError):
            c[0] = 1.0

    def test_log_abs(self):
        exact = prototype_coeffs_exact(25, Fraction(5, 2))
        logs = prototype_log_abs_coeffs(25, 2.5)
        ref = [math.log(abs(float(v))) if v else -math.inf for v in exact]
        np.testing.assert_allclose(logs, ref, rtol=1e-12)


class TestKernels:
    def test_backend_is_compiled_here(self):
        assert kernels.BACKEND in ("cython", "python")

    def test_neumaier_beats_naive(self):
        v = np.array([1e16, 1.0, -1e16] * 100)
        assert kernels.neumaier_sum(v) == 100.0
        assert py.neumaier_sum(v) == 100.0

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=200))
    def test_sum_parity(self, values):
        v = np.array(values)
        assert kernels.neumaier_sum(v) == py.neumaier_sum(v)
        assert kernels.neumaier_sum(v) == pytest.approx(math.fsum(values), abs=1e-9)

    def test_cexpsum_parity(self):
        rng = np.random.default_rng(3)
        c = rng.normal(size=301)
        e = rng.normal(size=301) * 0.1 + 1j * rng.uniform(-20, 20, size=301)
        ref = np.sum(c * np.exp(e))
        np.testing.assert_allclose(kernels.cexpsum(c, e), py.cexpsum(c, e), rtol=1e-14)
        np.testing.assert_allclose(kernels.cexpsum(c, e), ref, rtol=1e-12)

    def test_grid_parity(self):
        rng = np.random.default_rng(4)
        w = rng.normal(size=41) + 1j * rng.normal(size=41)
        f = np.linspace(-1, 1, 41)
        xs = np.linspace(-5, 5, 33)
        ref = (w[:, None] * np.exp(1j * np.outer(f, xs))).sum(axis=0)
        np.testing.assert_allclose(kernels.expsum_grid(w, f, xs), py.expsum_grid(w, f, xs),
                                   rtol=1e-13)
        np.testing.assert_allclose(kernels.expsum_grid(w, f, xs), ref, rtol=1e-12)

    def test_pure_python_switch(self):
        code = ("import json, numpy as np; from superosc import kernels, eval_sum, build_prototype;"
                "print(json.dumps([kernels.BACKEND, "
                "[complex(v).real for v in eval_sum(build_prototype(40, 2), np.linspace(-3, 3, 5))]]))")
        env = dict(os.environ, SUPEROSC_PURE_PYTHON="1")
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                             text=True, check=True)
        backend, values = json.loads(out.stdout)
        assert backend == "python"
        from superosc import build_prototype, eval_sum
        np.testing.assert_allclose(values, eval_sum(build_prototype(40, 2),
                                                    np.linspace(-3, 3, 5)).real, rtol=1e-13)


class TestQuadrature:
    def test_polynomial_exact(self):
        assert adaptive_simpson(lambda s: s ** 3 - s, 0.0, 2.0, 1e-12) == pytest.approx(2.0, abs=1e-12)

    def test_oscillatory(self):
        v = integrate(lambda s: math.cos(20 * s), 0.0, 1.0, 1e-11)
        assert abs(v - math.sin(20) / 20) < 1e-11

    def test_reversed_interval(self):
        assert integrate(math.exp, 1.0, 0.0) == pytest.approx(1 - math.e, abs=1e-10)

    def test_failure_is_loud(self):
        with pytest.raises(ConvergenceError):
            adaptive_simpson(lambda s: 1.0 / s if s else 0.0, 0.0, 1.0, 1e-12, max_depth=8)
        with pytest.raises(ConvergenceError):
            integrate(math.exp, 0.0, math.inf)
