import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from superosc import DomainError, eval_product
from superosc.approximation import corpus, fejer, standard_approx
from superosc.spectral import (
    SpectralDensity,
    SpectrumWindow,
    group_failure_discrepancy,
    l2_convergence,
    momentum_shift_action,
    norm_on_window,
    qn_norm,
    qn_small_angle_log,
    truncation_endpoint,
)


class TestWindows:
    def test_half_widths(self):
        assert SpectrumWindow.compact(2.5).half_width(10) == 2.5
        assert SpectrumWindow.full_line().half_width(10) == math.inf
        assert SpectrumWindow.truncated(3).half_width(1000) == pytest.approx(10 * math.pi / 3)

    @pytest.mark.parametrize("make", [lambda: SpectrumWindow("compact"),
                                      lambda: SpectrumWindow.truncated(2.0),
                                      lambda: SpectrumWindow("annulus")])
    def test_invalid(self, make):
        with pytest.raises(DomainError):
            make()

    def test_endpoint_requires_gamma(self):
        with pytest.raises(DomainError):
            truncation_endpoint(10, 1.5)


class TestNorms:
    @settings(max_examples=30, deadline=None)
    @given(n=st.integers(1, 40), a=st.floats(0.2, 4), K=st.floats(0, 200))
    def test_compact_sup_matches_dense_scan(self, n, a, K):
        lam = np.linspace(-K, K, 20001)
        scan = np.max(np.abs(eval_product(n, a, lam)))
        got = norm_on_window(n, a, SpectrumWindow.compact(K))
        assert got >= scan * (1 - 1e-12)
        assert got == pytest.approx(scan, rel=1e-4)

    def test_full_line(self):
        assert norm_on_window(10, 4, SpectrumWindow.full_line()) == 1048576.0
        assert norm_on_window(5, 2, SpectrumWindow.full_line()) == 32.0
        assert norm_on_window(5, 0.5, SpectrumWindow.full_line()) == 1.0

    def test_truncated_is_endpoint_modulus(self):
        n, g = 1000, 3.0
        lam = np.linspace(0, truncation_endpoint(n, g), 5001)
        np.testing.assert_allclose(norm_on_window(n, 2, SpectrumWindow.truncated(g)),
                                   np.max(np.abs(eval_product(n, 2.0, lam))), rtol=1e-12)

    def test_compact_value_near_one(self):
        # log |F| ~ n (a^2-1) K^2 / (2 n^2) = 1.5e-3 here
        v = norm_on_window(1000, 2, SpectrumWindow.compact(1.0))
        assert v == pytest.approx(math.exp(1.5e-3), rel=1e-6)

    @pytest.mark.parametrize("n,a,g", [(10, 2, 3), (10 ** 4, 3, 4), (10 ** 6, 2, 3)])
    def test_qn_against_mpmath(self, n, a, g):
        with mpmath.workdps(50):
            th = mpmath.mpf(n) ** (mpmath.mpf(1) / g - 1) * mpmath.pi / g
            ref = (mpmath.cos(th) ** 2 + a * a * mpmath.sin(th) ** 2) ** (mpmath.mpf(n) / 2)
        np.testing.assert_allclose(qn_norm(n, a, g), float(ref), rtol=1e-12)

    def test_qn_non_increasing_in_gamma(self):
        gammas = np.linspace(2.05, 10, 60)
        vals = [qn_norm(1000, 2, g) for g in gammas]
        assert all(b <= a for a, b in zip(vals, vals[1:]))

    def test_qn_slow_approach_to_one(self):
        vals = [qn_norm(10 ** k, 2, 3) for k in (4, 6, 8)]
        assert vals[0] > vals[1] > vals[2] > 1.0
        assert math.log(qn_norm(10 ** 8, 2, 3)) / qn_small_angle_log(10 ** 8, 2, 3) == pytest.approx(
            1.0, abs=1e-5)


class TestDensities:
    def test_weights_must_sum_to_one(self):
        with pytest.raises(DomainError):
            SpectralDensity(np.array([0.0, 1.0]), np.array([0.5, 0.6]))
        with pytest.raises(DomainError):
            SpectralDensity(np.array([0.0]), np.array([-1.0]))

    def test_point_mass_l2(self):
        d = SpectralDensity.point_mass(0.7)
        v = l2_convergence(100, 2, d, SpectrumWindow.compact(2.0))
        assert v == pytest.approx(abs(eval_product(100, 2.0, 0.7) - np.exp(1.4j)) ** 2, rel=1e-9)

    def test_l2_decreases(self):
        d = SpectralDensity.uniform(-1, 1, 401)
        w = SpectrumWindow.compact(1.0)
        vals = [l2_convergence(n, 3, d, w) for n in (10, 100, 1000)]
        assert vals[0] > vals[1] > vals[2]

    def test_support_outside_window(self):
        with pytest.raises(DomainError):
            l2_convergence(10, 2, SpectralDensity.uniform(-3, 3, 11), SpectrumWindow.compact(1.0))


class TestOperatorShadows:
    def test_momentum_shift_scales_shifts(self):
        psi = corpus(1.0)["fejer"]
        got = momentum_shift_action(psi, 20, 2, 0.5, 0.3)
        direct = standard_approx(fejer, 20, 2, 0.3, L=0.5, method="direct")
        np.testing.assert_allclose(got, direct, atol=1e-9)

    def test_group_witness(self):
        assert group_failure_discrepancy(5, 1.5, 1.5, np.linspace(-10, 10, 2001)) > 0.1

    def test_group_law_fails_at_finite_n(self):
        grid = np.linspace(-3, 3, 61)
        d = [group_failure_discrepancy(n, 1.5, 2.0, grid) for n in (5, 50, 500)]
        assert d[0] > 1e-2
        assert d[0] > d[1] > d[2]
