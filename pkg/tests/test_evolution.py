import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from superosc import ConvergenceError, DomainError, build_prototype, coefficient
from superosc.evolution import (
    DrivenOscillatorConfig,
    EvolvedState,
    SymbolSeries,
    driven_ho_evolve,
    driven_ho_plane_wave,
    driven_I,
    driven_J,
    formal_solution,
    free_error_split,
    free_evolve,
    free_limit,
    gaussian_packet,
    gaussian_packet_spread,
    geometric_symbol,
    heat_evolve,
    ho_evolve,
    ho_plane_wave,
    ho_powered_evolve,
    modified_evolve,
    periodicity_witness,
    powered_datum_evolve,
    split_reconstruction,
    symbol_evolve,
    wave_evolve,
)


def mp_sum(n, a, phase, dps=80):
    """Reference: sum_j C_j exp(phase(k_j)) with exact coefficients in mpmath."""
    with mpmath.workdps(dps):
        tot = mpmath.mpc(0)
        for j in range(n + 1):
            c = coefficient(n, j, a, exact=True)
            k = mpmath.mpf(n - 2 * j) / n
            tot += mpmath.mpf(c.numerator) / c.denominator * mpmath.exp(phase(k))
        return complex(tot)


class TestClosedForms:
    @pytest.mark.parametrize("n,a,x,t", [(12, 2, 0.4, 0.3), (40, 3, -1.1, 0.05)])
    def test_free_against_mpmath(self, n, a, x, t):
        ref = mp_sum(n, a, lambda k: 1j * k * x - 1j * t * k * k)
        np.testing.assert_allclose(free_evolve(build_prototype(n, a), x, t), ref, rtol=1e-12)

    def test_heat_against_mpmath(self):
        ref = mp_sum(30, 2, lambda k: 1j * k * 0.7 - k * k * 0.2)
        np.testing.assert_allclose(heat_evolve(build_prototype(30, 2), 0.7, 0.2), ref, rtol=1e-12)

    def test_backward_heat_rejected(self):
        with pytest.raises(DomainError):
            heat_evolve(build_prototype(5, 2), 0.0, -0.1)

    def test_wave_dalembert(self):
        seq = build_prototype(20, 2)
        from superosc import eval_sum
        expect = (eval_sum(seq, 0.3 - 0.8) + eval_sum(seq, 0.3 + 0.8)) / 2
        np.testing.assert_allclose(wave_evolve(seq, 0.3, 0.4, 2.0), expect, rtol=1e-13)

    def test_modified_p2_is_free_law(self):
        # (-i)^2 = -1 so e^{it(-ik)^2} = e^{-itk^2}
        seq = build_prototype(16, 2)
        np.testing.assert_allclose(modified_evolve(seq, 0.2, 0.3, 2), free_evolve(seq, 0.2, 0.3),
                                   rtol=1e-13)

    def test_powered_datum_ell_one(self):
        np.testing.assert_allclose(powered_datum_evolve(14, 2, 1, 2, -0.4, 0.1),
                                   mp_sum(14, 2, lambda k: -1j * k * (-0.4) - 1j * 0.1 * k * k),
                                   rtol=1e-12)

    def test_powered_datum_odd_p_rejected(self):
        with pytest.raises(DomainError):
            powered_datum_evolve(10, 2, 2, 3, 0.0, 0.1)

    def test_ho_at_zero_time_is_datum(self):
        from superosc import eval_sum
        seq = build_prototype(18, 2)
        np.testing.assert_allclose(ho_evolve(seq, 0.6, 0.0), eval_sum(seq, 0.6), rtol=1e-13)
        np.testing.assert_allclose(ho_plane_wave(2.0, 0.6, 0.0), cmath.exp(1.2j), rtol=1e-15)

    def test_ho_singular_time(self):
        with pytest.raises(DomainError):
            ho_evolve(build_prototype(4, 2), 0.0, math.pi / 2)

    def test_ho_powered_p2_at_zero_time(self):
        # datum sum C_k e^{-i x k^2}
        v = ho_powered_evolve(12, 2, 2, 0.5, 0.0)
        np.testing.assert_allclose(v, mp_sum(12, 2, lambda k: -0.5j * k * k), rtol=1e-12)


class TestLimits:
    @pytest.mark.parametrize("law,params", [
        ("free", {}), ("heat", {}), ("wave", {"c": 1.5}), ("modified-p-even", {"p": 4}),
        ("oscillator", {}),
    ])
    def test_error_shrinks_with_n(self, law, params):
        errs = []
        for n in (100, 1000, 10_000):
            st_ = EvolvedState(law, build_prototype(n, 2), params)
            errs.append(abs(st_(0.3, 0.2) - st_.limit(0.3, 0.2)))
        assert errs[0] > errs[1] > errs[2]
        assert errs[2] < 5e-2

    def test_free_limit_closed_form(self):
        assert free_limit(2.0, 0.5, 0.25) == pytest.approx(cmath.exp(1j * (1.0 - 1.0)))


class TestResiduals:
    @pytest.mark.parametrize("law,params", [
        ("free", {}), ("heat", {}), ("wave", {"c": 2.0}), ("modified-p-even", {"p": 4}),
        ("modified-p-odd", {"p": 3}), ("powered-datum", {"ell": 2, "p": 2}),
        ("oscillator", {}), ("oscillator-powered", {"p": 2}),
        ("symbol-series", {"symbol": geometric_symbol(3), "truncation": 3}),
    ])
    def test_pde_residual_small(self, law, params):
        st_ = EvolvedState(law, build_prototype(10, 2), params)
        scale = max(1.0, abs(st_(0.4, 0.3)))
        assert st_.residual(0.4, 0.3) < 1e-6 * scale

    def test_driven_residual(self):
        cfg = DrivenOscillatorConfig(m=1.3, omega=0.9, f=lambda s: 0.7 * math.cos(s))
        st_ = EvolvedState("driven-oscillator", build_prototype(8, 2), {"config": cfg})
        assert st_.residual(0.2, 0.5) < 1e-6

    def test_unknown_law(self):
        with pytest.raises(DomainError):
            EvolvedState("schroedinger-ish", build_prototype(3, 2))


class TestSymbolSeries:
    def test_radius_enforced(self):
        # prototype frequencies reach |k| = 1, the geometric radius
        with pytest.raises(DomainError):
            symbol_evolve(build_prototype(6, 2), geometric_symbol(), 0.0, 0.1, 20)

    def test_scaled_series_converges(self):
        sym = SymbolSeries(radius=2.0, generator=lambda p: 0.5 ** p)
        v = symbol_evolve(build_prototype(6, 2), sym, 0.3, 0.1, 80)
        poly = SymbolSeries(coeffs=tuple(0.5 ** p for p in range(81)))
        np.testing.assert_allclose(v, symbol_evolve(build_prototype(6, 2), poly, 0.3, 0.1, 80),
                                   rtol=1e-13)

    def test_tail_too_large(self):
        sym = SymbolSeries(radius=1.5, generator=lambda p: (2 / 3) ** p)
        with pytest.raises(ConvergenceError):
            symbol_evolve(build_prototype(6, 2), sym, 0.3, 0.1, 5)

    def test_needs_data(self):
        with pytest.raises(DomainError):
            SymbolSeries()


class TestDriven:
    def test_free_force_reduces_to_oscillator(self):
        cfg = DrivenOscillatorConfig()
        for x, t in ((0.3, 0.4), (-1.0, 1.1)):
            np.testing.assert_allclose(driven_ho_plane_wave(cfg, 2.0, x, t), ho_plane_wave(2.0, x, t),
                                       rtol=1e-13)

    def test_ij_form_agrees_for_zero_force(self):
        cfg = DrivenOscillatorConfig(m=1.3, omega=0.9)
        np.testing.assert_allclose(driven_ho_plane_wave(cfg, 1.5, 0.4, 0.8, form="ij-display"),
                                   driven_ho_plane_wave(cfg, 1.5, 0.4, 0.8), rtol=1e-12)

    def test_ij_display_uses_opposite_force_sign(self):
        # the I/J display solves the equation with -f(t) x; the derived form uses +f(t) x
        plus = DrivenOscillatorConfig(m=1.3, omega=0.9, f=lambda s: 0.7)
        minus = DrivenOscillatorConfig(m=1.3, omega=0.9, f=lambda s: -0.7)
        shown = driven_ho_plane_wave(plus, 1.5, 0.4, 0.8, form="ij-display")
        np.testing.assert_allclose(shown, driven_ho_plane_wave(minus, 1.5, 0.4, 0.8), rtol=1e-12)
        assert abs(shown - driven_ho_plane_wave(plus, 1.5, 0.4, 0.8)) > 0.1

    def test_constant_force_integrals(self):
        F, m, w, t = 0.7, 1.3, 0.9, 1.2
        cfg = DrivenOscillatorConfig(m=m, omega=w, f=lambda s: F)
        np.testing.assert_allclose(driven_I(cfg, t, 0.0), F * (1 - math.cos(w * t)) / (m * w * w),
                                   rtol=1e-10)
        ref = mpmath.quad(lambda s: F * mpmath.sin(w * (t - s))
                          * mpmath.quad(lambda u: F * mpmath.sin(w * u), [0, s]), [0, t]) / (m * w) ** 2
        np.testing.assert_allclose(driven_J(cfg, t, 0.0), float(ref), rtol=1e-9)

    def test_sequence_and_plane_wave_paths(self):
        cfg = DrivenOscillatorConfig(f=lambda s: 0.4 * s)
        seq = build_prototype(1, 1)  # single frequency k = 1
        np.testing.assert_allclose(driven_ho_evolve(cfg, seq, 0.2, 0.6),
                                   driven_ho_evolve(cfg, 1.0, 0.2, 0.6), rtol=1e-12)

    def test_bad_config(self):
        with pytest.raises(DomainError):
            DrivenOscillatorConfig(m=-1.0)


class TestFormalSolution:
    def test_a1_closed_form_matches_series(self):
        seq = build_prototype(8, 2)
        closed = formal_solution(seq, 1, 1, 2, None, 0.3, 0.2, a1=0.5j)
        series = formal_solution(seq, 1, 1, 2, lambda m: (0.5j) ** m, 0.3, 0.2)
        np.testing.assert_allclose(series, closed, rtol=1e-11)

    def test_non_convergent_series(self):
        with pytest.raises(ConvergenceError):
            formal_solution(build_prototype(4, 2), 1, 1, 2, lambda m: math.factorial(m) ** 2,
                            0.0, 1.0, m_max=30)

    def test_argument_checks(self):
        seq = build_prototype(4, 2)
        with pytest.raises(DomainError):
            formal_solution(seq, 0, 1, 2, None, 0.0, 0.1, a1=1.0)
        with pytest.raises(DomainError):
            formal_solution(seq, 1, 1, 2, None, 0.0, 0.1)
        with pytest.raises(DomainError):
            formal_solution(seq, 2, 1, 2, None, 0.0, 0.1, a1=1.0)


class TestPeriodicityAndSplit:
    def test_periodic_datum(self):
        n = 6
        st_ = EvolvedState("free", build_prototype(n, 2))
        X = n * math.pi  # k_j X = (n - 2j) pi is a multiple of pi, need 2 pi: use 2 n pi
        with pytest.raises(DomainError):
            periodicity_witness(st_, X + 0.1, 0.2, 0.3)
        a, b = periodicity_witness(st_, 2 * X, 0.2, 0.3)
        np.testing.assert_allclose(a, b, rtol=1e-11)

    @settings(max_examples=15, deadline=None)
    @given(x=st.floats(-1, 1), t=st.floats(0, 0.7))
    def test_split_sums_to_total_error(self, x, t):
        s = free_error_split(60, 2, x, t)
        np.testing.assert_allclose(s.Z + s.W, free_evolve(build_prototype(60, 2), x, t)
                                   - cmath.exp(1j * (2 * x - 4 * t)), atol=1e-12)
        from superosc import error_envelope
        np.testing.assert_allclose(abs(s.W), error_envelope(60, 2, x - 2 * t), rtol=1e-9, atol=1e-14)

    def test_phase_reconstruction_matches_z(self):
        s = free_error_split(40, 2, 0.3, 0.25)
        np.testing.assert_allclose(split_reconstruction(40, 2, 0.3, 0.25), s.Z, atol=1e-12)


class TestGaussianPacket:
    def test_initial_chirp(self):
        x = np.linspace(-3, 3, 13)
        np.testing.assert_allclose(gaussian_packet(x, 0.0, 0.2, 1.5, 0.8),
                                   np.exp(-(x - 0.2) ** 2 / (2 * 0.64) + 1.5j * x), rtol=1e-14)

    def test_centre_moves_at_twice_k0(self):
        x = np.linspace(-5, 7, 120001)
        dens = np.abs(gaussian_packet(x, 0.5, 0.0, 1.0, 0.9)) ** 2
        assert x[np.argmax(dens)] == pytest.approx(1.0, abs=1e-4)

    def test_spread_and_norm(self):
        x = np.linspace(-60, 60, 240001)
        norms = []
        for t in (0.0, 0.7, 2.0):
            dens = np.abs(gaussian_packet(x, t, 0.0, 0.5, 0.7)) ** 2
            m0 = np.trapezoid(dens, x)
            mean = np.trapezoid(x * dens, x) / m0
            var = np.trapezoid((x - mean) ** 2 * dens, x) / m0
            # |psi|^2 has variance spread^2 / 2
            assert math.sqrt(2 * var) == pytest.approx(gaussian_packet_spread(t, 0.7), rel=1e-6)
            norms.append(m0)
        np.testing.assert_allclose(norms, norms[0], rtol=1e-6)

    def test_solves_free_equation(self):
        f = lambda x, t: gaussian_packet(x, t, 0.1, 1.0, 0.7)
        x, t, h = 0.3, 0.4, 1e-4
        res = 1j * (f(x, t + h) - f(x, t - h)) / (2 * h) + (f(x + h, t) - 2 * f(x, t) + f(x - h, t)) / h ** 2
        assert abs(res) < 1e-6

    def test_bad_width(self):
        with pytest.raises(DomainError):
            gaussian_packet(0.0, 0.0, 0.0, 1.0, 0.0)


class TestInitialConditions:
    @pytest.mark.parametrize("law,params", [
        ("free", {}), ("heat", {}), ("wave", {"c": 1.3}), ("modified-p-even", {"p": 4}),
        ("modified-p-odd", {"p": 3}), ("oscillator", {}),
        ("symbol-series", {"symbol": geometric_symbol(4), "truncation": 4}),
        ("driven-oscillator", {"config": DrivenOscillatorConfig(f=lambda s: 0.5)}),
    ])
    def test_time_zero_is_datum(self, law, params):
        from superosc import eval_sum
        seq = build_prototype(12, 2)
        st_ = EvolvedState(law, seq, params)
        for x in (-0.7, 0.0, 1.9):
            np.testing.assert_allclose(st_(x, 0.0), eval_sum(seq, x), rtol=1e-14, atol=1e-14)

    def test_formal_first_derivative_is_datum(self):
        # r = 1, nu = 2: the series starts at t^1, so d/dt at 0 is the datum
        from superosc import eval_sum
        seq = build_prototype(6, 2)
        h = 1e-3
        f = lambda t: formal_solution(seq, 1, 2, 2, lambda m: (0.5j) ** m, 0.4, t)
        deriv = (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h)
        np.testing.assert_allclose(deriv, eval_sum(seq, 0.4), rtol=1e-4)
        assert abs(f(0.0)) < 1e-15


class TestLinearity:
    def test_oscillator_sum_of_plane_waves(self):
        n, a, x, t = 10, 2, 0.35, 0.8
        seq = build_prototype(n, a)
        parts = sum(float(c) * ho_plane_wave(float(k), x, t) for c, k in zip(seq.coeffs, seq.freqs))
        np.testing.assert_allclose(ho_evolve(seq, x, t), parts, rtol=1e-12)
