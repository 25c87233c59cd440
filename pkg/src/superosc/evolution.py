"""Closed-form time evolution of superoscillating data.

Every law multiplies the plane wave exp(i k x) by a factor whose logarithm is a
polynomial in k, so ``psi_n`` is one call of the precision engine.  The limits
returned by ``limit`` are the n -> infinity closed forms.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr

from .core import SuperoscSequence, build_prototype, eval_sum
from .errors import ConvergenceError, DomainError
from .precision import DoubleOps, MpOps, PrecisionPolicy, phase_sum
from .quadrature import integrate

LAWS = ("free", "heat", "wave", "modified-p-even", "modified-p-odd", "powered-datum",
        "symbol-series", "oscillator", "oscillator-powered", "driven-oscillator", "formal")

COS_SINGULAR = 1e-8


def _ops(raw: bool):
    return MpOps() if raw else DoubleOps


def _i_power(p: int) -> complex:
    return (1, 1j, -1, -1j)[p % 4]


def _poly(ops, coeffs: dict[int, object]) -> list:
    """Dense coefficient list from {power: coefficient}."""
    deg = max(coeffs) if coeffs else 0
    return [coeffs.get(d, 0) for d in range(deg + 1)]


# ---------------------------------------------------------------------------
# free, heat, wave, p-th order


def free_evolve(seq: SuperoscSequence, x: float, t: float,
                policy: PrecisionPolicy | None = None, raw: bool = False):
    """sum_j C_j exp(i k_j x) exp(-i t k_j^2): solves i psi_t + psi_xx = 0."""
    return phase_sum(seq, lambda o: [0, o.I * o.num(x), -o.I * o.num(t)], policy, raw)


def free_limit(a: float, x: float, t: float) -> complex:
    return cmath.exp(1j * (a * x - a * a * t))


def heat_evolve(seq: SuperoscSequence, x: float, t: float,
                policy: PrecisionPolicy | None = None, raw: bool = False):
    """sum_j C_j exp(i k_j x - k_j^2 t): solves psi_t = psi_xx for t >= 0."""
    if t < 0:
        raise DomainError("backward heat evolution (t < 0) is ill-posed")
    return phase_sum(seq, lambda o: [0, o.I * o.num(x), -o.num(t)], policy, raw)


def heat_limit(a: float, x: float, t: float) -> complex:
    return math.exp(-a * a * t) * cmath.exp(1j * a * x)


def wave_evolve(seq: SuperoscSequence, x: float, t: float, c: float,
                policy: PrecisionPolicy | None = None, raw: bool = False):
    """d'Alembert: (Y_n(x - ct) + Y_n(x + ct)) / 2."""
    def y(s):
        return phase_sum(seq, lambda o: [0, o.I * o.num(s)], policy, raw)
    return (y(x - c * t) + y(x + c * t)) / 2


def wave_limit(a: float, x: float, t: float, c: float) -> complex:
    return cmath.exp(1j * a * x) * math.cos(a * c * t)


def _check_p(p: int) -> None:
    if not isinstance(p, (int, np.integer)) or p < 1:
        raise DomainError("p must be an integer >= 1")


def modified_evolve(seq: SuperoscSequence, x: float, t: float, p: int,
                    policy: PrecisionPolicy | None = None, raw: bool = False):
    """p even: sum C_k e^{ikx} e^{it(-ik)^p}; p odd: sum C_k e^{ikx} e^{t(-ik)^p}.

    The even law solves psi_t = i d^p psi; the odd closed form solves
    psi_t = -d^p psi.
    """
    _check_p(p)
    ip = _i_power(-p)  # (-i)^p

    def build(o):
        lead = o.I * o.num(t) * o.num(ip) if p % 2 == 0 else o.num(t) * o.num(ip)
        if p == 1:
            return [0, o.I * o.num(x) + lead]
        return _poly(o, {1: o.I * o.num(x), p: lead})
    return phase_sum(seq, build, policy, raw)


def modified_limit(a: float, x: float, t: float, p: int) -> complex:
    q = (-1j * a) ** p
    return cmath.exp((1j * t if p % 2 == 0 else t) * q + 1j * a * x)


def powered_datum_evolve(n: int, a, ell: int, p: int, x: float, t: float,
                         policy: PrecisionPolicy | None = None, raw: bool = False):
    """sum C_k e^{-ix k^l} e^{it(-i k^l)^p} for even p: solves psi_t = i d^p psi."""
    if ell < 1:
        raise DomainError("ell must be >= 1")
    _check_p(p)
    if p % 2:
        raise DomainError("the powered-datum law is defined for even p only")
    seq = build_prototype(n, a)
    ip = _i_power(-p)
    return phase_sum(seq, lambda o: _poly(o, {ell: -o.I * o.num(x),
                                              ell * p: o.I * o.num(t) * o.num(ip)}),
                     policy, raw)


def powered_datum_limit(a: float, ell: int, p: int, x: float, t: float) -> complex:
    """exp(-i a^l x) exp(i t (-i)^p a^(p l))."""
    return cmath.exp(-1j * a ** ell * x + 1j * t * _i_power(-p) * a ** (p * ell))


# ---------------------------------------------------------------------------
# symbol series


@dataclass(frozen=True)
class SymbolSeries:
    """G(z) = sum_p a_p z^p.

    A finite ``coeffs`` tuple with ``generator=None`` is a polynomial (entire,
    radius infinite).  An infinite series supplies ``generator(p) -> a_p`` and
    its radius of convergence.
    """

    coeffs: tuple = ()
    radius: float = math.inf
    generator: Callable[[int], complex] | None = None

    def __post_init__(self) -> None:
        if self.radius <= 0:
            raise DomainError("radius must be positive")
        if self.generator is None and not self.coeffs:
            raise DomainError("a symbol needs coefficients or a generator")

    def coefficient(self, p: int) -> complex:
        if self.generator is not None:
            return complex(self.generator(p))
        return complex(self.coeffs[p]) if p < len(self.coeffs) else 0j

    def truncated(self, truncation: int) -> list[complex]:
        top = truncation if self.generator is not None else min(truncation, len(self.coeffs) - 1)
        return [self.coefficient(p) for p in range(top + 1)]

    def root_test(self, lookback: int = 8, upto: int = 64) -> float:
        """Estimate limsup |a_p|^(1/p) from the last ``lookback`` available terms."""
        if self.generator is None:
            return 0.0
        ps = range(max(1, upto - lookback), upto + 1)
        return max(abs(self.coefficient(p)) ** (1.0 / p) for p in ps)

    def tail_bound(self, truncation: int, K: float) -> float:
        """Geometric bound on sum_{p > T} |a_p| K^p from the root-test estimate."""
        if self.generator is None:
            return 0.0 if truncation >= len(self.coeffs) - 1 else math.inf
        rho = self.root_test(upto=max(truncation, 16)) * K
        if rho >= 1:
            return math.inf
        return rho ** (truncation + 1) / (1 - rho)

    def __call__(self, z: complex, truncation: int) -> complex:
        return sum(c * z ** p for p, c in enumerate(self.truncated(truncation)))


def geometric_symbol(truncation: int | None = None) -> SymbolSeries:
    """1/(1-z): the infinite series (radius 1), or its degree-T polynomial truncation."""
    if truncation is None:
        return SymbolSeries(radius=1.0, generator=lambda p: 1.0)
    return SymbolSeries(coeffs=tuple([1.0] * (truncation + 1)))


def symbol_evolve(seq: SuperoscSequence, symbol: SymbolSeries, x: float, t: float,
                  truncation: int, tail_tol: float = 1e-12,
                  policy: PrecisionPolicy | None = None, raw: bool = False):
    """sum C_k e^{ikx} e^{itG(ik)}: solves psi_t = i G(d/dx) psi.

    Infinite series are truncated after ``truncation`` terms; the root-test
    tail bound (times |t|) must stay below ``tail_tol``.
    """
    K = float(np.max(np.abs(seq.freqs)))
    if K >= symbol.radius:
        raise DomainError(f"frequency {K} is not inside the symbol's radius {symbol.radius}")
    tail = symbol.tail_bound(truncation, K) * abs(t)
    if not tail <= tail_tol:
        raise ConvergenceError(
            f"symbol tail bound {tail:.3e} exceeds {tail_tol:g} at truncation {truncation} "
            f"(root-test estimate {symbol.root_test():.4g}, max |k| = {K})")
    coeffs = symbol.truncated(truncation)

    def build(o):
        terms = {1: o.I * o.num(x)}
        for p, c in enumerate(coeffs):
            terms[p] = terms.get(p, 0) + o.I * o.num(t) * o.num(complex(c) * _i_power(p))
        return _poly(o, terms)
    return phase_sum(seq, build, policy, raw)


def symbol_limit(symbol: SymbolSeries, a: float, x: float, t: float, truncation: int) -> complex:
    return cmath.exp(1j * t * symbol(1j * a, truncation) + 1j * a * x)


def gaussian_packet(x, t: float, x0: float, k0: float, delta0: float):
    """Free evolution (i psi_t + psi_xx = 0) of exp(-(x-x0)^2/(2 D^2) + i k0 x).

    With s = D^2 + 2it the packet is (D^2/s)^(1/2) exp(i k0 x - i k0^2 t - (x-x0-2k0t)^2/(2s)):
    centre x0 + 2 k0 t, spread^2 = D^2 + 4t^2/D^2, and the L2 norm is conserved.
    """
    if not delta0 > 0:
        raise DomainError("initial spread must be positive")
    s = delta0 * delta0 + 2j * t
    xs = np.asarray(x, dtype=float)
    out = np.sqrt(delta0 * delta0 / s) * np.exp(1j * k0 * xs - 1j * k0 * k0 * t
                                                 - (xs - x0 - 2 * k0 * t) ** 2 / (2 * s))
    return complex(out) if np.ndim(x) == 0 else out


def gaussian_packet_spread(t: float, delta0: float) -> float:
    return math.sqrt(delta0 ** 2 + 4 * t * t / delta0 ** 2)


# ---------------------------------------------------------------------------
# harmonic oscillator


def _cos_checked(t: float) -> float:
    c = math.cos(t)
    if abs(c) < COS_SINGULAR:
        raise DomainError(f"cos t = {c:.3e}: the oscillator propagator is singular here")
    return c


def _prefactor(o, t):
    """(cos t)^(-1/2), principal branch."""
    c = o.cos(o.num(t))
    if o.mp:
        return gmpy2.sqrt(mpc(c)) ** -1
    return cmath.sqrt(c) ** -1


def ho_plane_wave(a: float, x: float, t: float, raw: bool = False):
    """(cos t)^(-1/2) exp(-(i/2)(x^2 + a^2) tan t + i a x / cos t)."""
    _cos_checked(t)
    o = _ops(raw)
    X, T, A = o.num(x), o.num(t), o.num(a)
    tan = o.tan(T)
    phase = -(X * X + A * A) * tan / 2 + A * X / o.cos(T)
    e = gmpy2.exp(mpc(0, phase)) if raw else cmath.exp(1j * phase)
    return _prefactor(o, t) * e


def ho_evolve(seq: SuperoscSequence, x: float, t: float,
              policy: PrecisionPolicy | None = None, raw: bool = False):
    """Oscillator i psi_t = (-psi_xx + x^2 psi)/2 from the datum sum C_k e^{ikx}."""
    _cos_checked(t)
    o = _ops(raw)
    X, T = o.num(x), o.num(t)
    s = phase_sum(seq, lambda q: [0, q.I * q.num(x) / q.cos(q.num(t)),
                                  -q.I * q.tan(q.num(t)) / 2], policy, raw)
    chirp = -X * X * o.tan(T) / 2
    e = gmpy2.exp(mpc(0, chirp)) if raw else cmath.exp(1j * chirp)
    return _prefactor(o, t) * e * s


def ho_limit(a: float, x: float, t: float) -> complex:
    return ho_plane_wave(a, x, t)


def ho_powered_evolve(n: int, a, p: int, x: float, t: float,
                      policy: PrecisionPolicy | None = None, raw: bool = False):
    """Oscillator evolution of the datum sum C_k exp(i x (-ik)^p), p even."""
    _check_p(p)
    if p % 2:
        raise DomainError("the powered oscillator law is defined for even p only")
    _cos_checked(t)
    seq = build_prototype(n, a)
    ip = _i_power(-p)  # (-i)^p is real for even p
    o = _ops(raw)
    X, T = o.num(x), o.num(t)
    s = phase_sum(seq, lambda q: _poly(q, {
        p: q.I * q.num(x) * q.num(ip.real) / q.cos(q.num(t)),
        2 * p: -q.I * q.tan(q.num(t)) / 2}), policy, raw)
    chirp = -X * X * o.tan(T) / 2
    e = gmpy2.exp(mpc(0, chirp)) if raw else cmath.exp(1j * chirp)
    return _prefactor(o, t) * e * s


def ho_powered_limit(a: float, p: int, x: float, t: float) -> complex:
    c = _cos_checked(t)
    q = ((-1j * a) ** p).real
    return cmath.sqrt(c) ** -1 * cmath.exp(-0.5j * (x * x + a ** (2 * p)) * math.tan(t)
                                           + 1j * q * x / c)


# ---------------------------------------------------------------------------
# driven oscillator


@dataclass(frozen=True)
class DrivenOscillatorConfig:
    """H = -hbar^2/(2m) d^2 + m w^2 x^2 / 2 + f(t) x, datum exp(i a p x / hbar)."""

    m: float = 1.0
    omega: float = 1.0
    hbar: float = 1.0
    p: float = 1.0
    f: Callable[[float], float] = field(default=lambda s: 0.0)
    quad_tol: float = 1e-10

    def __post_init__(self) -> None:
        if self.m <= 0 or self.omega <= 0 or self.hbar <= 0:
            raise DomainError("m, omega and hbar must be positive")
        if self.quad_tol <= 0:
            raise DomainError("quad_tol must be positive")


def driven_I(cfg: DrivenOscillatorConfig, t: float, t0: float) -> float:
    """I(t,t0) = (1/(m w)) int_{t0}^{t} f(s) sin w(s - t0) ds."""
    w = cfg.omega
    return float(integrate(lambda s: cfg.f(s) * math.sin(w * (s - t0)), t0, t,
                           cfg.quad_tol * cfg.m * w).real) / (cfg.m * w)


def driven_J(cfg: DrivenOscillatorConfig, t: float, t0: float) -> float:
    """J(t,t0) = (1/(m w)^2) int_{t0}^{t} int_{t0}^{s} f(s) f(s') sin w(t-s) sin w(s'-t0) ds' ds."""
    w, mw = cfg.omega, cfg.m * cfg.omega
    span = abs(t - t0) or 1.0
    inner_tol = cfg.quad_tol * mw * mw / (4 * span)

    def outer(s):
        fs = cfg.f(s)
        if fs == 0:
            return 0.0
        inner = integrate(lambda u: cfg.f(u) * math.sin(w * (u - t0)), t0, s, inner_tol)
        return fs * math.sin(w * (t - s)) * inner
    return float(integrate(outer, t0, t, cfg.quad_tol * mw * mw / 2).real) / (mw * mw)


@dataclass(frozen=True)
class _DrivenIntegrals:
    C: float  # int_0^tau f cos(w s) ds
    S: float  # int_0^tau f sin(w s) ds
    K: float  # int_0^tau f(s) sin(w s) C(s) ds


def _driven_integrals(cfg: DrivenOscillatorConfig, t: float, t0: float) -> _DrivenIntegrals:
    w, tol = cfg.omega, cfg.quad_tol
    tau = t - t0

    def f(s):
        return cfg.f(s + t0)

    tau = float(tau)
    C = integrate(lambda s: f(s) * math.cos(w * s), 0.0, tau, tol).real
    S = integrate(lambda s: f(s) * math.sin(w * s), 0.0, tau, tol).real
    span = abs(tau) or 1.0

    def k_integrand(s):
        fs = f(s)
        if fs == 0:
            return 0.0
        return fs * math.sin(w * s) * integrate(lambda u: f(u) * math.cos(w * u), 0.0, s,
                                                tol / (4 * span)).real
    K = integrate(k_integrand, 0.0, tau, tol / 2).real
    return _DrivenIntegrals(float(C), float(S), float(K))


def _driven_exponent(cfg: DrivenOscillatorConfig, x: float, t: float, t0: float, o,
                     ints: _DrivenIntegrals) -> list:
    """Coefficients in kappa of (i/hbar) * phase for the datum exp(i kappa p x / hbar)."""
    m, w, hb, p = cfg.m, cfg.omega, cfg.hbar, cfg.p
    tau = o.num(t - t0)
    c, tn = o.cos(o.num(w) * tau), o.tan(o.num(w) * tau)
    X = o.num(x)
    C, S, K = o.num(ints.C), o.num(ints.S), o.num(ints.K)
    mw = o.num(m * w)
    k0 = -mw / 2 * tn * X * X - C * X / c - C * C * tn / (2 * mw) + K / mw
    k1 = o.num(p) * X / c + o.num(p) * (C * tn - S) / mw
    k2 = -o.num(p * p) * tn / (2 * mw)
    scale = o.I / o.num(hb)
    return [scale * k0, scale * k1, scale * k2]


def driven_ho_plane_wave(cfg: DrivenOscillatorConfig, a: float, x: float, t: float,
                         t0: float = 0.0, form: str = "derived", raw: bool = False):
    """Driven oscillator from the plane wave exp(i a p x / hbar) given at t0.

    ``form="derived"`` is the closed form verified against the Schroedinger
    equation; ``form="ij-display"`` is the display written with I and J.
    """
    _cos_checked(cfg.omega * (t - t0))
    if form == "ij-display":
        return _driven_ij(cfg, a, x, t, t0)
    if form != "derived":
        raise DomainError(f"unknown form {form!r}")
    o = _ops(raw)
    b = _driven_exponent(cfg, x, t, t0, o, _driven_integrals(cfg, t, t0))
    A = o.num(a)
    e = b[0] + b[1] * A + b[2] * A * A
    ex = gmpy2.exp(e) if raw else cmath.exp(e)
    return _prefactor(o, cfg.omega * (t - t0)) * ex


def _driven_ij(cfg: DrivenOscillatorConfig, a: float, x: float, t: float, t0: float) -> complex:
    m, w, hb, p = cfg.m, cfg.omega, cfg.hbar, cfg.p
    tau = t - t0
    s, c = math.sin(w * tau), math.cos(w * tau)
    if abs(s) < COS_SINGULAR:
        raise DomainError("the I/J display is singular at sin(w(t - t0)) = 0")
    I_t0, I_0t = driven_I(cfg, t, t0), driven_I(cfg, t0, t)
    J = driven_J(cfg, t, t0)
    bracket = (-(x - a * p * s / (m * w) - I_0t) ** 2 / c + x * x * c + 2 * x * I_t0 - 2 * J)
    return cmath.sqrt(c) ** -1 * cmath.exp(1j * m * w / (2 * hb * s) * bracket)


def driven_ho_evolve(cfg: DrivenOscillatorConfig, datum, x: float, t: float, t0: float = 0.0,
                     policy: PrecisionPolicy | None = None, raw: bool = False):
    """Evolve a plane wave (float ``a``) or a sequence sum C_k exp(i k p x / hbar)."""
    if not isinstance(datum, SuperoscSequence):
        return driven_ho_plane_wave(cfg, float(datum), x, t, t0, raw=raw)
    _cos_checked(cfg.omega * (t - t0))
    ints = _driven_integrals(cfg, t, t0)
    o = _ops(raw)
    s = phase_sum(datum, lambda q: _driven_exponent(cfg, x, t, t0, q, ints), policy, raw)
    return _prefactor(o, cfg.omega * (t - t0)) * s


# ---------------------------------------------------------------------------
# formal solutions


def formal_solution(seq: SuperoscSequence, r: int, nu: int, p: int,
                    A: Callable[[int], complex] | None, x: float, t: float,
                    m_max: int = 200, tol: float = 1e-12, a1: complex | None = None,
                    policy: PrecisionPolicy | None = None, raw: bool = False):
    """sum_m t^(rm+rv-1) A(m)/(rm+rv-1)! d^(pm)/dx^(pm) of the datum, applied per summand.

    With r = nu = 1 and ``a1`` given (A(m) = a1^m) the series sums to
    exp(t a1 (ik)^p) and the engine is used directly.
    """
    if r < 1 or nu < 1:
        raise DomainError("r and nu must be >= 1")
    _check_p(p)
    if a1 is not None:
        if r != 1 or nu != 1:
            raise DomainError("the built-in A(m) = a1^m closed form needs r = nu = 1")
        ip = _i_power(p)
        return phase_sum(seq, lambda o: _poly(o, {1: o.I * o.num(x),
                                                  p: o.num(complex(a1) * ip) * o.num(t)}),
                         policy, raw)
    if A is None:
        raise DomainError("supply A(m) or a1")
    K = float(np.max(np.abs(seq.freqs)))
    base = r * nu - 1
    terms, bound = _formal_terms(A, r, base, p, t, K, m_max, tol)
    if bound > tol:
        raise ConvergenceError(f"formal series tail bound {bound:.3e} > tol {tol:g} "
                               f"at m_max={m_max}")
    # each summand: e^{ikx} * sum_m w_m (ik)^(pm)
    from .precision import resolve, sum_cancellation_bits
    bits = resolve(policy, sum_cancellation_bits(seq, lambda o: [0, o.I * o.num(x)]))
    prec = (bits or 53) + 32
    with gmpy2.context(precision=prec):
        from .precision import prototype_coeffs_mp
        coeffs = (prototype_coeffs_mp(seq.n, seq.a, prec) if seq.prototype
                  else [mpfr(float(c)) for c in seq.coeffs])
        freqs = ([mpfr(seq.n - 2 * j) / seq.n for j in range(seq.n + 1)] if seq.prototype
                 else [mpfr(float(k)) for k in seq.freqs])
        w = [mpc(complex(v)) for v in terms]
        total = mpc(0)
        X = mpfr(x)
        for c, k in zip(coeffs, freqs):
            z = (mpc(0, 1) * k) ** p
            acc, zm = mpc(0), mpc(1)
            for wm in w:
                acc += wm * zm
                zm *= z
            total += c * gmpy2.exp(mpc(0, 1) * k * X) * acc
        return total if raw else complex(total)


def _formal_terms(A, r, base, p, t, K, m_max, tol):
    """Weights t^(rm+base) A(m)/(rm+base)! and a tail bound on the dropped terms."""
    out = []
    mags = []
    for m in range(m_max + 1):
        e = r * m + base
        wm = complex(A(m)) * (t ** e if e else 1.0) / math.factorial(e)
        out.append(wm)
        mags.append(abs(wm) * K ** (p * m))
        if m >= 3 and max(mags[-3:]) < tol * 1e-3:
            ratio = max(mags[-1] / mags[-2] if mags[-2] else 0.0, 0.0)
            if ratio < 0.5:
                return out, 2 * mags[-1]
    last = mags[-1]
    ratio = mags[-1] / mags[-2] if len(mags) > 1 and mags[-2] else 1.0
    bound = math.inf if ratio >= 1 else last * ratio / (1 - ratio)
    return out, bound


# ---------------------------------------------------------------------------
# state objects, residuals, periodicity


@dataclass(frozen=True)
class EvolvedState:
    """A closed-form evaluator psi_n(x,t) under a named law."""

    law: str
    seq: SuperoscSequence
    params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.law not in LAWS:
            raise DomainError(f"unknown law {self.law!r}")

    def __call__(self, x: float, t: float, policy: PrecisionPolicy | None = None,
                 raw: bool = False):
        s, P = self.seq, self.params
        law = self.law
        if law == "free":
            return free_evolve(s, x, t, policy, raw)
        if law == "heat":
            return heat_evolve(s, x, t, policy, raw)
        if law == "wave":
            return wave_evolve(s, x, t, P.get("c", 1.0), policy, raw)
        if law in ("modified-p-even", "modified-p-odd"):
            return modified_evolve(s, x, t, P["p"], policy, raw)
        if law == "powered-datum":
            return powered_datum_evolve(s.n, s.a, P["ell"], P["p"], x, t, policy, raw)
        if law == "symbol-series":
            return symbol_evolve(s, P["symbol"], x, t, P["truncation"],
                                 P.get("tail_tol", 1e-12), policy, raw)
        if law == "oscillator":
            return ho_evolve(s, x, t, policy, raw)
        if law == "oscillator-powered":
            return ho_powered_evolve(s.n, s.a, P["p"], x, t, policy, raw)
        if law == "driven-oscillator":
            return driven_ho_evolve(P["config"], s, x, t, P.get("t0", 0.0), policy, raw)
        return formal_solution(s, P.get("r", 1), P.get("nu", 1), P["p"], P.get("A"), x, t,
                               P.get("m_max", 200), P.get("tol", 1e-12), P.get("a1"),
                               policy, raw)

    def limit(self, x: float, t: float) -> complex:
        a, P, law = float(self.seq.a), self.params, self.law
        if law == "free":
            return free_limit(a, x, t)
        if law == "heat":
            return heat_limit(a, x, t)
        if law == "wave":
            return wave_limit(a, x, t, P.get("c", 1.0))
        if law in ("modified-p-even", "modified-p-odd"):
            return modified_limit(a, x, t, P["p"])
        if law == "powered-datum":
            return powered_datum_limit(a, P["ell"], P["p"], x, t)
        if law == "symbol-series":
            return symbol_limit(P["symbol"], a, x, t, P["truncation"])
        if law == "oscillator":
            return ho_limit(a, x, t)
        if law == "oscillator-powered":
            return ho_powered_limit(a, P["p"], x, t)
        if law == "driven-oscillator":
            return driven_ho_plane_wave(P["config"], a, x, t, P.get("t0", 0.0))
        if P.get("a1") is not None and P["p"]:
            return cmath.exp(t * complex(P["a1"]) * (1j * a) ** P["p"] + 1j * a * x)
        raise DomainError("no closed-form limit for a general A(m)")

    def residual(self, x: float, t: float, h: float = 1e-4, bits: int = 160) -> float:
        """|L psi| for the governing equation by centered differences.

        Stencil values and differences are carried in extended precision, so
        only the O(h^2) truncation error remains.
        """
        from .precision import resolve, sum_cancellation_bits
        need = resolve(PrecisionPolicy.extended(),
                       sum_cancellation_bits(self.seq, lambda o: [0]))
        prec = max(bits, need + 96)
        pol = PrecisionPolicy.extended(prec)
        with gmpy2.context(precision=prec):
            H = mpfr(h)
            X0, T0 = mpfr(x), mpfr(t)

            def psi(dx=0, dt=0):
                return self(X0 + dx * H, T0 + dt * H, pol, raw=True)

            def dx_n(q):
                stencils = {1: {-1: -0.5, 1: 0.5}, 2: {-1: 1, 0: -2, 1: 1},
                            3: {-2: -0.5, -1: 1, 1: -1, 2: 0.5},
                            4: {-2: 1, -1: -4, 0: 6, 1: -4, 2: 1},
                            5: {-3: -0.5, -2: 2, -1: -2.5, 1: 2.5, 2: -2, 3: 0.5},
                            6: {-3: 1, -2: -6, -1: 15, 0: -20, 1: 15, 2: -6, 3: 1}}
                if q == 0:
                    return psi()
                if q not in stencils:
                    raise DomainError(f"no difference stencil for derivative order {q}")
                return sum((mpfr(wgt) * psi(dx=s) for s, wgt in stencils[q].items()),
                           mpc(0)) / H ** q

            dt = (psi(dt=1) - psi(dt=-1)) / (2 * H)
            I = mpc(0, 1)
            X = mpfr(x)
            law, P = self.law, self.params
            if law == "free":
                res = I * dt + dx_n(2)
            elif law == "heat":
                res = dt - dx_n(2)
            elif law == "wave":
                dtt = (psi(dt=1) - 2 * psi() + psi(dt=-1)) / H ** 2
                res = dtt - mpfr(P.get("c", 1.0)) ** 2 * dx_n(2)
            elif law in ("modified-p-even", "powered-datum"):
                res = dt - I * dx_n(P["p"])
            elif law == "modified-p-odd":
                res = dt + dx_n(P["p"])
            elif law == "symbol-series":
                coeffs = P["symbol"].truncated(P["truncation"])
                res = dt - I * sum((mpc(c) * dx_n(q) for q, c in enumerate(coeffs)), mpc(0))
            elif law in ("oscillator", "oscillator-powered"):
                res = I * dt - (-dx_n(2) + X * X * psi()) / 2
            elif law == "driven-oscillator":
                cfg = P["config"]
                hb, m, w = mpfr(cfg.hbar), mpfr(cfg.m), mpfr(cfg.omega)
                res = (I * hb * dt + hb * hb / (2 * m) * dx_n(2)
                       - (m * w * w * X * X / 2 + mpfr(cfg.f(float(t))) * X) * psi())
            else:
                raise DomainError("residual needs a differential law")
            return float(abs(res))


def periodicity_witness(state: EvolvedState, X: float, t: float, x: float,
                        tol: float = 1e-12) -> tuple[complex, complex]:
    """(psi(t, x + X), psi(t, x)) for an X-periodic datum."""
    seq = state.seq
    k = np.asarray(seq.freqs, dtype=float)
    active = np.asarray(seq.coeffs, dtype=float) != 0
    phase = k[active] * X / (2 * math.pi)
    if np.any(np.abs(phase - np.round(phase)) > tol * np.maximum(1.0, np.abs(phase))):
        raise DomainError("the datum is not X-periodic: some k_j X is not in 2 pi Z")
    return state(x + X, t), state(x, t)


# ---------------------------------------------------------------------------
# error split of the free evolution


@dataclass(frozen=True)
class ErrorSplit:
    Z: complex
    W: complex
    eps1: float
    eps2: float


def free_error_split(n: int, a, x: float, t: float,
                     policy: PrecisionPolicy | None = None) -> ErrorSplit:
    """psi_n - e^{i(ax - a^2 t)} = Z_n + W_n with Z_n = psi_n - F_n(x - at)."""
    from .core import eval_product
    seq = build_prototype(n, a)
    af = float(a)
    psi = free_evolve(seq, x, t, policy)
    F = eval_product(n, af, x - af * t)
    Z = psi - F
    W = F - cmath.exp(1j * (af * x - af * af * t))
    eps1 = abs(x - af * t) / n * math.sqrt(1.5 * max(af * af - 1.0, 0.0))
    eps2 = abs(t) * (af ** 3 + af)
    return ErrorSplit(Z, W, eps1, eps2)


def split_phase_terms(n: int, a, t: float, sign: int = -1):
    """Per-summand modulus and phase of e^{s i t k^2} - e^{s i a t k}, s = ``sign``.

    Returns (rho, theta, defined) arrays.  rho^2 = 2 - 2 cos(t k^2 - a t k); theta
    is undefined where the two phases coincide and those summands contribute 0.
    """
    k = 1.0 - 2.0 * np.arange(n + 1) / n
    af = float(a)
    alpha = sign * t * k * k
    beta = sign * af * t * k
    half = 0.5 * (alpha - beta)
    rho = 2.0 * np.abs(np.sin(half))
    defined = rho > 1e-300
    theta = 0.5 * (alpha + beta) + 0.5 * math.pi + np.where(np.sin(half) < 0, math.pi, 0.0)
    return rho, np.where(defined, theta, 0.0), defined


def split_reconstruction(n: int, a, x: float, t: float, sign: int = -1, bits: int | None = None):
    """sum_k C_k rho_k e^{i(k x + theta_k)} evaluated in extended precision."""
    from .precision import prototype_cancellation_bits, prototype_coeffs_mp, required_bits
    rho, theta, defined = split_phase_terms(n, a, t, sign)
    prec = (bits or required_bits(prototype_cancellation_bits(n, a))) + 32
    with gmpy2.context(precision=prec):
        coeffs = prototype_coeffs_mp(n, a, prec)
        total = mpc(0)
        X, T, A = mpfr(x), mpfr(t), mpfr(float(a))
        for j, c in enumerate(coeffs):
            if not defined[j]:
                continue
            k = mpfr(n - 2 * j) / n
            al, be = sign * T * k * k, sign * A * T * k
            half = (al - be) / 2
            s = gmpy2.sin(half)
            th = (al + be) / 2 + gmpy2.const_pi() / 2 + (gmpy2.const_pi() if s < 0 else 0)
            total += c * 2 * abs(s) * gmpy2.exp(mpc(0, k * X + th))
        return complex(total)
