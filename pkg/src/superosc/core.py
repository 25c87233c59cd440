"""Superoscillating sequences: construction, evaluation, error envelopes, moments."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import BudgetExceeded, DomainError
from .precision import (
    PrecisionPolicy,
    as_fraction,
    phase_sum,
    phase_sum_grid,
    prototype_coeffs_double,
    prototype_coeffs_exact,
    prototype_coeffs_mp,
    resolve,
    prototype_cancellation_bits,
)


@dataclass(frozen=True, eq=False)
class SuperoscSequence:
    """Generalized Fourier sequence sum_j C_j exp(i k_j x).

    For the prototype family the coefficients are regenerated at whatever
    precision an evaluation needs, so ``coeffs`` (doubles) may overflow for
    very large n without affecting results.
    """

    n: int
    a: object
    freqs: np.ndarray
    coeffs: np.ndarray
    prototype: bool = False

    def __post_init__(self) -> None:
        if len(self.freqs) != self.n + 1 or len(self.coeffs) != self.n + 1:
            raise DomainError("a sequence of order n needs n+1 frequencies and coefficients")

    def __len__(self) -> int:
        return self.n + 1


@dataclass(frozen=True)
class ErrorReport:
    pointwise: float
    asymptotic: float
    sup_on_interval: float


@dataclass(frozen=True)
class QComplex:
    """Exact Gaussian rational re + i*im."""

    re: Fraction
    im: Fraction

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __mul__(self, other: "QComplex") -> "QComplex":
        return QComplex(self.re * other.re - self.im * other.im,
                        self.re * other.im + self.im * other.re)

    def __add__(self, other: "QComplex") -> "QComplex":
        return QComplex(self.re + other.re, self.im + other.im)

    @classmethod
    def i_power(cls, p: int) -> "QComplex":
        return [cls(Fraction(1), Fraction(0)), cls(Fraction(0), Fraction(1)),
                cls(Fraction(-1), Fraction(0)), cls(Fraction(0), Fraction(-1))][p % 4]


@dataclass(frozen=True)
class Verdict:
    verdict: str  # "yes" | "no" | "inconclusive"
    reason: str
    sup_errors: dict = field(default_factory=dict)
    semantics: str = ("yes iff every |k_j| <= alpha, |g(a)| > alpha and the sup-error on "
                      "[-M,M] ends below tol without increasing over the second half of the "
                      "schedule")


def _check_order(n: int) -> None:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise DomainError("n must be a positive integer (frequencies 1-2j/n need n >= 1)")


def coefficient(n: int, j: int, a, exact: bool = False,
                policy: PrecisionPolicy | None = None):
    """C_j(n,a) = (-1)^j/2^n binom(n,j) (a+1)^(n-j) (a-1)^j.

    ``exact=True`` returns a Fraction.  With an extended policy the value is an
    mpfr at the policy width; otherwise a correctly rounded float.
    """
    _check_order(n)
    if not 0 <= j <= n:
        raise DomainError(f"index j={j} outside [0, {n}]")
    q = as_fraction(a)
    value = Fraction((-1) ** j * math.comb(n, j)) * (q + 1) ** (n - j) * (q - 1) ** j / 2 ** n
    if exact:
        return value
    if policy is not None and policy.mode == "extended":
        bits = policy.significand_bits or 53
        return prototype_coeffs_mp(n, q, bits)[j]
    return float(value)


def build_prototype(n: int, a) -> SuperoscSequence:
    _check_order(n)
    freqs = 1.0 - 2.0 * np.arange(n + 1) / n
    with np.errstate(over="ignore"):
        coeffs = prototype_coeffs_double(n, a)
    return SuperoscSequence(n, a, freqs, coeffs, prototype=True)


def build_generalized(freq_rule: Callable[[int, int], float],
                      coeff_rule: Callable[[int, int, object], float],
                      n: int, a) -> SuperoscSequence:
    _check_order(n)
    freqs = np.array([float(freq_rule(j, n)) for j in range(n + 1)])
    coeffs = np.array([float(coeff_rule(j, n, a)) for j in range(n + 1)])
    return SuperoscSequence(n, a, freqs, coeffs)


def prototype_rules():
    """(freq_rule, coeff_rule) of the prototype family."""
    return (lambda j, n: 1.0 - 2.0 * j / n,
            lambda j, n, a: coefficient(n, j, a))


# ---------------------------------------------------------------------------
# evaluation


def _g_logmod_phase(n: int, a: float, x):
    u = np.asarray(x, dtype=float) / n
    s, c = np.sin(u), np.cos(u)
    logmod = 0.5 * n * np.log1p((a * a - 1.0) * s * s)
    phase = n * np.arctan2(a * s, c)
    return logmod, phase


def eval_product(n: int, a, x):
    """F_n(x,a) = (cos(x/n) + i a sin(x/n))^n via modulus and argument."""
    _check_order(n)
    logmod, phase = _g_logmod_phase(n, float(a), x)
    out = np.exp(logmod) * (np.cos(phase) + 1j * np.sin(phase))
    return complex(out) if np.ndim(out) == 0 else out


def modulus_product(n: int, a, x):
    """|F_n(x,a)| = (cos^2(x/n) + a^2 sin^2(x/n))^(n/2)."""
    logmod, _ = _g_logmod_phase(n, float(a), x)
    out = np.exp(logmod)
    return float(out) if np.ndim(out) == 0 else out


def eval_sum(seq: SuperoscSequence, x, policy: PrecisionPolicy | None = None):
    """sum_j C_j exp(i k_j x) under ``policy`` (auto-selected when None)."""
    if np.ndim(x) == 0:
        return phase_sum(seq, lambda ops: [0, ops.I * ops.num(float(x))], policy)
    return phase_sum_grid(seq, np.asarray(x, dtype=float), lambda ops: [], policy)


# ---------------------------------------------------------------------------
# error envelope

_SING_TOL = 1e-15


def _sin_minus_u_cos(u: np.ndarray) -> np.ndarray:
    """sin u - u cos u by its alternating series (|u| small)."""
    total = np.zeros_like(u)
    term = u ** 3 / 3.0  # k = 1 term: u^3 * 2/3!
    k = 1
    while True:
        total = total + term
        k += 1
        term = -term * u * u * (2 * k) / ((2 * k - 2) * (2 * k) * (2 * k + 1))
        if np.all(np.abs(term) <= 1e-18 * np.maximum(np.abs(total), 1e-300)) or k > 40:
            return total + term


def _atan_minus_z(z: np.ndarray) -> np.ndarray:
    """atan z - z by its series (|z| <= 1/2)."""
    total = np.zeros_like(z)
    z2 = z * z
    term = -z * z2 / 3.0
    power = -z * z2
    k = 1
    while True:
        total = total + term
        k += 1
        power = -power * z2
        term = power / (2 * k + 1)
        if np.all(np.abs(term) <= 1e-18 * np.maximum(np.abs(total), 1e-300)) or k > 80:
            return total + term


def _phase_excess(a: float, u: np.ndarray) -> np.ndarray:
    """atan(a tan u) - a u on the reduced branch |u| < pi/2, without cancellation."""
    t = np.tan(u)
    direct = np.arctan(a * t) - a * u
    small = np.abs(u) < 0.25
    if not np.any(small):
        return direct
    us = np.where(small, u, 0.0)
    ts = np.where(small, t, 0.0)
    tan_minus_u = _sin_minus_u_cos(us) / np.cos(us)
    z = a * ts
    zsmall = np.abs(z) <= 0.5
    atan_part = np.where(zsmall, _atan_minus_z(np.where(zsmall, z, 0.0)), np.arctan(z) - z)
    series = a * tan_minus_u + atan_part
    return np.where(small, series, direct)


def error_envelope(n: int, a, x):
    """E_n(x,a) = |F_n(x,a) - exp(iax)| from the law-of-cosines form.

    Uses E^2 = (1-r)^2 + 4 r sin^2(d/2) with r = |F_n| and d the phase gap
    n*Phi(x/n) - a x, where Phi is the continuous lift of arctan(a tan u).
    """
    _check_order(n)
    af = float(a)
    xs = np.asarray(x, dtype=float)
    u = xs / n
    if np.any(np.abs(np.cos(u)) < _SING_TOL):
        raise DomainError("x/n at an odd multiple of pi/2: arctan(a tan(x/n)) is singular")
    m = np.round(u / math.pi)
    ur = u - m * math.pi
    sigma = -1.0 if af < 0 else 1.0
    d = n * _phase_excess(af, ur) + n * m * math.pi * (sigma - af)
    L = 0.5 * n * np.log1p((af * af - 1.0) * np.sin(ur) ** 2)
    one_minus_r = -np.expm1(L)
    r = np.exp(L)
    out = np.hypot(one_minus_r, 2.0 * np.sqrt(r) * np.sin(0.5 * d))
    return float(out) if np.ndim(out) == 0 else out


def asymptotic_error(n: int, a, x) -> float:
    """Leading-order law |x|/n * sqrt(3/2 (a^2-1))."""
    return abs(float(x)) / n * math.sqrt(1.5 * max(float(a) ** 2 - 1.0, 0.0))


def sup_error(n: int, a, M: float) -> float:
    """max of E_n over [-M, M]: dense grid then bounded refinement at the argmax."""
    _check_order(n)
    if M <= 0:
        raise DomainError("M must be positive")
    if not n > 2 * M / math.pi:
        raise DomainError(f"need n > 2M/pi = {2 * M / math.pi:.6g}")
    count = max(1024, 32 * math.ceil(M * n))
    grid = np.linspace(-M, M, count)
    vals = error_envelope(n, a, grid)
    i = int(np.argmax(vals))
    best = float(vals[i])
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, count - 1)]
    if hi > lo:
        res = minimize_scalar(lambda t: -error_envelope(n, a, t), bounds=(lo, hi),
                              method="bounded", options={"xatol": 1e-12 * max(1.0, M)})
        best = max(best, -float(res.fun))
    return best


def error_report(n: int, a, x: float, M: float) -> ErrorReport:
    if abs(x) > M:
        raise DomainError("x must lie in [-M, M]")
    return ErrorReport(error_envelope(n, a, x), asymptotic_error(n, a, x), sup_error(n, a, M))


# ---------------------------------------------------------------------------
# derivatives and moments


def derivative(n: int, a, x, order: int = 1):
    """F_n' = n (g'/g) F_n and F_n'' = (n(n-1)(g'/g)^2 - 1/n) F_n; scalar or array x."""
    _check_order(n)
    if order not in (1, 2):
        raise DomainError("order must be 1 or 2")
    af = float(a)
    u = np.asarray(x, dtype=float) / n
    g = np.cos(u) + 1j * af * np.sin(u)
    if np.any(g == 0):
        raise DomainError("g_n(x) vanishes")
    ratio = (-np.sin(u) + 1j * af * np.cos(u)) / n / g
    F = eval_product(n, af, x)
    out = n * ratio * F if order == 1 else (n * (n - 1) * ratio * ratio - 1.0 / n) * F
    return complex(out) if np.ndim(x) == 0 else out


def taylor_moment(n: int, a, p: int, exact: bool = True):
    """F_n^(p)(0,a) = sum_k C_k(n,a) (i(1-2k/n))^p."""
    _check_order(n)
    if p < 0:
        raise DomainError("p must be non-negative")
    coeffs = prototype_coeffs_exact(n, a)
    real = sum((c * Fraction(n - 2 * k, n) ** p for k, c in enumerate(coeffs)), Fraction(0))
    value = QComplex.i_power(p) * QComplex(real, Fraction(0))
    return value if exact else complex(value)


MULTINOMIAL_BUDGET = 8


def _compositions(total: int, parts: int) -> Iterable[tuple[int, ...]]:
    for cut in itertools.combinations(range(total + parts - 1), parts - 1):
        edges = (-1,) + cut + (total + parts - 1,)
        yield tuple(edges[i + 1] - edges[i] - 1 for i in range(parts))


def multinomial_moment(n: int, a, p: int, exact: bool = True):
    """(i/n)^p sum over k_1+..+k_n = p of p!/prod k_i! * a^(#odd k_i), by enumeration."""
    _check_order(n)
    if p < 0:
        raise DomainError("p must be non-negative")
    if n > MULTINOMIAL_BUDGET or p > MULTINOMIAL_BUDGET:
        raise BudgetExceeded(
            f"enumeration budget is n, p <= {MULTINOMIAL_BUDGET}; got n={n}, p={p}")
    q = as_fraction(a)
    fact = [math.factorial(k) for k in range(p + 1)]
    total = Fraction(0)
    for ks in _compositions(p, n):
        weight = fact[p]
        for k in ks:
            weight //= fact[k]
        total += weight * q ** sum(k % 2 for k in ks)
    value = QComplex.i_power(p) * QComplex(total / Fraction(n) ** p, Fraction(0))
    return value if exact else complex(value)


# ---------------------------------------------------------------------------
# superoscillation verdicts


def check_superoscillation(family: Callable[[int], SuperoscSequence], target_g: float,
                           alpha_bound: float, M: float, tol: float,
                           n_schedule: Sequence[int]) -> Verdict:
    """Empirical test of the superoscillation definition along ``n_schedule``."""
    if abs(target_g) <= alpha_bound:
        return Verdict("no", f"|g(a)| = {abs(target_g)} does not exceed alpha = {alpha_bound}")
    errors = {}
    for n in n_schedule:
        seq = family(n)
        kmax = float(np.max(np.abs(seq.freqs)))
        if kmax > alpha_bound * (1 + 1e-12):
            return Verdict("no", f"n={n}: max |k_j| = {kmax} exceeds alpha = {alpha_bound}",
                           errors)
        errors[n] = _sup_distance(seq, target_g, M)
    vals = [errors[n] for n in n_schedule]
    tail = vals[len(vals) // 2:]
    settled = all(b <= a_ * (1 + 1e-9) for a_, b in zip(tail, tail[1:]))
    if vals[-1] < tol and settled:
        return Verdict("yes", f"sup-error {vals[-1]:.3e} < tol {tol}", errors)
    return Verdict("inconclusive", f"sup-error {vals[-1]:.3e} did not settle below tol {tol}",
                   errors)


def _sup_distance(seq: SuperoscSequence, g: float, M: float) -> float:
    if seq.prototype and float(seq.a) == g and seq.n > 2 * M / math.pi:
        return sup_error(seq.n, seq.a, M)
    grid = np.linspace(-M, M, max(1024, 32 * math.ceil(M * seq.n)))
    vals = eval_sum(seq, grid)
    return float(np.max(np.abs(vals - np.exp(1j * g * grid))))


def product_form_bits(n: int, a) -> int:
    """Significand width the binomial sum needs under the auto policy."""
    bits = resolve(PrecisionPolicy.extended(), prototype_cancellation_bits(n, a))
    return int(bits)
