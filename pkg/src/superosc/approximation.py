"""Standard approximating sequences, band-limited error bounds and Dirichlet series.

Fourier convention: psi(x) = (1/2pi) int psi_hat(l) e^{i l x} dl.  Under it
sum_j C_j psi(x + k_j) = (1/2pi) int psi_hat(l) F_n(l, a) e^{i l x} dl, which is
both the stable way to evaluate the sequence and the source of every bound here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr
from scipy.optimize import minimize_scalar

from .core import build_prototype, error_envelope, eval_product, eval_sum
from .errors import DomainError, PrecisionViolation
from .precision import (PrecisionPolicy, prototype_cancellation_bits, prototype_coeffs_double,
                        prototype_coeffs_mp, resolve)

FOURIER_FACTOR = 1.0 / (2.0 * math.pi)


@dataclass(frozen=True)
class BandLimitedFunction:
    """psi_hat sampled on the uniform grid -B, -B + h, ..., B (zero outside)."""

    B: float
    hat_samples: np.ndarray
    grid_step: float

    def __post_init__(self) -> None:
        if self.B <= 0 or self.grid_step <= 0:
            raise DomainError("support half-width and grid step must be positive")
        count = round(2 * self.B / self.grid_step) + 1
        if len(self.hat_samples) != count or abs((count - 1) * self.grid_step - 2 * self.B) > 1e-9 * self.B:
            raise DomainError("samples must cover [-B, B] on the stated uniform grid")

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(-self.B, self.B, len(self.hat_samples))

    @classmethod
    def from_hat(cls, hat: Callable[[np.ndarray], np.ndarray], B: float,
                 count: int = 4097) -> "BandLimitedFunction":
        grid = np.linspace(-B, B, count)
        return cls(B, np.asarray(hat(grid), dtype=complex), 2 * B / (count - 1))

    def integral(self, values: np.ndarray) -> tuple[complex, float]:
        """Trapezoid with one Richardson step; returns (value, error estimate)."""
        h = self.grid_step
        fine = h * (values.sum(axis=-1) - 0.5 * (values[..., 0] + values[..., -1]))
        if values.shape[-1] % 2 == 0 or values.shape[-1] < 5:
            return fine, math.inf
        v2 = values[..., ::2]
        coarse = 2 * h * (v2.sum(axis=-1) - 0.5 * (v2[..., 0] + v2[..., -1]))
        return (4 * fine - coarse) / 3, float(np.max(np.abs(fine - coarse))) / 3

    def l1_norm(self) -> tuple[float, float]:
        val, err = self.integral(np.abs(self.hat_samples))
        return float(np.real(val)), err

    def __call__(self, x, k: int = 0):
        """psi^(k)(x) by quadrature of the spectrum."""
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        lam = self.grid
        vals = self.hat_samples * (1j * lam) ** k * np.exp(1j * np.outer(xs, lam))
        out, _ = self.integral(vals)
        out = FOURIER_FACTOR * out
        return complex(out[0]) if np.ndim(x) == 0 else out


# ---------------------------------------------------------------------------
# test corpus with closed forms usable in extended precision


def fejer_hat(B: float = 1.0):
    """Triangle (1 - |l|/B)_+ / B: unit L1 mass."""
    return lambda lam: np.clip(1.0 - np.abs(lam) / B, 0.0, None) / B


def fejer(x, B: float = 1.0, k: int = 0):
    """Inverse transform of the unit-mass triangle on [-B, B]: (1/2pi) sinc^2(Bx/2)."""
    if k:
        raise DomainError("closed-form Fejer derivatives are not provided; use the spectrum")
    if isinstance(x, (type(mpfr(0)), type(mpc(0)))):
        u = x * B / 2
        if abs(u) < mpfr(2) ** -20:
            s = 1 - u * u / 3 + 2 * u ** 4 / 45
        else:
            s = (gmpy2.sin(u) / u) ** 2
        return s / (2 * gmpy2.const_pi())
    u = np.asarray(x, dtype=float) * B / 2
    return np.sinc(u / np.pi) ** 2 / (2 * np.pi)


def raised_cosine_hat(B: float = 1.0):
    return lambda lam: np.where(np.abs(lam) <= B, 0.5 * (1 + np.cos(np.pi * lam / B)), 0.0) / B


def bump_hat(B: float = 1.0):
    def hat(lam):
        lam = np.asarray(lam, dtype=float)
        inside = np.abs(lam) < B
        z = np.where(inside, (lam / B) ** 2, 0.0)
        return np.where(inside, np.exp(-1.0 / np.where(inside, 1 - z, 1.0)), 0.0)
    return hat


def corpus(B: float = 1.0, count: int = 4097) -> dict[str, BandLimitedFunction]:
    return {name: BandLimitedFunction.from_hat(h, B, count)
            for name, h in (("fejer", fejer_hat(B)), ("raised-cosine", raised_cosine_hat(B)),
                            ("bump", bump_hat(B)))}


# ---------------------------------------------------------------------------
# standard approximating sequence


def standard_approx(psi, n: int, a, x, k: int = 0, shifts: Sequence | None = None,
                    L: float = 1.0, policy: PrecisionPolicy | None = None,
                    method: str = "auto"):
    """phi(x) = sum over shift values s of sum_j C_j(n, s) psi^(k)(x + k_j L).

    ``psi`` is a BandLimitedFunction (evaluated through the integral
    representation, which needs no cancellation control) or a callable
    ``psi(x)`` / ``psi(x, k)``.  A callable is summed directly, so beyond 13
    bits of cancellation it must accept and return gmpy2 numbers.
    """
    shifts = [a] if shifts is None else list(shifts)
    if method == "auto":
        method = "spectral" if isinstance(psi, BandLimitedFunction) else "direct"
    if method == "spectral":
        if not isinstance(psi, BandLimitedFunction):
            raise DomainError("the spectral method needs a BandLimitedFunction")
        return _spectral_approx(psi, n, shifts, x, k, L)
    if method != "direct":
        raise DomainError(f"unknown method {method!r}")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros(xs.shape, dtype=complex)
    for s in shifts:
        out += _direct_approx(psi, n, s, xs, k, L, policy)
    return complex(out[0]) if np.ndim(x) == 0 else out


def _call(psi, x, k):
    return psi(x, k) if k else psi(x)


def _direct_approx(psi, n, a, xs, k, L, policy):
    bits = resolve(policy, prototype_cancellation_bits(n, a))
    freqs = 1.0 - 2.0 * np.arange(n + 1) / n
    if bits is None:
        coeffs = prototype_coeffs_double(n, a)
        vals = np.array([[_call(psi, xv + kj * L, k) for kj in freqs] for xv in xs],
                        dtype=complex)
        return np.array([_compensated_dot(coeffs, v) for v in vals])
    out = []
    with gmpy2.context(precision=bits + 32):
        coeffs = prototype_coeffs_mp(n, a, bits + 32)
        Lm = mpfr(L)
        for xv in xs:
            total = mpc(0)
            X = mpfr(xv)
            for j, c in enumerate(coeffs):
                v = _call(psi, X + (mpfr(n - 2 * j) / n) * Lm, k)
                if not isinstance(v, (type(mpfr(0)), type(mpc(0)))):
                    raise PrecisionViolation(
                        "the sum needs extended precision but psi returned a double; "
                        "supply a gmpy2-capable callable or a BandLimitedFunction")
                total += c * v
            out.append(complex(total))
    return np.array(out)


def _compensated_dot(coeffs: np.ndarray, values: np.ndarray) -> complex:
    from .kernels import neumaier_sum
    prod = coeffs * values
    return complex(neumaier_sum(np.ascontiguousarray(prod.real)),
                   neumaier_sum(np.ascontiguousarray(prod.imag)))


def _spectral_approx(psi: BandLimitedFunction, n, shifts, x, k, L):
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    lam = psi.grid
    mult = sum(eval_product(n, float(s), lam * L) for s in shifts)
    vals = psi.hat_samples * mult * (1j * lam) ** k * np.exp(1j * np.outer(xs, lam))
    out, _ = psi.integral(vals)
    out = FOURIER_FACTOR * out
    return complex(out[0]) if np.ndim(x) == 0 else out


# ---------------------------------------------------------------------------
# bounds


def _sup_weighted_envelope(n: int, a, B: float, k: int) -> float:
    count = max(1024, 32 * math.ceil(B * n))
    grid = np.linspace(-B, B, count)
    vals = np.abs(grid) ** k * error_envelope(n, a, grid)
    i = int(np.argmax(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, count - 1)]
    res = minimize_scalar(lambda s: -abs(s) ** k * error_envelope(n, a, s), bounds=(lo, hi),
                          method="bounded", options={"xatol": 1e-12})
    return max(float(vals[i]), -float(res.fun))


def bandlimited_error_bound(psi: BandLimitedFunction, n: int, a, k: int = 0) -> float:
    """(1/2pi) * sup_{|l| <= B} |l|^k E_n(l, a) * int |psi_hat|."""
    if not psi.B / n < math.pi / 2:
        raise DomainError(f"support B={psi.B} too wide for n={n}: need B/n < pi/2")
    l1, err = psi.l1_norm()
    return FOURIER_FACTOR * _sup_weighted_envelope(n, a, psi.B, k) * (l1 + err)


def xgamma_bound(n: int, a, gamma: float) -> float:
    """(1 + a^n) gamma / (2 pi) for psi with int |psi_hat| = gamma."""
    if gamma <= 0:
        raise DomainError("gamma must be positive")
    return (1.0 + float(a) ** n) * gamma * FOURIER_FACTOR


def ualpha(alpha: float, x):
    if alpha <= 0:
        raise DomainError("alpha must be positive")
    if isinstance(x, (type(mpfr(0)), type(mpc(0)))):
        return x * gmpy2.exp(-alpha * x * x)
    x = np.asarray(x, dtype=float)
    return x * np.exp(-alpha * x * x)


def ualpha_hat(alpha: float, lam):
    """-(i l / 2 alpha) sqrt(pi/alpha) exp(-l^2 / 4 alpha)."""
    if alpha <= 0:
        raise DomainError("alpha must be positive")
    lam = np.asarray(lam, dtype=float)
    return -(1j * lam / (2 * alpha)) * np.sqrt(np.pi / alpha) * np.exp(-lam * lam / (4 * alpha))


def ualpha_l1(alpha: float) -> float:
    return 2.0 * math.sqrt(math.pi / alpha)


def ualpha_bound(n: int, a, alpha: float) -> float:
    """(1/pi)(1 + a^n) sqrt(pi/alpha)."""
    return xgamma_bound(n, a, ualpha_l1(alpha))


def alpha_threshold(a, n: int, eps: float) -> float:
    """alpha_0 with (1 + a^n) sqrt(1/(pi alpha_0)) = eps."""
    if eps <= 0:
        raise DomainError("eps must be positive")
    return (1.0 + float(a) ** n) ** 2 / (math.pi * eps * eps)


def gaussian_sup_error(alpha: float, n: int, a, grid: np.ndarray) -> float:
    """sup over ``grid`` of |phi - v(x+a)| for v = exp(-alpha x^2)."""
    def v(x):
        if isinstance(x, (type(mpfr(0)), type(mpc(0)))):
            return gmpy2.exp(-alpha * x * x)
        return np.exp(-alpha * np.asarray(x, dtype=float) ** 2)
    phi = standard_approx(v, n, a, grid)
    return float(np.max(np.abs(phi - v(np.asarray(grid) + float(a)))))


# ---------------------------------------------------------------------------
# Dirichlet series


@dataclass(frozen=True)
class DirichletData:
    c: tuple
    lam: tuple
    m: int
    n: int

    def __post_init__(self) -> None:
        if len(self.c) != len(self.lam):
            raise DomainError("coefficient and frequency lists differ in length")
        if not 1 <= self.m <= len(self.c):
            raise DomainError("outer truncation m must be in [1, len(c)]")
        if self.n < 1:
            raise DomainError("n must be >= 1")
        if any(l <= 1 for l in self.lam[: self.m]):
            raise DomainError("Dirichlet frequencies must exceed 1")


def dirichlet_approx(data: DirichletData, x, policy: PrecisionPolicy | None = None,
                     form: str = "sum"):
    """sum_{j<=m} c_j sum_k C_k(n, l_j) e^{i(1-2k/n)x}."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros(xs.shape, dtype=complex)
    for cj, lj in zip(data.c[: data.m], data.lam[: data.m]):
        if form == "sum":
            out += complex(cj) * eval_sum(build_prototype(data.n, lj), xs, policy)
        elif form == "product":
            out += complex(cj) * eval_product(data.n, lj, xs)
        else:
            raise DomainError(f"unknown form {form!r}")
    return complex(out[0]) if np.ndim(x) == 0 else out


def dirichlet_limit(data: DirichletData, x):
    xs = np.asarray(x, dtype=float)
    return sum(complex(cj) * np.exp(1j * lj * xs) for cj, lj in zip(data.c[: data.m],
                                                                   data.lam[: data.m]))


def dirichlet_error_bound(data: DirichletData, M: float) -> float:
    """sum_j 2 |c_j| (M/n) l_j."""
    return sum(2 * abs(complex(cj)) * M / data.n * lj
               for cj, lj in zip(data.c[: data.m], data.lam[: data.m]))
