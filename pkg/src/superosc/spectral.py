"""Scalar shadows of the functional calculus F_n(T, a) for self-adjoint T.

Everything reduces to the symbol |F_n(lam, a)| = (cos^2(lam/n) + a^2 sin^2(lam/n))^(n/2)
integrated or maximised over (parts of) the spectrum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .approximation import standard_approx
from .core import error_envelope, eval_product, modulus_product
from .errors import DomainError

COMPACT = "compact"
TRUNCATED = "truncated"
FULL_LINE = "full-line"


@dataclass(frozen=True)
class SpectrumWindow:
    kind: str
    K: float | None = None
    gamma: float | None = None

    def __post_init__(self) -> None:
        if self.kind == COMPACT:
            if self.K is None or not self.K >= 0:
                raise DomainError("a compact window needs K >= 0")
        elif self.kind == TRUNCATED:
            if self.gamma is None or not self.gamma > 2:
                raise DomainError("a truncated window needs gamma > 2")
        elif self.kind != FULL_LINE:
            raise DomainError(f"unknown window kind {self.kind!r}")

    @classmethod
    def compact(cls, K: float) -> "SpectrumWindow":
        return cls(COMPACT, K=float(K))

    @classmethod
    def truncated(cls, gamma: float) -> "SpectrumWindow":
        return cls(TRUNCATED, gamma=float(gamma))

    @classmethod
    def full_line(cls) -> "SpectrumWindow":
        return cls(FULL_LINE)

    def half_width(self, n: int) -> float:
        """Right endpoint for order n (inf for the full line)."""
        if self.kind == COMPACT:
            return self.K
        if self.kind == TRUNCATED:
            return truncation_endpoint(n, self.gamma)
        return math.inf


def truncation_endpoint(n: int, gamma: float) -> float:
    """n^(1/gamma) pi / gamma."""
    if not gamma > 2:
        raise DomainError("gamma must exceed 2")
    return n ** (1.0 / gamma) * math.pi / gamma


@dataclass(frozen=True)
class SpectralDensity:
    """Discrete stand-in for the measure (E(d lam) psi, psi)."""

    grid: np.ndarray
    weights: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        g = np.asarray(self.grid, dtype=float).ravel()
        w = np.asarray(self.weights, dtype=float).ravel()
        if g.shape != w.shape or g.size == 0:
            raise DomainError("grid and weights must be non-empty and equal length")
        if np.any(w < 0):
            raise DomainError("weights must be nonnegative")
        if abs(math.fsum(w) - 1.0) > 1e-12:
            raise DomainError(f"weights sum to {math.fsum(w)!r}, expected 1")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "weights", w)

    @classmethod
    def normalized(cls, grid, weights) -> "SpectralDensity":
        w = np.asarray(weights, dtype=float)
        return cls(grid, w / math.fsum(w))

    @classmethod
    def uniform(cls, lo: float, hi: float, count: int = 2001) -> "SpectralDensity":
        g = np.linspace(lo, hi, count)
        return cls.normalized(g, np.ones_like(g))

    @classmethod
    def point_mass(cls, lam: float) -> "SpectralDensity":
        return cls(np.array([lam, lam + 1.0]), np.array([1.0, 0.0]))


def _compact_sup(n: int, a: float, K: float) -> float:
    # d/dlam (cos^2 + a^2 sin^2)(lam/n) = (a^2-1) sin(2 lam/n)/n vanishes only at
    # multiples of n pi/2, so the sup over [-K, K] is attained at one of them or at K.
    half = n * math.pi / 2
    cands = [0.0, K] + [m * half for m in range(1, int(K // half) + 1)]
    return max(float(modulus_product(n, a, c)) for c in cands)


def norm_on_window(n: int, a, window: SpectrumWindow) -> float:
    """sup over the window of |F_n(lam, a)|."""
    a = float(a)
    if window.kind == FULL_LINE:
        # closed form at lam = n pi / 2; the sup is a^n when |a| >= 1 and 1 (at lam = 0) otherwise
        top = abs(a) ** n
        return max(top, 1.0)
    if window.kind == TRUNCATED:
        # lam/n stays inside [0, pi/2) on e_n(gamma): the symbol is monotone there
        return float(modulus_product(n, a, truncation_endpoint(n, window.gamma)))
    return _compact_sup(n, a, window.K)


def qn_norm(n: int, a, gamma: float) -> float:
    """||Q_n(T, a, gamma)|| = (cos^2 th + a^2 sin^2 th)^(n/2), th = n^(1/gamma - 1) pi / gamma."""
    if not gamma > 2:
        raise DomainError("gamma must exceed 2")
    a = float(a)
    th = n ** (1.0 / gamma - 1.0) * math.pi / gamma
    s = math.sin(th)
    # log1p keeps the n -> inf regime accurate: base = 1 + (a^2 - 1) sin^2
    return math.exp(0.5 * n * math.log1p((a * a - 1.0) * s * s))


def qn_small_angle_log(n: int, a, gamma: float) -> float:
    """Leading term (a^2 - 1) pi^2 / (2 gamma^2) n^(2/gamma - 1) of log qn_norm."""
    a = float(a)
    return (a * a - 1.0) * math.pi ** 2 / (2 * gamma ** 2) * n ** (2.0 / gamma - 1.0)


def l2_convergence(n: int, a, density: SpectralDensity, window: SpectrumWindow) -> float:
    """sum of weights * |F_n(lam, a) - e^{i a lam}|^2 over the density grid."""
    w = window.half_width(n)
    if np.any(np.abs(density.grid) > w):
        raise DomainError(f"density support exceeds the window half-width {w}")
    env = np.asarray(error_envelope(n, a, density.grid), dtype=float)
    return math.fsum(density.weights * env ** 2)


def momentum_shift_action(psi, n: int, a, L: float, x, policy=None):
    """F_n(P, a) psi(x) = sum_j C_j psi(x + k_j L): the standard approximation with scaled shifts."""
    return standard_approx(psi, n, a, x, L=L, policy=policy)


def group_failure_discrepancy(n: int, a, b, grid) -> float:
    """max over the grid of |F_n(lam, a + b) - F_n(lam, a) F_n(lam, b)|."""
    lam = np.asarray(grid, dtype=float)
    lhs = eval_product(n, float(a) + float(b), lam)
    rhs = eval_product(n, float(a), lam) * eval_product(n, float(b), lam)
    return float(np.max(np.abs(lhs - rhs)))
