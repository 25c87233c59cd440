"""Precision contracts and the summation engine behind every binomial-weighted sum.

All superoscillating sums have the shape ``sum_j c_j exp(E_j)`` where the
weights ``c_j`` are large, alternating and nearly cancel.  The relative
cancellation is measured by ``log2(sum |c_j exp(E_j)| / |result|)``; with an
O(1) result this is ``log2 sum |c_j exp(Re E_j)|``, which for the prototype
family equals ``n*log2(max(|a|, 1))``.

Two policies exist:

``machine-compensated``
    double precision, Neumaier-compensated in fixed ascending order.  Allowed
    only when the cancellation is at most ``MACHINE_CANCELLATION_BITS`` bits,
    which keeps the relative error near 1e-12.
``extended``
    MPFR arithmetic (gmpy2) with ``significand_bits`` bits.  The contract is
    ``significand_bits >= ceil(cancellation) + SAFETY_BITS``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Real
from typing import Callable, Sequence

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr, mpq
from scipy.special import gammaln

from . import kernels
from .errors import DomainError, PrecisionViolation

MACHINE = "machine-compensated"
EXTENDED = "extended"
MACHINE_CANCELLATION_BITS = 13
SAFETY_BITS = 64
BLOCK = 64  # exact restart interval of the multiplicative recurrences


@dataclass(frozen=True)
class PrecisionPolicy:
    """Arithmetic contract for ill-conditioned sums.

    ``significand_bits=None`` in extended mode means "derive the budget from
    the condition number of the sum being evaluated".
    """

    mode: str = EXTENDED
    significand_bits: int | None = None

    def __post_init__(self) -> None:
        if self.mode not in (MACHINE, EXTENDED):
            raise DomainError(f"unknown precision mode {self.mode!r}")
        if self.mode == MACHINE and self.significand_bits not in (None, 53):
            raise DomainError("machine mode has a fixed 53-bit significand")
        if self.significand_bits is not None and self.significand_bits < 2:
            raise DomainError("significand_bits must be >= 2")

    @classmethod
    def machine(cls) -> "PrecisionPolicy":
        return cls(MACHINE)

    @classmethod
    def extended(cls, bits: int | None = None) -> "PrecisionPolicy":
        return cls(EXTENDED, bits)


def required_bits(cancellation_bits: float) -> int:
    return max(0, math.ceil(cancellation_bits - 1e-9)) + SAFETY_BITS


def prototype_cancellation_bits(n: int, a) -> float:
    """log2 of sum |C_j(n,a)| = n*log2(max(|a|,1))."""
    return n * math.log2(max(abs(float(a)), 1.0))


def resolve(policy: PrecisionPolicy | None, cancellation_bits: float) -> int | None:
    """Return the extended significand width to use, or None for machine mode."""
    need = required_bits(cancellation_bits)
    if policy is None:
        return None if cancellation_bits <= MACHINE_CANCELLATION_BITS else need
    if policy.mode == MACHINE:
        if cancellation_bits > MACHINE_CANCELLATION_BITS:
            raise PrecisionViolation(
                f"machine precision cannot absorb {cancellation_bits:.1f} bits of "
                f"cancellation (limit {MACHINE_CANCELLATION_BITS}); "
                f"extended precision needs >= {need} bits")
        return None
    if policy.significand_bits is None:
        return need
    if policy.significand_bits < need:
        raise PrecisionViolation(
            f"{policy.significand_bits} significand bits requested but the sum "
            f"needs >= {need} (ceil(cancellation)+{SAFETY_BITS})")
    return policy.significand_bits


# ---------------------------------------------------------------------------
# arithmetic back-ends handed to exponent builders


class DoubleOps:
    """Double-precision math namespace for exponent builders."""

    I = 1j
    pi = math.pi
    mp = False

    @staticmethod
    def num(v) -> complex | float:
        return complex(v) if isinstance(v, complex) else float(v)

    cos = staticmethod(math.cos)
    sin = staticmethod(math.sin)
    tan = staticmethod(math.tan)
    log = staticmethod(math.log)


class MpOps:
    """gmpy2 math namespace; use inside a local context of the target precision."""

    mp = True

    def __init__(self) -> None:
        self.I = mpc(0, 1)
        self.pi = gmpy2.const_pi()

    @staticmethod
    def num(v):
        if isinstance(v, (complex, type(mpc(0)))):
            return mpc(v)
        return to_mpfr(v)

    cos = staticmethod(gmpy2.cos)
    sin = staticmethod(gmpy2.sin)
    tan = staticmethod(gmpy2.tan)
    log = staticmethod(gmpy2.log)


def to_mpfr(v):
    """Convert int, float, Fraction, mpq or mpfr to mpfr in the current context."""
    if isinstance(v, Fraction):
        return mpfr(mpq(v.numerator, v.denominator))
    return mpfr(v)


def as_fraction(a) -> Fraction:
    if isinstance(a, Fraction):
        return a
    if isinstance(a, str):
        return Fraction(a)
    if isinstance(a, Real):
        return Fraction(a)
    raise DomainError(f"cannot interpret {a!r} as a rational number")


# ---------------------------------------------------------------------------
# prototype coefficients


def prototype_coeffs_exact(n: int, a) -> list[Fraction]:
    """C_j(n,a) = (-1)^j binom(n,j) (a+1)^(n-j) (a-1)^j / 2^n over the rationals."""
    q = as_fraction(a)
    up, dn = q + 1, q - 1
    den = Fraction(2) ** n
    out = []
    binom = 1
    for j in range(n + 1):
        out.append((-1) ** j * binom * up ** (n - j) * dn ** j / den)
        binom = binom * (n - j) // (j + 1)
    return out


@lru_cache(maxsize=64)
def _prototype_coeffs_mp(n: int, a: Fraction, prec: int) -> tuple:
    with gmpy2.context(precision=prec):
        if a == -1:
            return tuple([mpfr(0)] * n + [mpfr(1)])
        A = to_mpfr(a)
        c = ((A + 1) / 2) ** n
        ratio = (A - 1) / (A + 1)
        out = [c]
        for j in range(n):
            c = -c * (n - j) * ratio / (j + 1)
            out.append(c)
        return tuple(out)


def prototype_coeffs_mp(n: int, a, prec: int) -> tuple:
    """Coefficients as mpfr, accurate to a few ulp of ``prec``."""
    guard = int(math.log2(n + 1)) + 8
    full = _prototype_coeffs_mp(n, as_fraction(a), prec + guard)
    with gmpy2.context(precision=prec):
        return tuple(+c for c in full)


@lru_cache(maxsize=64)
def _prototype_coeffs_double(n: int, a: Fraction) -> np.ndarray:
    coeffs = prototype_coeffs_mp(n, a, 64)
    out = np.array([float(c) for c in coeffs])
    out.setflags(write=False)
    return out


def prototype_coeffs_double(n: int, a) -> np.ndarray:
    return _prototype_coeffs_double(n, as_fraction(a))


def prototype_log_abs_coeffs(n: int, a) -> np.ndarray:
    """log|C_j| via log-gamma; -inf where C_j = 0."""
    af = float(a)
    j = np.arange(n + 1, dtype=float)
    lbin = gammaln(n + 1) - gammaln(j + 1) - gammaln(n - j + 1)

    def part(base: float, power: np.ndarray) -> np.ndarray:
        if base == 0:
            return np.where(power == 0, 0.0, -np.inf)
        return power * math.log(abs(base))

    return lbin + part(af + 1, n - j) + part(af - 1, j) - n * math.log(2.0)


def _logsumexp2(logs: np.ndarray) -> float:
    finite = logs[np.isfinite(logs)]
    if finite.size == 0:
        return 0.0
    m = finite.max()
    return float((m + math.log(np.exp(finite - m).sum())) / math.log(2.0))


# ---------------------------------------------------------------------------
# the engine

ExponentBuilder = Callable[[object], Sequence]
"""Maps an ops namespace to polynomial coefficients [b_0, b_1, ...] in k."""


def _horner_np(b: Sequence[complex], k: np.ndarray) -> np.ndarray:
    out = np.zeros_like(k, dtype=complex)
    for coef in reversed(b):
        out = out * k + coef
    return out


def _horner(b, k):
    out = b[-1]
    for coef in reversed(b[:-1]):
        out = out * k + coef
    return out


def sum_cancellation_bits(seq, builder: ExponentBuilder) -> float:
    b = [complex(v) for v in builder(DoubleOps)]
    k = np.asarray(seq.freqs, dtype=float)
    re = _horner_np(b, k).real if b else np.zeros_like(k)
    if seq.prototype:
        logs = prototype_log_abs_coeffs(seq.n, seq.a)
    else:
        with np.errstate(divide="ignore"):
            logs = np.log(np.abs(np.asarray(seq.coeffs, dtype=float)))
    return max(0.0, _logsumexp2(logs + re))


def phase_sum(seq, builder: ExponentBuilder, policy: PrecisionPolicy | None = None,
              raw: bool = False):
    """Evaluate sum_j C_j exp(P(k_j)) for the polynomial P supplied by ``builder``.

    The summation order is ascending j in both policies.  With ``raw=True``
    an extended evaluation returns the mpc value instead of a Python complex.
    """
    bits = resolve(policy, sum_cancellation_bits(seq, builder))
    if bits is None:
        b = [complex(v) for v in builder(DoubleOps)]
        k = np.asarray(seq.freqs, dtype=float)
        coeffs = prototype_coeffs_double(seq.n, seq.a) if seq.prototype else np.asarray(
            seq.coeffs, dtype=float)
        val = kernels.cexpsum(np.ascontiguousarray(coeffs, dtype=float),
                              np.ascontiguousarray(_horner_np(b, k)))
        return mpc(val) if raw else val
    val = _phase_sum_mp(seq, builder, bits)
    return val if raw else complex(val)


def _phase_sum_mp(seq, builder: ExponentBuilder, bits: int):
    n = seq.n
    b_dbl = [complex(v) for v in builder(DoubleOps)]
    emax = float(np.abs(_horner_np(b_dbl, np.asarray(seq.freqs, dtype=float))).max()) if b_dbl else 0.0
    degree = max(len(b_dbl) - 1, 0)
    guard = 16 + int(math.log2(n + 1)) + degree * int(math.log2(BLOCK)) + int(math.log2(1 + emax))
    wp = bits + guard
    with gmpy2.context(precision=wp):
        ops = MpOps()
        b = [mpc(v) for v in builder(ops)]
        total = mpc(0)
        if not seq.prototype:
            for c, k in zip(seq.coeffs, seq.freqs):
                total += mpfr(float(c)) * gmpy2.exp(_horner(b, mpfr(float(k)))) if b else mpfr(float(c))
            return total
        coeffs = prototype_coeffs_mp(n, seq.a, wp)
        if not b:
            return mpc(sum(coeffs, mpfr(0)))

        def expo(j):
            return _horner(b, mpfr(n - 2 * j) / n)

        for start in range(0, n + 1, BLOCK):
            stop = min(start + BLOCK, n + 1)
            # forward differences of E at the block start
            diffs = [expo(start + s) for s in range(degree + 1)]
            for m in range(1, degree + 1):
                for s in range(degree, m - 1, -1):
                    diffs[s] = diffs[s] - diffs[s - 1]
            r = [gmpy2.exp(d) for d in diffs]
            for j in range(start, stop):
                total += coeffs[j] * r[0]
                for m in range(degree):
                    r[m] = r[m] * r[m + 1]
        return total


def phase_sum_grid(seq, xs: np.ndarray, builder: ExponentBuilder,
                   policy: PrecisionPolicy | None = None) -> np.ndarray:
    """Evaluate sum_j C_j exp(i k_j x + Q(k_j)) over a grid of x.

    ``builder`` supplies the x-independent polynomial Q.
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    xmax = float(np.abs(xs).max()) if xs.size else 0.0

    def at(x):
        def full(ops):
            q = list(builder(ops))
            q += [0] * max(0, 2 - len(q))
            q[1] = q[1] + ops.I * ops.num(x)
            return q
        return full

    bits = resolve(policy, sum_cancellation_bits(seq, at(xmax)))
    if bits is None:
        q = [complex(v) for v in builder(DoubleOps)]
        k = np.asarray(seq.freqs, dtype=float)
        coeffs = prototype_coeffs_double(seq.n, seq.a) if seq.prototype else np.asarray(
            seq.coeffs, dtype=float)
        weights = coeffs * np.exp(_horner_np(q, k)) if q else coeffs.astype(complex)
        return kernels.expsum_grid(np.ascontiguousarray(weights, dtype=complex),
                                   np.ascontiguousarray(k), np.ascontiguousarray(xs))
    return np.array([complex(_phase_sum_mp(seq, at(x), bits)) for x in xs])
