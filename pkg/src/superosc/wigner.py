"""The m = l column of the Wigner d-matrix and the rotation weak value built on it."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import gmpy2
import numpy as np

from .core import eval_product
from .errors import DomainError
from .precision import MACHINE_CANCELLATION_BITS, SAFETY_BITS

EXACT_FACTORIAL_LIMIT = 40  # 2l beyond this switches to log-gamma
COS_SINGULAR = 1e-12

CORRECTED = "corrected"
PRINTED = "printed"


def _two_l(ell) -> int:
    tl = Fraction(ell) * 2
    if tl.denominator != 1 or tl < 1:
        raise DomainError(f"l must be a positive integer or half-integer, got {ell!r}")
    return int(tl)


@dataclass(frozen=True)
class WignerColumn:
    """d^(l)_{m', l}(theta) for m' = -l..l (ascending)."""

    two_l: int
    theta: float
    values: np.ndarray
    exact_factorials: bool
    rel_error_bound: float

    @property
    def ell(self) -> float:
        return self.two_l / 2

    @property
    def m_values(self) -> np.ndarray:
        return _m_primes(self.two_l)

    def norm_sq(self) -> float:
        return math.fsum(self.values ** 2)


def _m_primes(two_l: int) -> np.ndarray:
    return np.arange(-two_l, two_l + 1, 2) / 2


def wigner_column(ell, theta: float) -> WignerColumn:
    """(-1)^(l-m') sqrt((2l)!/((l+m')!(l-m')!)) cos^(l+m')(theta/2) sin^(l-m')(theta/2)."""
    tl = _two_l(ell)
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    exact = tl <= EXACT_FACTORIAL_LIMIT
    vals = np.empty(tl + 1)
    for k in range(tl + 1):  # k = l + m'
        if exact:
            root = math.sqrt(math.comb(tl, k))
        else:
            root = math.exp(0.5 * (math.lgamma(tl + 1) - math.lgamma(k + 1) - math.lgamma(tl - k + 1)))
        sign = -1.0 if (tl - k) % 2 else 1.0
        vals[k] = sign * root * c ** k * s ** (tl - k)
    # lgamma differences lose about eps * lgamma(2l+1) in relative terms
    bound = 4 * np.finfo(float).eps * (1 if exact else math.lgamma(tl + 1))
    return WignerColumn(tl, float(theta), vals, exact, bound)


def cancellation_bits(ell, theta: float) -> float:
    """Bits lost in the signed sums: sum d^2 = 1 while the result is cos(theta)^(2l)."""
    c = abs(math.cos(theta))
    if c == 0.0:
        return math.inf
    return max(0.0, -_two_l(ell) * math.log2(c))


def _auto_bits(ell, theta: float, bits: int | None) -> int | None:
    if bits is not None:
        return bits
    cb = cancellation_bits(ell, theta)
    if cb <= MACHINE_CANCELLATION_BITS:
        return None
    if not math.isfinite(cb):
        raise DomainError("cos(theta) = 0: total cancellation")
    return int(math.ceil(cb)) + SAFETY_BITS


def _squares_mp(tl: int, theta: float, prec: int) -> list:
    """d^2 = binom(2l, k) c^(2k) s^(2(2l-k)) in MPFR, k = l + m'."""
    with gmpy2.context(gmpy2.get_context(), precision=prec + 16):
        t = gmpy2.mpfr(theta) / 2
        c2, s2 = gmpy2.cos(t) ** 2, gmpy2.sin(t) ** 2
        return [math.comb(tl, k) * c2 ** k * s2 ** (tl - k) for k in range(tl + 1)]


def _signs(tl: int, convention: str) -> list[int]:
    if convention == CORRECTED:
        return [(-1) ** (tl - k) for k in range(tl + 1)]
    if convention == PRINTED:
        if tl % 2:
            raise DomainError("(-1)^m' is not a real sign for half-integer l")
        return [(-1) ** ((k - tl // 2) % 2) for k in range(tl + 1)]
    raise DomainError(f"unknown convention {convention!r}")


def signed_sum(ell, theta: float, convention: str = CORRECTED, bits: int | None = None) -> float:
    """sum over m' of sign(m') d^2; ``corrected`` uses (-1)^(l-m'), ``printed`` uses (-1)^(m').

    Extended precision is used automatically once the alternating sum cancels
    more than the machine threshold.
    """
    tl = _two_l(ell)
    signs = _signs(tl, convention)
    prec = _auto_bits(ell, theta, bits)
    if prec is None:
        col = wigner_column(ell, theta)
        return math.fsum(sg * v * v for sg, v in zip(signs, col.values))
    sq = _squares_mp(tl, theta, prec)
    with gmpy2.context(gmpy2.get_context(), precision=prec + 16):
        return float(sum((sg * q for sg, q in zip(signs, sq)), gmpy2.mpfr(0)))


def _checked_cos(theta: float) -> float:
    c = math.cos(theta)
    if abs(c) < COS_SINGULAR:
        raise DomainError("cos(theta) = 0: pre- and post-selection are orthogonal")
    return c


def rotation_weak_value(ell, theta: float, dphi: float) -> complex:
    """[cos^2(theta/2) e^{i u} - sin^2(theta/2) e^{-i u}]^(2l) / cos(theta)^(2l), u = dphi/(2l)."""
    tl = _two_l(ell)
    c = _checked_cos(theta)
    u = dphi / tl
    c2, s2 = math.cos(theta / 2) ** 2, math.sin(theta / 2) ** 2
    base = (c2 * complex(math.cos(u), math.sin(u)) - s2 * complex(math.cos(u), -math.sin(u))) / c
    return base ** tl


def dsum_weak_value(ell, theta: float, dphi: float, bits: int | None = None) -> complex:
    """sum (-1)^(l-m') d^2 e^{i m' dphi / l} / cos(theta)^(2l)."""
    tl = _two_l(ell)
    c = _checked_cos(theta)
    prec = _auto_bits(ell, theta, bits)
    if prec is None:
        col = wigner_column(ell, theta)
        m = _m_primes(tl)
        signs = np.array(_signs(tl, CORRECTED), dtype=float)
        terms = signs * col.values ** 2 * np.exp(1j * m * dphi / col.ell)
        return complex(np.sum(terms)) / c ** tl
    sq = _squares_mp(tl, theta, prec)
    with gmpy2.context(gmpy2.get_context(), precision=prec + 16):
        ang = gmpy2.mpfr(dphi) * 2 / tl
        acc = gmpy2.mpc(0)
        for k, (sg, q) in enumerate(zip(_signs(tl, CORRECTED), sq)):
            ph = ang * (2 * k - tl) / 2  # m' dphi / l
            acc += sg * q * gmpy2.mpc(gmpy2.cos(ph), gmpy2.sin(ph))
        res = acc / gmpy2.cos(gmpy2.mpfr(theta)) ** tl
        return complex(float(res.real), float(res.imag))


def superoscillating_form(ell, theta: float, dphi: float) -> complex:
    """(cos u + i a sin u)^(2l) with a = 1/cos(theta), u = dphi/(2l): F_{2l}(dphi, a)."""
    tl = _two_l(ell)
    a = 1.0 / _checked_cos(theta)
    return complex(eval_product(tl, a, dphi))


def _spin_states(theta: float, ops) -> tuple[list, list]:
    t = ops.num(theta) / 2
    c, s = ops.cos(t), ops.sin(t)
    return [c, s], [c, -s]


class _Mp:
    num = staticmethod(gmpy2.mpfr)
    cos = staticmethod(gmpy2.cos)
    sin = staticmethod(gmpy2.sin)
    cplx = staticmethod(gmpy2.mpc)


def tensor_overlap(ell, theta: float, dphi: float = 0.0, bits: int | None = None,
                   max_dim: int = 1 << 20) -> complex:
    """<fin| U |in> over 2l explicit spins, U = exp(i u sigma_z) on each, u = dphi/(2l).

    With dphi = 0 this is <fin|in> = cos(theta)^(2l).  The vectors are built by
    explicit Kronecker products of MPFR object arrays and share no
    code with the column formula.
    """
    tl = _two_l(ell)
    if 2 ** tl > max_dim:
        raise DomainError(f"tensor oracle dimension 2^{tl} exceeds {max_dim}")
    # always extended: the naive 2^(2l)-term sum would otherwise dominate the error
    prec = _auto_bits(ell, theta, bits) or SAFETY_BITS
    ops = _Mp
    with gmpy2.context(gmpy2.get_context(), precision=prec + 16):
        psi, phi = _spin_states(theta, ops)
        u = ops.num(dphi) / tl
        rot = [ops.cplx(ops.cos(u), ops.sin(u)), ops.cplx(ops.cos(u), -ops.sin(u))]
        spin_in = np.array([rot[0] * psi[0], rot[1] * psi[1]], dtype=object)
        spin_fin = np.array([ops.cplx(phi[0]), ops.cplx(phi[1])], dtype=object)
        vin, vfin = spin_in, spin_fin
        for _ in range(tl - 1):
            vin = np.kron(vin, spin_in)
            vfin = np.kron(vfin, spin_fin)
        # phi is real, so <fin| needs no conjugation
        acc = sum(vfin * vin, ops.cplx(0))
        return complex(float(acc.real), float(acc.imag))


def tensor_weak_value(ell, theta: float, dphi: float, bits: int | None = None) -> complex:
    """Rotation weak value from explicit 2l-spin tensor products."""
    den = tensor_overlap(ell, theta, 0.0, bits)
    if abs(den) < COS_SINGULAR ** 2:
        raise DomainError("vanishing overlap")
    return tensor_overlap(ell, theta, dphi, bits) / den


def offcenter_frequency(theta: float, phi0: float, branch: str = "same-state") -> tuple[float, bool]:
    """Effective frequency of the rotation weak value for an off-centre post-selection."""
    c = math.cos(theta)
    if branch == "same-state":
        den = math.cos(phi0 / 2) ** 2 + c * c * math.sin(phi0 / 2) ** 2
    elif branch == "flipped-state":
        den = math.sin(phi0) ** 2 + c * c * math.cos(phi0) ** 2
    else:
        raise DomainError(f"unknown branch {branch!r}")
    if abs(den) < 1e-300:
        raise DomainError("vanishing denominator")
    freq = c / den
    return freq, abs(freq) > 1.0


def flipped_boundary(theta: float) -> float:
    """|cos phi0| at which the flipped-state frequency has modulus one."""
    c = math.cos(theta)
    if not c > -1:
        raise DomainError("need cos(theta) > -1")
    return 1.0 / math.sqrt(1.0 + c)
