"""Adaptive Simpson quadrature with an absolute tolerance."""
from __future__ import annotations

import math
from typing import Callable

from .errors import ConvergenceError

MAX_DEPTH = 50


def adaptive_simpson(f: Callable[[float], complex], lo: float, hi: float,
                     tol: float = 1e-10, max_depth: int = MAX_DEPTH) -> complex:
    """Integrate ``f`` over [lo, hi] to absolute tolerance ``tol``.

    Uses the Richardson-corrected estimate (S2 + (S2 - S1)/15) on each accepted panel.
    Raises ConvergenceError when a panel needs more than ``max_depth`` bisections.
    """
    if lo == hi:
        return 0.0
    sign = 1.0
    if hi < lo:
        lo, hi, sign = hi, lo, -1.0
    fa, fm, fb = f(lo), f(0.5 * (lo + hi)), f(hi)
    whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb)
    return sign * _panel(f, lo, hi, fa, fm, fb, whole, tol, max_depth)


def _panel(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    delta = left + right - whole
    if abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0
    if depth <= 0 or m in (a, b):
        raise ConvergenceError(
            f"adaptive Simpson did not reach tol={tol:g} on [{a:.6g}, {b:.6g}]")
    return (_panel(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + _panel(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1))


def integrate(f: Callable[[float], complex], lo: float, hi: float, tol: float = 1e-10) -> complex:
    """Adaptive Simpson, with finite-interval checks."""
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ConvergenceError("adaptive Simpson needs a finite interval")
    return adaptive_simpson(f, lo, hi, tol)
