"""Pure-Python/numpy fallback with the same summation order as the compiled kernels."""
from __future__ import annotations

import numpy as np


def _neumaier_columns(terms: np.ndarray) -> np.ndarray:
    """Compensated sum over axis 0, vectorised across the remaining axes."""
    s = np.zeros(terms.shape[1:])
    c = np.zeros(terms.shape[1:])
    for v in terms:
        t = s + v
        c += np.where(np.abs(s) >= np.abs(v), (s - t) + v, (v - t) + s)
        s = t
    return s + c


def neumaier_sum(values) -> float:
    v = np.asarray(values, dtype=float)
    return float(_neumaier_columns(v.reshape(-1, 1))[0])


def cexpsum(coeffs, expo) -> complex:
    coeffs = np.asarray(coeffs, dtype=float)
    expo = np.asarray(expo, dtype=complex)
    if coeffs.shape != expo.shape:
        raise ValueError("coeffs and exponents differ in length")
    mag = coeffs * np.exp(expo.real)
    re = _neumaier_columns((mag * np.cos(expo.imag)).reshape(-1, 1))[0]
    im = _neumaier_columns((mag * np.sin(expo.imag)).reshape(-1, 1))[0]
    return complex(re, im)


def expsum_grid(weights, freqs, xs) -> np.ndarray:
    weights = np.asarray(weights, dtype=complex)
    freqs = np.asarray(freqs, dtype=float)
    xs = np.asarray(xs, dtype=float)
    if weights.shape != freqs.shape:
        raise ValueError("weights and frequencies differ in length")
    ph = np.outer(freqs, xs)
    cs, sn = np.cos(ph), np.sin(ph)
    wr, wi = weights.real[:, None], weights.imag[:, None]
    re = _neumaier_columns(wr * cs - wi * sn)
    im = _neumaier_columns(wr * sn + wi * cs)
    return re + 1j * im
