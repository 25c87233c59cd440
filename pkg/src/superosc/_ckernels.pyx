# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: Neumaier-compensated sums of weighted complex exponentials.

Summation runs in ascending index order so results are reproducible and
match the pure-Python fallback term for term.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, exp, fabs

cnp.import_array()


cdef inline void _neumaier(double *s, double *c, double v) noexcept nogil:
    cdef double t = s[0] + v
    if fabs(s[0]) >= fabs(v):
        c[0] += (s[0] - t) + v
    else:
        c[0] += (v - t) + s[0]
    s[0] = t


def neumaier_sum(const double[::1] values):
    cdef double s = 0.0, c = 0.0
    cdef Py_ssize_t j
    with nogil:
        for j in range(values.shape[0]):
            _neumaier(&s, &c, values[j])
    return s + c


def cexpsum(const double[::1] coeffs, const double complex[::1] expo):
    """sum_j coeffs[j] * exp(expo[j])."""
    cdef Py_ssize_t j, n = coeffs.shape[0]
    cdef double sr = 0.0, cr = 0.0, si = 0.0, ci = 0.0, mag, ph
    if expo.shape[0] != n:
        raise ValueError("coeffs and exponents differ in length")
    with nogil:
        for j in range(n):
            mag = coeffs[j] * exp(expo[j].real)
            ph = expo[j].imag
            _neumaier(&sr, &cr, mag * cos(ph))
            _neumaier(&si, &ci, mag * sin(ph))
    return complex(sr + cr, si + ci)


def expsum_grid(const double complex[::1] weights, const double[::1] freqs,
                const double[::1] xs):
    """out[m] = sum_j weights[j] * exp(1j * freqs[j] * xs[m])."""
    cdef Py_ssize_t j, m, n = weights.shape[0], nx = xs.shape[0]
    cdef double sr, cr, si, ci, cs, sn, wr, wi, ph
    out = np.empty(nx, dtype=np.complex128)
    cdef double complex[::1] o = out
    if freqs.shape[0] != n:
        raise ValueError("weights and frequencies differ in length")
    with nogil:
        for m in range(nx):
            sr = 0.0
            cr = 0.0
            si = 0.0
            ci = 0.0
            for j in range(n):
                ph = freqs[j] * xs[m]
                cs = cos(ph)
                sn = sin(ph)
                wr = weights[j].real
                wi = weights[j].imag
                _neumaier(&sr, &cr, wr * cs - wi * sn)
                _neumaier(&si, &ci, wr * sn + wi * cs)
            o[m] = (sr + cr) + 1j * (si + ci)
    return out
