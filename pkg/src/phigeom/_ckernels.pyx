# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: phi evaluation and the normalizer solve.

Mirrors ``_pykernels`` step for step; only the built-in phi kinds are
supported here.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, asinh, sqrt, fabs, isfinite

from .errors import UnboundedNormalizerError

cnp.import_array()

cdef enum:
    EXPONENTIAL = 0
    MIN_BISECTION_STEPS = 60
    MAX_BISECTION_STEPS = 200
    NEWTON_POLISH_STEPS = 3


cdef inline double _value(int kind, double kappa, double u) nogil:
    if kind == EXPONENTIAL:
        return exp(u)
    return exp(asinh(kappa * u) / kappa)


cdef inline double _d1(int kind, double kappa, double u) nogil:
    cdef double x
    if kind == EXPONENTIAL:
        return exp(u)
    x = kappa * u
    return exp(asinh(x) / kappa) / sqrt(1.0 + x * x)


def phi_bundle(int kind, double kappa, u):
    cdef cnp.ndarray[double, ndim=1] uu = np.array(u, dtype=np.float64).ravel()
    cdef Py_ssize_t n = uu.shape[0], k
    cdef cnp.ndarray[double, ndim=1] v = np.empty(n)
    cdef cnp.ndarray[double, ndim=1] d1 = np.empty(n)
    cdef cnp.ndarray[double, ndim=1] d2 = np.empty(n)
    cdef cnp.ndarray[double, ndim=1] d3 = np.empty(n)
    cdef double x, s, e, a, da
    shape = np.shape(u)
    with nogil:
        for k in range(n):
            if kind == EXPONENTIAL:
                e = exp(uu[k])
                v[k] = e
                d1[k] = e
                d2[k] = e
                d3[k] = e
            else:
                x = kappa * uu[k]
                s = sqrt(1.0 + x * x)
                e = exp(asinh(x) / kappa)
                a = 1.0 / (s * s) - kappa * x / (s * s * s)
                da = (-2.0 * kappa * x / (s * s * s * s) - kappa * kappa / (s * s * s)
                      + 3.0 * kappa * kappa * x * x / (s * s * s * s * s))
                v[k] = e
                d1[k] = e / s
                d2[k] = e * a
                d3[k] = e * (a / s + da)
    return v.reshape(shape), d1.reshape(shape), d2.reshape(shape), d3.reshape(shape)


def phi_value(int kind, double kappa, u):
    return phi_bundle(kind, kappa, u)[0]


cdef double _residual(int kind, double kappa, const double[::1] base, const double[::1] u0,
                      const double[::1] mu, double psi) nogil:
    cdef Py_ssize_t k
    cdef double total = 0.0
    for k in range(base.shape[0]):
        total += _value(kind, kappa, base[k] - psi * u0[k]) * mu[k]
    return total - 1.0


cdef double _slope(int kind, double kappa, const double[::1] base, const double[::1] u0,
                   const double[::1] mu, double psi) nogil:
    cdef Py_ssize_t k
    cdef double total = 0.0
    for k in range(base.shape[0]):
        total += _d1(kind, kappa, base[k] - psi * u0[k]) * u0[k] * mu[k]
    return -total


def solve_psi(int kind, double kappa, base, u0, mu, double max_bracket=1e6):
    cdef const double[::1] b = np.ascontiguousarray(base, dtype=np.float64)
    cdef const double[::1] w = np.ascontiguousarray(u0, dtype=np.float64)
    cdef const double[::1] m = np.ascontiguousarray(mu, dtype=np.float64)
    cdef double lo = -1.0, hi = 1.0, mid, r_lo, r_hi, r_mid, psi, r, slope, cand, r_cand
    cdef int step

    r_lo = _residual(kind, kappa, b, w, m, lo)
    while not r_lo >= 0.0:
        lo *= 2.0
        if lo < -max_bracket:
            raise UnboundedNormalizerError(f"lower bracket passed {-max_bracket:g}")
        r_lo = _residual(kind, kappa, b, w, m, lo)
    r_hi = _residual(kind, kappa, b, w, m, hi)
    while r_hi > 0.0:
        hi *= 2.0
        if hi > max_bracket:
            raise UnboundedNormalizerError(f"upper bracket passed {max_bracket:g}")
        r_hi = _residual(kind, kappa, b, w, m, hi)

    with nogil:
        for step in range(MAX_BISECTION_STEPS):
            mid = 0.5 * (lo + hi)
            if step >= MIN_BISECTION_STEPS and (mid <= lo or mid >= hi):
                break
            r_mid = _residual(kind, kappa, b, w, m, mid)
            if r_mid == 0.0:
                lo = mid
                hi = mid
                break
            if r_mid > 0.0:
                lo = mid
            else:
                hi = mid

        psi = 0.5 * (lo + hi)
        r = _residual(kind, kappa, b, w, m, psi)
        for step in range(NEWTON_POLISH_STEPS):
            if r == 0.0:
                break
            slope = _slope(kind, kappa, b, w, m, psi)
            if not (slope < 0.0 and isfinite(slope)):
                break
            cand = psi - r / slope
            r_cand = _residual(kind, kappa, b, w, m, cand)
            if fabs(r_cand) >= fabs(r):
                break
            psi = cand
            r = r_cand
    return psi, r
