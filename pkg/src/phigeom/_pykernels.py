"""Pure NumPy implementations of the numerical kernels.

These are the reference versions of the routines in ``_ckernels.pyx``; the
compiled module must agree with them to rounding.  The generic normalizer
solver here also serves phi-functions that have no compiled form.
"""

import math

import numpy as np

from .errors import UnboundedNormalizerError

EXPONENTIAL = 0
KANIADAKIS = 1

MIN_BISECTION_STEPS = 60
MAX_BISECTION_STEPS = 200
NEWTON_POLISH_STEPS = 3


def phi_bundle(kind, kappa, u):
    """Return ``(phi, phi', phi'', phi''')`` evaluated elementwise at ``u``."""
    u = np.asarray(u, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        if kind == EXPONENTIAL:
            v = np.exp(u)
            return v, v.copy(), v.copy(), v.copy()
        x = kappa * u
        s = np.sqrt(1.0 + x * x)
        v = np.exp(np.arcsinh(x) / kappa)
        d1 = v / s
        a = 1.0 / (s * s) - kappa * x / s**3
        da = -2.0 * kappa * x / s**4 - kappa * kappa / s**3 + 3.0 * kappa * kappa * x * x / s**5
        d2 = v * a
        d3 = v * (a / s + da)
    return v, d1, d2, d3


def phi_value(kind, kappa, u):
    u = np.asarray(u, dtype=float)
    with np.errstate(over="ignore"):
        if kind == EXPONENTIAL:
            return np.exp(u)
        return np.exp(np.arcsinh(kappa * u) / kappa)


def solve_psi_generic(value, d1, base, u0, mu, max_bracket=1e6):
    """Find psi with ``sum(value(base - psi*u0) * mu) == 1``.

    ``value`` must be increasing so the residual is strictly decreasing in
    psi (u0 > 0).  Bracketed bisection from [-1, 1] with doubling, then a
    guarded Newton polish.

    Returns
    -------
    psi : float
    residual : float
        ``sum(value(f) * mu) - 1`` at the returned psi.
    """
    base = np.asarray(base, dtype=float)
    u0 = np.asarray(u0, dtype=float)
    mu = np.asarray(mu, dtype=float)

    def residual(psi):
        with np.errstate(over="ignore"):
            return float(np.sum(value(base - psi * u0) * mu)) - 1.0

    lo, hi = -1.0, 1.0
    r_lo = residual(lo)
    while not r_lo >= 0.0:
        lo *= 2.0
        if lo < -max_bracket:
            raise UnboundedNormalizerError(f"lower bracket passed {-max_bracket:g}")
        r_lo = residual(lo)
    r_hi = residual(hi)
    while r_hi > 0.0:
        hi *= 2.0
        if hi > max_bracket:
            raise UnboundedNormalizerError(f"upper bracket passed {max_bracket:g}")
        r_hi = residual(hi)

    for step in range(MAX_BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        if step >= MIN_BISECTION_STEPS and (mid <= lo or mid >= hi):
            break
        r_mid = residual(mid)
        if r_mid == 0.0:
            lo = hi = mid
            break
        if r_mid > 0.0:
            lo = mid
        else:
            hi = mid

    psi = 0.5 * (lo + hi)
    r = residual(psi)
    for _ in range(NEWTON_POLISH_STEPS):
        if r == 0.0:
            break
        slope = -float(np.sum(d1(base - psi * u0) * u0 * mu))
        if not (slope < 0.0 and math.isfinite(slope)):
            break
        cand = psi - r / slope
        r_cand = residual(cand)
        if abs(r_cand) >= abs(r):
            break
        psi, r = cand, r_cand
    return psi, r


def solve_psi(kind, kappa, base, u0, mu, max_bracket=1e6):
    return solve_psi_generic(
        lambda u: phi_value(kind, kappa, u),
        lambda u: phi_bundle(kind, kappa, u)[1],
        base,
        u0,
        mu,
        max_bracket,
    )
