"""Parallel transport.

Tangent vectors at a point are functions on the sample space in the span of
the frame ``d_i f``.  For ``D^(1)`` transport is the affine map

    X -> X - E'_target[X] u0,

which only depends on the target point.  For general alpha the coordinate
ODE ``V'^k = -Gamma^k_ij theta'^i V^j`` is integrated along a polyline.
"""

from __future__ import annotations

import numpy as np

from .errors import PhiGeomError, TruncatedPathError
from .geometry import metric, raised_christoffel
from .phi_family import ManifoldPoint
from .sample_space import TangentVector

TANGENCY_TOL = 1e-8
DEFAULT_SUBSTEPS = 100


def _vals(x):
    return x.values if isinstance(x, TangentVector) else np.asarray(x, dtype=float)


def coords_to_function(point: ManifoldPoint, components) -> TangentVector:
    """``sum_i V^i d_i f`` at ``point``."""
    return TangentVector(point.space, np.asarray(components, dtype=float) @ point.df)


def function_to_coords(point: ManifoldPoint, x):
    """Project a function onto the frame at ``point`` in the E'' inner product.

    Returns
    -------
    components : (n,) array
    residual : float
        E''-norm of the part of ``x`` outside the frame span.
    """
    xv = _vals(x)
    w2 = point.weights.w2
    g = metric(point).g
    rhs = (point.df * w2) @ xv
    comps = np.linalg.solve(g, rhs)
    rest = xv - comps @ point.df
    return comps, float(np.sqrt(max(rest * rest @ w2, 0.0)))


def transport_1(family, from_point: ManifoldPoint, to_point: ManifoldPoint, x, check=True) -> TangentVector:
    """Closed-form ``D^(1)`` transport of ``x`` from ``from_point`` to ``to_point``.

    With ``check`` the input must be tangent at ``from_point``
    (``|E'[x]| <= 1e-8`` relative to the size of ``x``).
    """
    xv = _vals(x)
    if check:
        lead = abs(from_point.weights.e1(xv))
        scale = max(1.0, float(np.max(np.abs(xv))))
        if lead > TANGENCY_TOL * scale:
            raise ValueError(f"vector is not tangent at the source point (E'[x] = {lead:.3g})")
    return TangentVector(to_point.space, xv - to_point.weights.e1(xv) * to_point.u0)


def transport_1_along(family, points, x) -> TangentVector:
    """Compose ``transport_1`` across consecutive points of a discrete path."""
    out = TangentVector(points[0].space, _vals(x))
    for a, b in zip(points[:-1], points[1:]):
        out = transport_1(family, a, b, out, check=False)
    return out


def transport_ode(family, curve, alpha, v0, substeps=DEFAULT_SUBSTEPS):
    """Parallel-transport coordinate components along a polyline in the chart.

    Each segment is split into ``substeps`` fixed Runge-Kutta steps.

    Returns
    -------
    (len(curve), n) array of components at the curve vertices.
    """
    curve = np.atleast_2d(np.asarray(curve, dtype=float))
    if curve.shape[0] < 2:
        raise ValueError("curve needs at least two points")
    v = np.atleast_1d(np.asarray(v0, dtype=float)).copy()
    out = [v.copy()]
    cache = {}

    def conn(theta):
        key = theta.tobytes()
        if key not in cache:
            cache[key] = raised_christoffel(family.point_at(theta), alpha)
        return cache[key]

    for seg, (a, b) in enumerate(zip(curve[:-1], curve[1:])):
        vel = b - a
        ds = 1.0 / substeps

        def rhs(s, vec):
            C = conn(a + s * vel)
            return -np.einsum("kij,i,j->k", C, vel, vec)

        for step in range(substeps):
            s = step * ds
            try:
                k1 = rhs(s, v)
                k2 = rhs(s + 0.5 * ds, v + 0.5 * ds * k1)
                k3 = rhs(s + 0.5 * ds, v + 0.5 * ds * k2)
                k4 = rhs(s + ds, v + ds * k3)
            except PhiGeomError as exc:
                raise TruncatedPathError(seg + s, np.array(out), exc) from exc
            v = v + ds / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        out.append(v.copy())
    return np.array(out)


def inner(point: ManifoldPoint, v, w) -> float:
    """``g(V, W)`` for coordinate components at ``point``."""
    return float(np.asarray(v) @ metric(point).g @ np.asarray(w))


def connection_1_action(point: ManifoldPoint, i: int, j: int) -> TangentVector:
    """Closed form ``d_ij f - E'[d_ij f] u0`` of ``D^(1)`` applied to the frame."""
    h = point.d2f[i, j]
    return TangentVector(point.space, h - point.weights.e1(h) * point.u0)


def recover_connection_1(family, theta, i: int, j: int, h=1e-4) -> TangentVector:
    """Differentiate the pulled-back frame vector ``d_j f`` along coordinate ``i``.

    ``Y(t) = d_j f(theta + t e_i) - E'_theta[d_j f(theta + t e_i)] u0`` is the
    ``D^(1)`` pull-back to ``theta``; its central difference at ``t = 0``
    recovers the covariant derivative.
    """
    if not h > 0:
        raise ValueError("step h must be positive")
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    base = family.point_at(theta)
    e = np.zeros(theta.size)
    e[i] = h

    def pulled_back(t_theta):
        y = family.point_at(t_theta).df[j]
        return y - base.weights.e1(y) * base.u0

    return TangentVector(base.space, (pulled_back(theta + e) - pulled_back(theta - e)) / (2.0 * h))
