"""The phi-divergence and finite-difference divergence calculus.

``phi_divergence(p, q)`` is the generalized relative entropy

    D(p || q) = sum (phi^-1(p) - phi^-1(q)) phi'(phi^-1(p)) mu
                / sum u0 phi'(phi^-1(p)) mu,

which is the Kullback-Leibler divergence when phi = exp and u0 = 1.

For the geometry, the contrast function on a family is taken with swapped
arguments, ``contrast(a, b) = D(p_b || p_a)``; the metric and the dual pair of
connections are (minus) its mixed derivatives on the diagonal.  The
``*_fd`` functions compute them by finite differences so that they can be
compared with the closed forms in :mod:`phigeom.geometry`.
"""

from __future__ import annotations

import itertools

import numpy as np

from .errors import SingularWeightError
from .sample_space import Density, FiniteSpace

SECOND_ORDER_STEP = 1e-4
THIRD_ORDER_STEP = 1e-3


def _unpack(p, q, space):
    if isinstance(p, Density):
        space = p.space
    if space is None:
        raise ValueError("pass Density objects or an explicit space")
    pv = p.values if isinstance(p, Density) else np.asarray(p, dtype=float)
    qv = q.values if isinstance(q, Density) else np.asarray(q, dtype=float)
    if isinstance(q, Density) and not q.space.same_as(space):
        raise ValueError("p and q live on different spaces")
    if pv.shape != (space.size,) or qv.shape != (space.size,):
        raise ValueError("densities must have one value per sample point")
    return space, pv, qv


def phi_divergence(phi, u0, p, q, space: FiniteSpace | None = None) -> float:
    """phi-divergence ``D(p || q)`` in the usual argument order.

    Raises
    ------
    SingularWeightError
        If ``1 / (phi^-1)'(p)`` is not finite and positive at some point.
    """
    space, pv, qv = _unpack(p, q, space)
    u0 = np.ones(space.size) if u0 is None else np.asarray(u0, dtype=float)
    a = np.asarray(phi.inv(pv), dtype=float)
    w = np.asarray(phi.d1(a), dtype=float)
    if not np.all(np.isfinite(w) & (w > 0)):
        raise SingularWeightError("(phi^-1)'(p) is singular")
    w = w * space.weights
    return float((a - np.asarray(phi.inv(qv), dtype=float)) @ w / (u0 @ w))


def kl_divergence(p, q, space: FiniteSpace | None = None) -> float:
    space, pv, qv = _unpack(p, q, space)
    return float(np.sum(pv * np.log(pv / qv) * space.weights))


def family_divergence(family, theta_p, theta_q) -> float:
    """``D(p_{theta_p} || p_{theta_q})`` within a family."""
    p = family.point_at(theta_p)
    q = family.point_at(theta_q)
    return phi_divergence(family.phi, family.u0, p.p, q.p, family.space)


def divergence_gradient(family, target, theta) -> np.ndarray:
    """Gradient of ``theta -> D(target || p_theta)``.

    Equals ``-E'_target[d_i f_theta]`` where E' is weighted at the target.
    """
    point = family.point_at(theta)
    space, pv, _ = _unpack(target, point.p, family.space)
    w = np.asarray(family.phi.d1(family.phi.inv(pv))) * space.weights
    return -(point.df @ w) / (family.u0 @ w)


class _Contrast:
    """Memoized ``(a, b) -> D(p_b || p_a)`` over a stencil."""

    def __init__(self, family):
        self.family = family
        self._points = {}

    def density(self, theta):
        key = tuple(np.round(theta, 15))
        if key not in self._points:
            self._points[key] = self.family.point_at(theta).p
        return self._points[key]

    def __call__(self, a, b):
        fam = self.family
        return phi_divergence(fam.phi, fam.u0, self.density(b), self.density(a), fam.space)


def _mixed_derivative(fn, x, dirs, h):
    """Product central-difference derivative of ``fn`` along the listed axes."""
    total = 0.0
    for signs in itertools.product((1.0, -1.0), repeat=len(dirs)):
        y = x.copy()
        for s, d in zip(signs, dirs):
            y[d] += s * h
        total += np.prod(signs) * fn(y)
    return total / (2.0 * h) ** len(dirs)


def divergence_metric_fd(family, theta, h=SECOND_ORDER_STEP) -> np.ndarray:
    """``g_ij = -d_{a_i} d_{b_j} contrast(a, b)`` at ``a = b = theta``."""
    if not h > 0:
        raise ValueError("step h must be positive")
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    n = theta.size
    contrast = _Contrast(family)
    x0 = np.concatenate([theta, theta])

    def fn(x):
        return contrast(x[:n], x[n:])

    return np.array([[-_mixed_derivative(fn, x0, [i, n + j], h) for j in range(n)] for i in range(n)])


def divergence_christoffels_fd(family, theta, h=THIRD_ORDER_STEP):
    """Dual pair from third mixed derivatives of the contrast.

    Returns ``(G, G_star)`` with ``G_ijk = -d_{a_i} d_{a_j} d_{b_k}`` and
    ``G_star_ijk = -d_{a_k} d_{b_i} d_{b_j}`` of ``contrast`` on the diagonal;
    these approximate ``Gamma^(1)`` and ``Gamma^(-1)``.
    """
    if not h > 0:
        raise ValueError("step h must be positive")
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    n = theta.size
    contrast = _Contrast(family)
    x0 = np.concatenate([theta, theta])

    def fn(x):
        return contrast(x[:n], x[n:])

    G = np.empty((n, n, n))
    G_star = np.empty((n, n, n))
    for i, j, k in itertools.product(range(n), repeat=3):
        G[i, j, k] = -_mixed_derivative(fn, x0, [i, j, n + k], h)
        G_star[i, j, k] = -_mixed_derivative(fn, x0, [k, n + i, n + j], h)
    return G, G_star
