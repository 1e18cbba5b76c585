"""Metric, connections, curvature and geodesics at points of a family.

Everything here works from the local jet ``(f, df, d2f)`` of a
:class:`~phigeom.phi_family.ManifoldPoint`, so it applies equally to the
natural chart of a phi-family and to any reparametrization of it.

Index conventions: lowered Christoffel symbols are stored as ``G[i, j, k]``
(symmetric in ``i, j``); raised ones as ``C[l, i, j] = sum_k G[i, j, k] g^{kl}``;
curvature as ``R[l, k, i, j]`` with ``R(d_i, d_j) d_k = R[l, k, i, j] d_l``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NotPositiveDefiniteError, PhiGeomError, TruncatedPathError
from .phi_family import ManifoldPoint

PD_RELATIVE_THRESHOLD = 1e-10
METRIC_FD_SCALE = 1e-4

PLUS1 = "plus1"
MINUS1 = "minus1"
ALPHA = "alpha"
LEVI_CIVITA = "levi_civita"


def default_step(theta, scale=METRIC_FD_SCALE):
    """Central-difference step ``scale * max(1, |theta|_inf)``."""
    return scale * max(1.0, float(np.max(np.abs(theta))) if np.size(theta) else 1.0)


@dataclass(frozen=True, eq=False)
class MetricTensor:
    theta: np.ndarray
    g: np.ndarray
    g_inv: np.ndarray
    # max |(-E'[d2f]) - E''[df df]|, the gap between the two metric formulas
    form_gap: float = 0.0

    def to_dict(self):
        return {"theta": self.theta.tolist(), "g": self.g.tolist(), "g_inv": self.g_inv.tolist(),
                "form_gap": self.form_gap}


@dataclass(frozen=True, eq=False)
class ChristoffelTensor:
    theta: np.ndarray
    kind: str
    gamma: np.ndarray
    alpha: float | None = field(default=None)

    def raised(self, g_inv):
        """``C[l, i, j] = sum_k gamma[i, j, k] g_inv[k, l]``."""
        return np.einsum("ijk,kl->lij", self.gamma, g_inv)

    def to_dict(self):
        out = {"theta": self.theta.tolist(), "kind": self.kind, "indices": "(i,j,k)",
               "gamma": self.gamma.tolist()}
        if self.alpha is not None:
            out["alpha"] = self.alpha
        return out


class _Moments:
    """The handful of weighted moments every connection formula reuses."""

    def __init__(self, point: ManifoldPoint):
        w = point.weights
        df, d2f, u0 = point.df, point.d2f, point.u0
        self.g = (df * w.w2) @ df.T
        self.g_e1 = -(d2f @ w.w1)
        self.e1_d2f = d2f @ w.w1
        self.e2_d2f_df = np.einsum("ijm,km,m->ijk", d2f, df, w.w2)
        self.e2_u0_df = (df * u0) @ w.w2
        self.e3_ddd = np.einsum("im,jm,km,m->ijk", df, df, df, w.w3)


def metric_forms(point: ManifoldPoint):
    """Return ``(-E'[d2f], E''[df df])``; they coincide on any family."""
    m = _Moments(point)
    return m.g_e1, m.g


def metric(point: ManifoldPoint) -> MetricTensor:
    """Generalized Fisher metric ``E''[d_i f d_j f]`` with its inverse.

    Raises
    ------
    NotPositiveDefiniteError
        If the smallest eigenvalue is not above ``1e-10`` times the largest.
    """
    g_e1, g = metric_forms(point)
    g = 0.5 * (g + g.T)
    spectrum = np.linalg.eigvalsh(g)
    if not (spectrum[-1] > 0 and spectrum[0] > PD_RELATIVE_THRESHOLD * spectrum[-1]):
        raise NotPositiveDefiniteError(spectrum)
    g_inv = np.linalg.inv(g)
    return MetricTensor(point.theta.copy(), g, 0.5 * (g_inv + g_inv.T), float(np.max(np.abs(g_e1 - g))))


def christoffel_pm1(point: ManifoldPoint):
    """Lowered symbols of the dual pair ``(D^(1), D^(-1))`` at ``point``."""
    m = _Moments(point)
    g1 = m.e2_d2f_df - m.e1_d2f[:, :, None] * m.e2_u0_df[None, None, :]
    gm1 = (
        m.e2_d2f_df
        + m.e3_ddd
        - m.g[None, :, :] * m.e2_u0_df[:, None, None]
        - m.g[:, None, :] * m.e2_u0_df[None, :, None]
    )
    th = point.theta.copy()
    return ChristoffelTensor(th, PLUS1, g1), ChristoffelTensor(th, MINUS1, gm1)


def skewness(point: ManifoldPoint) -> np.ndarray:
    """Totally symmetric tensor ``T`` with ``Gamma^(alpha) = Gamma^(0) - alpha T``."""
    m = _Moments(point)
    e = m.e2_u0_df
    return 0.5 * (
        m.e3_ddd
        - np.einsum("ki,j->ijk", m.g, e)
        - np.einsum("kj,i->ijk", m.g, e)
        - np.einsum("ij,k->ijk", m.g, e)
    )


def blend(plus1: np.ndarray, minus1: np.ndarray, alpha: float) -> np.ndarray:
    return 0.5 * (1.0 + alpha) * plus1 + 0.5 * (1.0 - alpha) * minus1


def christoffel_alpha(point: ManifoldPoint, alpha: float) -> ChristoffelTensor:
    alpha = float(alpha)
    p1, m1 = christoffel_pm1(point)
    if alpha == 1.0:
        gamma = p1.gamma
    elif alpha == -1.0:
        gamma = m1.gamma
    else:
        gamma = blend(p1.gamma, m1.gamma, alpha)
    return ChristoffelTensor(point.theta.copy(), ALPHA, gamma, alpha)


def metric_derivative(family, theta, h=None) -> np.ndarray:
    """``dg[i, j, k] = d g_jk / d theta_i`` by central differences."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    h = default_step(theta) if h is None else float(h)
    if not h > 0:
        raise ValueError("step h must be positive")
    n = theta.size
    dg = np.empty((n, n, n))
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        gp = metric(family.point_at(theta + e)).g
        gm = metric(family.point_at(theta - e)).g
        dg[i] = (gp - gm) / (2.0 * h)
    return dg


def levi_civita(family, theta, h=None) -> ChristoffelTensor:
    """Levi-Civita symbols from finite differences of the metric alone."""
    dg = metric_derivative(family, theta, h)
    # gamma_ijk = (d_j g_ki + d_i g_kj - d_k g_ij) / 2
    gamma = 0.5 * (np.einsum("jki->ijk", dg) + np.einsum("ikj->ijk", dg) - np.einsum("kij->ijk", dg))
    return ChristoffelTensor(np.atleast_1d(np.asarray(theta, dtype=float)).copy(), LEVI_CIVITA, gamma)


def raised_christoffel(point: ManifoldPoint, alpha: float) -> np.ndarray:
    """``C[l, i, j] = Gamma^l_ij`` for the alpha-connection, raised with the E'' metric."""
    return christoffel_alpha(point, alpha).raised(metric(point).g_inv)


def riemann_curvature(family, theta, alpha, h=None) -> np.ndarray:
    """Curvature ``R[l, k, i, j]`` of the alpha-connection.

    Christoffel derivatives are central differences with step ``h``.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    n = theta.size
    if n == 1:
        return np.zeros((1, 1, 1, 1))
    h = default_step(theta) if h is None else float(h)
    if not h > 0:
        raise ValueError("step h must be positive")
    C = raised_christoffel(family.point_at(theta), alpha)
    dC = np.empty((n, n, n, n))
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        dC[i] = (raised_christoffel(family.point_at(theta + e), alpha)
                 - raised_christoffel(family.point_at(theta - e), alpha)) / (2.0 * h)
    # R^l_kij = d_i C^l_jk - d_j C^l_ik + C^l_im C^m_jk - C^l_jm C^m_ik
    return (
        np.einsum("iljk->lkij", dC)
        - np.einsum("jlik->lkij", dC)
        + np.einsum("lim,mjk->lkij", C, C)
        - np.einsum("ljm,mik->lkij", C, C)
    )


def _geodesic_rhs(family, alpha, theta, v):
    C = raised_christoffel(family.point_at(theta), alpha)
    return v, -np.einsum("kij,i,j->k", C, v, v)


def geodesic(family, theta0, v0, alpha, t_end, steps):
    """Integrate the alpha-geodesic from ``theta0`` with velocity ``v0``.

    Fixed-step classical Runge-Kutta on ``theta'' + Gamma(theta', theta') = 0``.

    Returns
    -------
    times : (steps + 1,) array
    thetas : (steps + 1, n) array
    velocities : (steps + 1, n) array

    Raises
    ------
    TruncatedPathError
        If the family cannot be evaluated somewhere along the way; carries the
        last valid time and the path computed so far.
    """
    steps = int(steps)
    if steps < 2:
        raise ValueError("steps must be at least 2")
    theta = np.atleast_1d(np.asarray(theta0, dtype=float)).copy()
    v = np.atleast_1d(np.asarray(v0, dtype=float)).copy()
    dt = float(t_end) / steps
    times = [0.0]
    thetas = [theta.copy()]
    vels = [v.copy()]
    for s in range(steps):
        try:
            k1x, k1v = _geodesic_rhs(family, alpha, theta, v)
            k2x, k2v = _geodesic_rhs(family, alpha, theta + 0.5 * dt * k1x, v + 0.5 * dt * k1v)
            k3x, k3v = _geodesic_rhs(family, alpha, theta + 0.5 * dt * k2x, v + 0.5 * dt * k2v)
            k4x, k4v = _geodesic_rhs(family, alpha, theta + dt * k3x, v + dt * k3v)
        except PhiGeomError as exc:
            raise TruncatedPathError(times[-1], (np.array(times), np.array(thetas)), exc) from exc
        theta = theta + dt / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x)
        v = v + dt / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
        times.append((s + 1) * dt)
        thetas.append(theta.copy())
        vels.append(v.copy())
    return np.array(times), np.array(thetas), np.array(vels)


def natural_gradient_step(family, theta, gradient, rate):
    """``theta - rate * g^{-1} gradient`` using the metric at ``theta``."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    gradient = np.atleast_1d(np.asarray(gradient, dtype=float))
    g = metric(family.point_at(theta)).g
    return theta - rate * np.linalg.solve(g, gradient)


def natural_gradient_descent(family, objective_gradient, theta0, rate=1.0, max_steps=200, tol=1e-12):
    """Iterate :func:`natural_gradient_step` until the step is below ``tol``.

    Returns the final parameter and the list of iterates (including ``theta0``).
    """
    theta = np.atleast_1d(np.asarray(theta0, dtype=float))
    path = [theta]
    for _ in range(max_steps):
        new = natural_gradient_step(family, theta, objective_gradient(theta), rate)
        path.append(new)
        done = np.max(np.abs(new - theta)) <= tol
        theta = new
        if done:
            break
    return theta, path
