"""Parametric phi-families on a finite space.

A family centered at ``p = phi(c)`` with reference direction ``u0 > 0`` and
directions ``u_1..u_n`` has members

    p(t; theta) = phi(c(t) + sum_i theta_i u_i(t) - psi(theta) u0(t)),

where ``psi`` is fixed by normalization.  The directions are projected so
that ``sum u_i phi'(c) mu = 0``; with that, psi vanishes at the center, its
gradient is ``E'_theta[u_i]`` and its Hessian is the metric.

:class:`ManifoldPoint` carries the local jet ``(f, df, d2f)`` that the
geometry layer consumes.  :class:`ReparametrizedFamily` re-expresses a family
in another chart through the chain rule.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernels
from .errors import DegenerateDirectionError, DegenerateWeightError, NormalizerError
from .phi_core import CUSTOM, PhiFunction
from .sample_space import Density, FiniteSpace, TangentVector, Weights

NORMALIZATION_TOL = 1e-10
_DEGENERATE_RTOL = 1e-12


def orthogonalize_direction(space: FiniteSpace, phi: PhiFunction, c, u0, raw):
    """Project ``raw`` along ``u0`` so that ``sum(out * phi'(c) * mu) == 0``.

    Raises
    ------
    DegenerateDirectionError
        If the projection leaves (numerically) nothing, i.e. ``raw`` is
        parallel to ``u0``.
    """
    raw = np.asarray(raw, dtype=float)
    u0 = np.asarray(u0, dtype=float)
    if raw.shape != (space.size,):
        raise ValueError(f"direction must have {space.size} entries")
    w = np.asarray(phi.d1(np.asarray(c, dtype=float))) * space.weights
    denom = float(u0 @ w)
    if not denom > 0.0:
        raise DegenerateWeightError(f"integral of u0 * phi'(c) is {denom!r}")
    out = raw - (float(raw @ w) / denom) * u0
    if np.max(np.abs(out)) <= _DEGENERATE_RTOL * max(1.0, float(np.max(np.abs(raw)))):
        raise DegenerateDirectionError("direction is parallel to u0")
    return out


@dataclass(frozen=True, eq=False)
class PhiFamily:
    """Parametric phi-family; build with :meth:`build`."""

    space: FiniteSpace
    phi: PhiFunction
    center: Density
    c: np.ndarray
    u0: np.ndarray
    directions: np.ndarray

    @classmethod
    def build(cls, phi: PhiFunction, center: Density, directions, u0=None) -> "PhiFamily":
        space = center.space
        u0 = np.ones(space.size) if u0 is None else np.array(u0, dtype=float)
        if u0.shape != (space.size,) or np.any(u0 <= 0) or not np.all(np.isfinite(u0)):
            raise ValueError("u0 must be finite and strictly positive on every point")
        c = np.asarray(phi.inv(center.values), dtype=float)
        raw = np.atleast_2d(np.asarray(directions, dtype=float))
        if raw.shape[1] != space.size:
            raise ValueError(f"directions must have {space.size} entries each")
        U = np.array([orthogonalize_direction(space, phi, c, u0, r) for r in raw])
        if np.linalg.matrix_rank(U) < U.shape[0]:
            raise DegenerateDirectionError(f"{U.shape[0]} directions span only rank {np.linalg.matrix_rank(U)}")
        for arr in (c, u0, U):
            arr.setflags(write=False)
        return cls(space, phi, center, c, u0, U)

    @property
    def dim(self) -> int:
        return self.directions.shape[0]

    def _theta(self, theta):
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        if theta.shape != (self.dim,):
            raise ValueError(f"theta must have {self.dim} components, got shape {theta.shape}")
        if not np.all(np.isfinite(theta)):
            raise ValueError("theta must be finite")
        return theta

    def psi(self, theta) -> float:
        theta = self._theta(theta)
        base = self.c + theta @ self.directions
        if self.phi.kind == CUSTOM:
            psi, r = kernels.solve_psi_generic(self.phi.value, self.phi.d1, base, self.u0, self.space.weights)
        else:
            psi, r = kernels.solve_psi(self.phi._kernel_kind, self.phi.kappa or 0.0, base, self.u0,
                                       self.space.weights)
        if not abs(r) <= NORMALIZATION_TOL:
            raise NormalizerError(f"normalization residual {r!r} at theta={theta.tolist()}")
        return psi

    def point_at(self, theta) -> "ManifoldPoint":
        theta = self._theta(theta)
        psi = self.psi(theta)
        f = self.c + theta @ self.directions - psi * self.u0
        w = Weights(self.space, self.phi, f, self.u0)
        grad = w.e1(self.directions)
        df = self.directions - np.outer(grad, self.u0)
        hess = (df * w.w2) @ df.T
        hess = 0.5 * (hess + hess.T)
        d2f = -hess[:, :, None] * self.u0
        return ManifoldPoint(self, theta, psi, f, np.asarray(self.phi.value(f)), grad, df, d2f, w)

    def to_config(self) -> dict:
        return {
            "center": self.center.values.tolist(),
            "u0": self.u0.tolist(),
            "directions": self.directions.tolist(),
        }


@dataclass(frozen=True, eq=False)
class ManifoldPoint:
    """A member of a family together with its local jet.

    Attributes
    ----------
    theta : chart coordinates
    psi : normalizer value (of the underlying natural parameter)
    f : phi^-1 of the density
    p : density values ``phi(f)``
    grad_psi : gradient of psi in the chart coordinates
    df : (n, m) first derivatives of f
    d2f : (n, n, m) second derivatives of f
    weights : E', E'', E''' weights at f
    """

    family: object
    theta: np.ndarray
    psi: float
    f: np.ndarray
    p: np.ndarray
    grad_psi: np.ndarray
    df: np.ndarray
    d2f: np.ndarray
    weights: Weights

    @property
    def space(self) -> FiniteSpace:
        return self.family.space

    @property
    def phi(self) -> PhiFunction:
        return self.family.phi

    @property
    def u0(self) -> np.ndarray:
        return self.family.u0

    @property
    def dim(self) -> int:
        return self.df.shape[0]

    @property
    def density(self) -> Density:
        return Density(self.space, self.p)

    def frame(self, i: int) -> TangentVector:
        return TangentVector(self.space, self.df[i])


@dataclass(frozen=True, eq=False)
class ReparametrizedFamily:
    """A family viewed through the chart ``xi -> theta = forward(xi)``.

    ``jacobian(xi)[i, a] = d theta_i / d xi_a`` and
    ``hessian(xi)[i, a, b] = d^2 theta_i / d xi_a d xi_b``.
    """

    base: PhiFamily
    forward: Callable
    jacobian: Callable
    hessian: Callable

    @classmethod
    def affine(cls, base: PhiFamily, matrix, offset=None) -> "ReparametrizedFamily":
        A = np.array(matrix, dtype=float)
        b = np.zeros(base.dim) if offset is None else np.array(offset, dtype=float)
        zeros = np.zeros((base.dim,) * 3)
        return cls(base, lambda xi: A @ xi + b, lambda xi: A, lambda xi: zeros)

    @classmethod
    def elementwise(cls, base: PhiFamily, fn, d1, d2) -> "ReparametrizedFamily":
        """Apply a scalar map to each coordinate separately."""
        n = base.dim

        def hess(xi):
            H = np.zeros((n, n, n))
            H[np.arange(n), np.arange(n), np.arange(n)] = d2(xi)
            return H

        return cls(base, fn, lambda xi: np.diag(d1(xi)), hess)

    @property
    def space(self):
        return self.base.space

    @property
    def phi(self):
        return self.base.phi

    @property
    def u0(self):
        return self.base.u0

    @property
    def center(self):
        return self.base.center

    @property
    def dim(self):
        return self.base.dim

    def psi(self, xi) -> float:
        return self.base.psi(self.forward(np.asarray(xi, dtype=float)))

    def point_at(self, xi) -> ManifoldPoint:
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        bp = self.base.point_at(self.forward(xi))
        J = np.asarray(self.jacobian(xi), dtype=float)
        H = np.asarray(self.hessian(xi), dtype=float)
        df = J.T @ bp.df
        d2f = np.einsum("ia,jb,ijm->abm", J, J, bp.d2f) + np.einsum("iab,im->abm", H, bp.df)
        return ManifoldPoint(self, xi, bp.psi, bp.f, bp.p, J.T @ bp.grad_psi, df, d2f, bp.weights)


def solve_psi(family, theta) -> float:
    """Normalizer at ``theta``."""
    return family.psi(theta)


def grad_psi(family, theta) -> np.ndarray:
    """Gradient of the normalizer, ``E'_theta[u_i]`` in natural coordinates."""
    return family.point_at(theta).grad_psi


def point_at(family, theta) -> ManifoldPoint:
    return family.point_at(theta)


def d_f(point: ManifoldPoint, i: int) -> TangentVector:
    """Derivative of ``f = phi^-1(p_theta)`` along coordinate ``i``: ``u_i - (d psi/d theta_i) u0``."""
    return point.frame(i)
