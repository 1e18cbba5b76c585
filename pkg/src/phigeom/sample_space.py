"""Finite measure spaces, densities, tangent vectors and the weighted
expectations E', E'', E''' that every geometric quantity is built from."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateWeightError, DensityError

POSITIVITY_FLOOR = 1e-12
LOAD_NORMALIZATION_TOL = 1e-6
DENOMINATOR_FLOOR = 1e-300


def _frozen(values):
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class FiniteSpace:
    """Sample points ``0..m-1`` carrying positive weights (counting measure by default)."""

    weights: np.ndarray

    def __post_init__(self):
        w = _frozen(self.weights)
        if w.ndim != 1 or w.size < 2:
            raise ValueError("a finite space needs at least 2 points")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValueError("weights must be finite and positive")
        object.__setattr__(self, "weights", w)

    @classmethod
    def counting(cls, size: int) -> "FiniteSpace":
        return cls(np.ones(int(size)))

    @property
    def size(self) -> int:
        return self.weights.size

    def integrate(self, h):
        """Sum of ``h * weights`` over the last axis."""
        return np.asarray(h, dtype=float) @ self.weights

    def same_as(self, other: "FiniteSpace") -> bool:
        return self is other or (self.size == other.size and np.array_equal(self.weights, other.weights))

    def __eq__(self, other):
        return isinstance(other, FiniteSpace) and self.same_as(other)

    def __hash__(self):
        return hash(self.weights.tobytes())


@dataclass(frozen=True, eq=False)
class Density:
    """Strictly positive density on a finite space, normalized on construction."""

    space: FiniteSpace
    values: np.ndarray

    def __post_init__(self):
        p = np.array(self.values, dtype=float)
        if p.shape != (self.space.size,):
            raise DensityError(f"expected {self.space.size} values, got shape {p.shape}")
        if not np.all(np.isfinite(p)):
            raise DensityError("density values must be finite")
        low = np.flatnonzero(p < POSITIVITY_FLOOR)
        if low.size:
            raise DensityError(f"density value {p[low[0]]:g} at point {low[0]} is below {POSITIVITY_FLOOR:g}")
        p = p / self.space.integrate(p)
        total = self.space.integrate(p)
        if abs(total - 1.0) > 1e-12:
            raise DensityError(f"normalization drifted to {total!r}")
        object.__setattr__(self, "values", _frozen(p))

    @classmethod
    def strict(cls, space: FiniteSpace, values) -> "Density":
        """Like the constructor but rejects inputs whose mass is off by more than 1e-6."""
        p = np.asarray(values, dtype=float)
        if p.shape == (space.size,):
            total = space.integrate(p)
            if not abs(total - 1.0) <= LOAD_NORMALIZATION_TOL:
                raise DensityError(f"density integrates to {total!r}, not 1")
        return cls(space, p)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


@dataclass(frozen=True, eq=False)
class TangentVector:
    """A function on the sample space, standing for a combination of the
    score-like frame vectors at some manifold point."""

    space: FiniteSpace
    values: np.ndarray

    def __post_init__(self):
        v = _frozen(self.values)
        if v.shape != (self.space.size,):
            raise ValueError(f"expected {self.space.size} values, got shape {v.shape}")
        object.__setattr__(self, "values", v)

    def __add__(self, other):
        return TangentVector(self.space, self.values + _values(other))

    def __sub__(self, other):
        return TangentVector(self.space, self.values - _values(other))

    def __mul__(self, scalar):
        return TangentVector(self.space, self.values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return TangentVector(self.space, -self.values)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


def _values(x):
    return x.values if isinstance(x, (TangentVector, Density)) else np.asarray(x, dtype=float)


def load_density(space: FiniteSpace, source) -> Density:
    """Load a density from a CSV path (one value per line) or an inline sequence."""
    if isinstance(source, (str, Path)):
        with open(source, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and r[0].strip()]
        values = [float(r[0]) for r in rows]
    else:
        values = list(source)
    return Density.strict(space, values)


class Weights:
    """Precomputed E', E'', E''' weight vectors for a fixed (phi, f, u0).

    ``E[h] = h @ w[k]`` for ``h`` of shape (..., m).
    """

    __slots__ = ("w1", "w2", "w3", "denominator")

    def __init__(self, space: FiniteSpace, phi, f, u0):
        f = np.asarray(f, dtype=float)
        u0 = np.asarray(u0, dtype=float)
        if f.shape != (space.size,) or u0.shape != (space.size,):
            raise ValueError("f and u0 must have one entry per sample point")
        _, d1, d2, d3 = phi.derivatives(f)
        denom = float(space.integrate(u0 * d1))
        if not denom > DENOMINATOR_FLOOR:
            raise DegenerateWeightError(f"integral of u0 * phi'(f) is {denom!r}")
        mu = space.weights / denom
        self.denominator = denom
        self.w1 = d1 * mu
        self.w2 = d2 * mu
        self.w3 = d3 * mu

    def __getitem__(self, order):
        return (None, self.w1, self.w2, self.w3)[order]

    def e1(self, h):
        return np.asarray(h, dtype=float) @ self.w1

    def e2(self, h):
        return np.asarray(h, dtype=float) @ self.w2

    def e3(self, h):
        return np.asarray(h, dtype=float) @ self.w3


def expectation(order, space, phi, f, u0, h):
    """Weighted expectation ``sum(h phi^(order)(f) mu) / sum(u0 phi'(f) mu)``.

    ``order`` is 1, 2 or 3.  ``h`` may carry leading batch axes; the sum runs
    over the last one.
    """
    if order not in (1, 2, 3):
        raise ValueError(f"order must be 1, 2 or 3, got {order}")
    h = _values(h)
    if h.shape[-1:] != (space.size,):
        raise ValueError("h must have one entry per sample point")
    out = h @ Weights(space, phi, f, u0)[order]
    return float(out) if h.ndim == 1 else out


def semi_inner_product(space, phi, f, u0, x, y):
    """``E''[x y]``; positive semi-definite whenever phi'' >= 0."""
    xv, yv = _values(x), _values(y)
    if xv.shape != (space.size,) or yv.shape != (space.size,):
        raise ValueError("tangent vectors must live on the given space")
    return expectation(2, space, phi, f, u0, xv * yv)
