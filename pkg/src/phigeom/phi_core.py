"""Deformed exponentials (phi-functions) and their validation.

A phi-function is a convex map from the reals onto (0, inf) that tends to 0
at -inf and to inf at +inf.  Two closed-form instances ship here, the
ordinary exponential and the Kaniadakis kappa-exponential

    exp_k(u) = (k u + sqrt(1 + k^2 u^2))^(1/k) = exp(asinh(k u) / k),

with inverse ln_k(v) = (v^k - v^-k) / (2k) = sinh(k log v) / k.  Arbitrary
callables and tabulated curves can be wrapped with :meth:`PhiFunction.custom`
and :meth:`PhiFunction.tabulated`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from . import kernels
from .errors import PhiOverflowError, PhiValidationError

EXPONENTIAL = "exponential"
KANIADAKIS = "kaniadakis"
CUSTOM = "custom"

VALIDATION_HORIZON = 40.0
VALIDATION_EPS = 1e-12
_FD_STEP = np.finfo(float).eps ** (1.0 / 3.0)


@dataclass(frozen=True)
class _CustomBundle:
    name: str
    value: Callable
    d1: Callable
    d2: Callable
    d3: Callable | None
    inv: Callable | None
    domain: tuple[float, float] | None = None


@dataclass(frozen=True)
class PhiBundle:
    value: float
    d1: float
    d2: float
    d3: float


@dataclass(frozen=True)
class PhiFunction:
    """An immutable phi-function with derivatives up to third order.

    Use the constructors :meth:`exponential`, :meth:`kaniadakis`,
    :meth:`custom` or :meth:`tabulated` rather than instantiating directly.
    All evaluation methods accept scalars or arrays.
    """

    kind: str
    kappa: float | None = None
    _custom: _CustomBundle | None = field(default=None, repr=False, compare=False)

    @classmethod
    def exponential(cls) -> "PhiFunction":
        return cls(EXPONENTIAL)

    @classmethod
    def kaniadakis(cls, kappa: float) -> "PhiFunction":
        kappa = float(kappa)
        if kappa == 0.0:
            raise ValueError("kappa = 0 is the exponential; use PhiFunction.exponential()")
        if not -1.0 < kappa < 1.0:
            raise ValueError(f"kappa must lie in (-1, 1), got {kappa}")
        return cls(KANIADAKIS, kappa)

    @classmethod
    def custom(cls, value, d1, d2, d3=None, inv=None, name="custom") -> "PhiFunction":
        """Wrap user callables.

        Without ``d3`` the third derivative is a central difference of ``d2``
        (roughly 1e-10 relative accuracy at best).  Without ``inv`` the
        inverse is found by bracketed root finding on ``value``.
        """
        return cls(CUSTOM, None, _CustomBundle(name, value, d1, d2, d3, inv))

    @classmethod
    def tabulated(cls, u: Sequence[float], values: Sequence[float], name="tabulated") -> "PhiFunction":
        """Cubic-spline phi through ``(u, values)``, interpolated in log space.

        Evaluation outside ``[u[0], u[-1]]`` raises ``ValueError``.
        """
        u = np.asarray(u, dtype=float)
        values = np.asarray(values, dtype=float)
        if u.ndim != 1 or u.shape != values.shape or u.size < 4:
            raise ValueError("tabulated phi needs matching 1-d arrays with at least 4 nodes")
        if np.any(np.diff(u) <= 0) or np.any(values <= 0):
            raise ValueError("nodes must increase strictly and values must be positive")
        spline = CubicSpline(u, np.log(values))
        lo, hi = float(u[0]), float(u[-1])

        def derivs(x):
            x = np.asarray(x, dtype=float)
            if np.any((x < lo) | (x > hi)):
                raise ValueError(f"tabulated phi evaluated outside [{lo}, {hi}]")
            return [spline(x, k) for k in range(4)]

        def value(x):
            return np.exp(derivs(x)[0])

        def d1(x):
            s0, s1, _, _ = derivs(x)
            return np.exp(s0) * s1

        def d2(x):
            s0, s1, s2, _ = derivs(x)
            return np.exp(s0) * (s2 + s1 * s1)

        def d3(x):
            s0, s1, s2, s3 = derivs(x)
            return np.exp(s0) * (s3 + 3.0 * s1 * s2 + s1**3)

        bundle = _CustomBundle(name, value, d1, d2, d3, None, (lo, hi))
        return cls(CUSTOM, None, bundle)

    # -- evaluation ---------------------------------------------------------

    @property
    def name(self) -> str:
        if self.kind == KANIADAKIS:
            return f"kaniadakis(kappa={self.kappa:g})"
        if self.kind == CUSTOM:
            return self._custom.name
        return self.kind

    @property
    def _kernel_kind(self):
        return kernels.EXPONENTIAL if self.kind == EXPONENTIAL else kernels.KANIADAKIS

    def value(self, u):
        if self.kind == CUSTOM:
            return np.asarray(self._custom.value(np.asarray(u, dtype=float)), dtype=float)
        return kernels.phi_value(self._kernel_kind, self.kappa or 0.0, u)

    def derivatives(self, u):
        """Return the tuple ``(phi, phi', phi'', phi''')`` at ``u``."""
        if self.kind != CUSTOM:
            return kernels.phi_bundle(self._kernel_kind, self.kappa or 0.0, u)
        c = self._custom
        u = np.asarray(u, dtype=float)
        return (
            np.asarray(c.value(u), dtype=float),
            np.asarray(c.d1(u), dtype=float),
            np.asarray(c.d2(u), dtype=float),
            self.d3(u),
        )

    def d1(self, u):
        return self._nth(u, 1)

    def d2(self, u):
        return self._nth(u, 2)

    def d3(self, u):
        if self.kind == CUSTOM and self._custom.d3 is None:
            u = np.asarray(u, dtype=float)
            h = _FD_STEP * np.maximum(1.0, np.abs(u))
            return (self._custom.d2(u + h) - self._custom.d2(u - h)) / (2.0 * h)
        return self._nth(u, 3)

    def _nth(self, u, order):
        if self.kind == CUSTOM:
            fn = (None, self._custom.d1, self._custom.d2, self._custom.d3)[order]
            return np.asarray(fn(np.asarray(u, dtype=float)), dtype=float)
        return self.derivatives(u)[order]

    def inv(self, y):
        y = np.asarray(y, dtype=float)
        if self.kind == EXPONENTIAL:
            return np.log(y)
        if self.kind == KANIADAKIS:
            return np.sinh(self.kappa * np.log(y)) / self.kappa
        if self._custom.inv is not None:
            return np.asarray(self._custom.inv(y), dtype=float)
        return np.vectorize(self._numeric_inverse, otypes=[float])(y)

    def inv_d1(self, y):
        """Derivative of the inverse, computed as ``1 / phi'(phi^-1(y))``."""
        y = np.asarray(y, dtype=float)
        if self.kind == KANIADAKIS:
            k = self.kappa
            return 0.5 * (y ** (k - 1.0) + y ** (-k - 1.0))
        if self.kind == EXPONENTIAL:
            return 1.0 / y
        return 1.0 / self.d1(self.inv(y))

    def _numeric_inverse(self, y):
        if self._custom.domain is not None:
            lo, hi = self._custom.domain
        else:
            lo, hi = -1.0, 1.0
            while float(self.value(lo)) > y:
                lo *= 2.0
                if lo < -1e300:
                    raise ValueError(f"cannot bracket phi^-1({y})")
            while float(self.value(hi)) < y:
                hi *= 2.0
                if hi > 1e300:
                    raise ValueError(f"cannot bracket phi^-1({y})")
        return brentq(lambda x: float(self.value(x)) - y, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)

    # -- config -------------------------------------------------------------

    def to_config(self) -> dict:
        if self.kind == EXPONENTIAL:
            return {"kind": EXPONENTIAL}
        if self.kind == KANIADAKIS:
            return {"kind": KANIADAKIS, "kappa": self.kappa}
        return {"kind": CUSTOM, "name": self._custom.name}

    @classmethod
    def from_config(cls, cfg: dict) -> "PhiFunction":
        kind = cfg.get("kind")
        extra = set(cfg) - {"kind", "kappa"}
        if extra:
            raise ValueError(f"unknown phi keys: {sorted(extra)}")
        if kind == EXPONENTIAL:
            if "kappa" in cfg:
                raise ValueError("exponential phi takes no kappa")
            return cls.exponential()
        if kind == KANIADAKIS:
            if "kappa" not in cfg:
                raise ValueError("kaniadakis phi requires kappa")
            return cls.kaniadakis(cfg["kappa"])
        raise ValueError(f"unsupported phi kind {kind!r}")


def eval_bundle(phi: PhiFunction, u: float) -> PhiBundle:
    """Evaluate phi and its first three derivatives at a single point."""
    u = float(u)
    if not math.isfinite(u):
        raise ValueError(f"u must be finite, got {u}")
    vals = [float(np.asarray(x).reshape(-1)[0]) for x in phi.derivatives(np.array([u]))]
    if not all(math.isfinite(v) for v in vals):
        raise PhiOverflowError(u)
    return PhiBundle(*vals)


# -- validation -------------------------------------------------------------


@dataclass
class AxiomCheck:
    name: str
    passed: bool
    detail: str = ""
    witness: tuple | None = None


@dataclass
class ValidationReport:
    phi: str
    checks: list[AxiomCheck]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> AxiomCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "phi": self.phi,
            "passed": self.passed,
            "checks": [
                {"name": c.name, "passed": c.passed, "detail": c.detail,
                 "witness": list(c.witness) if c.witness is not None else None}
                for c in self.checks
            ],
        }


def _safe_eval(fn, u):
    with np.errstate(all="ignore"):
        try:
            return float(np.asarray(fn(np.array([u]))).reshape(-1)[0])
        except (OverflowError, ValueError, FloatingPointError):
            return math.nan


def _limit_check(phi, horizon, eps):
    lower_ok = upper_ok = False
    last_lower = math.inf
    lower_monotone = True
    L = horizon
    lower_at = upper_at = None
    while L <= 1e300 and not (lower_ok and upper_ok):
        lo = _safe_eval(phi.value, -L)
        hi = _safe_eval(phi.value, L)
        if not lower_ok:
            if not math.isfinite(lo) or lo > last_lower:
                lower_monotone = False
            last_lower = lo
            if lower_monotone and lo < eps:
                lower_ok, lower_at = True, L
        if not upper_ok and (hi > 1.0 / eps):
            upper_ok, upper_at = True, L
        L *= 10.0
    return lower_ok, upper_ok, lower_at, upper_at


def validate_phi(phi: PhiFunction, grid: Sequence[float], tol: float = 1e-12,
                 horizon: float = VALIDATION_HORIZON, eps: float = VALIDATION_EPS) -> ValidationReport:
    """Check a candidate phi-function against the defining axioms on ``grid``.

    Reports positivity, convexity over consecutive grid triples, the limits
    at -inf/+inf (probed on the horizons ``horizon * 10**k``), integrability
    (vacuous on a finite sample space), derivative consistency and the
    inverse round trip.

    Raises
    ------
    PhiValidationError
        If phi is not finite somewhere on the grid.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 3 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must have at least 3 strictly increasing points")
    with np.errstate(all="ignore"):
        vals = np.asarray(phi.value(grid), dtype=float)
    bad = np.flatnonzero(~np.isfinite(vals))
    if bad.size:
        raise PhiValidationError(f"phi is not finite at u={grid[bad[0]]}", location=float(grid[bad[0]]))

    checks = []
    nonpos = np.flatnonzero(vals <= 0)
    if nonpos.size:
        k = nonpos[0]
        checks.append(AxiomCheck("positivity", False, f"phi({grid[k]:g}) = {vals[k]:g} <= 0", (float(grid[k]),)))
    else:
        checks.append(AxiomCheck("positivity", True, "phi > 0 on grid"))

    conv = AxiomCheck("a1_convexity", True, "chord test on consecutive triples")
    for k in range(1, grid.size - 1):
        a, b, c = grid[k - 1], grid[k], grid[k + 1]
        lam = (c - b) / (c - a)
        chord = lam * vals[k - 1] + (1.0 - lam) * vals[k + 1]
        if vals[k] > chord + tol:
            conv = AxiomCheck("a1_convexity", False, f"phi({b:g}) exceeds chord by {vals[k] - chord:.3g}",
                              (float(a), float(b), float(c)))
            break
    checks.append(conv)

    lower_ok, upper_ok, lower_at, upper_at = _limit_check(phi, horizon, eps)
    if lower_ok and upper_ok:
        checks.append(AxiomCheck("a2_limits", True, f"phi(-{lower_at:g}) < {eps:g}, phi({upper_at:g}) > {1 / eps:g}"))
    else:
        which = [w for w, ok in (("lower limit 0", lower_ok), ("upper limit inf", upper_ok)) if not ok]
        checks.append(AxiomCheck("a2_limits", False, "fails " + " and ".join(which)))

    checks.append(AxiomCheck("a3_integrability", True, "vacuous on a finite sample space"))

    checks.append(_derivative_check(phi, grid))
    if not nonpos.size:
        checks.append(_inverse_check(phi, vals))
    return ValidationReport(phi.name, checks)


def _derivative_check(phi, grid, rtol=1e-6):
    fns = [phi.value, phi.d1, phi.d2, phi.d3]
    h = _FD_STEP * np.maximum(1.0, np.abs(grid))
    with np.errstate(all="ignore"):
        for order in range(1, 4):
            exact = np.asarray(fns[order](grid), dtype=float)
            fd = (np.asarray(fns[order - 1](grid + h)) - np.asarray(fns[order - 1](grid - h))) / (2.0 * h)
            scale = np.maximum(np.maximum(np.abs(exact), np.abs(fd)), 1e-300)
            err = np.abs(exact - fd) / scale
            bad = np.flatnonzero(~(err <= rtol))
            if bad.size:
                k = bad[0]
                return AxiomCheck("derivatives", False,
                                  f"d{order} disagrees with finite difference at u={grid[k]:g} (rel {err[k]:.3g})",
                                  (order, float(grid[k])))
    return AxiomCheck("derivatives", True, f"d1..d3 match central differences within {rtol:g}")


def _inverse_check(phi, ys, rtol=1e-8):
    with np.errstate(all="ignore"):
        try:
            x = phi.inv(ys)
        except ValueError as exc:
            return AxiomCheck("inverse", False, str(exc))
        back = np.asarray(phi.value(x))
        err = np.abs(back - ys) / ys
        prod_err = np.abs(np.asarray(phi.inv_d1(ys)) * np.asarray(phi.d1(x)) - 1.0)
    worst = float(np.nanmax(np.maximum(err, prod_err))) if ys.size else 0.0
    ok = bool(np.all(err <= rtol) and np.all(prod_err <= rtol) and np.all(np.diff(x) > 0))
    return AxiomCheck("inverse", ok, f"max round-trip error {worst:.3g}")
