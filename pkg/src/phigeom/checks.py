"""Invariant battery for a configured family (backs ``phigeom check-all``).

Each check reports the worst observed error next to its tolerance.  Random
parameters come from a seeded generator so the report is reproducible.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import divergence as dv
from . import geometry as geo
from . import transport as tr
from .phi_family import PhiFamily
from .sample_space import Density


@dataclass
class CheckResult:
    name: str
    observed: float
    tolerance: float
    passed: bool

    def to_dict(self):
        return asdict(self)


def _fd_hessian(fn, x, h):
    n = x.size
    H = np.empty((n, n))
    I = np.eye(n) * h
    for i in range(n):
        for j in range(n):
            H[i, j] = (fn(x + I[i] + I[j]) - fn(x + I[i] - I[j]) - fn(x - I[i] + I[j]) + fn(x - I[i] - I[j])) / (4 * h * h)
    return H


def _random_curve(rng, theta, n_vertices=3, spread=0.3):
    return theta + rng.uniform(-spread, spread, size=(n_vertices, theta.size)) * np.r_[0.0, np.ones(n_vertices - 1)][:, None]


def run_battery(family, seed=0, n_points=3, spread=0.5, n_pairs=1000):
    """Run every invariant at ``n_points`` random parameters.

    Returns a list of :class:`CheckResult` in a fixed order.
    """
    rng = np.random.default_rng(seed)
    n = family.dim
    thetas = rng.uniform(-spread, spread, size=(n_points, n))
    natural = isinstance(family, PhiFamily)
    worst = {}

    def record(name, value, tol):
        prev = worst.get(name, (0.0, tol))[0]
        worst[name] = (max(prev, float(value)), tol)

    for theta in thetas:
        pt = family.point_at(theta)
        g_e1, g = geo.metric_forms(pt)
        record("metric_forms_agree", np.max(np.abs(g_e1 - g)), 1e-8)
        record("score_expectation_zero", np.max(np.abs(pt.df @ pt.weights.w1)), 1e-9)
        m = geo.metric(pt)

        if natural:
            h = geo.default_step(theta)
            record("hessian_of_psi_is_metric", np.max(np.abs(_fd_hessian(family.psi, theta, h) - m.g)), 1e-5)
            record("psi_equals_divergence",
                   abs(pt.psi - dv.phi_divergence(family.phi, family.u0, family.center, pt.density)), 1e-10)

        p1, m1 = geo.christoffel_pm1(pt)
        T = geo.skewness(pt)
        dg = geo.metric_derivative(family, theta)
        for alpha in (1.0, 0.5, 0.0, -0.5):
            ga = geo.christoffel_alpha(pt, alpha).gamma
            gb = geo.christoffel_alpha(pt, -alpha).gamma
            record("duality", np.max(np.abs(dg - (ga + gb.transpose(0, 2, 1)))), 1e-5)
            g0 = geo.christoffel_alpha(pt, 0.0).gamma
            record("alpha_blend_consistency", np.max(np.abs(ga - (g0 - alpha * T))), 1e-9)
        record("skewness_symmetric",
               max(np.max(np.abs(T - T.transpose(p))) for p in [(1, 0, 2), (0, 2, 1), (2, 1, 0)]), 1e-9)
        record("levi_civita_is_alpha_zero",
               np.max(np.abs(geo.levi_civita(family, theta).gamma - geo.christoffel_alpha(pt, 0.0).gamma)), 1e-5)
        record("divergence_metric_fd", np.max(np.abs(dv.divergence_metric_fd(family, theta) - m.g)), 1e-4)
        G, G_star = dv.divergence_christoffels_fd(family, theta)
        record("divergence_christoffels_fd",
               max(np.max(np.abs(G - p1.gamma)), np.max(np.abs(G_star - m1.gamma))), 5e-3)

        if natural:
            record("gamma_plus1_vanishes", np.max(np.abs(p1.gamma)), 1e-9)
            record("plus1_flat", np.max(np.abs(geo.riemann_curvature(family, theta, 1.0))), 1e-4)
            v0 = rng.normal(size=n)
            _, path, _ = geo.geodesic(family, theta, v0, 1.0, 1.0, 20)
            line = theta + np.linspace(0, 1, 21)[:, None] * v0
            record("plus1_geodesic_is_line", np.max(np.abs(path - line)), 1e-8)

        curve = _random_curve(rng, theta)
        points = [family.point_at(c) for c in curve]
        v0 = rng.normal(size=n)
        w0 = rng.normal(size=n)
        x = tr.coords_to_function(points[0], v0)
        direct = tr.transport_1(family, points[0], points[-1], x)
        via = tr.transport_1_along(family, points, x)
        record("transport1_path_independent", np.max(np.abs(direct.values - via.values)), 1e-10)
        v_ode = tr.transport_ode(family, curve, 1.0, v0)
        record("transport1_matches_ode",
               np.max(np.abs(tr.coords_to_function(points[-1], v_ode[-1]).values - direct.values)), 1e-5)
        w_ode = tr.transport_ode(family, curve, -1.0, w0)
        pairings = [tr.inner(p, a, b) for p, a, b in zip(points, v_ode, w_ode)]
        record("dual_pair_preserved", np.ptp(pairings), 1e-5)
        for i in range(n):
            for j in range(n):
                rec = tr.recover_connection_1(family, theta, i, j)
                ips = (pt.df * pt.weights.w2) @ rec.values
                record("recovered_connection_is_plus1", np.max(np.abs(ips - p1.gamma[i, j])), 1e-4)

    # divergence axioms on random densities of the space
    space = family.space
    neg = 0.0
    mismatch = 0.0
    for _ in range(n_pairs):
        p = Density(space, rng.dirichlet(np.ones(space.size)) + 1e-3)
        q = Density(space, rng.dirichlet(np.ones(space.size)) + 1e-3)
        neg = max(neg, -dv.phi_divergence(family.phi, family.u0, p, q))
        same = dv.phi_divergence(family.phi, family.u0, p, p)
        mismatch = max(mismatch, abs(same))
    record("divergence_nonnegative", max(neg, 0.0), 1e-12)
    record("divergence_zero_on_diagonal", mismatch, 1e-12)

    return [CheckResult(name, obs, tol, bool(obs <= tol)) for name, (obs, tol) in worst.items()]


def format_table(results):
    width = max(len(r.name) for r in results)
    lines = [f"{'check':<{width}}  {'observed':>10}  {'tolerance':>10}  result"]
    for r in results:
        lines.append(f"{r.name:<{width}}  {r.observed:10.3e}  {r.tolerance:10.1e}  {'PASS' if r.passed else 'FAIL'}")
    return "\n".join(lines)
