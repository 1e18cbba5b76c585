import numpy as np
import pytest

from phigeom import geometry as geo
from phigeom.errors import NotPositiveDefiniteError, TruncatedPathError
from phigeom.phi_core import PhiFunction
from phigeom.phi_family import PhiFamily, ReparametrizedFamily
from phigeom.sample_space import Density, FiniteSpace

from conftest import FencedFamily, make_bernoulli_family, make_kaniadakis_family, sinh_chart
from oracles import classical_exponential_geometry, fd_metric_derivative, natural_chart, sinh_chart_symbolic


def test_bernoulli_metric_is_quarter(bern):
    m = geo.metric(bern.point_at([0.0]))
    np.testing.assert_allclose(m.g, [[0.25]], atol=1e-15)
    np.testing.assert_allclose(m.g @ m.g_inv, np.eye(1), atol=1e-12)


@pytest.mark.parametrize("t", [-1.3, 0.0, 0.4, 2.0])
def test_bernoulli_metric_is_p_one_minus_p(t):
    fam = make_bernoulli_family(p=(0.3, 0.7), direction=(1.0, 0.0))
    q = 0.3 * np.exp(t) / (0.3 * np.exp(t) + 0.7)
    assert geo.metric(fam.point_at([t])).g[0, 0] == pytest.approx(q * (1 - q), abs=1e-14)


def test_metric_tensor_invariants(kfam, rng):
    for _ in range(10):
        m = geo.metric(kfam.point_at(rng.uniform(-1, 1, size=2)))
        assert np.max(np.abs(m.g - m.g.T)) <= 1e-10
        assert np.all(np.linalg.eigvalsh(m.g) > 0)
        np.testing.assert_allclose(m.g @ m.g_inv, np.eye(2), atol=1e-8)
        assert m.form_gap <= 1e-8


def test_not_positive_definite_carries_spectrum():
    space = FiniteSpace.counting(3)
    # phi'' reported as zero: the E'' metric collapses
    phi = PhiFunction.custom(np.exp, np.exp, lambda u: np.zeros_like(u), inv=np.log, name="degenerate")
    fam = PhiFamily.build(phi, Density(space, [0.2, 0.3, 0.5]), [[1.0, 0.0, -1.0]])
    with pytest.raises(NotPositiveDefiniteError) as info:
        geo.metric(fam.point_at([0.1]))
    assert len(info.value.spectrum) == 1


@pytest.mark.parametrize("chart,symbolic", [(lambda f: f, natural_chart), (sinh_chart, sinh_chart_symbolic)],
                         ids=["natural", "sinh"])
@pytest.mark.parametrize("xi", [-0.7, 0.0, 0.45])
def test_classical_reduction_bernoulli(chart, symbolic, xi):
    center, direction = (0.35, 0.65), (1.0, -0.5)
    fam = chart(make_bernoulli_family(p=center, direction=direction))
    oracle = classical_exponential_geometry(center, [direction], symbolic, [xi])
    pt = fam.point_at([xi])
    np.testing.assert_allclose(pt.p, oracle["p"], atol=1e-13)
    np.testing.assert_allclose(geo.metric(pt).g, oracle["g"], atol=1e-8)
    p1, m1 = geo.christoffel_pm1(pt)
    np.testing.assert_allclose(p1.gamma, oracle["plus1"], atol=1e-8)
    np.testing.assert_allclose(m1.gamma, oracle["minus1"], atol=1e-8)
    np.testing.assert_allclose(geo.skewness(pt), oracle["skewness"], atol=1e-8)
    for a in (0.0, 0.5, -0.5):
        np.testing.assert_allclose(geo.christoffel_alpha(pt, a).gamma, oracle["alpha"](a), atol=1e-8)


def test_classical_reduction_two_parameters():
    center = (0.1, 0.2, 0.3, 0.4)
    dirs = [(1.0, 0.0, -1.0, 0.5), (0.0, 1.0, 0.3, -1.0)]
    space = FiniteSpace.counting(4)
    fam = sinh_chart(PhiFamily.build(PhiFunction.exponential(), Density(space, center), dirs))
    xi = [0.3, -0.25]
    oracle = classical_exponential_geometry(center, dirs, sinh_chart_symbolic, xi)
    pt = fam.point_at(xi)
    np.testing.assert_allclose(geo.metric(pt).g, oracle["g"], atol=1e-8)
    p1, m1 = geo.christoffel_pm1(pt)
    np.testing.assert_allclose(p1.gamma, oracle["plus1"], atol=1e-8)
    np.testing.assert_allclose(m1.gamma, oracle["minus1"], atol=1e-8)


def test_gamma_plus1_vanishes_in_natural_chart(kfam, rng):
    for _ in range(10):
        p1, _ = geo.christoffel_pm1(kfam.point_at(rng.uniform(-1, 1, size=2)))
        assert np.max(np.abs(p1.gamma)) <= 1e-9


def test_gamma_plus1_nonzero_in_curved_chart(kfam):
    p1, _ = geo.christoffel_pm1(sinh_chart(kfam).point_at([0.4, -0.3]))
    assert np.max(np.abs(p1.gamma)) > 1e-2


@pytest.mark.parametrize("make_chart", [lambda f: f, sinh_chart], ids=["natural", "sinh"])
@pytest.mark.parametrize("alpha", [1.0, 0.5, 0.0, -0.5])
def test_duality(make_chart, alpha, rng):
    fam = make_chart(make_kaniadakis_family())
    for _ in range(3):
        th = rng.uniform(-0.8, 0.8, size=2)
        pt = fam.point_at(th)
        dg = fd_metric_derivative(fam, th)
        ga = geo.christoffel_alpha(pt, alpha).gamma
        gb = geo.christoffel_alpha(pt, -alpha).gamma
        np.testing.assert_allclose(dg, ga + gb.transpose(0, 2, 1), atol=1e-5)


def test_metric_derivative_helper_agrees_with_oracle(kfam):
    th = np.array([0.2, -0.4])
    np.testing.assert_allclose(geo.metric_derivative(kfam, th), fd_metric_derivative(kfam, th), atol=1e-9)


def test_alpha_endpoints_and_symmetry(kfam):
    pt = sinh_chart(kfam).point_at([0.3, 0.1])
    p1, m1 = geo.christoffel_pm1(pt)
    assert np.array_equal(geo.christoffel_alpha(pt, 1.0).gamma, p1.gamma)
    assert np.array_equal(geo.christoffel_alpha(pt, -1.0).gamma, m1.gamma)
    for a in (1.0, 0.3, 0.0, -1.0):
        G = geo.christoffel_alpha(pt, a).gamma
        np.testing.assert_allclose(G, G.transpose(1, 0, 2), atol=1e-12)


def test_skewness_properties(kfam, rng):
    for fam in (kfam, sinh_chart(kfam)):
        pt = fam.point_at(rng.uniform(-0.5, 0.5, size=2))
        T = geo.skewness(pt)
        p1, m1 = geo.christoffel_pm1(pt)
        np.testing.assert_allclose(T, 0.5 * (m1.gamma - p1.gamma), atol=1e-9)
        for perm in [(1, 0, 2), (0, 2, 1), (2, 1, 0)]:
            np.testing.assert_allclose(T, T.transpose(perm), atol=1e-9)
        g0 = geo.christoffel_alpha(pt, 0.0).gamma
        for a in (1.0, 0.5, -0.3):
            np.testing.assert_allclose(geo.christoffel_alpha(pt, a).gamma, g0 - a * T, atol=1e-9)


def test_levi_civita_matches_alpha_zero(kfam, rng):
    for fam in (kfam, sinh_chart(kfam)):
        th = rng.uniform(-0.6, 0.6, size=2)
        lc = geo.levi_civita(fam, th)
        np.testing.assert_allclose(lc.gamma, geo.christoffel_alpha(fam.point_at(th), 0.0).gamma, atol=1e-5)
        np.testing.assert_allclose(lc.gamma, lc.gamma.transpose(1, 0, 2), atol=1e-12)


def test_levi_civita_tight_at_reference_point(kfam):
    th = np.array([0.3, -0.2])
    lc = geo.levi_civita(kfam, th)
    np.testing.assert_allclose(lc.gamma, geo.christoffel_alpha(kfam.point_at(th), 0.0).gamma, atol=1e-8)


def test_levi_civita_bernoulli_blend(bern):
    pt = bern.point_at([0.3])
    p1, m1 = geo.christoffel_pm1(pt)
    np.testing.assert_allclose(geo.levi_civita(bern, [0.3]).gamma, 0.5 * (p1.gamma + m1.gamma), atol=1e-8)


class _ConstantFamily:
    """Every parameter maps to the same jet, so the metric is constant."""

    def __init__(self, family, theta):
        self._point = family.point_at(theta)
        self.dim = family.dim

    def point_at(self, theta):
        return self._point


def test_levi_civita_flat_metric(kfam):
    lc = geo.levi_civita(_ConstantFamily(kfam, [0.1, 0.2]), [0.0, 0.0])
    assert np.max(np.abs(lc.gamma)) == 0.0
    with pytest.raises(ValueError):
        geo.levi_civita(kfam, [0.0, 0.0], h=0.0)


def test_metric_affine_transformation_law(kfam):
    A = np.array([[1.2, -0.4], [0.5, 0.8]])
    b = np.array([0.05, -0.1])
    chart = ReparametrizedFamily.affine(kfam, A, b)
    xi = np.array([0.2, 0.3])
    g_theta = geo.metric(kfam.point_at(A @ xi + b)).g
    np.testing.assert_allclose(geo.metric(chart.point_at(xi)).g, A.T @ g_theta @ A, atol=1e-12)
    _, m_theta = geo.christoffel_pm1(kfam.point_at(A @ xi + b))
    _, m_xi = geo.christoffel_pm1(chart.point_at(xi))
    np.testing.assert_allclose(m_xi.gamma, np.einsum("ia,jb,kc,ijk->abc", A, A, A, m_theta.gamma), atol=1e-12)


def test_curvature_one_dimensional_is_zero(bern):
    assert np.array_equal(geo.riemann_curvature(bern, [0.2], 0.0), np.zeros((1, 1, 1, 1)))


def test_plus1_flat_in_natural_chart(kfam, rng):
    for _ in range(3):
        R = geo.riemann_curvature(kfam, rng.uniform(-0.7, 0.7, size=2), 1.0)
        assert np.max(np.abs(R)) <= 1e-4


def test_plus1_flat_exponential():
    space = FiniteSpace.counting(4)
    fam = PhiFamily.build(PhiFunction.exponential(), Density(space, [0.1, 0.2, 0.3, 0.4]),
                          [[1.0, 0.0, -1.0, 0.5], [0.0, 1.0, 0.3, -1.0]])
    assert np.max(np.abs(geo.riemann_curvature(fam, [0.2, -0.4], 1.0))) <= 1e-4


def test_plus1_flat_in_curved_chart(kfam):
    # flatness is chart independent even though the symbols are not zero there
    assert np.max(np.abs(geo.riemann_curvature(sinh_chart(kfam), [0.3, -0.2], 1.0))) <= 1e-4


def test_levi_civita_curvature_is_nonzero_and_antisymmetric(kfam):
    R = geo.riemann_curvature(kfam, [0.3, -0.2], 0.0)
    assert np.max(np.abs(R)) > 1e-3
    np.testing.assert_allclose(R, -R.transpose(0, 1, 3, 2), atol=1e-12)


def test_plus1_geodesic_is_line(kfam):
    th0, v0 = np.array([0.1, -0.2]), np.array([0.6, 0.4])
    t, path, vel = geo.geodesic(kfam, th0, v0, 1.0, 1.5, 30)
    np.testing.assert_allclose(path, th0 + t[:, None] * v0, atol=1e-8)


def test_geodesic_zero_velocity(kfam):
    _, path, _ = geo.geodesic(kfam, [0.2, 0.3], [0.0, 0.0], 0.0, 1.0, 5)
    assert np.all(path == np.array([0.2, 0.3]))


def test_levi_civita_geodesic_conserves_speed(kfam):
    _, path, vel = geo.geodesic(kfam, [0.1, 0.1], [0.5, -0.3], 0.0, 1.0, 100)
    speeds = [v @ geo.metric(kfam.point_at(p)).g @ v for p, v in zip(path, vel)]
    assert np.ptp(speeds) <= 1e-6
    assert np.max(np.abs(path[-1] - (path[0] + vel[0]))) > 1e-3


def test_geodesic_arguments(kfam):
    with pytest.raises(ValueError):
        geo.geodesic(kfam, [0.0, 0.0], [1.0, 0.0], 0.0, 1.0, 1)


def test_geodesic_truncation_reports_last_time(kfam):
    with pytest.raises(TruncatedPathError) as info:
        geo.geodesic(FencedFamily(kfam, 0.5), [0.0, 0.0], [1.0, 0.0], 1.0, 1.0, 10)
    # the step leaving t = 0.5 probes beyond the fence
    assert info.value.last_t == pytest.approx(0.5)
    times, thetas = info.value.path
    assert len(times) == len(thetas) == 6
    assert times[-1] == info.value.last_t


def test_natural_gradient_step_basics(kfam, monkeypatch):
    th = np.array([0.2, -0.1])
    assert np.array_equal(geo.natural_gradient_step(kfam, th, [0.0, 0.0], 0.5), th)
    eye = geo.MetricTensor(th, np.eye(2), np.eye(2))
    monkeypatch.setattr(geo, "metric", lambda point: eye)
    np.testing.assert_allclose(geo.natural_gradient_step(kfam, th, [1.0, -2.0], 0.1), th - 0.1 * np.array([1.0, -2.0]))
