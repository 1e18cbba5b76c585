import numpy as np
import pytest

from phigeom import kernels
from phigeom.errors import NormalizerError
from phigeom.phi_core import PhiFunction
from phigeom.phi_family import PhiFamily, ReparametrizedFamily
from phigeom.sample_space import Density, FiniteSpace

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    previous = kernels.use_backend(request.param)
    yield request.param
    kernels.use_backend(previous)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def make_kaniadakis_family(kappa=0.5, u0=(1.0, 2.0, 1.5, 0.7)):
    space = FiniteSpace.counting(4)
    center = Density(space, [0.1, 0.2, 0.3, 0.4])
    return PhiFamily.build(PhiFunction.kaniadakis(kappa), center,
                           [[1.0, 0.0, -1.0, 0.5], [0.0, 1.0, 0.3, -1.0]], u0=list(u0))


def make_bernoulli_family(p=(0.5, 0.5), direction=(1.0, 0.0)):
    space = FiniteSpace.counting(2)
    return PhiFamily.build(PhiFunction.exponential(), Density(space, list(p)), [list(direction)])


def sinh_chart(family):
    """Nonlinear chart theta_i = sinh(xi_i); D^(1) is no longer flat-coordinate there."""
    return ReparametrizedFamily.elementwise(family, np.sinh, np.cosh, np.sinh)


class FencedFamily:
    """Wraps a family and refuses parameters beyond a fence."""

    def __init__(self, family, fence):
        self.family, self.fence = family, fence
        self.dim, self.space, self.phi, self.u0 = family.dim, family.space, family.phi, family.u0

    def point_at(self, theta):
        if np.max(np.abs(theta)) > self.fence:
            raise NormalizerError("outside fence")
        return self.family.point_at(theta)


@pytest.fixture
def kfam():
    return make_kaniadakis_family()


@pytest.fixture
def bern():
    return make_bernoulli_family()
