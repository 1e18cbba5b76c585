import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from phigeom import _pykernels, kernels

compiled = pytest.mark.skipif("compiled" not in kernels.available_backends(),
                              reason="extension not built")


def test_backend_switching():
    previous = kernels.use_backend("python")
    try:
        assert kernels.backend_name() == "python"
    finally:
        kernels.use_backend(previous)
    with pytest.raises(ValueError):
        kernels.use_backend("fortran")


@compiled
@pytest.mark.parametrize("kind,kappa", [(0, 0.0), (1, 0.5), (1, -0.3)])
def test_bundle_backends_agree(kind, kappa):
    from phigeom import _ckernels

    u = np.linspace(-30, 30, 301).reshape(7, 43)
    for a, b in zip(_ckernels.phi_bundle(kind, kappa, u), _pykernels.phi_bundle(kind, kappa, u)):
        assert a.shape == u.shape
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-15)


@compiled
@settings(max_examples=100, deadline=None)
@given(
    arrays(float, 5, elements=st.floats(-3, 3)),
    arrays(float, 5, elements=st.floats(0.2, 3)),
    st.sampled_from([(0, 0.0), (1, 0.5), (1, 0.9)]),
)
def test_psi_backends_agree(base, u0, kind_kappa):
    from phigeom import _ckernels

    kind, kappa = kind_kappa
    mu = np.ones(5)
    a, ra = _ckernels.solve_psi(kind, kappa, base, u0, mu)
    b, rb = _pykernels.solve_psi(kind, kappa, base, u0, mu)
    assert abs(a - b) <= 1e-12 * max(1.0, abs(a))
    assert abs(ra) <= 1e-12 and abs(rb) <= 1e-12


@settings(max_examples=100, deadline=None)
@given(arrays(float, 4, elements=st.floats(-5, 5)))
def test_exponential_psi_is_log_partition(base):
    psi, r = kernels.solve_psi(0, 0.0, base, np.ones(4), np.ones(4))
    assert psi == pytest.approx(np.log(np.sum(np.exp(base))), abs=1e-12)
    assert abs(r) <= 1e-12


def test_benchmark_script_runs(capsys):
    import importlib.util
    from pathlib import Path

    path = Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"
    spec = importlib.util.spec_from_file_location("bench_kernels", path)
    bench = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(bench)
    bench.main(["--repeat", "1", "--number", "4", "--size", "4"])
    out = capsys.readouterr().out
    assert all(name in out for name in kernels.available_backends())
