"""Backend dispatch for the hot kernels.

The compiled extension ``_ckernels`` is used when it was built; otherwise the
NumPy versions in ``_pykernels`` take over.  ``use_backend`` switches
explicitly, which the tests and the benchmark rely on.
"""

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

EXPONENTIAL = _pykernels.EXPONENTIAL
KANIADAKIS = _pykernels.KANIADAKIS

_BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    _BACKENDS["compiled"] = _ckernels

_active = _BACKENDS.get("compiled", _pykernels)


def available_backends():
    return sorted(_BACKENDS)


def backend_name():
    return "compiled" if _active is _ckernels else "python"


def use_backend(name):
    """Select ``"python"`` or ``"compiled"``; returns the previous name."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} unavailable; have {available_backends()}")
    previous = backend_name()
    _active = _BACKENDS[name]
    return previous


def phi_bundle(kind, kappa, u):
    return _active.phi_bundle(kind, kappa, u)


def phi_value(kind, kappa, u):
    return _active.phi_value(kind, kappa, u)


def solve_psi(kind, kappa, base, u0, mu, max_bracket=1e6):
    return _active.solve_psi(kind, kappa, base, u0, mu, max_bracket)


solve_psi_generic = _pykernels.solve_psi_generic
