"""Backend selection for the hot RK4 loops.

The compiled extension ``freqspiral._kernels`` is used when it imports;
otherwise the numpy fallback in ``freqspiral._kernels_py`` takes over.
``use_backend`` switches explicitly (tests and the benchmark use it).
"""
from types import ModuleType

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_BACKENDS = {"python": _kernels_py}
if _compiled is not None:
    _BACKENDS["compiled"] = _compiled

_active: ModuleType = _compiled if _compiled is not None else _kernels_py


def available_backends():
    return sorted(_BACKENDS)


def active_backend() -> str:
    return "compiled" if _active is _compiled and _compiled is not None else "python"


def use_backend(name: str) -> None:
    global _active
    try:
        _active = _BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown or unavailable backend {name!r}; have {available_backends()}") from None


def lattice_rhs(theta, omega, k, periodic):
    return _active.lattice_rhs(theta, omega, k, periodic)


def lattice_steps(theta, omega, k, dt, nsteps, periodic):
    return _active.lattice_steps(theta, omega, k, dt, nsteps, periodic)


def minimal_steps(state, omega, kappa, dt, nsteps):
    return _active.minimal_steps(state, omega, kappa, dt, nsteps)
