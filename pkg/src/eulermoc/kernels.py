"""Backend dispatch for the pairwise hot kernels.

Two interchangeable implementations exist: numba-JIT (default when numba
imports) and pure numpy.  Selection order:

  1. explicit ``backend=`` argument ("numba" | "numpy"),
  2. environment flag EULERMOC_USE_NUMBA ("0" forces numpy, "1" numba),
  3. numba if importable, else numpy.

The two backends agree to roundoff but not bitwise (different summation
orders); reproducibility contracts therefore pin the backend, which every
run manifest records.  benchmarks/bench_kernels.py compares their speed.
"""

import os

from . import _kernels_numpy
from .errors import ConfigError

ENV_FLAG = "EULERMOC_USE_NUMBA"

_numba_mod = None
_numba_failed = False


def _load_numba_kernels():
    global _numba_mod, _numba_failed
    if _numba_mod is None and not _numba_failed:
        try:
            from . import _kernels_numba
            _numba_mod = _kernels_numba
        except ImportError:
            _numba_failed = True
    return _numba_mod


def numba_available():
    return _load_numba_kernels() is not None


def resolve_backend(backend=None):
    """Map a requested backend name to the one that will actually run."""
    if backend in ("numba", "numpy"):
        if backend == "numba" and not numba_available():
            raise ConfigError("numba backend requested but numba is not importable")
        return backend
    if backend not in (None, "auto"):
        raise ConfigError(f"unknown backend {backend!r}")
    env = os.environ.get(ENV_FLAG, "").strip()
    if env == "0":
        return "numpy"
    if env == "1":
        if not numba_available():
            raise ConfigError(f"{ENV_FLAG}=1 but numba is not importable")
        return "numba"
    return "numba" if numba_available() else "numpy"


def _impl(backend):
    if resolve_backend(backend) == "numba":
        return _load_numba_kernels()
    return _kernels_numpy


def set_threads(n):
    """Limit numba's thread pool; a no-op for the numpy backend."""
    if n is None:
        return
    if n < 1:
        raise ConfigError(f"thread count must be >= 1, got {n}")
    if numba_available():
        import numba
        numba.set_num_threads(min(int(n), numba.config.NUMBA_NUM_THREADS))


def velocity_sum(targets, sources, weights, delta, backend=None):
    """Perpendicular-kernel velocity at targets; see backend notes above."""
    return _impl(backend).velocity_sum(targets, sources, weights, delta)


def gaussian_field_sum(targets, sources, weights, delta, backend=None):
    """Gaussian-blob scalar field at targets."""
    return _impl(backend).gaussian_field_sum(targets, sources, weights, delta)
