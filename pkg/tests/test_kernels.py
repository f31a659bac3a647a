import math

import numpy as np
import pytest

from eulermoc import kernels
from eulermoc.errors import ConfigError

BACKENDS = ["numpy"] + (["numba"] if kernels.numba_available() else [])


def brute_velocity(targets, sources, weights, delta):
    """Plain-python reference implementation (the oracle)."""
    out = np.zeros((len(targets), 2))
    for i, (tx, ty) in enumerate(targets):
        ux = uy = 0.0
        for (sx, sy), w in zip(sources, weights):
            dx, dy = tx - sx, ty - sy
            r2 = dx * dx + dy * dy
            if r2 == 0.0:
                continue
            mol = 1.0 - math.exp(-r2 / delta ** 2) if delta > 0 else 1.0
            f = w * mol / (2.0 * math.pi * r2)
            ux += dy * f
            uy += -dx * f
        out[i] = (ux, uy)
    return out


@pytest.fixture(scope="module")
def cloud():
    rng = np.random.default_rng(42)
    sources = rng.uniform(-1.0, 1.0, size=(60, 2))
    weights = rng.normal(size=60)
    targets = rng.uniform(-1.5, 1.5, size=(25, 2))
    return targets, sources, weights


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("delta", [0.0, 0.2])
def test_velocity_matches_brute_force(cloud, backend, delta):
    targets, sources, weights = cloud
    got = kernels.velocity_sum(targets, sources, weights, delta, backend=backend)
    ref = brute_velocity(targets, sources, weights, delta)
    assert np.allclose(got, ref, rtol=1e-13, atol=1e-15)


@pytest.mark.parametrize("backend", BACKENDS)
def test_gaussian_field_peak_and_brute_force(cloud, backend):
    targets, sources, weights = cloud
    delta = 0.3
    got = kernels.gaussian_field_sum(targets, sources, weights, delta,
                                     backend=backend)
    ref = np.zeros(len(targets))
    for i, (tx, ty) in enumerate(targets):
        for (sx, sy), w in zip(sources, weights):
            r2 = (tx - sx) ** 2 + (ty - sy) ** 2
            ref[i] += w * math.exp(-r2 / delta ** 2)
    ref /= math.pi * delta ** 2
    assert np.allclose(got, ref, rtol=1e-12, atol=1e-15)
    # single source evaluated at itself gives the kernel peak
    peak = kernels.gaussian_field_sum(np.array([[0.1, 0.2]]),
                                      np.array([[0.1, 0.2]]),
                                      np.array([2.0]), delta,
                                      backend=backend)
    assert peak[0] == pytest.approx(2.0 / (math.pi * delta ** 2), rel=1e-14)


def test_backends_agree(cloud):
    if not kernels.numba_available():
        pytest.skip("numba unavailable")
    targets, sources, weights = cloud
    for delta in (0.0, 0.15):
        a = kernels.velocity_sum(targets, sources, weights, delta, backend="numba")
        b = kernels.velocity_sum(targets, sources, weights, delta, backend="numpy")
        assert np.allclose(a, b, rtol=1e-12, atol=1e-16)
    a = kernels.gaussian_field_sum(targets, sources, weights, 0.3, backend="numba")
    b = kernels.gaussian_field_sum(targets, sources, weights, 0.3, backend="numpy")
    assert np.allclose(a, b, rtol=1e-12)


@pytest.mark.parametrize("backend", BACKENDS)
def test_determinism_repeat_calls(cloud, backend):
    targets, sources, weights = cloud
    a = kernels.velocity_sum(targets, sources, weights, 0.2, backend=backend)
    b = kernels.velocity_sum(targets, sources, weights, 0.2, backend=backend)
    assert np.array_equal(a, b)


def test_thread_count_invariance(cloud):
    if not kernels.numba_available():
        pytest.skip("numba unavailable")
    import numba
    targets, sources, weights = cloud
    before = numba.get_num_threads()
    try:
        kernels.set_threads(1)
        a = kernels.velocity_sum(targets, sources, weights, 0.2, backend="numba")
        kernels.set_threads(min(2, before))
        b = kernels.velocity_sum(targets, sources, weights, 0.2, backend="numba")
    finally:
        numba.set_num_threads(before)
    assert np.array_equal(a, b)


def test_zero_distance_pairs_contribute_nothing():
    src = np.array([[0.5, 0.5], [0.25, 0.25]])
    w = np.array([3.0, 0.0])
    for backend in BACKENDS:
        u = kernels.velocity_sum(np.array([[0.5, 0.5]]), src, w, 0.1,
                                 backend=backend)
        assert np.array_equal(u, np.zeros((1, 2)))


def test_single_vortex_rotates_clockwise():
    # orientation contract: positive weight turns the flow clockwise
    u = kernels.velocity_sum(np.array([[1.0, 0.0]]),
                             np.array([[0.0, 0.0]]), np.array([1.0]), 0.0)
    assert u[0, 1] == pytest.approx(-1.0 / (2.0 * math.pi), rel=1e-14)
    assert u[0, 0] == 0.0


def test_backend_resolution(monkeypatch):
    monkeypatch.setenv(kernels.ENV_FLAG, "0")
    assert kernels.resolve_backend(None) == "numpy"
    monkeypatch.delenv(kernels.ENV_FLAG)
    assert kernels.resolve_backend("numpy") == "numpy"
    with pytest.raises(ConfigError):
        kernels.resolve_backend("cuda")
    with pytest.raises(ConfigError):
        kernels.set_threads(0)
