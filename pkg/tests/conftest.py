"""Shared fixtures; the demo and control simulations run once per session."""

import math

import pytest

from eulermoc import eulersim as es
from eulermoc import modulus as md

DEMO_GAMMA = 0.5
DEMO_LAM = 1.0
DEMO_L0 = 100.0
DEMO_N_MAX = 40
DEMO_SNAPSHOT_TIMES = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5)
DEMO_THETA0 = math.sqrt(0.05)


@pytest.fixture(scope="session")
def demo_modulus():
    return md.construct(DEMO_GAMMA, DEMO_LAM, DEMO_L0, DEMO_N_MAX)


@pytest.fixture(scope="session")
def demo_radial_profile(demo_modulus):
    return es.ModulusProfile(demo_modulus)


@pytest.fixture(scope="session")
def demo_config():
    return es.SimConfig()


@pytest.fixture(scope="session")
def demo_system(demo_radial_profile, demo_config):
    return es.initial_data(demo_radial_profile, es.BumpSpec(), demo_config)


@pytest.fixture(scope="session")
def demo_run(demo_system):
    """(snapshots, tracers, wall seconds) of the full demo run; minutes."""
    import time
    tracers = [es.Tracer(r0=0.05, theta0=DEMO_THETA0),
               es.Tracer(r0=0.055, theta0=DEMO_THETA0),
               es.Tracer(r0=0.5, theta0=0.0)]
    t0 = time.perf_counter()
    snapshots, tracers = es.run(demo_system, tracers, DEMO_SNAPSHOT_TIMES)
    return snapshots, tracers, time.perf_counter() - t0


@pytest.fixture(scope="session")
def control_run():
    """Power-log control at reduced resolution (the config is not pinned)."""
    cfg = es.SimConfig(n_radial_cells=48, n_angular_cells=36, dt=2.5e-3)
    sys0 = es.initial_data(es.PowerLogProfile(DEMO_GAMMA), es.BumpSpec(), cfg)
    snapshots, _ = es.run(sys0, (), DEMO_SNAPSHOT_TIMES)
    return snapshots
