"""Acceptance suite: one test per criterion, one printed line per criterion.

The heavy demo/control simulations come from session fixtures in conftest.
Regression pins were frozen from the first recorded run of this suite; the
pinned quantities are deterministic given the seeds and backend.
"""

import math
import time
import warnings
from pathlib import Path

import numpy as np
import pytest

from eulermoc import biotsavart as bs
from eulermoc import cli, eulersim as es
from eulermoc import fieldanalysis as fa
from eulermoc import flowmodel as fm
from eulermoc import modulus as md
from eulermoc import tableio
from eulermoc.rng import Xorshift64Star

from conftest import DEMO_GAMMA, DEMO_LAM, DEMO_L0, DEMO_N_MAX, DEMO_THETA0

# regression pins (first-run values; deterministic given seed and backend)
A5_MIN_PIN = 4.6737
A7_CFIT_PIN = 0.430
A8_FINAL_PINS = {0.02: 1.0187, 0.05: 1.0190, 0.1: 1.0064}
A8_CONTROL_EPS = 0.05


def _report(name, ok, detail=""):
    print(f"{name}: {'PASS' if ok else 'FAIL'} {detail}")
    return ok


def test_a1_construction_integrity(demo_modulus):
    t0 = time.perf_counter()
    m = md.construct(DEMO_GAMMA, DEMO_LAM, DEMO_L0, DEMO_N_MAX)
    elapsed = time.perf_counter() - t0
    reports = [md.check_property1(m), md.check_property2(m),
               md.check_concavity(m), md.check_alternation(m),
               md.check_collinearity(m)]
    checks_ok = all(r.passed for r in reports)
    growth_ok = all(
        m.nodes[n + 2].L / m.nodes[n].L >= math.log(m.nodes[n].L) ** 2 / 2.0
        for n in range(2, DEMO_N_MAX - 1, 2))
    ok = _report(
        "A1 construction integrity",
        elapsed < 1.0 and checks_ok and growth_ok,
        f"({elapsed * 1e3:.1f} ms, {len(m.nodes)} nodes, "
        f"checks={'ok' if checks_ok else 'FAIL'}, "
        f"growth={'ok' if growth_ok else 'FAIL'})")
    assert ok


def test_a2_loss_identity(demo_modulus):
    t0 = time.perf_counter()
    worst_id = 0.0
    worst_margin = float("inf")
    for n in range(1, DEMO_N_MAX, 2):
        worst_id = max(worst_id, md.transport_identity_error(demo_modulus, n))
        ratio, bound = md.ratio_at_node(demo_modulus, n)
        worst_margin = min(worst_margin, ratio - bound)
    elapsed = time.perf_counter() - t0
    ok = _report(
        "A2 loss identity",
        worst_id <= 1e-10 and worst_margin >= 0.0 and elapsed < 1.0,
        f"(max identity err {worst_id:.2e}, min ratio-bound margin "
        f"{worst_margin:.3f}, {elapsed * 1e3:.1f} ms)")
    assert ok


def test_a3_propagation_contrast(demo_modulus):
    pm = fm.PowerLogModulus(DEMO_GAMMA)
    grid = np.geomspace(math.e ** 2, 1e12, 400)
    flat_max = max(fm.predicted_ratio(pm, L, 1.0, 1.0) for L in grid)
    first_ratio, _ = md.ratio_at_node(demo_modulus, 1)
    ratios = [md.ratio_at_node(demo_modulus, n)[0]
              for n in range(1, DEMO_N_MAX, 2)]
    bounds = [0.5 * math.log(demo_modulus.nodes[n].L)
              for n in range(1, DEMO_N_MAX, 2)]
    growing = all(b2 > b1 for b1, b2 in zip(bounds, bounds[1:])) and \
        all(r >= b for r, b in zip(ratios, bounds))
    ok = _report(
        "A3 propagation contrast",
        flat_max < 2.0 and first_ratio > 2.3 and growing,
        f"(power-log max {flat_max:.4f} < 2; constructed ratio at n=1 "
        f"{first_ratio:.3f} > 2.3; ratios grow past {ratios[-1]:.1f})")
    assert ok


def test_a4_keylemma_quadrature(demo_radial_profile):
    t0 = time.perf_counter()
    annulus = bs.annulus_oracle()
    q_big = bs.QuadratureSpec(n_radial=2048, n_angular=2048)
    val = bs.i_s(annulus, 0.05, q_big)
    target = math.pi * math.log(10.0)
    rel = abs(val - target) / target

    w = es.analytic_oracle(demo_radial_profile, es.BumpSpec())
    q = bs.QuadratureSpec(n_radial=1024, n_angular=1024)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        scan = bs.remainder_scan(
            w, list(np.geomspace(1e-3, 1e-1, 9)),
            [math.pi / 8, math.pi / 4, 3 * math.pi / 8], q)
    elapsed = time.perf_counter() - t0
    ok = _report(
        "A4 key-lemma quadrature",
        rel <= 1e-4 and scan.trend_ok and elapsed <= 600.0,
        f"(i_s rel err {rel:.2e}; max remainder {scan.max_remainder:.4f}; "
        f"small/large decade ratio {scan.trend_ratio:.3f} <= 2; "
        f"{elapsed:.1f} s)")
    assert ok


def test_a5_lower_bound_mechanism(demo_radial_profile):
    w = es.analytic_oracle(demo_radial_profile, es.BumpSpec())
    q = bs.QuadratureSpec(n_radial=1024, n_angular=1024)
    rs = np.geomspace(1e-6, 1e-1, 30)
    vals = np.array([bs.i_s(w, r, q) /
                     (demo_radial_profile(r) * (-math.log(r))) for r in rs])
    pinned = abs(vals.min() - A5_MIN_PIN) <= 0.02 * A5_MIN_PIN
    ok = _report(
        "A5 lower-bound mechanism",
        vals.min() > 0.0 and pinned,
        f"(min {vals.min():.4f} > 0 over r in [1e-6, 1e-1]; "
        f"pin {A5_MIN_PIN} within 2%)")
    assert ok


def _two_blob_positions(dt):
    cfg = es.SimConfig(n_radial_cells=2, n_angular_cells=2, r_inner=0.1,
                       r_outer=1.0, dt=dt, t_end=0.4)
    sys0 = es.BlobSystem(np.array([[0.7, 0.45], [0.52, 0.61]]),
                         np.array([0.25, 0.2]), 0.25, 0.0, cfg)
    snaps, _ = es.run(sys0, (), (0.4,))
    return snaps[-1].positions


def test_a6_simulator_structural_suite(demo_run, demo_system):
    snapshots, _, _ = demo_run
    conserved = all(
        np.array_equal(s.circulations, snapshots[0].circulations)
        for s in snapshots) and len(
            {s.total_circulation() for s in snapshots}) == 1

    rng = Xorshift64Star(101)
    pts = []
    for _ in range(50):
        pts.append((rng.uniform(0.05, 1.9), 0.0))
    for _ in range(50):
        pts.append((0.0, rng.uniform(0.05, 1.9)))
    pts = np.array(pts)
    u = es.blob_velocity(demo_system, pts)
    scale = float(np.max(np.hypot(u[:, 0], u[:, 1])))
    normal = max(float(np.max(np.abs(u[:50, 1]))),
                 float(np.max(np.abs(u[50:, 0]))))
    axis_ok = normal <= 1e-12 * scale
    u0 = es.blob_velocity(demo_system, np.zeros(2))
    origin_ok = float(np.hypot(u0[0], u0[1])) <= 1e-12

    e1 = np.max(np.abs(_two_blob_positions(0.04) - _two_blob_positions(0.02)))
    e2 = np.max(np.abs(_two_blob_positions(0.02) - _two_blob_positions(0.01)))
    conv_ratio = e1 / e2
    conv_ok = 12.0 <= conv_ratio <= 20.0

    w = es.reconstruction_oracle(snapshots[0])
    q = bs.QuadratureSpec(n_radial=384, n_angular=384, r_min=1e-4)
    rng2 = Xorshift64Star(2024)
    pts = []
    for _ in range(20):
        r = math.exp(rng2.uniform(math.log(0.3), math.log(1.4)))
        th = rng2.uniform(0.15, math.pi / 2 - 0.15)
        pts.append((r * math.cos(th), r * math.sin(th)))
    pts = np.array(pts)
    u_blob = es.blob_velocity(snapshots[0], pts)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        u_quad = bs.velocity_direct_many(w, pts, q)
    worst = float(np.max(np.hypot(*(u_blob - u_quad).T)
                         / np.hypot(*u_blob.T)))
    cross_ok = worst <= 0.05

    ok = _report(
        "A6 simulator structural suite",
        conserved and axis_ok and origin_ok and conv_ok and cross_ok,
        f"(circulation exact={conserved}; axis normal {normal:.2e} <= "
        f"1e-12*{scale:.2e}; origin {np.hypot(u0[0], u0[1]):.2e}; "
        f"dt-halving ratio {conv_ratio:.1f} in [12,20]; cross-validation "
        f"worst {worst * 100:.2f}% <= 5%)")
    assert ok


def test_a7a_flow_map_radial_fit(demo_run, demo_radial_profile):
    _, tracers, wall = demo_run
    witness = tracers[0]
    fit = es.fit_flow_exponent(witness, demo_radial_profile(witness.r0))
    pinned = abs(fit.c_fit - A7_CFIT_PIN) <= 0.1
    ok = _report(
        "A7a radial decay fit",
        fit.c_fit > 0.0 and fit.residual < 0.2 and not fit.flagged
        and pinned and wall <= 600.0,
        f"(c_fit {fit.c_fit:.3f} > 0, residual {fit.residual * 100:.2f}% "
        f"< 20%, run {wall:.0f} s)")
    assert ok


def test_a7b_angular_confinement(demo_run):
    """Angular guardrail as specified: theta stays below pi/16 throughout.

    This criterion is arithmetically unattainable as stated: the witness
    tracer starts at theta_0 = 0.05**0.5 = 0.2236, which already exceeds
    pi/16 = 0.1963 at t = 0, and the angle then grows (the sweep toward
    the diagonal is the mechanism itself).  The check is implemented
    faithfully and left red; see the failure detail for the measured
    excursion.  The mechanism-level content (the tracer stays inside the
    first octant, far from the diagonal where the radial drive changes
    sign) does hold and is reported alongside.
    """
    _, tracers, _ = demo_run
    witness = tracers[0]
    theta_max = float(np.max(np.abs(witness.thetas)))
    octant_ok = theta_max < math.pi / 4.0
    ok = _report(
        "A7b angular confinement",
        theta_max < math.pi / 16.0,
        f"(max theta {theta_max:.4f} vs pi/16 = {math.pi / 16:.4f}; "
        f"theta_0 = {DEMO_THETA0:.4f} already exceeds the bound at t = 0; "
        f"stays inside the first octant: {octant_ok})")
    assert ok, (
        f"angular confinement cannot hold as specified: theta_0 = "
        f"0.05**0.5 = {DEMO_THETA0:.4f} > pi/16 = {math.pi / 16:.4f} "
        f"before any dynamics; measured max theta {theta_max:.4f} "
        f"(first-octant containment {octant_ok}); see notes/decisions.md")


def test_a7c_yudovich_pair_containment(demo_run):
    _, tracers, _ = demo_run
    a, b = tracers[0], tracers[1]
    k_fit, d0 = es.fit_separation_exponent(a, b)
    ax = np.array(a.rs) * np.cos(a.thetas)
    ay = np.array(a.rs) * np.sin(a.thetas)
    bx = np.array(b.rs) * np.cos(b.thetas)
    by = np.array(b.rs) * np.sin(b.thetas)
    d = np.hypot(ax - bx, ay - by)
    contained = True
    k_use = k_fit * (1.0 + 1e-9)
    for t, dd in zip(np.array(a.times)[1:], d[1:]):
        L_lo, L_up = fm.yudovich_envelopes(d0, t, k_use)
        if not (math.exp(-L_lo) <= dd <= math.exp(-L_up)):
            contained = False
    ok = _report(
        "A7c pair separation sandwich",
        k_fit > 0.0 and contained,
        f"(fitted k {k_fit:.3f} > 0; containment over "
        f"{len(d) - 1} samples: {contained})")
    assert ok


def test_a8_modulus_ratio_growth(demo_run, control_run):
    snapshots, _, _ = demo_run
    sampler = fa.PairSampler(n_random=2000, seed=1)
    details = []
    growth_ok = True
    for rho, pin in A8_FINAL_PINS.items():
        series = fa.modulus_ratio_series(snapshots, rho, sampler)
        monotone = all(b >= a * (1.0 - 0.02)
                       for a, b in zip(series.ratios, series.ratios[1:]))
        final = series.ratios[-1]
        growth_ok = growth_ok and monotone and final > 1.0 \
            and abs(final - pin) <= 0.008
        details.append(f"rho={rho}: final {final:.4f}")

    control_ok = True
    eps_needed = 0.0
    for rho in A8_FINAL_PINS:
        series = fa.modulus_ratio_series(control_run, rho, sampler)
        for t, ohat in zip(series.times, series.omega_hats):
            bound = fm.propagation_bound(series.omega_hats[0], DEMO_GAMMA, t)
            eps_needed = max(eps_needed, ohat / bound - 1.0)
            control_ok = control_ok and ohat <= bound * (1.0 + A8_CONTROL_EPS)
    ok = _report(
        "A8 modulus ratio growth",
        growth_ok and control_ok,
        f"({'; '.join(details)}; control within propagation bound, "
        f"eps needed {max(eps_needed, 0.0):.4f} <= {A8_CONTROL_EPS})")
    assert ok


def test_a9_manifest_reproducibility(tmp_path):
    base = tmp_path / "first"
    base.mkdir()
    runs = []

    def run(cmd, argv):
        out = base / cmd
        code = cli.main(argv + ["--out", str(out)])
        assert code == 0, f"{cmd} failed with {code}"
        runs.append((cmd, out / f"manifest_{cmd}.json"))
        return out

    cdir = run("construct", ["construct", "--n-max", "12"])
    nodes = str(cdir / "nodes.csv")
    run("check", ["check", "--nodes", nodes])
    run("eval", ["eval", "--nodes", nodes, "--l-values", "100,150,1e5"])
    run("predict", ["predict", "--nodes", nodes, "--t-values", "0.5,1.0"])
    run("keylemma", ["keylemma", "--data", "annulus", "--n-radial", "256",
                     "--n-angular", "256", "--r-values", "1e-3,1e-2,1e-1",
                     "--theta-values", "0.4"])
    sdir = run("simulate", ["simulate", "--n-radial-cells", "12",
                            "--n-angular-cells", "9", "--r-inner", "0.01",
                            "--dt", "0.01", "--t-end", "0.05", "--n-max", "8",
                            "--snapshots", "0.0,0.05",
                            "--tracers", "0.4:0.3"])
    run("analyze", ["analyze", "--snapshots-dir", str(sdir),
                    "--rho-values", "0.05,0.1", "--n-random", "300"])

    mismatches = []
    for cmd, manifest_path in runs:
        redo = tmp_path / f"redo_{cmd}"
        code = cli.rerun_from_manifest(manifest_path, out_dir=redo, threads=1)
        assert code == 0
        doc = tableio.read_manifest(manifest_path)
        for name in doc["outputs"]:
            a = (Path(doc["parameters"]["out"]) / name).read_bytes()
            b = (redo / name).read_bytes()
            if a != b:
                mismatches.append(f"{cmd}/{name}")
    ok = _report(
        "A9 reproducibility",
        not mismatches,
        f"({len(runs)} commands replayed byte-identically)"
        if not mismatches else f"(mismatched files: {mismatches})")
    assert ok
