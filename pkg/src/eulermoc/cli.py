"""Command-line interface.

Subcommands: construct, check, eval, predict, keylemma, simulate, analyze.
Every flag can be overridden by an environment variable named
EULERMOC_<FLAG> (uppercase, dashes as underscores); precedence is
flag > environment > config file (simulate only) > built-in default.

Every run writes exactly one JSON manifest recording the resolved
parameters, backend, seed, timings, and output files;
``rerun_from_manifest`` re-executes a manifest (optionally into a fresh
directory), which with --threads 1 reproduces all output files
byte-for-byte.

Exit codes: 0 success, 2 usage, 3 validation or property failure,
4 numerical failure.
"""

import argparse
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, kernels, svg, tableio
from . import biotsavart as bs
from . import eulersim as es
from . import fieldanalysis as fa
from . import modulus as md
from .errors import ConfigError, NumericalError, ValidationError
from .logdomain import to_direct


class UsageError(Exception):
    pass

_DEMO_THETA = repr(math.sqrt(0.05))
_DEMO_TRACERS = f"0.05:{_DEMO_THETA};0.055:{_DEMO_THETA};0.5:0.0"
_DEMO_SNAPSHOTS = "0.0,0.1,0.2,0.3,0.4,0.5"
_DEMO_R_VALUES = "1e-3,1.78e-3,3.16e-3,5.62e-3,1e-2,1.78e-2,3.16e-2,5.62e-2,1e-1"
_DEMO_THETA_VALUES = f"{repr(math.pi / 8)},{repr(math.pi / 4)},{repr(3 * math.pi / 8)}"


def _env_name(flag):
    return "EULERMOC_" + flag.upper().replace("-", "_")


def _pick(args, config, flag, default, cast=str):
    """Resolve one option: CLI flag > environment > config file > default."""
    v = getattr(args, flag.replace("-", "_"), None)
    if v is not None:
        return cast(v)
    env = os.environ.get(_env_name(flag))
    if env is not None:
        return cast(env)
    if config and flag in config:
        return cast(config[flag])
    return cast(default) if default is not None else None


def _tracer_list(text):
    out = []
    if not text.strip():
        return out
    for tok in text.split(";"):
        tok = tok.strip()
        if not tok:
            continue
        try:
            r0, th0 = tok.split(":")
            out.append(es.Tracer(r0=float(r0), theta0=float(th0)))
        except ValueError:
            raise ConfigError(f"bad tracer spec {tok!r}; expected r0:theta0")
    return out


def _prepare_out(args, config=None):
    out = Path(_pick(args, config, "out", "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _manifest(out_dir, command, params, outputs, timings, extra=None):
    doc = {
        "command": command,
        "parameters": {k: str(v) for k, v in params.items()},
        "tool_version": __version__,
        "seed": int(params.get("seed", 0)),
        "timings": {k: round(v, 6) for k, v in timings.items()},
        "outputs": sorted(str(o) for o in outputs),
    }
    if extra:
        doc["diagnostics"] = extra
    path = out_dir / f"manifest_{command}.json"
    tableio.write_manifest(path, doc)
    return path


def rerun_from_manifest(manifest_path, out_dir=None, threads=None):
    """Re-execute a recorded run; returns the exit code.

    The manifest's resolved parameters are replayed verbatim (so the same
    backend is used); ``out_dir`` and ``threads`` may be overridden.  With
    threads=1 the listed output files reproduce byte-identically.
    """
    doc = tableio.read_manifest(manifest_path)
    params = dict(doc["parameters"])
    if out_dir is not None:
        params["out"] = str(out_dir)
    if threads is not None:
        params["threads"] = str(threads)
    argv = [doc["command"]]
    for k in sorted(params):
        argv += [f"--{k}", params[k]]
    return main(argv)


# ---------------------------------------------------------------------------
# construct / check / eval / predict


def _write_reports(path, reports):
    lines = []
    for rep in reports:
        lines.extend(rep.lines())
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _all_reports(m):
    return [md.check_property1(m), md.check_property2(m),
            md.check_concavity(m), md.check_alternation(m),
            md.check_collinearity(m), md.check_divergence(m)]


def cmd_construct(args):
    t0 = time.perf_counter()
    params = {
        "gamma": _pick(args, None, "gamma", 0.5, float),
        "lam": _pick(args, None, "lam", 1.0, float),
        "l0": _pick(args, None, "l0", 100.0, float),
        "n-max": _pick(args, None, "n-max", 40, int),
        "out": _pick(args, None, "out", "."),
    }
    out = _prepare_out(args)
    m = md.construct(params["gamma"], params["lam"], params["l0"],
                     params["n-max"])
    t_build = time.perf_counter()
    nodes_path = out / "nodes.csv"
    tableio.write_nodes(nodes_path, m)
    reports = _all_reports(m)
    checks_path = out / "checks.txt"
    _write_reports(checks_path, reports)
    _manifest(out, "construct", params,
              [nodes_path.name, checks_path.name],
              {"construct_s": t_build - t0,
               "total_s": time.perf_counter() - t0})
    for rep in reports:
        print(rep.summary())
    print(f"wrote {nodes_path}")
    return 0 if all(r.passed for r in reports) else 3


def cmd_check(args):
    params = {"nodes": _pick(args, None, "nodes", None),
              "out": _pick(args, None, "out", ".")}
    if not params["nodes"]:
        raise ConfigError("--nodes is required")
    out = _prepare_out(args)
    t0 = time.perf_counter()
    m = tableio.read_nodes(params["nodes"])
    reports = _all_reports(m)
    report_path = out / "check_report.txt"
    _write_reports(report_path, reports)
    _manifest(out, "check", params, [report_path.name],
              {"total_s": time.perf_counter() - t0})
    for rep in reports:
        print(rep.summary())
    return 0 if all(r.passed for r in reports) else 3


def cmd_eval(args):
    params = {"nodes": _pick(args, None, "nodes", None),
              "l-values": _pick(args, None, "l-values", ""),
              "out": _pick(args, None, "out", ".")}
    if not params["nodes"]:
        raise ConfigError("--nodes is required")
    out = _prepare_out(args)
    t0 = time.perf_counter()
    m = tableio.read_nodes(params["nodes"])
    rows = []
    for L in tableio.float_list(params["l-values"]):
        G = m.eval(L)
        x, under = to_direct(L)
        rows.append([L, G, x, int(under)])
        print(f"G({L:.6g}) = {G:.12g}")
    path = out / "eval.csv"
    tableio.write_csv(path, ["L", "G", "x", "underflowed"], rows,
                      {"gamma": m.gamma, "lam": m.lam})
    _manifest(out, "eval", params, [path.name],
              {"total_s": time.perf_counter() - t0})
    return 0


def cmd_predict(args):
    params = {"nodes": _pick(args, None, "nodes", None),
              "c": _pick(args, None, "c", 1.0, float),
              "t-values": _pick(args, None, "t-values", "1.0"),
              "node-indices": _pick(args, None, "node-indices", "odd"),
              "out": _pick(args, None, "out", ".")}
    if not params["nodes"]:
        raise ConfigError("--nodes is required")
    out = _prepare_out(args)
    t0 = time.perf_counter()
    m = tableio.read_nodes(params["nodes"])
    if params["node-indices"] == "odd":
        indices = [nd.index for nd in m.nodes if nd.index % 2 == 1]
    else:
        indices = [int(v) for v in tableio.float_list(params["node-indices"])]
    rows = []
    all_pass = True
    for t in tableio.float_list(params["t-values"]):
        for n in indices:
            if n % 2 == 0:
                print(f"notice: node {n} is even; ratio is defined at odd "
                      f"nodes, skipping", file=sys.stderr)
                continue
            nd = m.nodes[n]
            ratio = md.predicted_ratio_at_node(m, n, params["c"] * t)
            bound = 0.5 * math.log(nd.L)
            ok = ratio >= bound
            all_pass = all_pass and ok
            rows.append([t, n, nd.L, ratio, bound, int(ok)])
    path = out / "predict.csv"
    tableio.write_csv(path, ["t", "n", "L", "ratio", "bound", "passed"], rows,
                      {"c": params["c"], "gamma": m.gamma, "lam": m.lam})
    _manifest(out, "predict", params, [path.name],
              {"total_s": time.perf_counter() - t0})
    print(f"wrote {path} ({len(rows)} rows)")
    return 0 if all_pass else 3


# ---------------------------------------------------------------------------
# keylemma


def _demo_profile(args, config=None):
    gamma = _pick(args, config, "gamma", 0.5, float)
    lam = _pick(args, config, "lam", 1.0, float)
    L0 = _pick(args, config, "l0", 100.0, float)
    n_max = _pick(args, config, "n-max", 40, int)
    g_one = _pick(args, config, "g-one", 1.0, float)
    m = md.construct(gamma, lam, L0, n_max)
    return es.ModulusProfile(m, cap=g_one)


def cmd_keylemma(args):
    params = {
        "data": _pick(args, None, "data", "annulus"),
        "n-radial": _pick(args, None, "n-radial", 1024, int),
        "n-angular": _pick(args, None, "n-angular", 1024, int),
        "r-quad-min": _pick(args, None, "r-quad-min", 1e-8, float),
        "r-values": _pick(args, None, "r-values", _DEMO_R_VALUES),
        "theta-values": _pick(args, None, "theta-values", _DEMO_THETA_VALUES),
        "gamma": _pick(args, None, "gamma", 0.5, float),
        "lam": _pick(args, None, "lam", 1.0, float),
        "l0": _pick(args, None, "l0", 100.0, float),
        "n-max": _pick(args, None, "n-max", 40, int),
        "g-one": _pick(args, None, "g-one", 1.0, float),
        "bump-delta": _pick(args, None, "bump-delta", 0.05 * math.pi / 2, float),
        "threads": _pick(args, None, "threads", 0, int),
        "backend": kernels.resolve_backend(_pick(args, None, "backend", "auto")),
        "out": _pick(args, None, "out", "."),
    }
    out = _prepare_out(args)
    if params["threads"]:
        kernels.set_threads(params["threads"])
    backend = params["backend"]
    t0 = time.perf_counter()
    if params["data"] == "annulus":
        w = bs.annulus_oracle()
    elif params["data"] == "demo":
        profile = _demo_profile(args)
        w = es.analytic_oracle(profile, es.BumpSpec(delta=params["bump-delta"]))
    else:
        raise ConfigError(f"unknown data set {params['data']!r}")
    q = bs.QuadratureSpec(n_radial=params["n-radial"],
                          n_angular=params["n-angular"],
                          r_min=params["r-quad-min"])
    r_values = tableio.float_list(params["r-values"])
    theta_values = tableio.float_list(params["theta-values"])
    scan = bs.remainder_scan(w, r_values, theta_values, q, backend=backend)
    extra = {"max_remainder": scan.max_remainder,
             "trend_ratio": scan.trend_ratio, "trend_ok": scan.trend_ok}
    if params["data"] == "annulus":
        val = bs.i_s(w, 0.05, q)
        target = math.pi * math.log(10.0)
        extra["i_s_at_0.05"] = val
        extra["i_s_closed_form"] = target
        extra["i_s_rel_err"] = abs(val - target) / target
        print(f"i_s(0.05) = {val:.10g} vs closed form {target:.10g} "
              f"(rel err {extra['i_s_rel_err']:.3e})")
    path = out / "scan.csv"
    tableio.write_scan(path, scan, {"data": params["data"]})
    _manifest(out, "keylemma", params, [path.name],
              {"total_s": time.perf_counter() - t0}, extra)
    print(f"max normalized remainder {scan.max_remainder:.6g}; "
          f"trend ok: {scan.trend_ok}")
    return 0 if scan.trend_ok is not False else 3


# ---------------------------------------------------------------------------
# simulate / analyze


def cmd_simulate(args):
    config = {}
    cfg_path = getattr(args, "config", None)
    if cfg_path:
        config = tableio.parse_config(cfg_path)
    params = {
        "profile": _pick(args, config, "profile", "modulus"),
        "gamma": _pick(args, config, "gamma", 0.5, float),
        "lam": _pick(args, config, "lam", 1.0, float),
        "l0": _pick(args, config, "l0", 100.0, float),
        "n-max": _pick(args, config, "n-max", 40, int),
        "g-one": _pick(args, config, "g-one", 1.0, float),
        "bump-delta": _pick(args, config, "bump-delta", 0.05 * math.pi / 2, float),
        "n-radial-cells": _pick(args, config, "n-radial-cells", 64, int),
        "n-angular-cells": _pick(args, config, "n-angular-cells", 48, int),
        "r-inner": _pick(args, config, "r-inner", 1e-3, float),
        "r-outer": _pick(args, config, "r-outer", 2.0, float),
        "dt": _pick(args, config, "dt", 2e-3, float),
        "t-end": _pick(args, config, "t-end", 0.5, float),
        "core-delta-factor": _pick(args, config, "core-delta-factor", 1.5, float),
        "snapshots": _pick(args, config, "snapshots", _DEMO_SNAPSHOTS),
        "tracers": _pick(args, config, "tracers", _DEMO_TRACERS),
        "seed": _pick(args, config, "seed", 1, int),
        "threads": _pick(args, config, "threads", 0, int),
        "backend": kernels.resolve_backend(_pick(args, config, "backend", "auto")),
        "out": _pick(args, config, "out", "."),
    }
    out = _prepare_out(args, config)
    if params["threads"]:
        kernels.set_threads(params["threads"])
    backend = params["backend"]
    t0 = time.perf_counter()
    if params["profile"] == "modulus":
        profile = _demo_profile(args, config)
    elif params["profile"] == "power-log":
        profile = es.PowerLogProfile(params["gamma"])
    else:
        raise ConfigError(f"unknown profile {params['profile']!r}")
    bump_spec = es.BumpSpec(delta=params["bump-delta"])
    cfg = es.SimConfig(
        n_radial_cells=params["n-radial-cells"],
        n_angular_cells=params["n-angular-cells"],
        r_inner=params["r-inner"], r_outer=params["r-outer"],
        dt=params["dt"], t_end=params["t-end"],
        core_delta_factor=params["core-delta-factor"])
    sys0 = es.initial_data(profile, bump_spec, cfg)
    tracers = _tracer_list(params["tracers"])
    snapshot_times = tableio.float_list(params["snapshots"])
    t_setup = time.perf_counter()
    snapshots, tracers = es.run(sys0, tracers, snapshot_times, backend=backend)
    t_run = time.perf_counter()

    outputs = []
    for i, snap in enumerate(snapshots):
        p = out / f"snapshot_{i:03d}.csv"
        tableio.write_snapshot(p, snap)
        outputs.append(p.name)
    for i, tr in enumerate(tracers):
        p = out / f"tracer_{i:02d}.csv"
        tableio.write_tracer(p, tr)
        outputs.append(p.name)
    totals = [s.total_circulation() for s in snapshots]
    origin_speed = 0.0
    if snapshots:
        u0 = es.blob_velocity(snapshots[-1], np.zeros(2), backend=backend)
        origin_speed = float(np.hypot(u0[0], u0[1]))
    extra = {
        "n_blobs": sys0.n_blobs,
        "core_delta": sys0.core_delta,
        "profile": profile.describe(),
        "total_circulation_per_snapshot": totals,
        "max_circulation_drift": (max(abs(t - totals[0]) for t in totals)
                                  if totals else 0.0),
        "origin_speed_final": origin_speed,
    }
    _manifest(out, "simulate", params, outputs,
              {"setup_s": t_setup - t0, "run_s": t_run - t_setup,
               "total_s": time.perf_counter() - t0}, extra)
    print(f"{len(snapshots)} snapshots, {len(tracers)} tracers "
          f"({sys0.n_blobs} blobs, backend {backend}); wrote to {out}")
    return 0


def cmd_analyze(args):
    params = {
        "snapshots-dir": _pick(args, None, "snapshots-dir", "."),
        "rho-values": _pick(args, None, "rho-values", "0.02,0.05,0.1"),
        "mode": _pick(args, None, "mode", fa.MODE_BOTH),
        "c-exponent": _pick(args, None, "c-exponent", 0.5, float),
        "n-random": _pick(args, None, "n-random", 2000, int),
        "seed": _pick(args, None, "seed", 1, int),
        "threads": _pick(args, None, "threads", 0, int),
        "backend": kernels.resolve_backend(_pick(args, None, "backend", "auto")),
        "out": _pick(args, None, "out", "."),
    }
    rho_values = tableio.float_list(params["rho-values"])
    if not rho_values:
        raise UsageError("empty rho list")
    out = _prepare_out(args)
    if params["threads"]:
        kernels.set_threads(params["threads"])
    backend = params["backend"]
    t0 = time.perf_counter()
    snap_dir = Path(params["snapshots-dir"])
    paths = sorted(snap_dir.glob("snapshot_*.csv"))
    if not paths:
        raise ValidationError(f"no snapshot_*.csv files under {snap_dir}")
    snapshots = [tableio.read_snapshot(p) for p in paths]
    sampler = fa.PairSampler(mode=params["mode"],
                             c_exponent=params["c-exponent"],
                             n_random=params["n-random"],
                             seed=params["seed"])
    series_list = [fa.modulus_ratio_series(snapshots, rho, sampler,
                                           backend=backend)
                   for rho in rho_values]
    series_path = out / "ratio_series.csv"
    tableio.write_series(series_path, series_list,
                         {"seed": params["seed"], "mode": params["mode"],
                          "n_random": params["n-random"]})
    chart = svg.line_chart(
        [(f"rho={s.rho:g}", s.times, s.ratios) for s in series_list],
        title="vorticity modulus growth", xlabel="t",
        ylabel="omega_hat(t, rho) / omega_hat(0, rho)")
    svg_path = out / "ratio_series.svg"
    svg_path.write_text(chart, encoding="utf-8")
    extra = {f"final_ratio_rho_{s.rho:g}": s.ratios[-1] for s in series_list}
    _manifest(out, "analyze", params,
              [series_path.name, svg_path.name],
              {"total_s": time.perf_counter() - t0}, extra)
    for s in series_list:
        print(f"rho={s.rho:g}: ratios " +
              " ".join(f"{r:.4f}" for r in s.ratios))
    return 0


# ---------------------------------------------------------------------------
# parser


def _add(p, *flags, **kw):
    kw.setdefault("default", None)
    p.add_argument(*flags, **kw)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="eulermoc",
        description="construct, verify, and simulate alternating-envelope "
                    "vorticity moduli")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="build a modulus node table")
    for f in ("--gamma", "--lam", "--l0", "--n-max", "--threads", "--out"):
        _add(p, f)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("check", help="re-verify a saved node table")
    for f in ("--nodes", "--threads", "--out"):
        _add(p, f)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("eval", help="evaluate the modulus at log-abscissas")
    for f in ("--nodes", "--l-values", "--threads", "--out"):
        _add(p, f)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("predict", help="transported-scale ratio table")
    for f in ("--nodes", "--c", "--t-values", "--node-indices", "--threads",
              "--out"):
        _add(p, f)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("keylemma", help="velocity decomposition remainder scan")
    for f in ("--data", "--n-radial", "--n-angular", "--r-quad-min",
              "--r-values", "--theta-values", "--gamma", "--lam", "--l0",
              "--n-max", "--g-one", "--bump-delta", "--threads", "--backend",
              "--out"):
        _add(p, f)
    p.set_defaults(func=cmd_keylemma)

    p = sub.add_parser("simulate", help="run the vortex-blob solver")
    _add(p, "--config", help="flat key = value file; flags override")
    for f in ("--profile", "--gamma", "--lam", "--l0", "--n-max", "--g-one",
              "--bump-delta", "--n-radial-cells", "--n-angular-cells",
              "--r-inner", "--r-outer", "--dt", "--t-end",
              "--core-delta-factor", "--snapshots", "--tracers", "--seed",
              "--threads", "--backend", "--out"):
        _add(p, f)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="modulus ratio series from snapshots")
    for f in ("--snapshots-dir", "--rho-values", "--mode", "--c-exponent",
              "--n-random", "--seed", "--threads", "--backend", "--out"):
        _add(p, f)
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2
    try:
        return args.func(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 2
    except (ValidationError, ConfigError) as e:
        print(f"validation error: {e}", file=sys.stderr)
        return 3
    except NumericalError as e:
        print(f"numerical error: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
