"""Self-describing delimited text I/O and run manifests.

Every table is UTF-8, comma-delimited with a mandatory header row, a `.`
decimal separator, and floats printed in scientific notation with 17
significant digits (exact binary64 round trip).  File-level metadata rides
in leading ``# key = value`` comment lines, so each file can be read back
without side channels.  Manifests are JSON.
"""

import json
from pathlib import Path

import numpy as np

from .errors import ConfigError, ValidationError
from .eulersim import BlobSystem, SimConfig, Tracer
from .modulus import ModulusNode, PiecewiseModulus, node_rows


def format_value(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.16e}"
    return str(v)


def write_csv(path, header, rows, meta=None):
    path = Path(path)
    lines = []
    for k, v in (meta or {}).items():
        lines.append(f"# {k} = {format_value(v)}")
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_csv(path):
    meta = {}
    header = None
    rows = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                k, v = body.split("=", 1)
                meta[k.strip()] = v.strip()
            continue
        if header is None:
            header = [c.strip() for c in line.split(",")]
        else:
            rows.append(line.split(","))
    if header is None:
        raise ValidationError(f"{path}: no header row found")
    return meta, header, rows


def _columns(header, rows, names):
    idx = []
    for n in names:
        if n not in header:
            raise ValidationError(f"missing column {n!r} (have {header})")
        idx.append(header.index(n))
    return [[r[i] for i in idx] for r in rows]


# -- modulus node tables -----------------------------------------------------

NODE_HEADER = ["index", "L", "G", "touch", "gap_prev", "x", "underflowed",
               "p1_margin", "p2_margin"]


def write_nodes(path, m):
    meta = {"gamma": m.gamma, "lam": m.lam, "tail_policy": m.tail_policy,
            "n_nodes": len(m.nodes)}
    rows = [[row[k] for k in NODE_HEADER] for row in node_rows(m)]
    return write_csv(path, NODE_HEADER, rows, meta)


def read_nodes(path):
    meta, header, rows = read_csv(path)
    for key in ("gamma", "lam"):
        if key not in meta:
            raise ValidationError(f"{path}: node table lacks {key!r} metadata")
    nodes = []
    for idx, L, G, touch, gap in _columns(
            header, rows, ["index", "L", "G", "touch", "gap_prev"]):
        nodes.append(ModulusNode(int(idx), float(L), float(G), touch,
                                 float(gap)))
    if not nodes:
        raise ValidationError(f"{path}: node table is empty")
    return PiecewiseModulus(
        gamma=float(meta["gamma"]), lam=float(meta["lam"]), nodes=nodes,
        tail_policy=meta.get("tail_policy", "line_to_origin"))


# -- simulator state ---------------------------------------------------------

_CFG_KEYS = ["n_radial_cells", "n_angular_cells", "r_inner", "r_outer",
             "dt", "t_end", "core_delta_factor"]


def write_snapshot(path, sys):
    meta = {"time": sys.time, "core_delta": sys.core_delta,
            "total_circulation": sys.total_circulation()}
    if sys.config is not None:
        for k in _CFG_KEYS:
            meta[k] = getattr(sys.config, k)
    rows = [[i, sys.positions[i, 0], sys.positions[i, 1], sys.circulations[i]]
            for i in range(sys.n_blobs)]
    return write_csv(path, ["index", "x1", "x2", "circulation"], rows, meta)


def read_snapshot(path):
    meta, header, rows = read_csv(path)
    cols = _columns(header, rows, ["x1", "x2", "circulation"])
    pos = np.array([[float(a), float(b)] for a, b, _ in cols])
    circ = np.array([float(c) for _, _, c in cols])
    cfg = None
    if all(k in meta for k in _CFG_KEYS):
        cfg = SimConfig(
            n_radial_cells=int(meta["n_radial_cells"]),
            n_angular_cells=int(meta["n_angular_cells"]),
            r_inner=float(meta["r_inner"]), r_outer=float(meta["r_outer"]),
            dt=float(meta["dt"]), t_end=float(meta["t_end"]),
            core_delta_factor=float(meta["core_delta_factor"]))
    return BlobSystem(positions=pos, circulations=circ,
                      core_delta=float(meta["core_delta"]),
                      time=float(meta["time"]), config=cfg)


def write_tracer(path, tracer):
    meta = {"r0": tracer.r0, "theta0": tracer.theta0}
    rows = list(zip(tracer.times, tracer.rs, tracer.thetas))
    return write_csv(path, ["t", "r", "theta"], rows, meta)


def read_tracer(path):
    meta, header, rows = read_csv(path)
    tr = Tracer(r0=float(meta["r0"]), theta0=float(meta["theta0"]))
    for t, r, th in _columns(header, rows, ["t", "r", "theta"]):
        tr.times.append(float(t))
        tr.rs.append(float(r))
        tr.thetas.append(float(th))
    return tr


# -- analysis outputs --------------------------------------------------------

SERIES_HEADER = ["t", "rho", "omega_hat", "ratio", "wx1", "wx2", "wy1", "wy2"]


def write_series(path, series_list, meta=None):
    rows = []
    for s in series_list:
        for i, t in enumerate(s.times):
            w = s.witnesses[i]
            rows.append([t, s.rho, s.omega_hats[i], s.ratios[i],
                         w[0], w[1], w[2], w[3]])
    return write_csv(path, SERIES_HEADER, rows, meta)


def write_scan(path, scan, meta=None):
    meta = dict(meta or {})
    meta["max_remainder"] = scan.max_remainder
    if scan.trend_ratio is not None:
        meta["trend_ratio"] = scan.trend_ratio
        meta["trend_ok"] = scan.trend_ok
    for i, note in enumerate(scan.notes):
        meta[f"note_{i}"] = note
    rows = [[row["r"], row["theta"], row["remainder"], row["i_s"], row["i_c"]]
            for row in scan.rows]
    return write_csv(path, ["r", "theta", "remainder", "i_s", "i_c"], rows, meta)


# -- manifests and flat config files ----------------------------------------

def write_manifest(path, manifest):
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")
    return Path(path)


def read_manifest(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def parse_config(path):
    """Flat ``key = value`` file with ``#`` comments; values stay strings."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        k, v = line.split("=", 1)
        k = k.strip()
        if not k:
            raise ConfigError(f"{path}:{lineno}: empty key")
        out[k] = v.strip()
    return out


def write_config(path, mapping):
    lines = [f"{k} = {format_value(v)}" for k, v in mapping.items()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return Path(path)


def float_list(text):
    """Comma-separated floats; empty string gives an empty list."""
    text = text.strip()
    if not text:
        return []
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as e:
        raise ConfigError(f"bad float list {text!r}: {e}") from None
