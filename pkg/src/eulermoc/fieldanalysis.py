"""Empirical modulus-of-continuity estimation over sampled point pairs.

The estimator is a lower bound by construction: Omega_hat(rho) is the max
of |f(x) - f(y)| over a finite family of pairs with |x - y| <= rho, mixing
the axis witness pair x = (rho, rho^c), y = (rho, 0) (whose field value on
the axis vanishes by odd symmetry, so the witness alone certifies a lower
bound) with seeded random pairs.  Lower bounds are the correct direction
here: the growth statements being checked are themselves lower bounds.

Ratio series reuse the same pair set at every snapshot time (paired
comparison), so the series is deterministic given the seed and its
monotonicity is not masked by sampling noise.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError, ValidationError
from .eulersim import reconstruct_vorticity
from .rng import Xorshift64Star

_TWO_PI = 2.0 * math.pi

MODE_AXIS = "axis_witness"
MODE_RANDOM = "random"
MODE_BOTH = "both"


@dataclass(frozen=True)
class PairSampler:
    mode: str = MODE_BOTH
    c_exponent: float = 0.5
    n_random: int = 2000
    seed: int = 1
    offset_style: str = "isotropic"  # or "axis_aligned"

    def __post_init__(self):
        if self.mode not in (MODE_AXIS, MODE_RANDOM, MODE_BOTH):
            raise ConfigError(f"unknown sampler mode {self.mode!r}")
        if not (0.0 < self.c_exponent < 1.0):
            raise ConfigError(
                f"c_exponent must lie in (0, 1), got {self.c_exponent}")
        if self.offset_style not in ("isotropic", "axis_aligned"):
            raise ConfigError(f"unknown offset style {self.offset_style!r}")


@dataclass(frozen=True)
class BoxRegion:
    """Axis-aligned sampling box; pairs are rejected until both ends fit."""

    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float
    clip_pairs: bool = True

    def sample_point(self, rng):
        return np.array([rng.uniform(self.x_lo, self.x_hi),
                         rng.uniform(self.y_lo, self.y_hi)])

    def contains(self, p):
        return (self.x_lo <= p[0] <= self.x_hi
                and self.y_lo <= p[1] <= self.y_hi)


@dataclass(frozen=True)
class AnnulusRegion:
    """Quadrant-centred annulus; base points are log-uniform in radius.

    Offsets may leave the annulus (the reconstructed field is defined on
    the whole plane, and pairs straddling the axes are exactly the
    interesting ones), so ``contains`` accepts everything.
    """

    r_lo: float
    r_hi: float
    theta_lo: float = -0.125 * math.pi
    theta_hi: float = 0.625 * math.pi

    def sample_point(self, rng):
        r = math.exp(rng.uniform(math.log(self.r_lo), math.log(self.r_hi)))
        th = rng.uniform(self.theta_lo, self.theta_hi)
        return np.array([r * math.cos(th), r * math.sin(th)])

    def contains(self, p):
        return True


def axis_witness_pair(rho, c_exponent):
    """x = (rho, rho^c), y = (rho, 0) in Cartesian form."""
    th = rho ** c_exponent
    x = np.array([rho * math.cos(th), rho * math.sin(th)])
    y = np.array([rho, 0.0])
    return x, y


def sample_pairs(sampler, rho, region, rng=None):
    """(xs, ys) arrays of pair endpoints with |x - y| <= rho."""
    if rho <= 0.0:
        raise DomainError(f"rho must be positive, got {rho}")
    rng = rng if rng is not None else Xorshift64Star(sampler.seed)
    xs, ys = [], []
    if sampler.mode in (MODE_AXIS, MODE_BOTH):
        x, y = axis_witness_pair(rho, sampler.c_exponent)
        xs.append(x)
        ys.append(y)
    if sampler.mode in (MODE_RANDOM, MODE_BOTH):
        for _ in range(sampler.n_random):
            x = region.sample_point(rng)
            d = rho
            for _ in range(64):
                if sampler.offset_style == "axis_aligned":
                    k = int(rng.next_float() * 4.0) % 4
                    phi = 0.5 * math.pi * k
                else:
                    phi = rng.uniform(0.0, _TWO_PI)
                y = x + d * np.array([math.cos(phi), math.sin(phi)])
                if region.contains(y):
                    break
                d *= 0.5  # deterministic fallback for tight corners
            xs.append(x)
            ys.append(y)
    if not xs:
        raise ValidationError("sampler produced no pairs")
    return np.array(xs), np.array(ys)


def empirical_modulus(field, rho_list, sampler, region):
    """Lower-bound estimates (rho, Omega_hat) with a running max in rho.

    ``field`` maps an (n, 2) array of Cartesian points to values.  The
    running max enforces the monotonicity every true modulus has.
    """
    rho_list = sorted(float(r) for r in rho_list)
    if not rho_list:
        raise ValidationError("empty rho list")
    rng = Xorshift64Star(sampler.seed)
    out = []
    best = 0.0
    for rho in rho_list:
        xs, ys = sample_pairs(sampler, rho, region, rng)
        diffs = np.abs(np.asarray(field(xs)) - np.asarray(field(ys)))
        best = max(best, float(np.max(diffs)))
        out.append((rho, best))
    return out


@dataclass
class RatioSeries:
    rho: float
    times: list = field(default_factory=list)
    omega_hats: list = field(default_factory=list)
    ratios: list = field(default_factory=list)
    witnesses: list = field(default_factory=list)  # (x1, x2, y1, y2) per time


def modulus_ratio_series(snapshots, rho, sampler, region=None, backend=None):
    """Omega_hat(t, rho)/Omega_hat(0, rho) over snapshots, shared pair set.

    The field is the Gaussian-core reconstruction of each snapshot.  The
    argmax pair is reported per time (ties resolve to the first pair in
    sampler order).
    """
    if not snapshots:
        raise ValidationError("no snapshots to analyze")
    cfg = snapshots[0].config
    for s in snapshots:
        if s.config != cfg:
            raise ValidationError("snapshots do not share a configuration")
    if region is None:
        if cfg is None:
            raise ValidationError("snapshots carry no config; pass a region")
        region = AnnulusRegion(cfg.r_inner, cfg.r_outer)
    xs, ys = sample_pairs(sampler, rho, region)
    series = RatioSeries(rho=float(rho))
    base = None
    for snap in snapshots:
        fx = reconstruct_vorticity(snap, xs, backend=backend)
        fy = reconstruct_vorticity(snap, ys, backend=backend)
        diffs = np.abs(fx - fy)
        i = int(np.argmax(diffs))
        ohat = float(diffs[i])
        if base is None:
            if ohat <= 0.0:
                raise ValidationError(
                    f"zero baseline: Omega_hat(0, {rho}) = {ohat}")
            base = ohat
        series.times.append(snap.time)
        series.omega_hats.append(ohat)
        series.ratios.append(ohat / base)
        series.witnesses.append((xs[i, 0], xs[i, 1], ys[i, 0], ys[i, 1]))
    return series


def axis_pair_probe(sys, rho, c_exponent=0.5, backend=None):
    """Reconstructed vorticity at (rho, rho^c): a certified one-point bound.

    The partner point (rho, 0) carries zero vorticity by odd symmetry, so
    this single value already bounds Omega_hat(t, rho) from below.
    """
    cfg = sys.config
    if cfg is not None and not (cfg.r_inner <= rho <= cfg.r_outer):
        raise ValidationError(
            f"rho = {rho} outside the simulated annulus "
            f"[{cfg.r_inner}, {cfg.r_outer}]")
    x, _ = axis_witness_pair(rho, c_exponent)
    return reconstruct_vorticity(sys, x, backend=backend)
