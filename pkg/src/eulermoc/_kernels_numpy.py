"""Pure-numpy pairwise kernels (fallback backend).

Same orientation as the numba twin: positive vorticity rotates clockwise.

Targets are processed in fixed-size chunks to bound memory; each target's
source reduction is a single np.sum over the full source axis, so results
do not depend on the chunk size or thread count.  As in the numba twin,
the exp is skipped where the mollifier factor is exactly 1.0 in binary64
(r^2 > 40 delta^2), which changes no bits.
"""

import numpy as np

_CHUNK = 256
_INV_2PI = 1.0 / (2.0 * np.pi)


def velocity_sum(targets, sources, weights, delta):
    """Velocity induced at each target by perpendicular-kernel sources.

    ``delta > 0`` applies the Gaussian-core mollifier factor
    (1 - exp(-r^2/delta^2)); ``delta == 0`` is the raw singular kernel.
    Zero-distance pairs contribute nothing in either case.
    """
    targets = np.atleast_2d(np.asarray(targets, dtype=np.float64))
    out = np.zeros((targets.shape[0], 2))
    sx = sources[:, 0]
    sy = sources[:, 1]
    d2 = delta * delta
    cut = 40.0 * d2
    for i0 in range(0, targets.shape[0], _CHUNK):
        t = targets[i0:i0 + _CHUNK]
        dx = t[:, 0:1] - sx[None, :]
        dy = t[:, 1:2] - sy[None, :]
        r2 = dx * dx + dy * dy
        with np.errstate(divide="ignore", invalid="ignore"):
            f = weights * _INV_2PI / r2
            if delta > 0.0:
                near = r2 <= cut
                f[near] *= 1.0 - np.exp(-r2[near] / d2)
        f[r2 == 0.0] = 0.0
        out[i0:i0 + _CHUNK, 0] = np.sum(dy * f, axis=1)
        out[i0:i0 + _CHUNK, 1] = np.sum(-dx * f, axis=1)
    return out


def gaussian_field_sum(targets, sources, weights, delta):
    """Scalar field sum_j w_j * exp(-|x - x_j|^2/delta^2) / (pi delta^2)."""
    targets = np.atleast_2d(np.asarray(targets, dtype=np.float64))
    out = np.zeros(targets.shape[0])
    norm = 1.0 / (np.pi * delta * delta)
    sx = sources[:, 0]
    sy = sources[:, 1]
    d2 = delta * delta
    for i0 in range(0, targets.shape[0], _CHUNK):
        t = targets[i0:i0 + _CHUNK]
        dx = t[:, 0:1] - sx[None, :]
        dy = t[:, 1:2] - sy[None, :]
        r2 = dx * dx + dy * dy
        out[i0:i0 + _CHUNK] = np.sum(weights * np.exp(-r2 / d2), axis=1) * norm
    return out
