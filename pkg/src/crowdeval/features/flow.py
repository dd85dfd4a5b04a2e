"""Dense optical flow.

Default provider is a coarse-to-fine Horn-Schunck estimator: a Gaussian
image pyramid, flow-compensated warping at each level, and a Jacobi
relaxation of the brightness-constancy + smoothness system.  Alternative
dense providers can be registered in FLOW_PROVIDERS; anything mapping two
grayscale frames to a (H, W, 2) field qualifies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy import ndimage

from ..errors import DimensionMismatch


@dataclass
class FlowConfig:
    levels: int = 3
    alpha: float = 15.0       # smoothness weight (on [0, 255] intensities)
    iterations: int = 30      # relaxation sweeps per pyramid level
    provider: str = "horn-schunck"


@njit(cache=True)
def _hs_relax(ix, iy, it, u, v, alpha2, iters):
    h, w = ix.shape
    for _ in range(iters):
        for r in range(h):
            for c in range(w):
                rm = r - 1 if r > 0 else 0
                rp = r + 1 if r < h - 1 else h - 1
                cm = c - 1 if c > 0 else 0
                cp = c + 1 if c < w - 1 else w - 1
                ubar = (u[rm, c] + u[rp, c] + u[r, cm] + u[r, cp]) / 6.0 + (
                    u[rm, cm] + u[rm, cp] + u[rp, cm] + u[rp, cp]
                ) / 12.0
                vbar = (v[rm, c] + v[rp, c] + v[r, cm] + v[r, cp]) / 6.0 + (
                    v[rm, cm] + v[rm, cp] + v[rp, cm] + v[rp, cp]
                ) / 12.0
                num = ix[r, c] * ubar + iy[r, c] * vbar + it[r, c]
                den = alpha2 + ix[r, c] ** 2 + iy[r, c] ** 2
                u[r, c] = ubar - ix[r, c] * num / den
                v[r, c] = vbar - iy[r, c] * num / den
    return u, v


def _derivatives(a, b):
    avg = 0.5 * (a + b)
    d = np.array([-0.5, 0.0, 0.5])
    ix = ndimage.correlate1d(avg, d, axis=1, mode="nearest")
    iy = ndimage.correlate1d(avg, d, axis=0, mode="nearest")
    it = b - a
    return ix, iy, it


def _warp(img, u, v):
    h, w = img.shape
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    return ndimage.map_coordinates(img, [yy + v, xx + u], order=1, mode="nearest")


def _pyramid(img, levels):
    out = [img]
    for _ in range(levels - 1):
        smoothed = ndimage.gaussian_filter(out[-1], 1.0)
        out.append(smoothed[::2, ::2])
    return out[::-1]  # coarse to fine


def horn_schunck(prev, nxt, cfg: FlowConfig | None = None):
    cfg = cfg or FlowConfig()
    a = np.asarray(prev, np.float64)
    b = np.asarray(nxt, np.float64)
    levels = max(1, min(cfg.levels, int(np.log2(max(1, min(a.shape)) / 8)) + 1))
    pa = _pyramid(a, levels)
    pb = _pyramid(b, levels)
    u = np.zeros_like(pa[0])
    v = np.zeros_like(pa[0])
    alpha2 = cfg.alpha**2
    for lvl, (la, lb) in enumerate(zip(pa, pb)):
        if lvl > 0:
            u = 2.0 * _upsample(u, la.shape)
            v = 2.0 * _upsample(v, la.shape)
        warped = _warp(lb, u, v)
        ix, iy, it = _derivatives(la, warped)
        du = np.zeros_like(u)
        dv = np.zeros_like(v)
        du, dv = _hs_relax(ix, iy, it, du, dv, alpha2, cfg.iterations)
        u = u + du
        v = v + dv
    return np.dstack([u, v])


def _upsample(field, shape):
    zy = shape[0] / field.shape[0]
    zx = shape[1] / field.shape[1]
    return ndimage.zoom(field, (zy, zx), order=1, grid_mode=True, mode="nearest")


FLOW_PROVIDERS = {"horn-schunck": horn_schunck}


def optical_flow(prev, nxt, cfg: FlowConfig | None = None):
    """Dense per-pixel motion from prev to nxt, shape (H, W, 2) in px/frame."""
    cfg = cfg or FlowConfig()
    prev = np.asarray(prev)
    nxt = np.asarray(nxt)
    if prev.shape != nxt.shape:
        raise DimensionMismatch(f"frame shapes differ: {prev.shape} vs {nxt.shape}")
    provider = FLOW_PROVIDERS[cfg.provider]
    return provider(prev, nxt, cfg)
