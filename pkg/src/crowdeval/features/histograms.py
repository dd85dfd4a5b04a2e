"""Motion and tracklet histograms plus their flux aggregation and distance.

Histogram values are raw (unnormalized) accumulations; normalization
happens on demand, so histograms from different windows or times can be
summed into a flux histogram before the single final normalization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import GeometryMismatch
from .hvs import HvsParams, fechner_transform

BC_FLOOR = 1e-12
MAX_DISTANCE = -np.log(BC_FLOOR)  # ~27.63


@dataclass
class Histogram:
    values: np.ndarray
    geometry: tuple      # e.g. ("hoof", 32) or ("h2d", 16, 16) or ("cells", r, c)

    @property
    def is_empty(self) -> bool:
        return float(self.values.sum()) <= 0.0

    def normalized(self) -> "Histogram":
        total = float(self.values.sum())
        if total <= 0.0:
            return Histogram(np.zeros_like(self.values, dtype=np.float64), self.geometry)
        return Histogram(self.values.astype(np.float64) / total, self.geometry)


def _window_view(field, window):
    if window is None:
        return field
    y0, y1, x0, x1 = window
    return field[y0:y1, x0:x1]


def _magnitudes(vx, vy):
    return np.sqrt(vx * vx + vy * vy)


def hoof(flow, window=None, bins: int = 32, hvs: HvsParams | None = None) -> Histogram:
    """Orientation histogram of the flow, folded left-right.

    Angles are folded about the vertical axis into `bins` uniform bins over
    [-pi/2, pi/2]; each vector contributes its (optionally perceived)
    magnitude, so mirrored motion yields an identical histogram.
    """
    if bins < 4 or bins % 2:
        raise ValueError("bins must be an even integer >= 4")
    region = _window_view(np.asarray(flow, np.float64), window)
    vx = region[..., 0].ravel()
    vy = region[..., 1].ravel()
    mag = _magnitudes(vx, vy)
    weight = mag.copy()
    if hvs is not None and hvs.weber_enabled:
        nz = mag > 0
        weight[nz] = fechner_transform(mag[nz], hvs)
        weight[~nz] = 0.0
    folded = np.arctan2(vy, np.abs(vx))  # in [-pi/2, pi/2]
    idx = np.floor((folded + np.pi / 2) / np.pi * bins).astype(int)
    idx = np.clip(idx, 0, bins - 1)
    values = np.bincount(idx, weights=weight, minlength=bins)
    return Histogram(values, ("hoof", bins))


def _motion_range(hvs: HvsParams | None, default=8.0) -> float:
    if hvs is None:
        return default
    if hvs.v_max is None:
        raise ValueError("v_max unresolved")
    return hvs.m_max if hvs.weber_enabled else hvs.v_max


def h2d(flow, window=None, grid_bins: int = 16, hvs: HvsParams | None = None) -> Histogram:
    """2D histogram over motion levels: counts pixels per (vx, vy) level cell.

    Components are clipped to the symmetric motion range; with the
    perceived-motion transform enabled, each vector is rescaled to its
    perceived magnitude with direction preserved before binning.
    """
    region = _window_view(np.asarray(flow, np.float64), window)
    vx = region[..., 0].ravel()
    vy = region[..., 1].ravel()
    if hvs is not None and hvs.weber_enabled:
        mag = _magnitudes(vx, vy)
        nz = mag > 0
        scale = np.ones_like(mag)
        scale[nz] = fechner_transform(mag[nz], hvs) / mag[nz]
        vx = vx * scale
        vy = vy * scale
    r = _motion_range(hvs)
    idx_x = np.clip(np.floor((vx + r) / (2 * r) * grid_bins).astype(int), 0, grid_bins - 1)
    idx_y = np.clip(np.floor((vy + r) / (2 * r) * grid_bins).astype(int), 0, grid_bins - 1)
    values = np.bincount(idx_y * grid_bins + idx_x, minlength=grid_bins * grid_bins)
    return Histogram(values.reshape(grid_bins, grid_bins).astype(np.float64),
                     ("h2d", grid_bins, grid_bins))


def tracklet_histogram(tracks, image_size, cell: int = 64) -> Histogram:
    """Time-collapsed spatial occupancy of tracklet samples.

    All samples of all tracklets are superimposed and binned into image
    cells of `cell` px; image_size is (width, height).
    """
    width, height = image_size
    n_cols = max(1, -(-width // cell))
    n_rows = max(1, -(-height // cell))
    values = np.zeros((n_rows, n_cols), dtype=np.float64)
    for tr in tracks:
        for _t, (x, y) in tr.samples:
            c = min(int(x) // cell, n_cols - 1)
            r = min(int(y) // cell, n_rows - 1)
            if x >= 0 and y >= 0:
                values[r, c] += 1.0
    return Histogram(values, ("cells", n_rows, n_cols))


def flux(histograms) -> Histogram:
    """Discrete surface integral: element-wise accumulation of raw feature
    arrays over windows and/or times, then a single normalization."""
    histograms = list(histograms)
    if not histograms:
        raise ValueError("flux of zero histograms")
    geom = histograms[0].geometry
    total = np.zeros_like(histograms[0].values, dtype=np.float64)
    for h in histograms:
        if h.geometry != geom:
            raise GeometryMismatch(f"mixed geometries {geom} vs {h.geometry}")
        total += h.values
    return Histogram(total, geom).normalized()


def bhattacharyya(p: Histogram, q: Histogram) -> float:
    """Distance -ln(sum sqrt(p*q)) between normalized histograms.

    The coefficient is clamped to [BC_FLOOR, 1], so disjoint supports give
    the finite maximum and identical histograms give exactly 0.  Empty vs
    nonempty is maximal; empty vs empty is 0.
    """
    if p.geometry != q.geometry:
        raise GeometryMismatch(f"{p.geometry} vs {q.geometry}")
    pn, qn = p.normalized(), q.normalized()
    if pn.is_empty and qn.is_empty:
        return 0.0
    if pn.is_empty or qn.is_empty:
        return float(MAX_DISTANCE)
    bc = float(np.sum(np.sqrt(pn.values * qn.values)))
    bc = min(max(bc, BC_FLOOR), 1.0)
    return float(-np.log(bc))
