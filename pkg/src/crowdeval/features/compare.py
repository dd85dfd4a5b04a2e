"""Whole-video similarity scoring.

Extracts the three motion feature sets from each video, accumulates their
flux histograms, and measures feature-wise distances between source and
simulated sequences: orientation histograms per frame, the motion-level
histogram per sequence, and the time-collapsed tracklet histogram.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DegenerateVariance, ShapeMismatch
from ..media import FrameSequence, grayscale
from .flow import FlowConfig, optical_flow
from .histograms import Histogram, bhattacharyya, flux, h2d, hoof, tracklet_histogram
from .hvs import HvsParams
from .tracking import TrackerParams, track


@dataclass
class FeatureBundle:
    hoof_per_frame: list          # one flux-over-windows Histogram per frame pair
    h2d_flux: Histogram
    tracklet_flux: Histogram
    window_size: int = 64


@dataclass
class CompareConfig:
    window_size: int = 64
    hoof_bins: int = 32
    h2d_bins: int = 16
    weights: tuple = (1.0, 1.0, 1.0)    # hoof, h2d, tracklet
    flow: FlowConfig = field(default_factory=FlowConfig)
    tracker: TrackerParams = field(default_factory=TrackerParams)


def _windows(height, width, size):
    for y0 in range(0, height, size):
        for x0 in range(0, width, size):
            yield y0, min(y0 + size, height), x0, min(x0 + size, width)


def _flows(seq: FrameSequence, cfg: CompareConfig):
    grays = [grayscale(f) for f in seq.frames]
    return [optical_flow(a, b, cfg.flow) for a, b in zip(grays, grays[1:])]


def video_features(seq: FrameSequence, hvs: HvsParams, cfg: CompareConfig | None = None,
                   flows=None) -> FeatureBundle:
    """Extract the per-video feature bundle (hvs must have v_max resolved)."""
    cfg = cfg or CompareConfig()
    if flows is None:
        flows = _flows(seq, cfg)
    wins = list(_windows(seq.height, seq.width, cfg.window_size))
    hoof_frames = []
    h2d_parts = []
    for field_t in flows:
        hoof_parts = [hoof(field_t, w, cfg.hoof_bins, hvs) for w in wins]
        hoof_frames.append(flux(hoof_parts))
        h2d_parts.extend(h2d(field_t, w, cfg.h2d_bins, hvs) for w in wins)
    h2d_total = flux(h2d_parts) if h2d_parts else Histogram(
        np.zeros((cfg.h2d_bins, cfg.h2d_bins)), ("h2d", cfg.h2d_bins, cfg.h2d_bins)
    )
    tracks = track(seq, flows, cfg.tracker)
    track_hist = tracklet_histogram(tracks, (seq.width, seq.height),
                                    cell=cfg.window_size).normalized()
    return FeatureBundle(
        hoof_per_frame=hoof_frames,
        h2d_flux=h2d_total,
        tracklet_flux=track_hist,
        window_size=cfg.window_size,
    )


def resolve_hvs(hvs: HvsParams, source_flows) -> HvsParams:
    """Fill in v_max from the 99th percentile of source flow magnitudes."""
    if hvs.v_max is not None:
        return hvs
    mags = [np.linalg.norm(f, axis=2).ravel() for f in source_flows]
    v99 = float(np.percentile(np.concatenate(mags), 99)) if mags else 1.0
    return hvs.resolved(max(v99, 10 * hvs.v_floor))


def compare_videos(source: FrameSequence, simulated: FrameSequence,
                   hvs: HvsParams | None = None, cfg: CompareConfig | None = None,
                   source_features: FeatureBundle | None = None,
                   source_flows=None) -> dict:
    """Feature distances between a source video and a composited one.

    Returns d_hoof (mean per-frame distance), d_h2d and d_track (per
    sequence), and their weighted combination d_combined.  Pass
    source_features/source_flows to reuse work across a sweep.
    """
    hvs = hvs or HvsParams()
    cfg = cfg or CompareConfig()
    if (source.width, source.height) != (simulated.width, simulated.height):
        raise ShapeMismatch("videos differ in resolution")
    if len(source) != len(simulated):
        raise ShapeMismatch("videos differ in frame count")
    if source_flows is None and source_features is None:
        source_flows = _flows(source, cfg)
    hvs = resolve_hvs(hvs, source_flows if source_flows is not None else [])
    if source_features is None:
        source_features = video_features(source, hvs, cfg, flows=source_flows)
    sim_features = video_features(simulated, hvs, cfg)

    per_frame = [
        bhattacharyya(a, b)
        for a, b in zip(source_features.hoof_per_frame, sim_features.hoof_per_frame)
    ]
    d_hoof = float(np.mean(per_frame)) if per_frame else 0.0
    d_h2d = bhattacharyya(source_features.h2d_flux, sim_features.h2d_flux)
    d_track = bhattacharyya(source_features.tracklet_flux, sim_features.tracklet_flux)
    w = np.asarray(cfg.weights, float)
    d_combined = float(np.dot(w, [d_hoof, d_h2d, d_track]) / w.sum())
    return {
        "d_hoof": d_hoof,
        "d_h2d": d_h2d,
        "d_track": d_track,
        "d_combined": d_combined,
    }


def pearson(xs, ys) -> float:
    """Sample Pearson correlation coefficient."""
    xs = np.asarray(xs, float)
    ys = np.asarray(ys, float)
    if xs.shape != ys.shape or xs.ndim != 1 or len(xs) < 2:
        raise DegenerateVariance("need two equal-length samples of size >= 2")
    dx = xs - xs.mean()
    dy = ys - ys.mean()
    den = np.sqrt(np.sum(dx * dx) * np.sum(dy * dy))
    if den == 0.0:
        raise DegenerateVariance("zero variance input")
    return float(np.clip(np.sum(dx * dy) / den, -1.0, 1.0))
