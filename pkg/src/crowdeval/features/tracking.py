"""Blob tracklets: background subtraction, component detection, and a
constant-velocity Kalman filter per track with greedy nearest-neighbour
association."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from ..errors import LengthMismatch
from ..media import FrameSequence, extract_background, grayscale


@dataclass
class TrackerParams:
    fg_threshold: float = 25.0     # intensity difference for foreground
    min_area: int = 30             # px, component size cutoff
    gate_radius: float = 30.0      # px, association gate
    max_missed: int = 5            # frames a track survives unmatched
    min_track_len: int = 5         # samples required to emit a tracklet


@dataclass
class Tracklet:
    id: int
    samples: list = field(default_factory=list)   # (frame index, (x, y))

    def __len__(self):
        return len(self.samples)


_F = np.array([[1, 0, 1, 0], [0, 1, 0, 1], [0, 0, 1, 0], [0, 0, 0, 1]], float)
_H = np.array([[1, 0, 0, 0], [0, 1, 0, 0]], float)
_Q = np.diag([0.5, 0.5, 0.5, 0.5])
_R = np.diag([2.0, 2.0])


class _Track:
    def __init__(self, tid, x, y, vx, vy, t):
        self.id = tid
        self.state = np.array([x, y, vx, vy], float)
        self.cov = np.diag([4.0, 4.0, 25.0, 25.0])
        self.missed = 0
        self.samples = [(t, (float(x), float(y)))]

    def predict(self):
        self.state = _F @ self.state
        self.cov = _F @ self.cov @ _F.T + _Q

    def update(self, z, t):
        innov = z - _H @ self.state
        s = _H @ self.cov @ _H.T + _R
        gain = self.cov @ _H.T @ np.linalg.inv(s)
        self.state = self.state + gain @ innov
        self.cov = (np.eye(4) - gain @ _H) @ self.cov
        self.missed = 0
        self.samples.append((t, (float(self.state[0]), float(self.state[1]))))


def _detections(gray, bg_gray, params):
    mask = np.abs(gray.astype(np.int16) - bg_gray.astype(np.int16)) > params.fg_threshold
    mask = ndimage.binary_opening(mask, structure=np.ones((3, 3)))
    labeled, n = ndimage.label(mask)
    out = []
    for idx in range(1, n + 1):
        ys, xs = np.nonzero(labeled == idx)
        if len(ys) < params.min_area:
            continue
        out.append(np.array([xs.mean(), ys.mean()]))
    return out


def track(seq: FrameSequence, flows=None, params: TrackerParams | None = None,
          background=None):
    """Tracklets of moving blobs over the sequence.

    flows, when given (one field per frame pair), seed the initial velocity
    of new tracks from the mean flow inside the detection's neighbourhood.
    """
    params = params or TrackerParams()
    if flows is not None and len(flows) != len(seq) - 1:
        raise LengthMismatch(
            f"{len(flows)} flow fields for {len(seq)} frames (need frames - 1)"
        )
    if background is None:
        background = extract_background(seq)
    bg_gray = grayscale(background)

    tracks: list[_Track] = []
    done: list[_Track] = []
    next_id = 0
    for t, frame in enumerate(seq.frames):
        dets = _detections(grayscale(frame), bg_gray, params)
        for tr in tracks:
            tr.predict()
        # greedy nearest-neighbour matching within the gate
        unmatched = list(range(len(dets)))
        pairs = []
        for tr in tracks:
            if not unmatched:
                break
            pred = tr.state[:2]
            dists = [np.linalg.norm(dets[i] - pred) for i in unmatched]
            best = int(np.argmin(dists))
            if dists[best] <= params.gate_radius:
                pairs.append((tr, unmatched.pop(best)))
        matched_tracks = set()
        for tr, di in pairs:
            tr.update(dets[di], t)
            matched_tracks.add(id(tr))
        survivors = []
        for tr in tracks:
            if id(tr) not in matched_tracks:
                tr.missed += 1
            if tr.missed > params.max_missed:
                done.append(tr)
            else:
                survivors.append(tr)
        tracks = survivors
        for di in unmatched:
            x, y = dets[di]
            vx = vy = 0.0
            if flows is not None and 0 < t:
                f = flows[t - 1]
                yy, xx = int(round(y)), int(round(x))
                y0, y1 = max(yy - 2, 0), min(yy + 3, f.shape[0])
                x0, x1 = max(xx - 2, 0), min(xx + 3, f.shape[1])
                patch = f[y0:y1, x0:x1]
                if patch.size:
                    vx = float(patch[..., 0].mean())
                    vy = float(patch[..., 1].mean())
            tracks.append(_Track(next_id, x, y, vx, vy, t))
            next_id += 1
    done.extend(tracks)
    return [
        Tracklet(id=tr.id, samples=tr.samples)
        for tr in sorted(done, key=lambda tr: tr.id)
        if len(tr.samples) >= params.min_track_len
    ]
