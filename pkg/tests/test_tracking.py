import numpy as np
import pytest

from crowdeval.errors import LengthMismatch
from crowdeval.features import TrackerParams, track
from crowdeval.media import FrameSequence


def blob_sequence(paths, n_frames=30, size=(120, 160), blob=9, bg=40):
    """Synthetic fixture: square blobs moving along given per-frame paths."""
    h, w = size
    frames = []
    for t in range(n_frames):
        f = np.full((h, w, 3), bg, dtype=np.uint8)
        for path in paths:
            x, y = path(t)
            x, y = int(round(x)), int(round(y))
            half = blob // 2
            f[max(y - half, 0) : y + half + 1, max(x - half, 0) : x + half + 1] = 220
        frames.append(f)
    return FrameSequence.from_frames(frames, fps=25)


class TestTrack:
    def test_empty_scene_no_tracklets(self):
        seq = blob_sequence([], n_frames=10)
        assert track(seq) == []

    def test_single_constant_velocity_blob(self):
        seq = blob_sequence([lambda t: (10 + 3 * t, 60)], n_frames=30)
        tracks = track(seq)
        assert len(tracks) == 1
        tr = tracks[0]
        assert len(tr) >= 25
        for t, (x, y) in tr.samples:
            assert abs(x - (10 + 3 * t)) < 2.0
            assert abs(y - 60) < 2.0

    def test_two_separated_blobs_no_swap(self):
        # crossing in x but vertically separated beyond the gate at all times
        pa = lambda t: (10 + 4 * t, 20)
        pb = lambda t: (130 - 4 * t, 100)
        seq = blob_sequence([pa, pb], n_frames=30)
        tracks = track(seq, params=TrackerParams(gate_radius=20))
        assert len(tracks) == 2
        by_y = sorted(tracks, key=lambda tr: tr.samples[0][1][1])
        for tr, path in zip(by_y, (pa, pb)):
            for t, (x, y) in tr.samples:
                ex, ey = path(t)
                assert np.hypot(x - ex, y - ey) < 4.0

    def test_flow_length_mismatch(self):
        seq = blob_sequence([lambda t: (20 + t, 30)], n_frames=5)
        with pytest.raises(LengthMismatch):
            track(seq, flows=[np.zeros((120, 160, 2))])

    def test_short_lived_blob_not_emitted(self):
        def flicker(t):
            return (30, 30) if t < 3 else (-50, -50)  # off-screen after 3 frames

        seq = blob_sequence([flicker], n_frames=40)
        assert track(seq, params=TrackerParams(min_track_len=5)) == []
