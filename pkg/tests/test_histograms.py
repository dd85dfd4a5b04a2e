import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crowdeval.errors import GeometryMismatch
from crowdeval.features import (
    Histogram,
    HvsParams,
    bhattacharyya,
    fechner_transform,
    flux,
    h2d,
    hoof,
    tracklet_histogram,
)
from crowdeval.features.histograms import MAX_DISTANCE
from crowdeval.features.tracking import Tracklet


def field_of(vectors, h=4, w=4):
    """Tile the given vectors into an (h*w)-pixel flow field."""
    flat = np.array(vectors, float)
    reps = -(-h * w // len(flat))
    return np.tile(flat, (reps, 1))[: h * w].reshape(h, w, 2)


class TestFechner:
    def test_zero_at_floor(self):
        p = HvsParams(v_max=10.0, v_floor=0.05)
        assert fechner_transform(0.05, p) == pytest.approx(0.0)
        assert fechner_transform(0.0, p) == pytest.approx(0.0)

    def test_unity_at_vmax_with_e_floor(self):
        vmax = 3.0
        p = HvsParams(L=1.0, v_max=vmax, v_floor=vmax / np.e)
        assert fechner_transform(vmax, p) == pytest.approx(1.0, abs=1e-12)

    @given(st.floats(0, 50), st.floats(0, 50))
    @settings(max_examples=50, deadline=None)
    def test_monotone(self, a, b):
        p = HvsParams(v_max=20.0)
        lo, hi = sorted((a, b))
        assert fechner_transform(lo, p) <= fechner_transform(hi, p) + 1e-12

    def test_capped_at_vmax(self):
        p = HvsParams(v_max=5.0)
        assert fechner_transform(100.0, p) == pytest.approx(fechner_transform(5.0, p))


class TestHoof:
    def test_single_direction_one_bin(self):
        h = hoof(field_of([(1, 0)]), bins=8)
        n = h.normalized().values
        # angle 0 falls in the bin containing the fold axis midpoint
        assert n[4] == pytest.approx(1.0)

    def test_mirror_invariance(self):
        left = hoof(field_of([(-1.0, 0.3)]), bins=16)
        right = hoof(field_of([(1.0, 0.3)]), bins=16)
        assert np.allclose(left.values, right.values)

    def test_matches_naive_binning_oracle(self):
        rng = np.random.default_rng(4)
        field = rng.normal(0, 2, (6, 7, 2))
        bins = 12
        got = hoof(field, bins=bins).values
        expected = np.zeros(bins)
        for vx, vy in field.reshape(-1, 2):
            ang = np.arctan2(vy, abs(vx))
            idx = min(int((ang + np.pi / 2) / np.pi * bins), bins - 1)
            expected[idx] += np.hypot(vx, vy)
        assert np.allclose(got, expected)

    def test_odd_bins_rejected(self):
        with pytest.raises(ValueError):
            hoof(field_of([(1, 0)]), bins=9)

    def test_empty_window_flagged(self):
        h = hoof(np.zeros((4, 4, 2)), window=(0, 0, 0, 0), bins=8)
        assert h.is_empty


class TestH2d:
    def test_zero_flow_center_cell(self):
        h = h2d(np.zeros((4, 4, 2)), grid_bins=16)
        n = h.normalized().values
        assert n[8, 8] == pytest.approx(1.0)

    def test_uniform_field_single_cell(self):
        h = h2d(field_of([(2.0, 0.0)]), grid_bins=16)
        n = h.normalized().values
        assert n.max() == pytest.approx(1.0)
        r, c = np.unravel_index(np.argmax(n), n.shape)
        assert (r, c) != (8, 8) and c > 8

    def test_matches_naive_oracle(self):
        rng = np.random.default_rng(5)
        field = rng.normal(0, 3, (5, 6, 2))
        bins, rng_v = 10, 8.0
        got = h2d(field, grid_bins=bins).values
        expected = np.zeros((bins, bins))
        for vx, vy in field.reshape(-1, 2):
            ix = min(max(int((vx + rng_v) / (2 * rng_v) * bins), 0), bins - 1)
            iy = min(max(int((vy + rng_v) / (2 * rng_v) * bins), 0), bins - 1)
            expected[iy, ix] += 1
        assert np.allclose(got, expected)


class TestTrackletHistogram:
    def test_no_tracks_empty(self):
        h = tracklet_histogram([], (128, 128), cell=64)
        assert h.is_empty

    def test_single_cell_track(self):
        tr = Tracklet(0, [(t, (10.0, 10.0)) for t in range(10)])
        h = tracklet_histogram([tr], (128, 128), cell=64).normalized()
        assert h.values[0, 0] == pytest.approx(1.0)

    def test_diagonal_matches_oracle(self):
        samples = [(t, (t * 20.0, t * 15.0)) for t in range(8)]
        h = tracklet_histogram([Tracklet(0, samples)], (160, 128), cell=64)
        expected = np.zeros((2, 3))
        for _, (x, y) in samples:
            expected[min(int(y) // 64, 1), min(int(x) // 64, 2)] += 1
        assert np.allclose(h.values, expected)


class TestFlux:
    def test_single_histogram_identity(self):
        h = Histogram(np.array([2.0, 6.0]), ("hoof", 2))
        assert np.allclose(flux([h]).values, [0.25, 0.75])

    def test_scale_invariance(self):
        h = Histogram(np.array([2.0, 6.0]), ("hoof", 2))
        assert np.allclose(flux([h, h]).values, flux([h]).values)

    def test_hand_summed(self):
        hs = [
            Histogram(np.array([1.0, 0.0, 1.0]), ("hoof", 3)),
            Histogram(np.array([0.0, 2.0, 0.0]), ("hoof", 3)),
            Histogram(np.array([1.0, 0.0, 3.0]), ("hoof", 3)),
        ]
        assert np.allclose(flux(hs).values, np.array([2, 2, 4]) / 8)

    def test_linearity_before_normalization(self):
        rng = np.random.default_rng(6)
        parts = [Histogram(rng.uniform(0, 5, 4), ("hoof", 4)) for _ in range(6)]
        joint = flux(parts)
        a = np.sum([p.values for p in parts[:3]], axis=0)
        b = np.sum([p.values for p in parts[3:]], axis=0)
        assert np.allclose(joint.values, (a + b) / (a + b).sum())


class TestBhattacharyya:
    def test_identical_zero(self):
        p = Histogram(np.array([0.3, 0.7]), ("hoof", 2))
        assert bhattacharyya(p, p) == 0.0

    def test_hand_value(self):
        p = Histogram(np.array([1.0, 0.0]), ("hoof", 2))
        q = Histogram(np.array([0.5, 0.5]), ("hoof", 2))
        assert bhattacharyya(p, q) == pytest.approx(-np.log(np.sqrt(0.5)), abs=1e-6)

    def test_disjoint_supports_clamped(self):
        p = Histogram(np.array([1.0, 0.0]), ("hoof", 2))
        q = Histogram(np.array([0.0, 1.0]), ("hoof", 2))
        assert bhattacharyya(p, q) == pytest.approx(MAX_DISTANCE)

    def test_geometry_mismatch(self):
        p = Histogram(np.array([1.0, 0.0]), ("hoof", 2))
        q = Histogram(np.array([1.0, 0.0]), ("h2d", 2))
        with pytest.raises(GeometryMismatch):
            bhattacharyya(p, q)

    def test_empty_cases(self):
        e = Histogram(np.zeros(2), ("hoof", 2))
        p = Histogram(np.array([1.0, 0.0]), ("hoof", 2))
        assert bhattacharyya(e, e) == 0.0
        assert bhattacharyya(e, p) == pytest.approx(MAX_DISTANCE)

    @given(st.lists(st.floats(0.01, 10), min_size=4, max_size=4),
           st.lists(st.floats(0.01, 10), min_size=4, max_size=4))
    @settings(max_examples=50, deadline=None)
    def test_symmetry_and_nonnegativity(self, a, b):
        p = Histogram(np.array(a), ("hoof", 4))
        q = Histogram(np.array(b), ("hoof", 4))
        assert bhattacharyya(p, q) == pytest.approx(bhattacharyya(q, p))
        assert bhattacharyya(p, q) >= 0.0

    @given(st.lists(st.floats(0.0, 10), min_size=6, max_size=6))
    @settings(max_examples=50, deadline=None)
    def test_normalization_sums_to_one(self, a):
        h = Histogram(np.array(a), ("hoof", 6)).normalized()
        assert h.is_empty or h.values.sum() == pytest.approx(1.0, abs=1e-9)
