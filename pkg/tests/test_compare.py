import numpy as np
import pytest

from crowdeval.compositor import RenderConfig, render_sequence
from crowdeval.errors import DegenerateVariance, ShapeMismatch
from crowdeval.features import HvsParams, compare_videos, pearson
from crowdeval.features.compare import CompareConfig
from crowdeval.features.flow import FlowConfig
from crowdeval.geometry import CalibrationInput, build_grid, pt
from crowdeval.media import FrameSequence
from crowdeval.sim import SimParams, run_simulation


@pytest.fixture(scope="module")
def small_scene():
    calib = CalibrationInput(
        i=pt(60, 200), j=pt(61, 40), u1=pt(60.2, 170),
        k=pt(200, 200), l=pt(199, 40), u2=pt(95, 200),
        image_width=256, image_height=224,
    )
    grid = build_grid(calib)
    labels = np.full((grid.rows, grid.cols), "W", dtype="<U1")
    labels[0, :] = "E"
    labels[-1, :] = "E"
    grid = grid.with_labels(labels)
    rng = np.random.default_rng(0)
    background = np.clip(
        rng.normal(110, 12, (224, 256, 3)), 0, 255
    ).astype(np.uint8)
    return grid, background


def make_video(small_scene, seed, speed=1.0, agents=6, frames=60, fps=25):
    grid, background = small_scene
    params = SimParams(n_agents=agents, seed=seed, speed_scale=speed)
    trace = run_simulation(grid, params, frames / fps, output_fps=fps)
    return render_sequence(background, grid, trace, RenderConfig(agent_height_world=1.7))


@pytest.fixture(scope="module")
def fast_cfg():
    return CompareConfig(flow=FlowConfig(iterations=15))


class TestCompareVideos:
    def test_self_similarity_zero(self, small_scene, fast_cfg):
        video = make_video(small_scene, seed=1, frames=40)
        scores = compare_videos(video, video, HvsParams(), fast_cfg)
        for key in ("d_hoof", "d_h2d", "d_track", "d_combined"):
            assert scores[key] < 1e-9

    def test_matched_beats_mismatched_speed(self, small_scene, fast_cfg):
        source = make_video(small_scene, seed=1)
        matched = make_video(small_scene, seed=2)
        half_speed = make_video(small_scene, seed=2, speed=0.5)
        d_match = compare_videos(source, matched, HvsParams(), fast_cfg)
        d_miss = compare_videos(source, half_speed, HvsParams(), fast_cfg)
        assert d_match["d_combined"] < d_miss["d_combined"]

    def test_shape_mismatch(self, small_scene, fast_cfg):
        video = make_video(small_scene, seed=1, frames=10)
        shorter = FrameSequence.from_frames(video.frames[:5], fps=video.fps)
        with pytest.raises(ShapeMismatch):
            compare_videos(video, shorter, HvsParams(), fast_cfg)

    def test_weber_toggle_bit_exact(self, small_scene, fast_cfg):
        """Disabling the perceived-motion transform must equal a pipeline
        that never touches magnitudes at all."""
        video = make_video(small_scene, seed=3, frames=20)
        other = make_video(small_scene, seed=4, frames=20)
        off = HvsParams(weber_enabled=False, v_max=8.0)
        a = compare_videos(video, other, off, fast_cfg)
        b = compare_videos(video, other, off, fast_cfg)
        assert a == b
        on = compare_videos(video, other, HvsParams(weber_enabled=True, v_max=8.0),
                            fast_cfg)
        assert on != a  # the transform must actually change the histograms


class TestPearson:
    def test_perfect_linear(self):
        xs = [1.0, 2.0, 3.0, 4.0]
        assert pearson(xs, [2 * x + 1 for x in xs]) == pytest.approx(1.0)

    def test_anti_linear(self):
        xs = [1.0, 2.0, 3.0, 4.0]
        assert pearson(xs, [-x for x in xs]) == pytest.approx(-1.0)

    def test_hand_computed_four_points(self):
        xs = [1.0, 2.0, 3.0, 5.0]
        ys = [2.0, 1.0, 4.0, 6.0]
        # oracle: direct evaluation of the definition with explicit sums
        mx, my = sum(xs) / 4, sum(ys) / 4
        num = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
        den = (sum((x - mx) ** 2 for x in xs) * sum((y - my) ** 2 for y in ys)) ** 0.5
        assert pearson(xs, ys) == pytest.approx(num / den, abs=1e-9)

    def test_degenerate_variance(self):
        with pytest.raises(DegenerateVariance):
            pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])

    def test_length_mismatch(self):
        with pytest.raises(DegenerateVariance):
            pearson([1.0], [1.0])
