"""Billboard compositing of simulated agents over the extracted background.

Agents are flat-shaded, screen-aligned billboards anchored at their ground
position and scaled by the grid's local pixel-per-unit factor, drawn
far-to-near.  No anti-aliasing: identical inputs give bit-identical frames.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image as PILImage
from PIL import ImageDraw

from .errors import ShapeMismatch
from .geometry import OBSTACLE, PerspectiveGrid
from .media import FrameSequence

# torso palette; legs are drawn at half intensity
_PALETTE = np.array(
    [
        (202, 60, 60), (60, 120, 202), (60, 170, 80), (190, 150, 40),
        (150, 70, 180), (60, 180, 180), (220, 110, 40), (120, 120, 120),
    ],
    dtype=np.int64,
)
_HEAD = np.array((224, 190, 160), dtype=np.int64)

LEG_FRACTION = 0.45
TORSO_FRACTION = 0.45
SWING_STRIDE_WORLD = 0.5   # world distance per leg-swap half period


@dataclass
class RenderConfig:
    agent_height_world: float = 1.8
    agent_aspect: float = 0.4
    occlusion_enabled: bool = True
    obstacle_height_world: float = 1.8

    def __post_init__(self):
        if self.agent_height_world <= 0:
            raise ValueError("agent_height_world must be positive")
        if not 0 < self.agent_aspect <= 1:
            raise ValueError("agent_aspect must be in (0, 1]")


def _fill(img, mask, x0, y0, x1, y1, color):
    h, w = img.shape[:2]
    x0, x1 = max(x0, 0), min(x1, w)
    y0, y1 = max(y0, 0), min(y1, h)
    if x0 >= x1 or y0 >= y1:
        return
    region = mask[y0:y1, x0:x1]
    img[y0:y1, x0:x1][region] = color


def _quad_mask(quad, shape):
    mask_img = PILImage.new("L", (shape[1], shape[0]), 0)
    ImageDraw.Draw(mask_img).polygon([tuple(p) for p in quad], fill=1)
    return np.asarray(mask_img, dtype=bool)


def _hull(points):
    from scipy.spatial import ConvexHull

    points = np.asarray(points)
    return points[ConvexHull(points).vertices]


def _occluder_mask(grid: PerspectiveGrid, x, y, shape, obstacle_height_world):
    """Silhouettes of obstacle cells nearer the camera on the agent's depth
    line (smaller row index = nearer the camera-side grid edge).

    Each obstacle cell is treated as a prism: its floor quad extruded
    screen-upward by the obstacle height at the cell's local scale.
    """
    if grid.labels is None:
        return None
    col = min(int(x), grid.cols - 1)
    rows = [r for r in range(min(int(y), grid.rows)) if grid.labels[r, col] == OBSTACLE]
    if not rows:
        return None
    mask = np.zeros(shape[:2], dtype=bool)
    for r in rows:
        quad = grid.cell_quad(r, col)
        h_px = obstacle_height_world * grid.local_scale((col + 0.5, r + 0.5))
        lifted = quad - np.array([0.0, h_px])
        mask |= _quad_mask(_hull(np.vstack([quad, lifted])), shape)
    return mask


def render_frame(background, grid: PerspectiveGrid, frame_agents, cfg: RenderConfig,
                 phases=None):
    """Draw one trace frame onto a copy of the background.

    frame_agents holds (id, x, y, heading) tuples in world coordinates;
    phases optionally maps agent id to the current leg-swing phase (0/1).
    Out-of-grid agents are skipped; the skip count is returned alongside the
    image.
    """
    out = background.copy()
    h, w = out.shape[:2]
    phases = phases or {}
    skipped = 0
    # painter's order: larger depth (row coordinate) first, i.e. far to near
    for aid, x, y, _heading in sorted(frame_agents, key=lambda a: -a[2]):
        if not grid.contains_world((x, y)):
            skipped += 1
            continue
        anchor = grid.world_to_image((x, y))
        px_h = cfg.agent_height_world * grid.local_scale((x, y))
        px_w = max(px_h * cfg.agent_aspect, 1.0)
        if px_h < 1.0:
            skipped += 1
            continue
        ax, ay = int(round(anchor[0])), int(round(anchor[1]))
        x0 = int(round(ax - px_w / 2))
        x1 = max(int(round(ax + px_w / 2)), x0 + 1)
        top = int(round(ay - px_h))
        leg_top = int(round(ay - px_h * LEG_FRACTION))
        torso_top = int(round(ay - px_h * (LEG_FRACTION + TORSO_FRACTION)))

        body = np.ones((h, w), dtype=bool)
        if cfg.occlusion_enabled:
            occ = _occluder_mask(grid, x, y, out.shape, cfg.obstacle_height_world)
            if occ is not None:
                body = ~occ

        color = _PALETTE[aid % len(_PALETTE)]
        legs = color // 2
        phase = phases.get(aid, 0)
        xm = (x0 + x1 + 1) // 2
        short = int(round((ay - leg_top) * 0.35))
        if phase == 0:
            _fill(out, body, x0, leg_top, xm, ay, legs)
            _fill(out, body, xm, leg_top, x1, ay - short, legs)
        else:
            _fill(out, body, x0, leg_top, xm, ay - short, legs)
            _fill(out, body, xm, leg_top, x1, ay, legs)
        _fill(out, body, x0, torso_top, x1, leg_top, color)
        _fill(out, body, x0, top, x1, torso_top, _HEAD)
    return out, skipped


def render_sequence(background, grid: PerspectiveGrid, trace, cfg: RenderConfig,
                    n_frames=None) -> FrameSequence:
    """Render the whole trace into a frame sequence at the trace frame rate.

    Leg-swing phase advances with each agent's travelled world distance, so
    the swing period follows its speed.
    """
    if n_frames is None:
        n_frames = trace.duration_frames
    if n_frames > trace.duration_frames:
        raise ShapeMismatch(
            f"requested {n_frames} frames but trace has {trace.duration_frames}"
        )
    frames = []
    travelled: dict[int, float] = {}
    last_pos: dict[int, np.ndarray] = {}
    for idx in range(n_frames):
        agents = trace.frames[idx]
        phases = {}
        for aid, x, y, _ in agents:
            p = np.array([x, y])
            if aid in last_pos:
                travelled[aid] = travelled.get(aid, 0.0) + float(
                    np.linalg.norm(p - last_pos[aid])
                )
            last_pos[aid] = p
            phases[aid] = int(travelled.get(aid, 0.0) / SWING_STRIDE_WORLD) % 2
        frame, _ = render_frame(background, grid, agents, cfg, phases)
        frames.append(frame)
    if not frames:
        return FrameSequence(frames=[], fps=trace.output_fps,
                             width=background.shape[1], height=background.shape[0])
    return FrameSequence.from_frames(frames, fps=trace.output_fps)
