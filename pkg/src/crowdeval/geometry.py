"""Perspective ground-plane geometry.

Builds an image-space grid whose cells each cover one unit square of the
scene's ground plane, from six user-clicked calibration points: two points
on each of two ground lines that recede to a shared vanishing point, plus
one depth-unit point and one lateral-unit point.  Depth divisions come from
a two-step line-intersection recursion; lateral divisions assume the lateral
ground direction is parallel to the image plane (single vanishing point),
so lateral spacing is uniform in the image along the base line.

World coordinates used by the rest of the toolkit are grid coordinates:
x = lateral (column) units, y = depth (row) units, with (0, 0) at the grid
corner corresponding to the first calibration point.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DegenerateCalibration, InvalidScene, OutOfBounds, ParallelLines

EPS_PAR = 1e-9          # normalized cross-product cutoff for "parallel"
CLICK_TOL_PX = 2.0      # max perpendicular distance of a unit click from its line

WALKABLE = "W"
OBSTACLE = "O"
ENTRANCE = "E"
CELL_LABELS = (WALKABLE, OBSTACLE, ENTRANCE)


def pt(x, y):
    p = np.array([float(x), float(y)])
    if not np.all(np.isfinite(p)):
        raise DegenerateCalibration(f"non-finite point ({x}, {y})")
    return p


def line_intersect(a, b, c, d):
    """Intersection of infinite lines ab and cd.

    Raises ParallelLines when the direction cross product is below the
    relative cutoff EPS_PAR.
    """
    a = np.asarray(a, float)
    r = np.asarray(b, float) - a
    c = np.asarray(c, float)
    s = np.asarray(d, float) - c
    denom = r[0] * s[1] - r[1] * s[0]
    norm = np.linalg.norm(r) * np.linalg.norm(s)
    if norm == 0.0 or abs(denom) < EPS_PAR * norm:
        raise ParallelLines("lines are parallel or degenerate")
    w = c - a
    t = (w[0] * s[1] - w[1] * s[0]) / denom
    return a + t * r


def _project_onto_line(p, a, b, tol=CLICK_TOL_PX):
    """Snap p onto line ab; reject if farther than tol perpendicular px."""
    d = b - a
    n = np.linalg.norm(d)
    if n == 0.0:
        raise DegenerateCalibration("zero-length reference line")
    d = d / n
    t = np.dot(p - a, d)
    proj = a + t * d
    if np.linalg.norm(p - proj) > tol:
        raise DegenerateCalibration("unit point too far from its reference line")
    return proj


@dataclass(frozen=True)
class CalibrationInput:
    """The six clicked points plus the image extent, all in image pixels.

    i, j define the first receding ground line; k, l the second.  u1 sits on
    line ij one depth unit from i; u2 sits on line ik one lateral unit from i.
    """

    i: np.ndarray
    j: np.ndarray
    k: np.ndarray
    l: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    image_width: int
    image_height: int

    def validated(self) -> "CalibrationInput":
        """Return a copy with unit points snapped onto their lines.

        Raises DegenerateCalibration on coincident points, parallel ground
        lines, off-line unit clicks, or a zero unit distance.
        """
        pts = {n: np.asarray(getattr(self, n), float) for n in ("i", "j", "k", "l", "u1", "u2")}
        for name, p in pts.items():
            if p.shape != (2,) or not np.all(np.isfinite(p)):
                raise DegenerateCalibration(f"point {name} is not a finite 2D point")
        if self.image_width <= 0 or self.image_height <= 0:
            raise DegenerateCalibration("non-positive image dimensions")
        i, j, k, l = pts["i"], pts["j"], pts["k"], pts["l"]
        if np.allclose(i, j) or np.allclose(k, l) or np.allclose(i, k):
            raise DegenerateCalibration("coincident calibration points")
        try:
            line_intersect(i, j, k, l)
        except ParallelLines as exc:
            raise DegenerateCalibration("ground lines are parallel (no vanishing point)") from exc
        u1 = _project_onto_line(pts["u1"], i, j)
        u2 = _project_onto_line(pts["u2"], i, k)
        if np.linalg.norm(u1 - i) < 1e-6:
            raise DegenerateCalibration("zero depth unit (u1 coincides with i)")
        if np.linalg.norm(u2 - i) < 1e-6:
            raise DegenerateCalibration("zero lateral unit (u2 coincides with i)")
        return replace(self, u1=u1, u2=u2)

    def vanishing_point(self) -> np.ndarray:
        return line_intersect(self.i, self.j, self.k, self.l)


def _default_r_point(calib: CalibrationInput, vanish: np.ndarray) -> np.ndarray:
    """Deterministic auxiliary point outside the triangle i-vanish-k.

    Any point off the construction lines works; using a fixed offset from the
    triangle's bounding box keeps grid output reproducible.
    """
    tri = np.stack([calib.i, vanish, calib.k])
    lo, hi = tri.min(axis=0), tri.max(axis=0)
    diag = np.maximum(hi - lo, 1.0)
    for scale in (0.37, 0.61, 1.13, 1.71):
        cand = hi + scale * diag + np.array([17.0, 29.0])
        try:
            _check_r_point(calib, vanish, cand)
        except ParallelLines:
            continue
        return cand
    raise DegenerateCalibration("could not place auxiliary construction point")


def _check_r_point(calib, vanish, r):
    line_intersect(calib.i, r, calib.k, vanish)


def _recursion_anchors(calib: CalibrationInput, vanish, r_point):
    """Initialise the two fixed pencil points of the depth recursion."""
    t_prev = line_intersect(calib.i, r_point, calib.k, vanish)
    r0 = line_intersect(calib.u1, t_prev, r_point, vanish)
    return r0


def recursive_scale_points(
    calib: CalibrationInput,
    max_points: int = 64,
    invert: bool = False,
    r_point=None,
):
    """Equal world-depth points along the line from i to the vanishing point.

    Forward (invert=False): [G1, G2, ...] marching toward the vanishing
    point, G1 being the clicked unit point.  Inverted: [G0, G-1, ...]
    marching away from it.  Iteration stops at max_points or once a point
    leaves the image rectangle (one out-of-image point is included so the
    border is always bracketed).
    """
    if max_points < 1:
        raise ValueError("max_points must be >= 1")
    calib = calib.validated()
    vanish = calib.vanishing_point()
    if r_point is None:
        r_point = _default_r_point(calib, vanish)
    r_point = np.asarray(r_point, float)
    try:
        r0 = _recursion_anchors(calib, vanish, r_point)
    except ParallelLines as exc:
        raise DegenerateCalibration("degenerate auxiliary point") from exc

    w, h = calib.image_width, calib.image_height

    def inside(p):
        return 0.0 <= p[0] <= w and 0.0 <= p[1] <= h

    out = []
    g = calib.u1.copy()
    try:
        if not invert:
            out.append(g.copy())
            while len(out) < max_points:
                t_n = line_intersect(g, r_point, calib.k, vanish)
                g = line_intersect(r0, t_n, calib.i, vanish)
                out.append(g.copy())
                if not inside(g):
                    break
                if np.linalg.norm(out[-1] - out[-2]) < 1e-12:
                    break
        else:
            while len(out) < max_points:
                t_n = line_intersect(r0, g, calib.k, vanish)
                g = line_intersect(t_n, r_point, calib.i, vanish)
                out.append(g.copy())
                if not inside(g):
                    break
    except ParallelLines as exc:
        raise DegenerateCalibration("recursion hit a parallel configuration") from exc
    return out


@dataclass
class PerspectiveGrid:
    """Image-space lattice of ground-plane unit cells.

    corners has shape (rows+1, cols+1, 2); corner [r, c] is the image point
    of world (x=c, y=r).  origin_row/origin_col give the corner index of the
    calibration origin i, so world depth n sits at row origin_row + n.
    labels is a rows x cols array of 'W'/'O'/'E', or None if unannotated.
    """

    rows: int
    cols: int
    corners: np.ndarray
    vanish: np.ndarray
    origin_row: int
    origin_col: int
    labels: np.ndarray | None = None

    def with_labels(self, labels) -> "PerspectiveGrid":
        labels = np.asarray(labels, dtype="<U1")
        if labels.shape != (self.rows, self.cols):
            raise InvalidScene(
                f"label array {labels.shape} does not match grid {(self.rows, self.cols)}"
            )
        bad = set(labels.ravel()) - set(CELL_LABELS)
        if bad:
            raise InvalidScene(f"unknown cell labels: {sorted(bad)}")
        return replace(self, labels=labels)

    def require_annotated(self):
        if self.labels is None:
            raise InvalidScene("grid has no cell labels")
        if not np.any(self.labels == WALKABLE):
            raise InvalidScene("grid has no walkable cell")
        if not np.any(self.labels == ENTRANCE):
            raise InvalidScene("grid has no entrance cell")

    def cell_quad(self, row: int, col: int) -> np.ndarray:
        """Image quadrilateral of cell (row, col), CCW in world order."""
        c = self.corners
        return np.stack([c[row, col], c[row, col + 1], c[row + 1, col + 1], c[row + 1, col]])

    def _locate(self, p):
        x, y = float(p[0]), float(p[1])
        if not (0.0 <= x <= self.cols and 0.0 <= y <= self.rows):
            raise OutOfBounds(f"world point ({x}, {y}) outside grid {(self.cols, self.rows)}")
        c = min(int(np.floor(x)), self.cols - 1)
        r = min(int(np.floor(y)), self.rows - 1)
        return r, c, x - c, y - r

    def world_to_image(self, p) -> np.ndarray:
        """Bilinear map of world (x=lateral, y=depth) into image pixels."""
        r, c, fx, fy = self._locate(p)
        cs = self.corners
        bottom = (1 - fx) * cs[r, c] + fx * cs[r, c + 1]
        top = (1 - fx) * cs[r + 1, c] + fx * cs[r + 1, c + 1]
        return (1 - fy) * bottom + fy * top

    def local_scale(self, p) -> float:
        """Pixel extent of one depth unit at world point p.

        The containing cell's depth edge, interpolated laterally; strictly
        positive and non-increasing toward the vanishing point.
        """
        r, c, fx, _ = self._locate(p)
        cs = self.corners
        bottom = (1 - fx) * cs[r, c] + fx * cs[r, c + 1]
        top = (1 - fx) * cs[r + 1, c] + fx * cs[r + 1, c + 1]
        return float(np.linalg.norm(top - bottom))

    def contains_world(self, p) -> bool:
        return 0.0 <= p[0] <= self.cols and 0.0 <= p[1] <= self.rows


def _crop_empty_rings(corners, rect_w, rect_h, origin_row, origin_col):
    """Drop leading/trailing cell rows/cols whose bboxes miss the image."""

    def row_hits(r):
        band = corners[r : r + 2]
        return _bbox_hits(band, rect_w, rect_h)

    def col_hits(c):
        band = corners[:, c : c + 2]
        return _bbox_hits(band, rect_w, rect_h)

    r0, r1 = 0, corners.shape[0] - 1   # cell row range [r0, r1)
    c0, c1 = 0, corners.shape[1] - 1
    while r1 - r0 > 1 and not row_hits(r0):
        r0 += 1
    while r1 - r0 > 1 and not row_hits(r1 - 1):
        r1 -= 1
    while c1 - c0 > 1 and not col_hits(c0):
        c0 += 1
    while c1 - c0 > 1 and not col_hits(c1 - 1):
        c1 -= 1
    return corners[r0 : r1 + 1, c0 : c1 + 1], origin_row - r0, origin_col - c0


def _bbox_hits(band, w, h):
    xs = band[..., 0]
    ys = band[..., 1]
    return xs.max() >= 0 and xs.min() <= w and ys.max() >= 0 and ys.min() <= h


def build_grid(
    calib: CalibrationInput,
    r_point=None,
    max_depth: int = 400,
    max_lateral: int = 400,
    min_spacing_px: float = 1.0,
) -> PerspectiveGrid:
    """Construct the full perspective grid covering the image rectangle.

    Depth rows come from the forward and inverted scale-point recursions
    (forward rows thinner than min_spacing_px are dropped: sub-pixel cells
    near the vanishing point carry no usable area).  Lateral columns repeat
    the i->u2 step uniformly; each column's depth line passes through the
    vanishing point.  Rings of cells fully outside the image are cropped.
    """
    calib = calib.validated()
    vanish = calib.vanishing_point()
    if r_point is None:
        r_point = _default_r_point(calib, vanish)

    fwd = recursive_scale_points(calib, max_points=max_depth, r_point=r_point)
    inv = recursive_scale_points(calib, max_points=max_depth, invert=True, r_point=r_point)
    # depth point at world depth n: depth_pts[n - n_min]
    depth_pts = list(reversed(inv)) + [calib.u1] + fwd[1:]
    n_min = 1 - len(inv)

    keep = []
    for idx, g in enumerate(depth_pts):
        if idx > 0 and np.linalg.norm(g - depth_pts[idx - 1]) < min_spacing_px:
            break
        keep.append(g)
    depth_pts = keep
    if len(depth_pts) < 2:
        raise DegenerateCalibration("grid collapsed to fewer than two depth lines")

    lat = calib.u2 - calib.i
    w, h = calib.image_width, calib.image_height

    def lateral_range():
        # extend both ways until the base point leaves the image, plus one ring
        lo = hi = 0
        while hi < max_lateral:
            p = calib.i + (hi + 1) * lat
            hi += 1
            if not (0 <= p[0] <= w and 0 <= p[1] <= h):
                break
        while lo > -max_lateral:
            p = calib.i + (lo - 1) * lat
            lo -= 1
            if not (0 <= p[0] <= w and 0 <= p[1] <= h):
                break
        return lo, hi

    m_lo, m_hi = lateral_range()
    n_rows = len(depth_pts)
    n_cols = m_hi - m_lo + 1
    corners = np.empty((n_rows, n_cols, 2))
    try:
        for mi, m in enumerate(range(m_lo, m_hi + 1)):
            base = calib.i + m * lat
            for ni, g in enumerate(depth_pts):
                if m == 0:
                    corners[ni, mi] = g
                else:
                    corners[ni, mi] = line_intersect(base, vanish, g, g + lat)
    except ParallelLines as exc:
        raise DegenerateCalibration("lateral construction degenerate") from exc

    corners, origin_row, origin_col = _crop_empty_rings(
        corners, w, h, origin_row=-n_min, origin_col=-m_lo
    )
    return PerspectiveGrid(
        rows=corners.shape[0] - 1,
        cols=corners.shape[1] - 1,
        corners=corners,
        vanish=vanish,
        origin_row=origin_row,
        origin_col=origin_col,
    )


@dataclass
class SceneSpec:
    """Serialized scene annotation: calibration plus cell labels and metadata."""

    calibration: CalibrationInput
    labels: np.ndarray
    agent_height_world: float
    source_fps: float
    background_path: str
    depth_unit_world: float = 1.0
    lateral_unit_world: float = 1.0
    estimated_agents: int = 8
    grid_options: dict = field(default_factory=dict)

    def build_grid(self) -> PerspectiveGrid:
        grid = build_grid(self.calibration, **self.grid_options)
        return grid.with_labels(self.labels)

    def validate(self):
        if self.source_fps <= 0:
            raise InvalidScene("source_fps must be positive")
        if self.agent_height_world <= 0:
            raise InvalidScene("agent_height_world must be positive")
        grid = self.build_grid()
        grid.require_annotated()
        return grid

    def to_json(self) -> str:
        c = self.calibration
        doc = {
            "calibration": {
                "i": list(c.i), "j": list(c.j), "k": list(c.k), "l": list(c.l),
                "u1": list(c.u1), "u2": list(c.u2),
                "image_width": c.image_width, "image_height": c.image_height,
            },
            "labels": [list(row) for row in np.asarray(self.labels)],
            "agent_height_world": self.agent_height_world,
            "source_fps": self.source_fps,
            "background_path": self.background_path,
            "estimated_agents": self.estimated_agents,
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "SceneSpec":
        from .errors import ParseError

        try:
            doc = json.loads(text)
            cal = doc["calibration"]
            calib = CalibrationInput(
                i=pt(*cal["i"]), j=pt(*cal["j"]), k=pt(*cal["k"]), l=pt(*cal["l"]),
                u1=pt(*cal["u1"]), u2=pt(*cal["u2"]),
                image_width=int(cal["image_width"]),
                image_height=int(cal["image_height"]),
            )
            return cls(
                calibration=calib,
                labels=np.asarray(doc["labels"], dtype="<U1"),
                agent_height_world=float(doc["agent_height_world"]),
                source_fps=float(doc["source_fps"]),
                background_path=str(doc["background_path"]),
                estimated_agents=int(doc.get("estimated_agents", 8)),
            )
        except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
            raise ParseError(f"malformed scene document: {exc}") from exc
