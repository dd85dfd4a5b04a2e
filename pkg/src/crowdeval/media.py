"""Frame-sequence I/O and background extraction.

Images are numpy uint8 arrays: (H, W, 3) RGB or (H, W) grayscale.  Video
input is a directory of zero-padded numbered PNG frames; converting a
container file to frames is an external step (e.g. ffmpeg).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from .errors import EmptyDirectory, MixedResolutions, UnreadableFile

_FRAME_RE = re.compile(r"(\d+)\.(png|PNG)$")


@dataclass
class FrameSequence:
    frames: list[np.ndarray]
    fps: float
    width: int
    height: int

    def __post_init__(self):
        if self.fps <= 0:
            raise ValueError("fps must be positive")
        for f in self.frames:
            if f.shape[0] != self.height or f.shape[1] != self.width:
                raise MixedResolutions("frame resolution differs from sequence resolution")

    def __len__(self):
        return len(self.frames)

    @classmethod
    def from_frames(cls, frames, fps) -> "FrameSequence":
        if not frames:
            raise EmptyDirectory("cannot build a sequence from zero frames")
        h, w = frames[0].shape[:2]
        return cls(frames=list(frames), fps=fps, width=w, height=h)


def load_image(path) -> np.ndarray:
    try:
        with PILImage.open(path) as im:
            return np.asarray(im.convert("RGB"))
    except OSError as exc:
        raise UnreadableFile(f"cannot read image {path}: {exc}") from exc


def save_image(img: np.ndarray, path):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    arr = np.asarray(img, dtype=np.uint8)
    PILImage.fromarray(arr).save(path)


def load_sequence(directory, fps: float) -> FrameSequence:
    """Load numbered PNG frames from a directory, ordered by their index."""
    directory = Path(directory)
    entries = []
    for p in sorted(directory.glob("*.png")) + sorted(directory.glob("*.PNG")):
        m = _FRAME_RE.search(p.name)
        if m:
            entries.append((int(m.group(1)), p))
    if not entries:
        raise EmptyDirectory(f"no numbered .png frames in {directory}")
    entries.sort()
    frames = [load_image(p) for _, p in entries]
    shapes = {f.shape for f in frames}
    if len(shapes) > 1:
        raise MixedResolutions(f"frames have differing resolutions: {sorted(shapes)}")
    return FrameSequence.from_frames(frames, fps)


def save_sequence(seq: FrameSequence, directory, prefix="frame_"):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for idx, frame in enumerate(seq.frames):
        save_image(frame, directory / f"{prefix}{idx + 1:06d}.png")


def extract_background(seq: FrameSequence) -> np.ndarray:
    """Per-pixel arithmetic mean over all frames, rounded half-up.

    64-bit accumulation keeps the result bit-exact regardless of frame
    count or ordering.
    """
    if len(seq) == 0:
        raise EmptyDirectory("background needs at least one frame")
    acc = np.zeros(seq.frames[0].shape, dtype=np.int64)
    for frame in seq.frames:
        acc += frame
    mean = np.floor_divide(2 * acc + len(seq), 2 * len(seq))  # round half-up
    return mean.astype(np.uint8)


def grayscale(img: np.ndarray) -> np.ndarray:
    """Rec.601 luma, rounded to uint8: Y = 0.299 R + 0.587 G + 0.114 B."""
    if img.ndim == 2:
        return img
    y = img[..., 0] * 0.299 + img[..., 1] * 0.587 + img[..., 2] * 0.114
    return np.floor(y + 0.5).astype(np.uint8)
