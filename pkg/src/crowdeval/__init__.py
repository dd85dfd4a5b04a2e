"""Crowd simulation evaluation toolkit.

Composites simulated pedestrians onto a video's extracted background and
scores the result against the source with motion-based similarity
features.  See the README for the pipeline overview.
"""

__version__ = "0.1.0"

from .errors import CrowdEvalError
from .geometry import CalibrationInput, PerspectiveGrid, SceneSpec, build_grid
from .media import FrameSequence, extract_background, load_sequence

__all__ = [
    "CrowdEvalError",
    "CalibrationInput", "PerspectiveGrid", "SceneSpec", "build_grid",
    "FrameSequence", "extract_background", "load_sequence",
    "__version__",
]
