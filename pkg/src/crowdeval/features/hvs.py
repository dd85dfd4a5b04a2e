"""Perceived-motion transform.

Maps velocity magnitude to a logarithmic perceived scale: response grows
with the log of the ratio to a floor velocity, saturating at an upper
velocity threshold.  Disabling the transform leaves magnitudes untouched,
bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class HvsParams:
    L: float = 1.0
    v_max: float | None = None      # px/frame; None = derive from source flow
    v_floor: float = 0.05           # px/frame; avoids log(0)
    weber_enabled: bool = True

    def __post_init__(self):
        if self.L <= 0:
            raise ValueError("L must be positive")
        if self.v_max is not None and self.v_max <= 0:
            raise ValueError("v_max must be positive")
        if self.v_floor <= 0:
            raise ValueError("v_floor must be positive")

    def resolved(self, v_max: float) -> "HvsParams":
        if self.v_max is not None:
            return self
        return HvsParams(L=self.L, v_max=max(v_max, self.v_floor * np.e),
                         v_floor=self.v_floor, weber_enabled=self.weber_enabled)

    @property
    def m_max(self) -> float:
        return self.L * np.log(self.v_max / self.v_floor)


def fechner_transform(v, params: HvsParams):
    """Perceived magnitude: zero at the floor velocity, logarithmic above it,
    capped at the upper threshold.  Accepts scalars or arrays, v >= 0."""
    if params.v_max is None:
        raise ValueError("v_max unresolved; call HvsParams.resolved first")
    v = np.clip(np.asarray(v, np.float64), params.v_floor, params.v_max)
    return params.L * np.log(v / params.v_floor)
