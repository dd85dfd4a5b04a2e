import numpy as np
import pytest

from crowdeval.geometry import CalibrationInput, pt


class GroundPlaneCamera:
    """Known ground-plane-to-image map used as the geometry test oracle.

    Pinhole camera at height h above the plane, tilted down by tilt, with an
    in-plane roll; the lateral world axis stays parallel to the image plane.
    """

    def __init__(self, height, tilt, focal, offset, roll=0.0):
        self.h = height
        self.tilt = tilt
        self.f = focal
        self.offset = np.asarray(offset, float)
        self.roll = roll

    def project(self, x, y):
        den = y * np.cos(self.tilt) + self.h * np.sin(self.tilt)
        u = self.f * x / den
        v = self.f * (self.h * np.cos(self.tilt) - y * np.sin(self.tilt)) / den
        cr, sr = np.cos(self.roll), np.sin(self.roll)
        return np.array([cr * u - sr * v, sr * u + cr * v]) + self.offset

    @classmethod
    def random(cls, rng):
        return cls(
            height=rng.uniform(6, 14),
            tilt=np.deg2rad(rng.uniform(25, 50)),
            focal=rng.uniform(60, 140),
            offset=np.zeros(2),
            roll=np.deg2rad(rng.uniform(-8, 8)),
        )

    def calibration(self, extent=10, pad=20.0):
        """Clicks at world (0,0),(0,6),(3,0),(3,6),(0,1),(1,0), image sized
        to contain the full [0, extent]^2 lattice."""
        lattice = np.array(
            [self.project(x, y) for x in range(extent + 1) for y in range(extent + 1)]
        )
        lo = lattice.min(axis=0) - pad
        hi = lattice.max(axis=0) + pad
        self.offset = self.offset - lo
        w, h = np.ceil(hi - lo).astype(int)
        return CalibrationInput(
            i=self.project(0, 0),
            j=self.project(0, 6),
            k=self.project(3, 0),
            l=self.project(3, 6),
            u1=self.project(0, 1),
            u2=self.project(1, 0),
            image_width=int(w),
            image_height=int(h),
        )


@pytest.fixture
def camera():
    return GroundPlaneCamera(height=10.0, tilt=np.deg2rad(35), focal=100.0, offset=(0, 0))


@pytest.fixture
def square_calibration():
    """Axis-aligned fixture: unit cells, vanishing point far above the image."""
    return CalibrationInput(
        i=pt(100, 400), j=pt(102, 100), u1=pt(100.3, 350),
        k=pt(300, 400), l=pt(298, 100), u2=pt(150, 400),
        image_width=400, image_height=500,
    )
