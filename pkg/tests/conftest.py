"""Shared factories and independent oracles for the test suite."""

import numpy as np
import pytest

from mpilab.geometry import Camera, CameraIntrinsics, CameraPose, DisparitySampling
from mpilab.mpi import Mpi


def make_camera(width=32, height=32, fx=0.5, fy=0.5, cx=0.5, cy=0.5, center=(0.0, 0.0, 0.0), rotation=None):
    """Camera at a world-space center with an optional rotation."""
    rot = np.eye(3) if rotation is None else np.asarray(rotation, dtype=np.float64)
    center = np.asarray(center, dtype=np.float64)
    pose = CameraPose(rot, -rot @ center)
    return Camera(CameraIntrinsics(fx, fy, cx, cy, width, height), pose)


def random_mpi(rng, width=8, height=8, count=4, camera=None):
    camera = camera or make_camera(width, height)
    sampling = DisparitySampling(0.0, 1.0, count)
    color = rng.random((height, width, count, 3))
    alpha = rng.random((height, width, count))
    return Mpi(camera, sampling, color, alpha)


def over_composite_oracle(color, alpha):
    """Independent scalar back-to-front over-compositing: plain Python loops
    over pixels and planes, no vectorization, no warping."""
    h, w, count, _ = color.shape
    out = np.zeros((h, w, 3))
    acc = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            r = g = b = 0.0
            a_total = 0.0
            for i in range(count):
                a = alpha[y, x, i]
                r = color[y, x, i, 0] * a + r * (1.0 - a)
                g = color[y, x, i, 1] * a + g * (1.0 - a)
                b = color[y, x, i, 2] * a + b * (1.0 - a)
                a_total = a + a_total * (1.0 - a)
            out[y, x] = (r, g, b)
            acc[y, x] = a_total
    return out, acc


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
