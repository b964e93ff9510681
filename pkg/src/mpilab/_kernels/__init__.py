"""Hot resampling kernels with backend selection at import time.

The compiled Cython module is preferred; the pure-NumPy fallback is used when
the extension is unavailable or when ``MPILAB_BACKEND=numpy`` is set. Both
backends implement identical semantics, so results agree to roundoff.
"""

import os

import numpy as np

from mpilab._kernels import _fallback

if os.environ.get("MPILAB_BACKEND", "").lower() == "numpy":
    _impl = _fallback
    BACKEND = "numpy"
else:
    try:
        from mpilab._kernels import _native as _impl

        BACKEND = "native"
    except ImportError:
        _impl = _fallback
        BACKEND = "numpy"


def get_backend():
    """Name of the kernel backend in use: ``"native"`` or ``"numpy"``."""
    return BACKEND


def warp_bilinear(img, hom, out_h, out_w, periodic=False):
    """Backward bilinear warp of an (H, W, C) image by a 3x3 homography."""
    img = np.ascontiguousarray(img, dtype=np.float64)
    hom = np.ascontiguousarray(hom, dtype=np.float64)
    return _impl.warp_bilinear(img, hom, int(out_h), int(out_w), bool(periodic))


def gather_bilinear(img, xs, ys):
    """Border-clamped bilinear gather of an (H, W, C) image at (xs, ys)."""
    img = np.ascontiguousarray(img, dtype=np.float64)
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    ys = np.ascontiguousarray(ys, dtype=np.float64)
    return _impl.gather_bilinear(img, xs, ys)


def donor_search(eligible, needs, radius):
    """Nearest eligible donor offset per flagged pixel (Chebyshev rings)."""
    eligible = np.ascontiguousarray(eligible, dtype=np.uint8)
    needs = np.ascontiguousarray(needs, dtype=np.uint8)
    return _impl.donor_search(eligible, needs, int(radius))
