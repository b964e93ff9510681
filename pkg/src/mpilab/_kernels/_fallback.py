"""Pure-NumPy implementations of the hot resampling kernels.

Semantics are identical to the compiled module in ``_native.pyx``; arithmetic
is ordered the same way so both backends agree to floating-point roundoff.
"""

import numpy as np


def warp_bilinear(img, hom, out_h, out_w, periodic=False):
    """Backward-warp ``img`` (H, W, C) by the pixel-to-pixel homography ``hom``.

    For every output pixel (x, y) the source location is ``hom @ (x, y, 1)``
    after perspective division. Samples are bilinear; locations outside the
    source domain contribute 0 unless ``periodic``, in which case coordinates
    wrap. Locations with non-positive homogeneous depth produce 0.
    """
    img = np.ascontiguousarray(img, dtype=np.float64)
    hom = np.asarray(hom, dtype=np.float64)
    h, w, _ = img.shape
    xs, ys = np.meshgrid(
        np.arange(out_w, dtype=np.float64),
        np.arange(out_h, dtype=np.float64),
    )
    denom = hom[2, 0] * xs + hom[2, 1] * ys + hom[2, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        sx = (hom[0, 0] * xs + hom[0, 1] * ys + hom[0, 2]) / denom
        sy = (hom[1, 0] * xs + hom[1, 1] * ys + hom[1, 2]) / denom
    bad = (denom <= 0.0) | ~np.isfinite(sx) | ~np.isfinite(sy)
    sx = np.where(bad, 0.0, sx)
    sy = np.where(bad, 0.0, sy)

    x0 = np.floor(sx)
    y0 = np.floor(sy)
    tx = sx - x0
    ty = sy - y0
    x0 = x0.astype(np.int64)
    y0 = y0.astype(np.int64)
    x1 = x0 + 1
    y1 = y0 + 1

    if periodic:
        def fetch(yi, xi):
            return img[np.mod(yi, h), np.mod(xi, w)]
    else:
        def fetch(yi, xi):
            valid = (xi >= 0) & (xi < w) & (yi >= 0) & (yi < h)
            vals = img[np.clip(yi, 0, h - 1), np.clip(xi, 0, w - 1)]
            return np.where(valid[..., None], vals, 0.0)

    v00 = fetch(y0, x0)
    v01 = fetch(y0, x1)
    v10 = fetch(y1, x0)
    v11 = fetch(y1, x1)
    tx = tx[..., None]
    ty = ty[..., None]
    out = (1.0 - ty) * ((1.0 - tx) * v00 + tx * v01) + ty * (
        (1.0 - tx) * v10 + tx * v11
    )
    out[bad] = 0.0
    return out


def gather_bilinear(img, xs, ys):
    """Bilinear gather of ``img`` (H, W, C) at per-pixel coordinates.

    Coordinates are clamped to the image rectangle, so out-of-bounds reads
    replicate the border. Integer coordinates return stored values exactly.
    """
    img = np.ascontiguousarray(img, dtype=np.float64)
    h, w, _ = img.shape
    sx = np.clip(np.asarray(xs, dtype=np.float64), 0.0, w - 1.0)
    sy = np.clip(np.asarray(ys, dtype=np.float64), 0.0, h - 1.0)
    x0 = np.floor(sx).astype(np.int64)
    y0 = np.floor(sy).astype(np.int64)
    tx = (sx - x0)[..., None]
    ty = (sy - y0)[..., None]
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    v00 = img[y0, x0]
    v01 = img[y0, x1]
    v10 = img[y1, x0]
    v11 = img[y1, x1]
    return (1.0 - ty) * ((1.0 - tx) * v00 + tx * v01) + ty * (
        (1.0 - tx) * v10 + tx * v11
    )


def _ring_offsets(radius):
    for r in range(1, radius + 1):
        for dy in range(-r, r + 1):
            for dx in range(-r, r + 1):
                if max(abs(dx), abs(dy)) == r:
                    yield dx, dy


def donor_search(eligible, needs, radius):
    """Find, for each flagged pixel, the nearest eligible donor pixel.

    Rings of Chebyshev radius 1..``radius`` are scanned in scanline order and
    the first eligible donor wins. Returns (H, W, 2) pixel offsets (dx, dy),
    zero where no donor was found or none was needed.
    """
    eligible = np.asarray(eligible, dtype=bool)
    needs = np.asarray(needs, dtype=bool)
    h, w = eligible.shape
    flow = np.zeros((h, w, 2), dtype=np.float64)
    unmatched = needs.copy()
    ys, xs = np.mgrid[0:h, 0:w]
    for dx, dy in _ring_offsets(radius):
        if not unmatched.any():
            break
        dy_ok = (ys + dy >= 0) & (ys + dy < h)
        dx_ok = (xs + dx >= 0) & (xs + dx < w)
        inside = dy_ok & dx_ok
        donor_ok = np.zeros((h, w), dtype=bool)
        donor_ok[inside] = eligible[ys[inside] + dy, xs[inside] + dx]
        hit = unmatched & donor_ok
        flow[hit, 0] = dx
        flow[hit, 1] = dy
        unmatched &= ~hit
    return flow
