"""Evaluation metrics over rendered views, with disocclusion awareness.

Three scores: structural similarity over the region that views every plane
of the scene volume (overall quality), structural similarity restricted to
pixels revealed by the viewpoint change (disocclusion accuracy), and a
naturalness score comparing gradient-magnitude statistics of revealed
content against the real image (plausibility even when content differs).
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import gaussian_filter

from mpilab.errors import EmptyRegionError, ValidationError
from mpilab.geometry import plane_homography, warp_image
from mpilab.render import disocclusion_mask

SSIM_SIGMA = 1.5
SSIM_TRUNCATE = 3.5
SSIM_C1 = 0.01**2
SSIM_C2 = 0.03**2
GRADIENT_RANGE = math.sqrt(2.0)
WASSERSTEIN_FLOOR = 1e-6
LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


@dataclass(frozen=True)
class MetricReport:
    """All three scores with the pixel counts of the masks they used.
    Disocclusion scores are None (undefined, not zero) when the viewpoint
    reveals nothing."""

    ssim_fov: float
    ssim_occ: float | None
    nat_occ: float | None
    fov_pixel_count: int
    occ_pixel_count: int
    params: dict = field(default_factory=dict)


def _as_channels(image):
    image = np.asarray(image, dtype=np.float64)
    if image.ndim == 2:
        return image[:, :, None]
    if image.ndim == 3 and image.shape[2] in (1, 3):
        return image
    raise ValidationError(f"expected grayscale or RGB image, got shape {image.shape}")


def _luminance(image):
    image = _as_channels(image)
    if image.shape[2] == 1:
        return image[:, :, 0]
    return image @ LUMA_WEIGHTS


def ssim_map(a, b):
    """Per-pixel structural similarity on [0, 1] images.

    Standard Gaussian-weighted form: 11x11 window, sigma 1.5, stabilizers
    (0.01)^2 and (0.03)^2. RGB inputs yield the mean over per-channel maps.
    """
    a = _as_channels(a)
    b = _as_channels(b)
    if a.shape != b.shape:
        raise ValidationError(f"image shapes differ: {a.shape} vs {b.shape}")
    maps = [
        _ssim_channel(a[:, :, c], b[:, :, c]) for c in range(a.shape[2])
    ]
    return np.mean(maps, axis=0)


def _smooth(x):
    return gaussian_filter(x, sigma=SSIM_SIGMA, truncate=SSIM_TRUNCATE, mode="reflect")


def _ssim_channel(x, y):
    mu_x = _smooth(x)
    mu_y = _smooth(y)
    var_x = _smooth(x * x) - mu_x * mu_x
    var_y = _smooth(y * y) - mu_y * mu_y
    cov = _smooth(x * y) - mu_x * mu_y
    num = (2 * mu_x * mu_y + SSIM_C1) * (2 * cov + SSIM_C2)
    den = (mu_x**2 + mu_y**2 + SSIM_C1) * (var_x + var_y + SSIM_C2)
    return num / den


def fov_mask(mpi, target_camera):
    """Target pixels whose ray crosses every plane rectangle of the volume:
    the warped all-ones footprint must stay at least 0.999 on all planes."""
    h, w = target_camera.height, target_camera.width
    ones = np.ones((mpi.reference.height, mpi.reference.width))
    mask = np.ones((h, w), dtype=bool)
    for d in mpi.disparities():
        hom = plane_homography(mpi.reference, target_camera, d)
        footprint = warp_image(ones, hom, w, h)
        mask &= footprint >= 0.999
    return mask


def ssim_fov(pred, gt, mpi, target_camera):
    """Mean structural similarity over the full-coverage region."""
    mask = fov_mask(mpi, target_camera)
    if not mask.any():
        raise EmptyRegionError("ssim_fov: field-of-view mask is empty")
    return float(ssim_map(pred, gt)[mask].mean())


def ssim_occ(pred, gt, mpi_init, target_camera, epsilon=0.075):
    """Mean structural similarity over disoccluded pixels (intersected with
    the full-coverage region). Returns (value, pixel_count); the value is
    None with count 0 when nothing is disoccluded."""
    occ = disocclusion_mask(mpi_init, target_camera, epsilon).mask
    mask = occ & fov_mask(mpi_init, target_camera)
    count = int(mask.sum())
    if count == 0:
        return None, 0
    return float(ssim_map(pred, gt)[mask].mean()), count


def gradient_magnitude(image):
    """Central-difference gradient magnitude of the luminance."""
    lum = _luminance(image)
    gy, gx = np.gradient(lum)
    return np.sqrt(gx * gx + gy * gy)


def _gradient_histogram(magnitudes, bins):
    hist, _ = np.histogram(magnitudes, bins=bins, range=(0.0, GRADIENT_RANGE))
    hist = hist.astype(np.float64)
    total = hist.sum()
    return hist / total if total > 0 else hist


def nat_occ(pred, gt, mask, bins=64, gt_scope="mask"):
    """Naturalness of masked content: negative log of the 1D Wasserstein
    distance between gradient-magnitude histograms of the prediction's
    masked pixels and the real image's pixels (masked by default, or the
    whole image with ``gt_scope="image"``). The distance is floored at 1e-6
    so identical statistics stay finite."""
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise EmptyRegionError("nat_occ: mask is empty")
    if bins < 2:
        raise ValidationError("need at least 2 histogram bins")
    if gt_scope not in ("mask", "image"):
        raise ValidationError(f"unknown gt_scope {gt_scope!r}")
    pred_hist = _gradient_histogram(gradient_magnitude(pred)[mask], bins)
    gt_grad = gradient_magnitude(gt)
    gt_vals = gt_grad[mask] if gt_scope == "mask" else gt_grad.ravel()
    gt_hist = _gradient_histogram(gt_vals, bins)
    distance = wasserstein_1d(pred_hist, gt_hist, GRADIENT_RANGE / bins)
    return float(-np.log(max(distance, WASSERSTEIN_FLOOR)))


def wasserstein_1d(hist_a, hist_b, bin_width):
    """Earth-mover distance between two normalized histograms on a shared
    uniform grid: sum of absolute CDF differences times the bin width."""
    return float(np.abs(np.cumsum(hist_a - hist_b)).sum() * bin_width)


def evaluate(pred, gt, mpi_init, target_camera, epsilon=0.075, bins=64, gt_scope="mask"):
    """All three metrics with shared masks, as one report."""
    fov = fov_mask(mpi_init, target_camera)
    fov_count = int(fov.sum())
    if fov_count == 0:
        raise EmptyRegionError("ssim_fov: field-of-view mask is empty")
    similarity = ssim_map(pred, gt)
    fov_score = float(similarity[fov].mean())

    occ = disocclusion_mask(mpi_init, target_camera, epsilon).mask & fov
    occ_count = int(occ.sum())
    if occ_count:
        occ_score = float(similarity[occ].mean())
        nat_score = nat_occ(pred, gt, occ, bins=bins, gt_scope=gt_scope)
    else:
        occ_score = None
        nat_score = None

    return MetricReport(
        ssim_fov=fov_score,
        ssim_occ=occ_score,
        nat_occ=nat_score,
        fov_pixel_count=fov_count,
        occ_pixel_count=occ_count,
        params={"epsilon": epsilon, "bins": bins, "gt_scope": gt_scope},
    )
