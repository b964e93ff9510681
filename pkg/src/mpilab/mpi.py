"""MPI and plane-sweep-volume data model, construction, and resampling.

An MPI is a stack of fronto-parallel RGBA planes in a reference camera
frustum, indexed by ascending disparity: plane 0 is the farthest (smallest
disparity), the last plane is the nearest. Color is stored straight
(non-premultiplied); compositing premultiplies internally.
"""

from dataclasses import dataclass

import numpy as np

from mpilab import _kernels
from mpilab.errors import DegenerateHomographyError, ValidationError
from mpilab.geometry import (
    Camera,
    DisparitySampling,
    plane_homography,
    sample_disparities,
    warp_image,
)


@dataclass(frozen=True)
class Image:
    """A float image in [0, 1] with an optional color-space tag."""

    data: np.ndarray
    color_space: str = "linear"

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim == 2:
            data = data[:, :, None]
        if data.ndim != 3 or data.shape[2] not in (1, 3, 4):
            raise ValidationError(f"bad image shape {data.shape}")
        if not np.isfinite(data).all():
            raise ValidationError("image contains non-finite values")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def width(self):
        return self.data.shape[1]

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def channels(self):
        return self.data.shape[2]


def _image_array(image):
    data = image.data if isinstance(image, Image) else np.asarray(image, dtype=np.float64)
    if data.ndim == 2:
        data = data[:, :, None]
    return data


def _check_unit_range(name, arr):
    if not np.isfinite(arr).all():
        raise ValidationError(f"{name} contains non-finite values")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValidationError(f"{name} must lie in [0, 1]")


@dataclass(frozen=True)
class Mpi:
    """Reference camera plus D fronto-parallel RGBA planes.

    color: (H, W, D, 3) straight color in [0, 1];
    alpha: (H, W, D) opacity in [0, 1]. Immutable after construction.
    """

    reference: Camera
    sampling: DisparitySampling
    color: np.ndarray
    alpha: np.ndarray

    def __post_init__(self):
        color = np.ascontiguousarray(self.color, dtype=np.float64)
        alpha = np.ascontiguousarray(self.alpha, dtype=np.float64)
        h, w = self.reference.height, self.reference.width
        if color.shape != (h, w, self.sampling.count, 3):
            raise ValidationError(
                f"color shape {color.shape} does not match camera/sampling "
                f"({h}, {w}, {self.sampling.count}, 3)"
            )
        if alpha.shape != (h, w, self.sampling.count):
            raise ValidationError(f"alpha shape {alpha.shape} mismatched")
        _check_unit_range("color", color)
        _check_unit_range("alpha", alpha)
        color.setflags(write=False)
        alpha.setflags(write=False)
        object.__setattr__(self, "color", color)
        object.__setattr__(self, "alpha", alpha)

    @property
    def num_planes(self):
        return self.sampling.count

    def disparities(self):
        return sample_disparities(self.sampling)


@dataclass(frozen=True)
class PlaneSweepVolume:
    """Input images reprojected to every disparity plane of the reference
    frustum. Channel layout is source-major: [src0 RGB | src1 RGB | ...]."""

    reference: Camera
    sampling: DisparitySampling
    data: np.ndarray
    sources: tuple

    def __post_init__(self):
        data = np.ascontiguousarray(self.data, dtype=np.float64)
        n = len(self.sources)
        if n < 1:
            raise ValidationError("need at least one source camera")
        h, w = self.reference.height, self.reference.width
        if data.shape != (h, w, self.sampling.count, 3 * n):
            raise ValidationError(f"PSV shape {data.shape} mismatched")
        _check_unit_range("psv", data)
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "sources", tuple(self.sources))

    @property
    def num_sources(self):
        return len(self.sources)

    def source_slice(self, j):
        """(H, W, D, 3) view of source j's reprojections."""
        return self.data[:, :, :, 3 * j : 3 * (j + 1)]


def _resize_bilinear(data, new_width, new_height):
    """Pixel-center-aligned bilinear resize of an (H, W, C) array with
    border replication (exact identity when sizes match)."""
    h, w = data.shape[:2]
    if (w, h) == (new_width, new_height):
        return data
    xs = (np.arange(new_width, dtype=np.float64) + 0.5) * (w / new_width) - 0.5
    ys = (np.arange(new_height, dtype=np.float64) + 0.5) * (h / new_height) - 0.5
    grid_x = np.broadcast_to(xs[None, :], (new_height, new_width))
    grid_y = np.broadcast_to(ys[:, None], (new_height, new_width))
    return _kernels.gather_bilinear(data, grid_x, grid_y)


def build_psv(sources, reference, sampling):
    """Reproject each source image onto every disparity plane of the
    reference frustum.

    ``sources`` is a sequence of (image, camera) pairs. Images that do not
    match the reference resolution are resized first (the source intrinsics
    are normalized, so only their pixel counts change). Planes that are
    degenerate for a source (camera on or past the plane) become transparent
    zeros rather than failing the whole volume.
    """
    sources = list(sources)
    if not sources:
        raise ValidationError("need at least one source")
    h, w = reference.height, reference.width
    disparities = sample_disparities(sampling)
    n = len(sources)
    data = np.zeros((h, w, sampling.count, 3 * n))
    cameras = []
    for j, (image, camera) in enumerate(sources):
        pixels = _image_array(image)
        if pixels.shape[2] != 3:
            raise ValidationError(f"source {j} must be RGB, got {pixels.shape[2]} channels")
        if pixels.shape[:2] != (h, w):
            pixels = _resize_bilinear(pixels, w, h)
            camera = Camera(camera.intrinsics.with_size(w, h), camera.pose)
        cameras.append(camera)
        for i, d in enumerate(disparities):
            try:
                hom = plane_homography(camera, reference, d)
            except DegenerateHomographyError:
                continue
            data[:, :, i, 3 * j : 3 * (j + 1)] = warp_image(pixels, hom, w, h)
    return PlaneSweepVolume(reference, sampling, data, tuple(cameras))


def resample_mpi(mpi, new_width, new_height, new_count):
    """Resample an MPI to a new spatial resolution and plane count.

    Disparity resampling assigns each old plane to the nearest new plane and
    merges each bin with alpha-weighted color and ``1 - prod(1 - alpha)``
    opacity; spatial resampling is bilinear per plane. Upsampling the plane
    count leaves the reference-view render unchanged.
    """
    if new_width < 2 or new_height < 2 or new_count < 2:
        raise ValidationError("resample targets must be at least 2 in every dimension")
    if (new_width, new_height, new_count) == (
        mpi.reference.width,
        mpi.reference.height,
        mpi.num_planes,
    ):
        return mpi

    color, alpha = mpi.color, mpi.alpha
    sampling = mpi.sampling
    if new_count != mpi.num_planes:
        new_sampling = DisparitySampling(sampling.d_min, sampling.d_max, new_count)
        bins = np.rint(
            (mpi.disparities() - sampling.d_min) / new_sampling.step
        ).astype(int)
        bins = np.clip(bins, 0, new_count - 1)
        h, w = color.shape[:2]
        weighted = np.zeros((h, w, new_count, 3))
        weight = np.zeros((h, w, new_count))
        transparency = np.ones((h, w, new_count))
        for i, j in enumerate(bins):
            weighted[:, :, j] += alpha[:, :, i, None] * color[:, :, i]
            weight[:, :, j] += alpha[:, :, i]
            transparency[:, :, j] *= 1.0 - alpha[:, :, i]
        with np.errstate(invalid="ignore"):
            color = np.where(weight[..., None] > 0, weighted / weight[..., None], 0.0)
        alpha = 1.0 - transparency
        sampling = new_sampling

    if (new_width, new_height) != (mpi.reference.width, mpi.reference.height):
        count = sampling.count
        flat = np.concatenate(
            [color.reshape(color.shape[0], color.shape[1], count * 3), alpha], axis=2
        )
        flat = _resize_bilinear(flat, new_width, new_height)
        color = flat[:, :, : count * 3].reshape(new_height, new_width, count, 3)
        alpha = flat[:, :, count * 3 :]

    reference = Camera(
        mpi.reference.intrinsics.with_size(new_width, new_height), mpi.reference.pose
    )
    return Mpi(reference, sampling, np.clip(color, 0.0, 1.0), np.clip(alpha, 0.0, 1.0))
