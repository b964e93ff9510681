"""Cameras, disparity sampling, plane-induced homographies, and image warps.

Conventions used throughout the package:

* Pixel coordinates: x right, y down, origin at the center of the top-left
  pixel. All warps are backward (output pixel -> source location) with
  bilinear sampling; samples outside the source frustum are transparent
  zeros.
* Intrinsics are normalized: fx, cx are fractions of image width, fy, cy of
  image height, so they are resolution-independent.
* Poses are world-to-camera: ``x_cam = R @ x_world + t``.
* Disparity is inverse depth (1 / z in scene units). Plane ``d = 0`` is the
  plane at infinity.
* The normalized-view model measures lateral offsets ``u`` in pixels of a
  focal-length-one camera (scene offset times pixel focal length) and axial
  offsets ``s`` in scene units; a plane at disparity d then shifts by
  ``u * d`` pixels and scales by ``1 - s * d``.
"""

from dataclasses import dataclass

import numpy as np

from mpilab import _kernels
from mpilab.errors import (
    DegenerateHomographyError,
    RotationMismatchError,
    ValidationError,
)

HOMOGRAPHY_CONDITION_LIMIT = 1e12
ROTATION_TOLERANCE = 1e-4


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole intrinsics with focal lengths and principal point normalized
    by image width (fx, cx) and height (fy, cy)."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ValidationError("focal lengths must be positive")
        if not (0 < self.cx < 1 and 0 < self.cy < 1):
            raise ValidationError("principal point must lie strictly inside (0, 1)")
        if self.width < 2 or self.height < 2:
            raise ValidationError("image dimensions must be at least 2 pixels")

    def matrix(self):
        """3x3 pixel-unit calibration matrix."""
        return np.array(
            [
                [self.fx * self.width, 0.0, self.cx * self.width - 0.5],
                [0.0, self.fy * self.height, self.cy * self.height - 0.5],
                [0.0, 0.0, 1.0],
            ]
        )

    def focal_pixels(self):
        """(fx, fy) in pixel units."""
        return self.fx * self.width, self.fy * self.height

    def with_size(self, width, height):
        return CameraIntrinsics(self.fx, self.fy, self.cx, self.cy, width, height)


@dataclass(frozen=True)
class CameraPose:
    """World-to-camera rigid transform."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        rot = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        tr = np.asarray(self.translation, dtype=np.float64).reshape(3)
        err = np.abs(rot.T @ rot - np.eye(3)).max()
        if err >= 1e-6:
            raise ValidationError(f"rotation is not orthonormal (|R'R - I| = {err:.2e})")
        if np.linalg.det(rot) < 0:
            raise ValidationError("rotation must have determinant +1")
        rot.setflags(write=False)
        tr.setflags(write=False)
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "translation", tr)

    @staticmethod
    def identity():
        return CameraPose(np.eye(3), np.zeros(3))

    def center(self):
        """Camera center in world coordinates."""
        return -self.rotation.T @ self.translation

    def matrix34(self):
        return np.hstack([self.rotation, self.translation[:, None]])


@dataclass(frozen=True)
class Camera:
    """Intrinsics plus pose; the unit every warp operation works with."""

    intrinsics: CameraIntrinsics
    pose: CameraPose

    @property
    def width(self):
        return self.intrinsics.width

    @property
    def height(self):
        return self.intrinsics.height


@dataclass(frozen=True)
class DisparitySampling:
    """Uniform disparity grid: ``count`` planes from d_min (farthest) to
    d_max (nearest). Uniform spacing in disparity keeps the renderable-range
    analysis exact."""

    d_min: float
    d_max: float
    count: int

    def __post_init__(self):
        if not 0 <= self.d_min < self.d_max:
            raise ValidationError("need 0 <= d_min < d_max")
        if self.count < 2:
            raise ValidationError("need at least 2 planes")

    @property
    def step(self):
        return (self.d_max - self.d_min) / (self.count - 1)


@dataclass(frozen=True)
class RelativeView:
    """Translation-only viewpoint offset in the normalized focal-length-one
    model: ``u`` lateral (pixels), ``s`` axial (positive toward the scene)."""

    u: np.ndarray
    s: float

    def __post_init__(self):
        u = np.asarray(self.u, dtype=np.float64).reshape(2)
        u.setflags(write=False)
        object.__setattr__(self, "u", u)
        if not np.isfinite(u).all() or not np.isfinite(self.s):
            raise ValidationError("relative view must be finite")


def sample_disparities(sampling):
    """Ascending disparity values of the grid, farthest plane first."""
    return np.linspace(sampling.d_min, sampling.d_max, sampling.count)


def plane_homography(src, tgt, disparity):
    """Homography mapping target-view pixels to source-view pixels for the
    fronto-parallel plane at the given disparity in the source frame.

    ``disparity = 0`` places the plane at infinity. Raises
    :class:`DegenerateHomographyError` when the target camera lies on or
    behind the plane, or the mapping is numerically degenerate.
    """
    if disparity < 0:
        raise ValidationError("disparity must be non-negative")
    r_src = src.pose.rotation
    r_tgt = tgt.pose.rotation
    r_rel = r_tgt @ r_src.T
    t_rel = tgt.pose.translation - r_rel @ src.pose.translation
    normal = np.array([0.0, 0.0, 1.0])
    k_src = src.intrinsics.matrix()
    k_tgt = tgt.intrinsics.matrix()
    forward = k_tgt @ (r_rel + np.outer(t_rel, normal) * disparity) @ np.linalg.inv(k_src)
    det = np.linalg.det(forward)
    if det <= 1e-12:
        raise DegenerateHomographyError(
            f"target camera on or behind the plane at disparity {disparity!r}"
        )
    if np.linalg.cond(forward) > HOMOGRAPHY_CONDITION_LIMIT:
        raise DegenerateHomographyError(
            f"homography at disparity {disparity!r} is numerically degenerate"
        )
    hom = np.linalg.inv(forward)
    if abs(hom[2, 2]) > 1e-12:
        hom = hom / hom[2, 2]
    return hom


def warp_image(image, homography, out_width, out_height, periodic=False):
    """Backward bilinear warp; out-of-frustum samples are zero in all
    channels, so alpha vanishes outside the source footprint."""
    image = np.asarray(image, dtype=np.float64)
    homography = np.asarray(homography, dtype=np.float64)
    if not np.isfinite(homography).all():
        raise ValidationError("homography must be finite")
    squeeze = image.ndim == 2
    if squeeze:
        image = image[:, :, None]
    if image.shape[2] not in (1, 3, 4):
        raise ValidationError(f"unsupported channel count {image.shape[2]}")
    out = _kernels.warp_bilinear(image, homography, out_height, out_width, periodic)
    return out[:, :, 0] if squeeze else out


def camera_at_offset(reference, u, s):
    """Camera translated from ``reference`` by a normalized-model offset:
    ``u`` lateral in pixels of the focal-length-one model, ``s`` axial in
    scene units (positive toward the scene). Inverse of
    :func:`relative_view`."""
    u = np.asarray(u, dtype=np.float64).reshape(2)
    fx_px, fy_px = reference.intrinsics.focal_pixels()
    delta_cam = np.array([u[0] / fx_px, u[1] / fy_px, float(s)])
    rot = reference.pose.rotation
    center = reference.pose.center() + rot.T @ delta_cam
    pose = CameraPose(rot, -rot @ center)
    return Camera(reference.intrinsics, pose)


def relative_view(ref_pose, tgt_pose, intrinsics):
    """Express a target pose as a translation-only offset from a reference
    pose in the normalized model. Lateral offsets are scaled to pixels by
    the per-axis pixel focal lengths; the axial offset stays in scene units.

    Raises :class:`RotationMismatchError` when the two rotations differ
    beyond tolerance, since the analysis model assumes no rotation.
    """
    rot_err = np.abs(ref_pose.rotation - tgt_pose.rotation).max()
    if rot_err > ROTATION_TOLERANCE:
        raise RotationMismatchError(
            f"poses differ by rotation (|dR| = {rot_err:.2e}); "
            "translation-only analysis does not apply"
        )
    delta = ref_pose.rotation @ (tgt_pose.center() - ref_pose.center())
    fx_px, fy_px = intrinsics.focal_pixels()
    return RelativeView(u=np.array([delta[0] * fx_px, delta[1] * fy_px]), s=float(delta[2]))
