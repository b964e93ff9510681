"""View generation and visibility math.

Everything here treats plane index 0 as the farthest plane (smallest
disparity), so "nearer than plane i" always means a larger index. Rendering
composites back to front with the over operator; transmittance measures how
much of a voxel's color survives occlusion on its way to a viewpoint.
"""

from dataclasses import dataclass

import numpy as np

from mpilab import _kernels
from mpilab.errors import ValidationError
from mpilab.geometry import plane_homography, warp_image
from mpilab.mpi import Mpi


@dataclass(frozen=True)
class VisibleVolume:
    """Transmittance-weighted contribution volume after soft removal of
    hidden content. ``c_vis`` is pre-weighted color (not straight color),
    which is why this is a distinct type from :class:`Mpi`."""

    c_vis: np.ndarray
    alpha_vis: np.ndarray
    reference: object
    sampling: object

    def __post_init__(self):
        c = np.ascontiguousarray(self.c_vis, dtype=np.float64)
        a = np.ascontiguousarray(self.alpha_vis, dtype=np.float64)
        if c.ndim != 4 or c.shape[3] != 3 or a.shape != c.shape[:3]:
            raise ValidationError("c_vis must be (H, W, D, 3) with matching alpha_vis")
        if c.min() < 0 or c.max() > 1 or a.min() < 0 or a.max() > 1:
            raise ValidationError("visible volume entries must lie in [0, 1]")
        if a.sum(axis=2).max() > 1.0 + 1e-6:
            raise ValidationError("per-pixel transmittance sums must not exceed 1")
        c.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "c_vis", c)
        object.__setattr__(self, "alpha_vis", a)


@dataclass(frozen=True)
class FlowVolume:
    """Per-voxel 2D flow in pixels at plane resolution."""

    f_x: np.ndarray
    f_y: np.ndarray

    def __post_init__(self):
        fx = np.ascontiguousarray(self.f_x, dtype=np.float64)
        fy = np.ascontiguousarray(self.f_y, dtype=np.float64)
        if fx.ndim != 3 or fx.shape != fy.shape:
            raise ValidationError("flow components must share an (H, W, D) shape")
        if not (np.isfinite(fx).all() and np.isfinite(fy).all()):
            raise ValidationError("flows must be finite")
        bound = max(fx.shape[0], fx.shape[1])
        if np.sqrt(fx**2 + fy**2).max() > bound:
            raise ValidationError(f"flow magnitude exceeds the image extent {bound}")
        fx.setflags(write=False)
        fy.setflags(write=False)
        object.__setattr__(self, "f_x", fx)
        object.__setattr__(self, "f_y", fy)

    @staticmethod
    def zero(height, width, count):
        z = np.zeros((height, width, count))
        return FlowVolume(z, z.copy())


@dataclass(frozen=True)
class DisocclusionMask:
    """Binary mask of target-view pixels that were hidden from the
    reference view, with the threshold that produced it."""

    mask: np.ndarray
    epsilon: float

    def __post_init__(self):
        mask = np.ascontiguousarray(self.mask, dtype=bool)
        mask.setflags(write=False)
        object.__setattr__(self, "mask", mask)

    @property
    def pixel_count(self):
        return int(self.mask.sum())


def _warped_rgba_planes(mpi, target_camera):
    """Yield per plane (far to near) the premultiplied color and alpha
    warped onto the target sensor."""
    h, w = target_camera.height, target_camera.width
    for i, d in enumerate(mpi.disparities()):
        hom = plane_homography(mpi.reference, target_camera, d)
        rgba = np.concatenate(
            [mpi.color[:, :, i, :] * mpi.alpha[:, :, i, None], mpi.alpha[:, :, i, None]],
            axis=2,
        )
        warped = warp_image(rgba, hom, w, h)
        yield warped[:, :, :3], warped[:, :, 3]


def composite(mpi, target_camera):
    """Render the MPI into a target view by back-to-front over-compositing.

    Returns (image, accumulated_alpha): the rendered color and the total
    opacity encountered along each ray (1 where the frustum fully covers the
    pixel with opaque content, less toward frustum edges).
    """
    h, w = target_camera.height, target_camera.width
    out = np.zeros((h, w, 3))
    acc = np.zeros((h, w))
    for premult, alpha in _warped_rgba_planes(mpi, target_camera):
        out = premult + out * (1.0 - alpha[:, :, None])
        acc = alpha + acc * (1.0 - alpha)
    return out, acc


def transmittance_reference(mpi):
    """Per-voxel transmittance toward the reference view:
    ``t[d] = alpha[d] * prod_{d' nearer} (1 - alpha[d'])``."""
    return _transmittance(mpi.alpha)


def _transmittance(alpha):
    survival = np.cumprod((1.0 - alpha)[:, :, ::-1], axis=2)[:, :, ::-1]
    visibility = np.ones_like(alpha)
    visibility[:, :, :-1] = survival[:, :, 1:]
    return alpha * visibility


def transmittance_target(mpi, target_camera):
    """Transmittance of each plane toward a target view, computed from the
    alpha planes homography-warped onto the target sensor."""
    h, w = target_camera.height, target_camera.width
    warped = np.empty((h, w, mpi.num_planes))
    for i, d in enumerate(mpi.disparities()):
        hom = plane_homography(mpi.reference, target_camera, d)
        warped[:, :, i] = warp_image(mpi.alpha[:, :, i], hom, w, h)
    return _transmittance(warped)


def soft_remove_hidden(mpi):
    """Softly remove content hidden from the reference view: color is scaled
    by its reference-view transmittance and that transmittance becomes the
    new opacity. Summing the result over planes reproduces the reference
    composite exactly."""
    t = transmittance_reference(mpi)
    return VisibleVolume(
        c_vis=mpi.color * t[:, :, :, None],
        alpha_vis=t,
        reference=mpi.reference,
        sampling=mpi.sampling,
    )


def cumulative_visible_renders(vis):
    """Running renders of visible content at or behind each plane: the
    prefix sum of ``c_vis`` over ascending disparity. The last slice equals
    the reference-view composite of the originating MPI."""
    return np.cumsum(vis.c_vis, axis=2)


def flow_gather(r_vis, flows):
    """Sample each plane of ``r_vis`` at flow-displaced coordinates with
    bilinear interpolation; coordinates clamp at the image border so
    gathered colors always come from real content."""
    r_vis = np.asarray(r_vis, dtype=np.float64)
    if r_vis.shape[:3] != flows.f_x.shape:
        raise ValidationError("flow and volume shapes do not match")
    h, w = r_vis.shape[:2]
    grid_x, grid_y = np.meshgrid(
        np.arange(w, dtype=np.float64), np.arange(h, dtype=np.float64)
    )
    out = np.empty_like(r_vis)
    for i in range(r_vis.shape[2]):
        out[:, :, i, :] = _kernels.gather_bilinear(
            r_vis[:, :, i, :],
            grid_x + flows.f_x[:, :, i],
            grid_y + flows.f_y[:, :, i],
        )
    return out


def disocclusion_mask(mpi_init, target_camera, epsilon=0.075):
    """Target-view pixels whose content was hidden from the reference view.

    A pixel is disoccluded when, at any plane, its transmittance toward the
    target view exceeds the reference-view transmittance (warped into the
    target frame with the same plane homographies) by at least ``epsilon``.
    """
    if not 0.0 < epsilon <= 1.0:
        raise ValidationError("epsilon must lie in (0, 1]")
    t_target = transmittance_target(mpi_init, target_camera)
    t_ref = transmittance_reference(mpi_init)
    h, w = target_camera.height, target_camera.width
    t_ref_warped = np.empty((h, w, mpi_init.num_planes))
    for i, d in enumerate(mpi_init.disparities()):
        hom = plane_homography(mpi_init.reference, target_camera, d)
        t_ref_warped[:, :, i] = warp_image(t_ref[:, :, i], hom, w, h)
    gain = (t_target - t_ref_warped).max(axis=2)
    return DisocclusionMask(mask=gain >= epsilon, epsilon=float(epsilon))
