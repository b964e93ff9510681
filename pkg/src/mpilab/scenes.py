"""Synthetic ground-truth scenes for tests, demos, and the CLI.

Every scene is authored directly as an MPI whose planes carry full ground
truth (including content hidden from the reference view), so renders of the
authored MPI serve as exact target images, and analytic disocclusion
geometry is available in closed form.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from mpilab.errors import ValidationError
from mpilab.geometry import (
    Camera,
    CameraIntrinsics,
    CameraPose,
    DisparitySampling,
    sample_disparities,
)
from mpilab.mpi import Mpi
from mpilab.render import composite

SCENE_KINDS = ("single-plane", "two-layer", "multi-layer", "worst-case-noise")


@dataclass(frozen=True)
class SceneSpec:
    """Recipe for a synthetic scene; every field is deterministic."""

    kind: str
    width: int = 96
    height: int = 96
    num_planes: int = 8
    d_min: float = 0.0
    d_max: float = 1.0
    layer_disparities: tuple = ()
    occluder: tuple | None = None
    texture_seed: int = 0
    baseline: float = 0.08
    band_fraction: float = 0.5

    def __post_init__(self):
        if self.kind not in SCENE_KINDS:
            raise ValidationError(f"unknown scene kind {self.kind!r}")
        for d in self.layer_disparities:
            if not self.d_min <= d <= self.d_max:
                raise ValidationError(f"layer disparity {d} outside sampling range")
        if self.occluder is not None:
            x0, y0, x1, y1 = self.occluder
            if not (0 <= x0 < x1 <= self.width and 0 <= y0 < y1 <= self.height):
                raise ValidationError(f"occluder {self.occluder} outside image bounds")


@dataclass(frozen=True)
class SyntheticScene:
    """A built scene: ground-truth MPI, rendered source pair, and analytic
    geometry for oracle checks."""

    spec: SceneSpec
    mpi: Mpi
    source_images: tuple
    source_cameras: tuple
    geometry: dict = field(default_factory=dict)

    @property
    def reference(self):
        return self.mpi.reference


def _smooth_texture(rng, height, width, band_fraction):
    """Seeded noise channel low-passed to a fraction of Nyquist, rescaled
    into [0.1, 0.9]."""
    noise = rng.random((height, width))
    if band_fraction < 1.0:
        fy = np.abs(np.fft.fftfreq(height))[:, None] / 0.5
        fx = np.abs(np.fft.fftfreq(width))[None, :] / 0.5
        mask = np.maximum(fy, fx) <= band_fraction
        noise = np.fft.ifft2(np.fft.fft2(noise) * mask).real
    lo, hi = noise.min(), noise.max()
    if hi - lo < 1e-12:
        return np.full((height, width), 0.5)
    return 0.1 + 0.8 * (noise - lo) / (hi - lo)


def _rgb_texture(rng, height, width, band_fraction):
    return np.stack(
        [_smooth_texture(rng, height, width, band_fraction) for _ in range(3)], axis=2
    )


def _snap_to_grid(values, grid):
    return tuple(float(grid[np.argmin(np.abs(grid - v))]) for v in values)


def _default_occluder(spec):
    w, h = spec.width, spec.height
    return (w // 3, h // 4, 2 * w // 3, 3 * h // 4)


def build_scene(spec):
    """Materialize a scene spec into an MPI, a stereo source pair, and its
    analytic geometry."""
    rng = np.random.default_rng(spec.texture_seed)
    sampling = DisparitySampling(spec.d_min, spec.d_max, spec.num_planes)
    grid = sample_disparities(sampling)
    h, w, count = spec.height, spec.width, spec.num_planes
    color = np.zeros((h, w, count, 3))
    alpha = np.zeros((h, w, count))
    geometry = {"kind": spec.kind}

    if spec.kind == "single-plane":
        (d_plane,) = _snap_to_grid(
            spec.layer_disparities or (grid[count // 2],), grid
        )
        index = int(np.argmin(np.abs(grid - d_plane)))
        color[:, :, index, :] = rng.random((h, w, 3))
        alpha[:, :, index] = 1.0
        geometry.update({"layer_disparities": [d_plane], "plane_index": index})

    elif spec.kind in ("two-layer", "multi-layer"):
        if spec.layer_disparities:
            layers = _snap_to_grid(spec.layer_disparities, grid)
        elif spec.kind == "two-layer":
            layers = _snap_to_grid((grid[count // 4], grid[(3 * count) // 4]), grid)
        else:
            layers = _snap_to_grid(
                (grid[count // 5], grid[count // 2], grid[(4 * count) // 5]), grid
            )
        occluder = spec.occluder or _default_occluder(spec)
        x0, y0, x1, y1 = occluder
        rects = []
        for level, d_layer in enumerate(sorted(layers)):
            index = int(np.argmin(np.abs(grid - d_layer)))
            # Smooth enough that a revealed strip is predictable from the
            # texture beside it, which is what the donor heuristic exploits.
            texture = _rgb_texture(rng, h, w, 0.06)
            if level == 0:
                color[:, :, index, :] = texture
                alpha[:, :, index] = 1.0
                rects.append(None)
            else:
                shrink = (level - 1) * min(w, h) // 10
                rx0, ry0 = x0 + shrink, y0 + shrink
                rx1, ry1 = max(rx0 + 2, x1 - shrink), max(ry0 + 2, y1 - shrink)
                color[ry0:ry1, rx0:rx1, index, :] = texture[ry0:ry1, rx0:rx1]
                alpha[ry0:ry1, rx0:rx1, index] = 1.0
                rects.append((rx0, ry0, rx1, ry1))
        geometry.update(
            {
                "layer_disparities": list(sorted(layers)),
                "occluder": list(rects[1]) if len(rects) > 1 else None,
                "disparity_gap": sorted(layers)[-1] - sorted(layers)[0],
            }
        )

    else:  # worst-case-noise
        content = max(1, math.ceil(0.1 * count))
        for index in range(count - content, count):
            color[:, :, index, :] = _rgb_texture(rng, h, w, spec.band_fraction)
            alpha[:, :, index] = 1.0
        geometry.update({"content_planes": content})

    intrinsics = CameraIntrinsics(0.5, 0.5, 0.5, 0.5, w, h)
    reference = Camera(intrinsics, CameraPose.identity())
    shifted = CameraPose(np.eye(3), -np.array([spec.baseline, 0.0, 0.0]))
    second = Camera(intrinsics, shifted)
    mpi = Mpi(reference, sampling, color, alpha)
    images = tuple(composite(mpi, cam)[0] for cam in (reference, second))
    fx_px, fy_px = intrinsics.focal_pixels()
    geometry.update(
        {
            "baseline": spec.baseline,
            "focal_pixels": [fx_px, fy_px],
            "source_lateral_pixels": [0.0, spec.baseline * fx_px],
        }
    )
    return SyntheticScene(
        spec=spec,
        mpi=mpi,
        source_images=images,
        source_cameras=(reference, second),
        geometry=geometry,
    )


def analytic_disocclusion_band(geometry, u_lateral):
    """Closed-form disoccluded strip for a two-layer scene viewed from a
    lateral offset of ``u_lateral`` normalized pixels (positive right).

    Returns (x_lo, x_hi, y0, y1) in target pixel coordinates; the strip has
    width ``|u| * disparity_gap`` and hugs the occluder edge trailing the
    camera motion.
    """
    if geometry.get("occluder") is None:
        raise ValidationError("scene has no occluder to disocclude")
    x0, y0, x1, y1 = geometry["occluder"]
    d_far, d_near = (
        geometry["layer_disparities"][0],
        geometry["layer_disparities"][-1],
    )
    if u_lateral >= 0:
        lo = x1 - u_lateral * d_near
        hi = x1 - u_lateral * d_far
    else:
        lo = x0 - u_lateral * d_far
        hi = x0 - u_lateral * d_near
    return lo, hi, y0, y1
