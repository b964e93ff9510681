"""Renderable-range analysis for translation-only, occlusion-free viewing.

The model: a grayscale premultiplied contribution volume c(x, y, d) is viewed
from a lateral offset ``u`` (pixels) and axial offset ``s``. The rendered
view sums, over planes, the plane image resampled at
``x' = (1 - s d) x + u d`` (or with the worst-case constant ``d_max`` in
place of ``d`` in the scale factor, the linearized mode). In the frequency
domain the linearized render is a 2D slice of the volume's 3D spectrum, so
closed-form bounds on full-bandwidth rendering follow from the volume's
spatial and disparity sampling intervals.

The empirical validator quantizes one continuous layered scene onto a coarse
and a much finer disparity grid and scans lateral offsets until renders from
the two disagree: the onset tracks the closed-form bound.
"""

from dataclasses import dataclass

import numpy as np
from scipy.signal import czt

from mpilab.errors import ValidationError


@dataclass(frozen=True)
class AnalysisMpi:
    """Grayscale analysis volume: (H, W, D) premultiplied contributions on a
    uniform ascending disparity grid with spatial sampling ``delta_x``."""

    planes: np.ndarray
    disparities: np.ndarray
    delta_x: float = 1.0

    def __post_init__(self):
        planes = np.ascontiguousarray(self.planes, dtype=np.float64)
        disp = np.ascontiguousarray(self.disparities, dtype=np.float64)
        if planes.ndim != 3 or planes.shape[2] != disp.size or disp.size < 2:
            raise ValidationError("need an (H, W, D) volume with D >= 2 disparities")
        if not np.isfinite(planes).all():
            raise ValidationError("volume must be finite")
        steps = np.diff(disp)
        if steps.min() <= 0 or not np.allclose(steps, steps[0], rtol=1e-9):
            raise ValidationError("disparities must be uniformly ascending")
        if self.delta_x <= 0:
            raise ValidationError("delta_x must be positive")
        planes.setflags(write=False)
        disp.setflags(write=False)
        object.__setattr__(self, "planes", planes)
        object.__setattr__(self, "disparities", disp)

    @property
    def delta_d(self):
        return float(self.disparities[1] - self.disparities[0])

    @property
    def d_max(self):
        return float(self.disparities[-1])

    @property
    def d_min(self):
        return float(self.disparities[0])


@dataclass(frozen=True)
class RenderableRange:
    """Closed-form full-bandwidth viewpoint region: for axial offsets s <= 0
    the lateral extent is ``delta_x * (1 - s * d_max) / delta_d``."""

    delta_x: float
    delta_d: float
    d_max: float

    def __post_init__(self):
        if min(self.delta_x, self.delta_d, self.d_max) <= 0:
            raise ValidationError("all range parameters must be positive")

    def u_max(self, s):
        if s > 0:
            raise ValidationError(
                f"s = {s!r} is outside the guaranteed domain (s <= 0)"
            )
        return self.delta_x * (1.0 - s * self.d_max) / self.delta_d

    def contains(self, u, s):
        u = np.atleast_1d(np.asarray(u, dtype=np.float64))
        return s <= 0 and float(np.linalg.norm(u)) <= self.u_max(s)


@dataclass(frozen=True)
class BandwidthReport:
    """Measured fidelity/bandwidth curve over a lateral scan plus the
    detected degradation onset (None when never crossed in the scan)."""

    u_values: np.ndarray
    psnr_values: np.ndarray
    bandwidth_values: np.ndarray
    u_star: float | None
    fidelity_threshold: float
    scan_step: float

    def __post_init__(self):
        u = np.asarray(self.u_values, dtype=np.float64)
        if np.any(np.diff(u) <= 0):
            raise ValidationError("scan offsets must ascend")

    def rows(self):
        return [
            (float(u), float(p), float(b))
            for u, p, b in zip(self.u_values, self.psnr_values, self.bandwidth_values)
        ]


@dataclass(frozen=True)
class LayeredScene:
    """A continuous-depth scene: textured layers at arbitrary disparities.
    Quantizing it onto grids of different plane counts yields analysis
    volumes of the same underlying content."""

    textures: np.ndarray
    layer_disparities: np.ndarray
    d_min: float
    d_max: float

    @property
    def height(self):
        return self.textures.shape[1]

    @property
    def width(self):
        return self.textures.shape[2]


def renderable_range(delta_x, delta_d, d_max):
    return RenderableRange(delta_x=delta_x, delta_d=delta_d, d_max=d_max)


def psnr(a, b, data_range):
    """Peak signal-to-noise ratio in dB over an explicit data range."""
    mse = float(np.mean((np.asarray(a) - np.asarray(b)) ** 2))
    return 10.0 * np.log10(data_range**2 / max(mse, 1e-30))


def _bandlimited_noise(rng, height, width, band_fraction):
    """Uniform white noise low-passed to ``band_fraction`` of Nyquist with a
    hard separable frequency mask (periodic, so spectrally exact)."""
    noise = rng.random((height, width))
    if band_fraction >= 1.0:
        return noise
    fy = np.abs(np.fft.fftfreq(height))[:, None] / 0.5
    fx = np.abs(np.fft.fftfreq(width))[None, :] / 0.5
    mask = np.maximum(fy, fx) <= band_fraction
    return np.fft.ifft2(np.fft.fft2(noise) * mask).real


def worst_case_mpi(height, width, count, d_max, band_fraction, seed, d_min=0.0):
    """Analysis volume with content only on the nearest ceil(0.1 * D) planes,
    each carrying seeded noise band-limited to ``band_fraction`` of Nyquist.
    Content at maximum disparity moves fastest under lateral viewpoint
    change, so this is the configuration that degrades first."""
    if not 0.0 < band_fraction <= 1.0:
        raise ValidationError("band_fraction must lie in (0, 1]")
    if count < 2:
        raise ValidationError("need at least 2 planes")
    rng = np.random.default_rng(seed)
    content = int(np.ceil(0.1 * count))
    planes = np.zeros((height, width, count))
    for i in range(count - content, count):
        planes[:, :, i] = _bandlimited_noise(rng, height, width, band_fraction) / content
    return AnalysisMpi(planes, np.linspace(d_min, d_max, count))


def worst_case_scene(
    height,
    width,
    d_max,
    band_fraction,
    seed,
    n_layers,
    d_min=0.0,
    slab_fraction=0.1,
):
    """Continuous worst-case scene: layers at seeded random disparities in
    the nearest ``slab_fraction`` of the disparity range, each with seeded
    band-limited noise. Textures are scaled so the view sum stays near
    [0, 1]."""
    rng = np.random.default_rng(seed)
    lo = d_max - slab_fraction * (d_max - d_min)
    disparities = np.sort(rng.uniform(lo, d_max, n_layers))
    textures = np.stack(
        [_bandlimited_noise(rng, height, width, band_fraction) for _ in range(n_layers)]
    )
    return LayeredScene(
        textures=textures / n_layers,
        layer_disparities=disparities,
        d_min=d_min,
        d_max=d_max,
    )


def quantize_scene(scene, count):
    """Sample a layered scene onto a ``count``-plane uniform disparity grid
    by assigning each layer to its nearest plane."""
    grid = np.linspace(scene.d_min, scene.d_max, count)
    step = grid[1] - grid[0]
    planes = np.zeros((scene.height, scene.width, count))
    idx = np.clip(
        np.rint((scene.layer_disparities - scene.d_min) / step).astype(int),
        0,
        count - 1,
    )
    for texture, i in zip(scene.textures, idx):
        planes[:, :, i] += texture
    return AnalysisMpi(planes, grid)


def _affine_resample(plane, scale, shift_x, shift_y, periodic):
    """Resample one plane at ``x' = scale * x + shift`` (bilinear). Periodic
    mode wraps about pixel 0 (the transform convention); zero mode dilates
    about the image center and fills with zeros outside."""
    from mpilab import _kernels

    h, w = plane.shape
    if periodic:
        off_x, off_y = shift_x, shift_y
    else:
        cx, cy = (w - 1) / 2.0, (h - 1) / 2.0
        off_x = shift_x + cx - scale * cx
        off_y = shift_y + cy - scale * cy
    hom = np.array(
        [[scale, 0.0, off_x], [0.0, scale, off_y], [0.0, 0.0, 1.0]]
    )
    return _kernels.warp_bilinear(plane[:, :, None], hom, h, w, periodic)[:, :, 0]


def _lateral(u):
    u = np.atleast_1d(np.asarray(u, dtype=np.float64))
    if u.size == 1:
        return float(u[0]), 0.0
    if u.size != 2:
        raise ValidationError("u must be a scalar or a 2-vector")
    return float(u[0]), float(u[1])


def direct_projection_render(volume, u, s, linearized=False, periodic=False):
    """Render by summing bilinearly resampled plane images.

    Each plane at disparity d contributes its image resampled at
    ``(1 - s d) x + u d`` (exact mode) or with the constant worst-case scale
    ``1 - s d_max`` (linearized mode). Periodic mode wraps coordinates, which
    matches the spectral renderer's boundary assumption.
    """
    if s >= 1.0 / volume.d_max:
        raise ValidationError("viewpoint lies inside the volume (s >= 1 / d_max)")
    ux, uy = _lateral(u)
    h, w = volume.planes.shape[:2]
    out = np.zeros((h, w))
    for i, d in enumerate(volume.disparities):
        plane = volume.planes[:, :, i]
        if not plane.any():
            continue
        scale = 1.0 - s * (volume.d_max if linearized else d)
        out += _affine_resample(plane, scale, ux * d, uy * d, periodic)
    return out


def fourier_slice_render(volume, u, s):
    """Render through the frequency domain: evaluate the volume's spectrum
    on the slice that a translated viewpoint induces, then invert.

    For each output spatial frequency the slice reads the per-plane spectra
    at coordinates scaled by ``1 / (1 - s d_max)`` (off-grid values via an
    exact scaled DFT) and sums them with linear phases in disparity, which is
    trigonometric interpolation of the volume spectrum along the disparity
    frequency axis. Content beyond the output Nyquist is truncated, so this
    renderer band-limits instead of aliasing; boundaries are periodic.
    """
    if s >= 1.0 / volume.d_max:
        raise ValidationError("viewpoint lies inside the volume (s >= 1 / d_max)")
    ux, uy = _lateral(u)
    scale = 1.0 - s * volume.d_max
    h, w = volume.planes.shape[:2]
    spectra, means = _plane_spectra(volume.planes, scale)
    slice_spec = _slice_spectrum(
        spectra, volume.disparities, ux, uy, scale, h, w
    )
    return np.fft.ifft2(slice_spec).real + means.sum()


def _plane_spectra(planes, scale):
    """Per-plane 2D spectra evaluated at frequencies ``nu / scale`` for every
    output DFT frequency ``nu`` (exact chirp-z evaluation when off-grid).

    Off-grid evaluation removes each plane's mean first: a constant layer
    renders to the same constant under any translation-only view, and
    keeping the mean in the finite-window transform would leak its energy
    across the whole slice. Returns (spectra, per-plane means)."""
    h, w = planes.shape[:2]
    stack = np.moveaxis(planes, 2, 0).astype(np.complex128)
    if scale == 1.0:
        return np.fft.fft2(stack, axes=(1, 2)), np.zeros(planes.shape[2])
    means = stack.mean(axis=(1, 2)).real
    stack = stack - means[:, None, None]
    out = _scaled_dft(stack, axis=2, scale=scale)
    out = _scaled_dft(out, axis=1, scale=scale)
    fy = np.abs(np.fft.fftfreq(h)) / scale
    fx = np.abs(np.fft.fftfreq(w)) / scale
    nyq = (fy[:, None] <= 0.5 + 1e-12) & (fx[None, :] <= 0.5 + 1e-12)
    return out * nyq[None, :, :], means


def _scaled_dft(arr, axis, scale):
    """Evaluate the DFT sum along ``axis`` at frequencies ``k / (scale * N)``
    in standard DFT ordering, via the chirp-z transform."""
    n = arr.shape[axis]
    arr = np.moveaxis(arr, axis, -1)
    k0 = -(n // 2)
    w_ratio = np.exp(-2j * np.pi / (scale * n))
    a0 = np.exp(2j * np.pi * k0 / (scale * n))
    shifted = czt(arr, m=n, w=w_ratio, a=a0, axis=-1)
    ordered = np.fft.ifftshift(shifted, axes=-1)
    return np.moveaxis(ordered, -1, axis)


def _slice_spectrum(spectra, disparities, ux, uy, scale, h, w):
    fy = np.fft.fftfreq(h)[:, None]
    fx = np.fft.fftfreq(w)[None, :]
    phase_rate = 2j * np.pi * (fx * ux + fy * uy) / scale
    out = np.zeros((h, w), dtype=np.complex128)
    for i, d in enumerate(disparities):
        out += spectra[i] * np.exp(phase_rate * d)
    return out


def measure_bandwidth(image, energy_quantile=0.95):
    """Smallest frequency radius (as a fraction of Nyquist, per-axis
    normalized) containing the given quantile of non-DC spectral energy.
    The mean is removed and a Hann window applied before the transform."""
    if not 0.0 < energy_quantile < 1.0:
        raise ValidationError("energy_quantile must lie in (0, 1)")
    image = np.asarray(image, dtype=np.float64)
    centered = image - image.mean()
    floor = 1e-12 * max(1.0, float(np.abs(image).max()))
    if np.abs(centered).max() <= floor:
        return 0.0
    h, w = image.shape
    window = np.hanning(h)[:, None] * np.hanning(w)[None, :]
    energy = np.abs(np.fft.fft2(centered * window)) ** 2
    fy = np.abs(np.fft.fftfreq(h))[:, None] / 0.5
    fx = np.abs(np.fft.fftfreq(w))[None, :] / 0.5
    radius = np.maximum(fy, fx)
    flat_r = radius.ravel()[1:]
    flat_e = energy.ravel()[1:]
    order = np.argsort(flat_r, kind="stable")
    cumulative = np.cumsum(flat_e[order])
    total = cumulative[-1]
    if total <= 0:
        return 0.0
    pick = np.searchsorted(cumulative, energy_quantile * total)
    return float(flat_r[order][min(pick, flat_r.size - 1)])


def empirical_range(
    scene,
    count,
    s,
    fidelity_threshold=30.0,
    oracle_factor=8,
    num_steps=24,
    u_max_scan=None,
    energy_quantile=0.95,
):
    """Measure the lateral degradation onset of a ``count``-plane volume.

    The scene is quantized onto the coarse grid and onto an
    ``oracle_factor`` times denser grid whose own degradation onset lies far
    outside the scan; both are rendered spectrally at increasing lateral
    offsets and the onset is the first offset where their agreement drops
    below ``fidelity_threshold`` dB (linearly interpolated between scan
    points). Returns (u_star_or_None, report): the onset is None when the
    threshold is never crossed, i.e. beyond the scan range.
    """
    if num_steps < 2 or oracle_factor < 2:
        raise ValidationError("need at least 2 scan steps and an oracle factor >= 2")
    delta_d = (scene.d_max - scene.d_min) / (count - 1)
    predicted = renderable_range(1.0, delta_d, scene.d_max).u_max(min(s, 0.0))
    if u_max_scan is None:
        u_max_scan = 2.5 * predicted
    if u_max_scan <= 0:
        raise ValidationError("scan range must be positive")
    u_values = np.linspace(0.0, u_max_scan, num_steps + 1)

    scale = 1.0 - s * scene.d_max
    h, w = scene.height, scene.width
    spectra, means = _layer_spectra(scene, scale)
    coarse_d = _assigned_disparities(scene, count)
    fine_d = _assigned_disparities(scene, oracle_factor * count)

    reference = _render_layers(spectra, means, fine_d, 0.0, scale, h, w)
    data_range = float(reference.max() - reference.min())

    psnr_curve = np.empty_like(u_values)
    band_curve = np.empty_like(u_values)
    for k, u in enumerate(u_values):
        coarse_img = _render_layers(spectra, means, coarse_d, u, scale, h, w)
        fine_img = _render_layers(spectra, means, fine_d, u, scale, h, w)
        psnr_curve[k] = psnr(coarse_img, fine_img, data_range)
        band_curve[k] = measure_bandwidth(coarse_img, energy_quantile)

    u_star = _first_crossing(u_values, psnr_curve, fidelity_threshold)
    report = BandwidthReport(
        u_values=u_values,
        psnr_values=psnr_curve,
        bandwidth_values=band_curve,
        u_star=u_star,
        fidelity_threshold=fidelity_threshold,
        scan_step=float(u_values[1] - u_values[0]),
    )
    return u_star, report


def _layer_spectra(scene, scale):
    stack = scene.textures.astype(np.complex128)
    if scale == 1.0:
        return np.fft.fft2(stack, axes=(1, 2)), np.zeros(len(stack))
    means = stack.mean(axis=(1, 2)).real
    stack = stack - means[:, None, None]
    out = _scaled_dft(stack, axis=2, scale=scale)
    return _scaled_dft(out, axis=1, scale=scale), means


def _assigned_disparities(scene, count):
    grid = np.linspace(scene.d_min, scene.d_max, count)
    step = grid[1] - grid[0]
    idx = np.clip(
        np.rint((scene.layer_disparities - scene.d_min) / step).astype(int),
        0,
        count - 1,
    )
    return grid[idx]


def _render_layers(spectra, means, layer_disparities, u, scale, h, w):
    fy = np.fft.fftfreq(h)[:, None]
    fx = np.fft.fftfreq(w)[None, :]
    phase_rate = 2j * np.pi * (fx * u) / scale
    out = np.zeros((h, w), dtype=np.complex128)
    for spec, d in zip(spectra, layer_disparities):
        out += spec * np.exp(phase_rate * d)
    return np.fft.ifft2(out).real + means.sum()


def _first_crossing(u_values, psnr_values, threshold):
    below = psnr_values < threshold
    if not below.any():
        return None
    k = int(np.argmax(below))
    if k == 0:
        return float(u_values[0])
    u0, u1 = u_values[k - 1], u_values[k]
    p0, p1 = psnr_values[k - 1], psnr_values[k]
    if p0 == p1:
        return float(u1)
    frac = (p0 - threshold) / (p0 - p1)
    return float(u0 + frac * (u1 - u0))
