"""Two-step MPI prediction pipeline with pluggable predictors.

Stage one turns a plane-sweep volume into an initial MPI (classically via
windowed photo-consistency; a learned model can be substituted through the
same interface or by importing volumes from disk). Stage two softly removes
content hidden from the reference view, then predicts final opacities plus a
per-voxel flow that copies appearance for hidden voxels from visible content
at or behind the same plane.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import uniform_filter

from mpilab import _kernels
from mpilab.errors import ContractViolationError, PipelineStageError, ValidationError
from mpilab.mpi import Mpi, build_psv
from mpilab.render import (
    FlowVolume,
    VisibleVolume,
    cumulative_visible_renders,
    flow_gather,
    soft_remove_hidden,
)


@dataclass(frozen=True)
class PipelineResult:
    """All intermediate volumes of one pipeline run plus provenance."""

    initial: Mpi
    visible: VisibleVolume
    flows: FlowVolume
    final: Mpi
    provenance: dict = field(default_factory=dict)


def photo_consistency_predictor(psv, temperature=10.0, window=3):
    """Classical initial-MPI stand-in for a two-source plane sweep.

    Per-voxel matching cost is the window-averaged squared difference
    between the two source slices; opacity is a per-pixel softmax over
    planes of ``-cost / temperature`` (one-hot at the cheapest plane as the
    temperature goes to zero); color is the mean of the two slices.
    """
    if psv.num_sources != 2:
        raise ValidationError(
            f"photo-consistency needs exactly 2 sources, got {psv.num_sources}"
        )
    if temperature <= 0 or window < 1:
        raise ValidationError("temperature must be positive and window at least 1")
    first = psv.source_slice(0)
    second = psv.source_slice(1)
    squared = ((first - second) ** 2).mean(axis=3)
    cost = uniform_filter(squared, size=(window, window, 1), mode="nearest")
    logits = -cost / temperature
    logits -= logits.max(axis=2, keepdims=True)
    weights = np.exp(logits)
    alpha = weights / weights.sum(axis=2, keepdims=True)
    color = 0.5 * (first + second)
    return Mpi(psv.reference, psv.sampling, color, alpha)


def nearest_donor_flow_predictor(vis, search_radius=16):
    """Heuristic hidden-content stand-in.

    A voxel is hidden when its visible opacity falls below 0.5. Its flow
    points to the nearest pixel (expanding square rings, scanline order
    within each ring, bounded by ``search_radius``) whose cumulative
    visibility at or behind the same plane exceeds 0.5; a pixel satisfying
    that test itself keeps zero flow, as does a hidden voxel with no donor
    in range. Final opacity copies the visible opacity where visible and
    extends the donor's opacity where hidden.
    """
    if search_radius < 1:
        raise ValidationError("search_radius must be at least 1")
    alpha_vis = vis.alpha_vis
    h, w, count = alpha_vis.shape
    cumulative = np.cumsum(alpha_vis, axis=2)
    f_x = np.zeros((h, w, count))
    f_y = np.zeros((h, w, count))
    alpha_fin = alpha_vis.copy()
    ys, xs = np.mgrid[0:h, 0:w]
    for i in range(count):
        eligible = cumulative[:, :, i] > 0.5
        needs = (alpha_vis[:, :, i] < 0.5) & ~eligible
        if not needs.any():
            continue
        offsets = _kernels.donor_search(eligible, needs, search_radius)
        f_x[:, :, i] = offsets[:, :, 0]
        f_y[:, :, i] = offsets[:, :, 1]
        found = needs & (offsets != 0).any(axis=2)
        donor_y = (ys + offsets[:, :, 1].astype(int))[found]
        donor_x = (xs + offsets[:, :, 0].astype(int))[found]
        alpha_fin[:, :, i][found] = alpha_vis[donor_y, donor_x, i]
    return alpha_fin, FlowVolume(f_x, f_y)


class PhotoConsistencyPredictor:
    """Initial predictor wrapping :func:`photo_consistency_predictor`."""

    name = "photo_consistency"

    def __init__(self, temperature=10.0, window=3):
        self.temperature = temperature
        self.window = window

    def __call__(self, psv):
        return photo_consistency_predictor(psv, self.temperature, self.window)

    def params(self):
        return {"temperature": self.temperature, "window": self.window}


class GroundTruthPredictor:
    """Initial predictor that returns a known MPI, for oracle experiments
    and for volumes produced by an external model."""

    name = "ground_truth"

    def __init__(self, mpi):
        self.mpi = mpi

    def __call__(self, psv):
        return self.mpi

    def params(self):
        return {}


class NearestDonorPredictor:
    """Hidden predictor wrapping :func:`nearest_donor_flow_predictor`."""

    name = "nearest_donor"

    def __init__(self, search_radius=16):
        self.search_radius = search_radius

    def __call__(self, vis):
        return nearest_donor_flow_predictor(vis, self.search_radius)

    def params(self):
        return {"search_radius": self.search_radius}


class ZeroFlowPredictor:
    """Baseline hidden predictor: keep visible opacities and gather with
    zero flow, which reproduces repeated-texture disocclusions."""

    name = "zero_flow"

    def __init__(self):
        pass

    def __call__(self, vis):
        h, w, count = vis.alpha_vis.shape
        return vis.alpha_vis.copy(), FlowVolume.zero(h, w, count)

    def params(self):
        return {}


def _predictor_name(predictor):
    return getattr(predictor, "name", type(predictor).__name__)


def _samplings_equal(a, b):
    return a.d_min == b.d_min and a.d_max == b.d_max and a.count == b.count


def _cameras_equal(a, b):
    return (
        a.intrinsics == b.intrinsics
        and np.array_equal(a.pose.rotation, b.pose.rotation)
        and np.array_equal(a.pose.translation, b.pose.translation)
    )


def _check_initial(mpi, psv, name):
    if not isinstance(mpi, Mpi):
        raise ContractViolationError(
            f"initial predictor '{name}' returned {type(mpi).__name__}, expected Mpi"
        )
    if not _samplings_equal(mpi.sampling, psv.sampling) or not _cameras_equal(
        mpi.reference, psv.reference
    ):
        raise ContractViolationError(
            f"initial predictor '{name}' changed the reference camera or sampling"
        )


def _check_hidden(alpha_fin, flows, vis, name):
    alpha_fin = np.asarray(alpha_fin, dtype=np.float64)
    if alpha_fin.shape != vis.alpha_vis.shape:
        raise ContractViolationError(
            f"hidden predictor '{name}' returned opacities of shape "
            f"{alpha_fin.shape}, expected {vis.alpha_vis.shape}"
        )
    if alpha_fin.min() < 0 or alpha_fin.max() > 1 or not np.isfinite(alpha_fin).all():
        raise ContractViolationError(
            f"hidden predictor '{name}' returned opacities outside [0, 1]"
        )
    if not isinstance(flows, FlowVolume) or flows.f_x.shape != vis.alpha_vis.shape:
        raise ContractViolationError(
            f"hidden predictor '{name}' returned an invalid flow volume"
        )
    return alpha_fin


def run_two_step(sources, cameras, reference, sampling, initial_predictor, hidden_predictor):
    """Run the full two-step pipeline and return every intermediate volume.

    Stages: plane-sweep construction, initial prediction, soft removal of
    hidden content, hidden prediction (opacity + flow), color gather from
    cumulative visible renders, and final MPI assembly. Errors carry the
    name of the failing stage.
    """
    phi1 = _predictor_name(initial_predictor)
    phi2 = _predictor_name(hidden_predictor)

    def run(stage, fn):
        try:
            return fn()
        except ContractViolationError:
            raise
        except Exception as exc:
            raise PipelineStageError(stage, exc) from exc

    psv = run("build_psv", lambda: build_psv(zip(sources, cameras), reference, sampling))

    def predict_initial():
        try:
            mpi = initial_predictor(psv)
        except ValidationError as exc:
            raise ContractViolationError(f"initial predictor '{phi1}': {exc}") from exc
        _check_initial(mpi, psv, phi1)
        return mpi

    mpi_init = run("initial_prediction", predict_initial)
    vis = run("soft_removal", lambda: soft_remove_hidden(mpi_init))

    def predict_hidden():
        try:
            alpha_fin, flows = hidden_predictor(vis)
        except ValidationError as exc:
            raise ContractViolationError(f"hidden predictor '{phi2}': {exc}") from exc
        return _check_hidden(alpha_fin, flows, vis, phi2), flows

    alpha_fin, flows = run("hidden_prediction", predict_hidden)

    def gather():
        r_vis = cumulative_visible_renders(vis)
        return flow_gather(r_vis, flows)

    c_fin = run("color_gather", gather)
    final = run(
        "finalize",
        lambda: Mpi(
            mpi_init.reference,
            mpi_init.sampling,
            np.clip(c_fin, 0.0, 1.0),
            alpha_fin,
        ),
    )
    provenance = {
        "initial_predictor": {"name": phi1, **_predictor_params(initial_predictor)},
        "hidden_predictor": {"name": phi2, **_predictor_params(hidden_predictor)},
    }
    return PipelineResult(
        initial=mpi_init, visible=vis, flows=flows, final=final, provenance=provenance
    )


def _predictor_params(predictor):
    params = getattr(predictor, "params", None)
    return params() if callable(params) else {}
