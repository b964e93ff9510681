"""mpilab: a multiplane-image view synthesis laboratory.

Library layout:

* :mod:`mpilab.geometry` — cameras, disparity sampling, homographies, warps.
* :mod:`mpilab.mpi` — MPI / plane-sweep-volume model, construction, resampling.
* :mod:`mpilab.storage` — MPI directories, 16-bit PNGs, flow volumes.
* :mod:`mpilab.render` — compositing, transmittance, soft removal,
  flow gather, disocclusion masks.
* :mod:`mpilab.limits` — renderable-range theory and its empirical validator.
* :mod:`mpilab.estimator` — the two-step prediction pipeline.
* :mod:`mpilab.metrics` — field-of-view and disocclusion-aware scores.
* :mod:`mpilab.scenes` — synthetic ground-truth scene factory.
* :mod:`mpilab.trajectory` — camera trajectory ingestion and sampling.
"""

__version__ = "0.1.0"

from mpilab._kernels import get_backend

__all__ = ["__version__", "get_backend"]
