"""On-disk formats: MPI directories, 16-bit PNG images, and flow volumes.

MPI directory layout::

    mpi.json        metadata (see ``save_mpi``)
    plane_000.png   farthest plane (smallest disparity), RGBA 16-bit
    ...
    plane_{D-1}.png nearest plane

Pixel values are linear-light and quantized as ``round(v * 65535)`` (half
away from zero), which pins the round-trip error to half a quantum.
"""

import json
from pathlib import Path

import cv2
import numpy as np

from mpilab.errors import (
    CorruptPlaneError,
    MetadataError,
    PlaneCountError,
    ValidationError,
    VersionError,
)
from mpilab.geometry import Camera, CameraIntrinsics, CameraPose, DisparitySampling
from mpilab.mpi import Mpi

FORMAT_VERSION = 1
FLOW_MAGIC = b"MPFL"
_PNG_PARAMS = [cv2.IMWRITE_PNG_COMPRESSION, 3]


def quantize_u16(values):
    """Exact writer quantization: round(v * 65535), half away from zero."""
    v = np.clip(np.asarray(values, dtype=np.float64), 0.0, 1.0)
    return np.floor(v * 65535.0 + 0.5).astype(np.uint16)


def write_png16(path, image):
    """Write a float [0, 1] image (H, W, {1,3,4}) as a 16-bit PNG."""
    image = np.asarray(image, dtype=np.float64)
    if image.ndim == 2:
        image = image[:, :, None]
    u16 = quantize_u16(image)
    if u16.shape[2] == 1:
        data = u16[:, :, 0]
    elif u16.shape[2] == 3:
        data = u16[:, :, ::-1]
    elif u16.shape[2] == 4:
        data = u16[:, :, [2, 1, 0, 3]]
    else:
        raise ValidationError(f"unsupported channel count {u16.shape[2]}")
    if not cv2.imwrite(str(path), data, _PNG_PARAMS):
        raise OSError(f"failed to write {path}")


def read_png16(path):
    """Read a PNG written by :func:`write_png16` back to float [0, 1]."""
    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise CorruptPlaneError(f"unreadable image file {path}")
    if raw.ndim == 2:
        raw = raw[:, :, None]
    elif raw.shape[2] == 3:
        raw = raw[:, :, ::-1]
    elif raw.shape[2] == 4:
        raw = raw[:, :, [2, 1, 0, 3]]
    scale = 65535.0 if raw.dtype == np.uint16 else 255.0
    return raw.astype(np.float64) / scale


def write_png8(path, image):
    """Write a float [0, 1] image as an 8-bit PNG (used for binary masks)."""
    image = np.asarray(image, dtype=np.float64)
    u8 = np.floor(np.clip(image, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)
    if u8.ndim == 3 and u8.shape[2] == 3:
        u8 = u8[:, :, ::-1]
    if not cv2.imwrite(str(path), u8, _PNG_PARAMS):
        raise OSError(f"failed to write {path}")


def save_mpi(mpi, directory):
    """Write an MPI directory; see the module docstring for the layout."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    intr = mpi.reference.intrinsics
    meta = {
        "format_version": FORMAT_VERSION,
        "width": intr.width,
        "height": intr.height,
        "num_planes": mpi.num_planes,
        "disparities": [float(d) for d in mpi.disparities()],
        "reference_intrinsics": {
            "fx": intr.fx,
            "fy": intr.fy,
            "cx": intr.cx,
            "cy": intr.cy,
        },
        "reference_pose": [float(v) for v in mpi.reference.pose.matrix34().ravel()],
        "color_space": "linear",
        "alpha": "straight",
    }
    with open(directory / "mpi.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for i in range(mpi.num_planes):
        rgba = np.concatenate(
            [mpi.color[:, :, i, :], mpi.alpha[:, :, i, None]], axis=2
        )
        write_png16(directory / f"plane_{i:03d}.png", rgba)


def load_mpi(directory):
    """Load an MPI directory written by :func:`save_mpi`.

    Raises :class:`VersionError`, :class:`MetadataError`,
    :class:`PlaneCountError`, or :class:`CorruptPlaneError` depending on what
    is wrong with the directory.
    """
    directory = Path(directory)
    meta_path = directory / "mpi.json"
    if not meta_path.exists():
        raise MetadataError(f"missing metadata file {meta_path}")
    try:
        with open(meta_path) as fh:
            meta = json.load(fh)
    except json.JSONDecodeError as exc:
        raise MetadataError(f"unparseable metadata: {exc}") from exc

    required = {
        "format_version",
        "width",
        "height",
        "num_planes",
        "disparities",
        "reference_intrinsics",
        "reference_pose",
    }
    missing = required - meta.keys()
    if missing:
        raise MetadataError(f"metadata missing fields {sorted(missing)}")
    if meta["format_version"] > FORMAT_VERSION:
        raise VersionError(
            f"format version {meta['format_version']} is newer than supported "
            f"({FORMAT_VERSION})"
        )
    width, height, count = meta["width"], meta["height"], meta["num_planes"]
    disparities = np.asarray(meta["disparities"], dtype=np.float64)
    if len(disparities) != count:
        raise MetadataError(
            f"{len(disparities)} disparities listed for {count} planes"
        )
    steps = np.diff(disparities)
    if steps.min() <= 0 or not np.allclose(steps, steps[0], rtol=1e-6, atol=1e-12):
        raise MetadataError("disparities must be uniformly ascending")

    plane_paths = [directory / f"plane_{i:03d}.png" for i in range(count)]
    present = sorted(directory.glob("plane_*.png"))
    if len(present) != count or any(not p.exists() for p in plane_paths):
        raise PlaneCountError(
            f"expected {count} plane files, found {len(present)}"
        )

    color = np.empty((height, width, count, 3))
    alpha = np.empty((height, width, count))
    for i, path in enumerate(plane_paths):
        rgba = read_png16(path)
        if rgba.shape != (height, width, 4):
            raise CorruptPlaneError(
                f"{path} has shape {rgba.shape}, expected ({height}, {width}, 4)"
            )
        color[:, :, i, :] = rgba[:, :, :3]
        alpha[:, :, i] = rgba[:, :, 3]

    try:
        intr = CameraIntrinsics(
            fx=meta["reference_intrinsics"]["fx"],
            fy=meta["reference_intrinsics"]["fy"],
            cx=meta["reference_intrinsics"]["cx"],
            cy=meta["reference_intrinsics"]["cy"],
            width=width,
            height=height,
        )
        pose_vals = np.asarray(meta["reference_pose"], dtype=np.float64)
        if pose_vals.size != 12:
            raise ValidationError("reference_pose must hold 12 values")
        pose34 = pose_vals.reshape(3, 4)
        pose = CameraPose(pose34[:, :3], pose34[:, 3])
        sampling = DisparitySampling(
            float(disparities[0]), float(disparities[-1]), count
        )
    except (ValidationError, KeyError, TypeError) as exc:
        raise MetadataError(f"invalid camera metadata: {exc}") from exc

    return Mpi(Camera(intr, pose), sampling, color, alpha)


def save_flows(path, flow_x, flow_y):
    """Write a flow volume as little-endian float32 with a small header:
    magic ``MPFL`` then uint32 H, W, D, 2; data laid out (H, W, D, 2) with
    the x component first."""
    flow_x = np.asarray(flow_x, dtype=np.float32)
    flow_y = np.asarray(flow_y, dtype=np.float32)
    if flow_x.shape != flow_y.shape or flow_x.ndim != 3:
        raise ValidationError("flow components must share an (H, W, D) shape")
    h, w, d = flow_x.shape
    header = np.array([h, w, d, 2], dtype="<u4")
    stacked = np.stack([flow_x, flow_y], axis=-1).astype("<f4")
    with open(path, "wb") as fh:
        fh.write(FLOW_MAGIC)
        fh.write(header.tobytes())
        fh.write(stacked.tobytes())


def load_flows(path):
    """Read a flow volume written by :func:`save_flows`; returns (fx, fy)."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != FLOW_MAGIC:
            raise MetadataError(f"bad flow file magic {magic!r}")
        header = np.frombuffer(fh.read(16), dtype="<u4")
        if len(header) != 4 or header[3] != 2:
            raise MetadataError("bad flow file header")
        h, w, d = (int(v) for v in header[:3])
        data = np.frombuffer(fh.read(), dtype="<f4")
    if data.size != h * w * d * 2:
        raise MetadataError(
            f"flow payload holds {data.size} floats, expected {h * w * d * 2}"
        )
    stacked = data.reshape(h, w, d, 2).astype(np.float64)
    return stacked[:, :, :, 0], stacked[:, :, :, 1]
