"""Camera trajectory ingestion in the RealEstate10K plain-text layout.

One line per frame with 19 whitespace-separated numbers::

    timestamp fx fy cx cy 0 0 P00 P01 P02 P03 P10 P11 P12 P13 P20 P21 P22 P23

where fx, fy, cx, cy are normalized intrinsics and P is the 3x4
world-to-camera matrix. A leading non-numeric line (the dataset files carry
the video URL there) is skipped.
"""

from dataclasses import dataclass

import numpy as np

from mpilab.errors import ValidationError
from mpilab.geometry import Camera, CameraIntrinsics, CameraPose

FIELDS_PER_LINE = 19


@dataclass(frozen=True)
class TrajectoryFrame:
    """One camera sample; intrinsics stay normalized so the frame can be
    materialized at any pixel resolution."""

    timestamp: int
    fx: float
    fy: float
    cx: float
    cy: float
    pose: CameraPose

    def camera(self, width, height):
        return Camera(
            CameraIntrinsics(self.fx, self.fy, self.cx, self.cy, width, height),
            self.pose,
        )


def parse_trajectory_line(line, line_number):
    fields = line.split()
    if len(fields) != FIELDS_PER_LINE:
        raise ValidationError(
            f"line {line_number}: expected {FIELDS_PER_LINE} fields, got {len(fields)}"
        )
    try:
        values = [float(v) for v in fields]
    except ValueError as exc:
        raise ValidationError(f"line {line_number}: non-numeric field ({exc})") from exc
    pose34 = np.asarray(values[7:19]).reshape(3, 4)
    try:
        pose = CameraPose(pose34[:, :3], pose34[:, 3])
    except ValidationError as exc:
        raise ValidationError(f"line {line_number}: {exc}") from exc
    return TrajectoryFrame(
        timestamp=int(values[0]),
        fx=values[1],
        fy=values[2],
        cx=values[3],
        cy=values[4],
        pose=pose,
    )


def load_trajectory(path):
    """Parse a trajectory file into frames; malformed lines raise
    line-numbered :class:`ValidationError`."""
    frames = []
    with open(path) as fh:
        for number, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if number == 1 and not _looks_numeric(line):
                continue
            frames.append(parse_trajectory_line(line, number))
    if not frames:
        raise ValidationError(f"no camera frames found in {path}")
    return frames


def _looks_numeric(line):
    try:
        float(line.split()[0])
    except ValueError:
        return False
    return True


def format_trajectory_line(frame):
    pose_vals = " ".join(repr(float(v)) for v in frame.pose.matrix34().ravel())
    return (
        f"{frame.timestamp} {frame.fx!r} {frame.fy!r} {frame.cx!r} {frame.cy!r} "
        f"0 0 {pose_vals}"
    )


def write_trajectory(path, frames):
    with open(path, "w") as fh:
        for frame in frames:
            fh.write(format_trajectory_line(frame) + "\n")


def sample_triplets(num_frames, count, rng, extrapolate=True, max_gap=10):
    """Draw (source0, source1, target) index triplets for view synthesis.

    Sources are two distinct frames at most ``max_gap`` apart; with
    ``extrapolate`` the target index always falls outside the closed source
    interval, so the target view must be extrapolated rather than
    interpolated.
    """
    if num_frames < 3:
        raise ValidationError("need at least 3 frames to sample triplets")
    triplets = []
    while len(triplets) < count:
        first = int(rng.integers(0, num_frames))
        gap = int(rng.integers(1, max_gap + 1))
        second = first + gap
        if second >= num_frames:
            continue
        if extrapolate:
            candidates = [i for i in range(num_frames) if i < first or i > second]
        else:
            candidates = [i for i in range(num_frames) if i != first and i != second]
        if not candidates:
            continue
        target = int(candidates[int(rng.integers(0, len(candidates)))])
        triplets.append((first, second, target))
    return triplets
