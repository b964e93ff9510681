"""Command-line interface.

Subcommands: ``synth``, ``psv build``, ``render``, ``path``, ``limits range``,
``limits validate``, ``pipeline run``, ``metrics eval``, ``ingest``.

Configuration precedence: explicit flags override values from a ``--config``
JSON file (keyed by command path, e.g. ``{"limits validate": {...}}``),
which override built-in defaults. Every output directory receives a
``run.json`` echoing the fully resolved configuration, and all outputs are
byte-reproducible for a fixed configuration and seed.

Exit codes: 0 success, 2 validation error, 3 numeric or degenerate-geometry
error, 4 I/O or file-format error.
"""

import functools
import json
import sys
from pathlib import Path

import click
import numpy as np

from mpilab import __version__, _kernels
from mpilab import estimator as est
from mpilab import limits as lim
from mpilab import metrics as met
from mpilab import scenes, storage, trajectory
from mpilab.errors import (
    ContractViolationError,
    DegenerateHomographyError,
    EmptyRegionError,
    FormatError,
    MpilabError,
    PipelineStageError,
    RotationMismatchError,
    ValidationError,
)
from mpilab.geometry import DisparitySampling, camera_at_offset
from mpilab.mpi import build_psv
from mpilab.render import composite

EXIT_VALIDATION = 2
EXIT_NUMERIC = 3
EXIT_IO = 4


def _exit_code(exc):
    if isinstance(exc, PipelineStageError) and exc.__cause__ is not None:
        return _exit_code(exc.__cause__)
    if isinstance(exc, (DegenerateHomographyError, RotationMismatchError)):
        return EXIT_NUMERIC
    if isinstance(exc, (FormatError, OSError)):
        return EXIT_IO
    if isinstance(exc, (ValidationError, ContractViolationError, EmptyRegionError)):
        return EXIT_VALIDATION
    return EXIT_NUMERIC


def guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (MpilabError, OSError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(_exit_code(exc))

    return wrapper


def _resolve(ctx, section, values):
    """Apply config-file defaults for parameters not given on the command
    line; returns the fully resolved parameter dict."""
    cfg = (ctx.obj or {}).get(section, {})
    resolved = {}
    for key, value in values.items():
        source = ctx.get_parameter_source(key)
        if source is not None and source.name == "COMMANDLINE":
            resolved[key] = value
        elif key in cfg:
            resolved[key] = cfg[key]
        else:
            resolved[key] = value
    return resolved


def _jsonable(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, Path):
        return str(value)
    return value


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_run(out_dir, command, config):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(
        out_dir / "run.json",
        {
            "command": command,
            "config": config,
            "package_version": __version__,
            "kernel_backend": _kernels.get_backend(),
        },
    )


def _parse_floats(text, expect=None):
    try:
        values = tuple(float(v) for v in str(text).split(","))
    except ValueError as exc:
        raise ValidationError(f"cannot parse {text!r} as numbers") from exc
    if expect is not None and len(values) != expect:
        raise ValidationError(f"expected {expect} comma-separated values in {text!r}")
    return values


def _parse_ints(text):
    return tuple(int(v) for v in str(text).split(","))


@click.group()
@click.version_option(version=__version__)
@click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="JSON file with per-command parameter defaults.",
)
@click.pass_context
def main(ctx, config_path):
    """Multiplane-image view synthesis laboratory."""
    if config_path:
        with open(config_path) as fh:
            ctx.obj = json.load(fh)
    else:
        ctx.obj = {}


@main.command()
@click.option("--kind", type=click.Choice(scenes.SCENE_KINDS), required=True)
@click.option("--width", default=96, show_default=True)
@click.option("--height", default=96, show_default=True)
@click.option("--planes", default=8, show_default=True)
@click.option("--d-min", default=0.0, show_default=True)
@click.option("--d-max", default=1.0, show_default=True)
@click.option("--layer-disparities", default=None, help="Comma-separated disparities.")
@click.option("--occluder", default=None, help="x0,y0,x1,y1 pixel rectangle.")
@click.option("--seed", default=0, show_default=True)
@click.option("--baseline", default=0.08, show_default=True)
@click.option("--band-fraction", default=0.5, show_default=True)
@click.option("--out", required=True, type=click.Path())
@click.pass_context
@guarded
def synth(ctx, **kwargs):
    """Generate a ground-truth scene: MPI directory, stereo source pair,
    camera file, and analytic disocclusion geometry."""
    cfg = _resolve(ctx, "synth", kwargs)
    spec = scenes.SceneSpec(
        kind=cfg["kind"],
        width=cfg["width"],
        height=cfg["height"],
        num_planes=cfg["planes"],
        d_min=cfg["d_min"],
        d_max=cfg["d_max"],
        layer_disparities=(
            _parse_floats(cfg["layer_disparities"])
            if cfg["layer_disparities"]
            else ()
        ),
        occluder=_parse_ints(cfg["occluder"]) if cfg["occluder"] else None,
        texture_seed=cfg["seed"],
        baseline=cfg["baseline"],
        band_fraction=cfg["band_fraction"],
    )
    scene = scenes.build_scene(spec)
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    storage.save_mpi(scene.mpi, out / "mpi")
    for j, image in enumerate(scene.source_images):
        storage.write_png16(out / f"source_{j:03d}.png", image)
    frames = [
        trajectory.TrajectoryFrame(
            timestamp=j,
            fx=cam.intrinsics.fx,
            fy=cam.intrinsics.fy,
            cx=cam.intrinsics.cx,
            cy=cam.intrinsics.cy,
            pose=cam.pose,
        )
        for j, cam in enumerate(scene.source_cameras)
    ]
    trajectory.write_trajectory(out / "cameras.txt", frames)
    _write_json(out / "scene.json", scene.geometry)
    _write_run(out, "synth", cfg)
    click.echo(f"wrote scene to {out}")


@main.group()
def psv():
    """Plane-sweep-volume operations."""


@psv.command("build")
@click.option("--image", "images", multiple=True, required=True, type=click.Path(exists=True))
@click.option("--cameras", "cameras_path", required=True, type=click.Path(exists=True))
@click.option("--frame-indices", default=None, help="Camera line per image (default 0,1,...).")
@click.option("--reference-index", default=0, show_default=True)
@click.option("--d-min", default=0.0, show_default=True)
@click.option("--d-max", default=1.0, show_default=True)
@click.option("--planes", default=8, show_default=True)
@click.option("--out", required=True, type=click.Path())
@click.pass_context
@guarded
def psv_build(ctx, **kwargs):
    """Reproject source images onto every disparity plane of a reference."""
    cfg = _resolve(ctx, "psv build", kwargs)
    frames = trajectory.load_trajectory(cfg["cameras_path"])
    indices = (
        _parse_ints(cfg["frame_indices"])
        if cfg["frame_indices"]
        else tuple(range(len(cfg["images"])))
    )
    if len(indices) != len(cfg["images"]):
        raise ValidationError("need one frame index per image")
    pixels = [storage.read_png16(p)[:, :, :3] for p in cfg["images"]]
    h, w = pixels[0].shape[:2]
    cams = [frames[i].camera(w, h) for i in indices]
    reference = frames[cfg["reference_index"]].camera(w, h)
    sampling = DisparitySampling(cfg["d_min"], cfg["d_max"], cfg["planes"])
    volume = build_psv(list(zip(pixels, cams)), reference, sampling)
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    _write_json(
        out / "psv.json",
        {
            "width": w,
            "height": h,
            "num_planes": sampling.count,
            "num_sources": volume.num_sources,
            "disparities": np.linspace(sampling.d_min, sampling.d_max, sampling.count),
        },
    )
    for i in range(sampling.count):
        for j in range(volume.num_sources):
            storage.write_png16(
                out / f"plane_{i:03d}_src{j}.png", volume.source_slice(j)[:, :, i, :]
            )
    _write_run(out, "psv build", cfg)
    click.echo(f"wrote PSV to {out}")


def _target_cameras(cfg, mpi):
    """Target cameras from either relative offsets or a trajectory file."""
    if cfg.get("cameras_path"):
        frames = trajectory.load_trajectory(cfg["cameras_path"])
        idx = cfg.get("frame")
        chosen = frames if idx is None else [frames[idx]]
        return [f.camera(mpi.reference.width, mpi.reference.height) for f in chosen]
    u = _parse_floats(cfg["u"], expect=2)
    return [camera_at_offset(mpi.reference, u, cfg["s"])]


@main.command()
@click.option("--mpi", "mpi_dir", required=True, type=click.Path(exists=True))
@click.option("--u", default="0,0", show_default=True, help="Lateral offset (px).")
@click.option("--s", default=0.0, show_default=True, help="Axial offset.")
@click.option("--cameras", "cameras_path", default=None, type=click.Path(exists=True))
@click.option("--frame", default=None, type=int)
@click.option("--out", required=True, type=click.Path())
@click.pass_context
@guarded
def render(ctx, **kwargs):
    """Render one novel view from an MPI directory."""
    cfg = _resolve(ctx, "render", kwargs)
    mpi = storage.load_mpi(cfg["mpi_dir"])
    camera = _target_cameras(cfg, mpi)[0]
    image, acc = composite(mpi, camera)
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    storage.write_png16(out / "frame_00000.png", image)
    _write_json(
        out / "frame_00000.json",
        {
            "pose": camera.pose.matrix34().ravel(),
            "num_planes": mpi.num_planes,
            "mean_accumulated_alpha": float(acc.mean()),
        },
    )
    _write_run(out, "render", cfg)
    click.echo(f"wrote 1 frame to {out}")


@main.command()
@click.option("--mpi", "mpi_dir", required=True, type=click.Path(exists=True))
@click.option("--u-start", default="0,0", show_default=True)
@click.option("--u-end", default="0,0", show_default=True)
@click.option("--s-start", default=0.0, show_default=True)
@click.option("--s-end", default=0.0, show_default=True)
@click.option("--frames", "num_frames", default=8, show_default=True)
@click.option("--out", required=True, type=click.Path())
@click.pass_context
@guarded
def path(ctx, **kwargs):
    """Render a linear camera path from an MPI directory."""
    cfg = _resolve(ctx, "path", kwargs)
    mpi = storage.load_mpi(cfg["mpi_dir"])
    u0 = np.array(_parse_floats(cfg["u_start"], expect=2))
    u1 = np.array(_parse_floats(cfg["u_end"], expect=2))
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    n = int(cfg["num_frames"])
    if n < 1:
        raise ValidationError("need at least one frame")
    for k in range(n):
        t = k / max(n - 1, 1)
        u = (1 - t) * u0 + t * u1
        s = (1 - t) * cfg["s_start"] + t * cfg["s_end"]
        camera = camera_at_offset(mpi.reference, u, s)
        image, _ = composite(mpi, camera)
        storage.write_png16(out / f"frame_{k:05d}.png", image)
        _write_json(
            out / f"frame_{k:05d}.json",
            {"u": list(u), "s": s, "pose": camera.pose.matrix34().ravel()},
        )
    _write_run(out, "path", cfg)
    click.echo(f"wrote {n} frames to {out}")


@main.group()
def limits():
    """Renderable-range analysis."""


@limits.command("range")
@click.option("--delta-x", default=1.0, show_default=True)
@click.option("--delta-d", required=True, type=float)
@click.option("--d-max", required=True, type=float)
@click.option("--s", "s_values", default="0", show_default=True, help="Comma-separated axial offsets.")
@click.option("--out", default=None, type=click.Path())
@click.pass_context
@guarded
def limits_range(ctx, **kwargs):
    """Closed-form full-bandwidth lateral extent at given axial offsets."""
    cfg = _resolve(ctx, "limits range", kwargs)
    rng_ = lim.renderable_range(cfg["delta_x"], cfg["delta_d"], cfg["d_max"])
    entries = [
        {"s": s, "u_max": rng_.u_max(s)} for s in _parse_floats(cfg["s_values"])
    ]
    payload = {
        "delta_x": cfg["delta_x"],
        "delta_d": cfg["delta_d"],
        "d_max": cfg["d_max"],
        "entries": entries,
    }
    if cfg["out"]:
        _write_json(cfg["out"], payload)
        click.echo(f"wrote {cfg['out']}")
    else:
        click.echo(json.dumps(_jsonable(payload), indent=2, sort_keys=True))


@limits.command("validate")
@click.option("--width", default=256, show_default=True)
@click.option("--height", default=256, show_default=True)
@click.option("--planes", default=32, show_default=True)
@click.option("--d-min", default=0.0, show_default=True)
@click.option("--d-max", default=1.0, show_default=True)
@click.option("--band-fraction", default=0.5, show_default=True)
@click.option("--layers", default=13, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--s", default=0.0, show_default=True)
@click.option("--threshold", default=30.0, show_default=True)
@click.option("--steps", default=24, show_default=True)
@click.option("--oracle-factor", default=8, show_default=True)
@click.option("--csv/--no-csv", "write_csv", default=True, show_default=True)
@click.option("--out", required=True, type=click.Path())
@click.pass_context
@guarded
def limits_validate(ctx, **kwargs):
    """Measure the degradation onset of a worst-case scene empirically and
    compare it against the closed-form prediction."""
    cfg = _resolve(ctx, "limits validate", kwargs)
    scene = lim.worst_case_scene(
        cfg["height"],
        cfg["width"],
        cfg["d_max"],
        cfg["band_fraction"],
        cfg["seed"],
        n_layers=cfg["layers"],
        d_min=cfg["d_min"],
    )
    u_star, report = lim.empirical_range(
        scene,
        cfg["planes"],
        cfg["s"],
        fidelity_threshold=cfg["threshold"],
        num_steps=cfg["steps"],
        oracle_factor=cfg["oracle_factor"],
    )
    delta_d = (cfg["d_max"] - cfg["d_min"]) / (cfg["planes"] - 1)
    predicted = lim.renderable_range(1.0, delta_d, cfg["d_max"]).u_max(min(cfg["s"], 0.0))
    payload = {
        "D": cfg["planes"],
        "delta_x": 1.0,
        "delta_d": delta_d,
        "d_max": cfg["d_max"],
        "s": cfg["s"],
        "predicted_u_max": predicted,
        "measured_u_star": u_star if u_star is not None else "beyond scan range",
        "fidelity_criterion": "psnr vs 8x-denser oracle of the same scene",
        "curve": report.rows(),
    }
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "report.json", payload)
    if cfg["write_csv"]:
        with open(out / "curve.csv", "w") as fh:
            fh.write("u,psnr,bandwidth\n")
            for u, p, b in report.rows():
                fh.write(f"{u!r},{p!r},{b!r}\n")
    _write_run(out, "limits validate", cfg)
    click.echo(f"predicted u_max {predicted:.3f}, measured {payload['measured_u_star']}")


@main.group()
def pipeline():
    """Two-step MPI prediction."""


@pipeline.command("run")
@click.option("--scene", "scene_dir", default=None, type=click.Path(exists=True))
@click.option("--image", "images", multiple=True, type=click.Path(exists=True))
@click.option("--cameras", "cameras_path", default=None, type=click.Path(exists=True))
@click.option("--d-min", default=0.0, show_default=True)
@click.option("--d-max", default=1.0, show_default=True)
@click.option("--planes", default=8, show_default=True)
@click.option("--phi1", default="photo", show_default=True, type=click.Choice(["photo", "gt"]))
@click.option("--gt-mpi", "gt_mpi_dir", default=None, type=click.Path(exists=True))
@click.option("--temperature", default=10.0, show_default=True)
@click.option("--window", default=3, show_default=True)
@click.option("--phi2", default="donor", show_default=True, type=click.Choice(["donor", "zero"]))
@click.option("--search-radius", default=16, show_default=True)
@click.option("--render-u", default=None, help="Also render initial/final at this offset.")
@click.option("--render-s", default=0.0, show_default=True)
@click.option("--out", required=True, type=click.Path())
@click.pass_context
@guarded
def pipeline_run(ctx, **kwargs):
    """Run plane sweep, initial prediction, soft removal, hidden prediction,
    and color gather; write every produced volume."""
    cfg = _resolve(ctx, "pipeline run", kwargs)
    if cfg["scene_dir"]:
        base = Path(cfg["scene_dir"])
        images = [
            storage.read_png16(base / f"source_{j:03d}.png")[:, :, :3] for j in (0, 1)
        ]
        frames = trajectory.load_trajectory(base / "cameras.txt")
    else:
        if not cfg["images"] or not cfg["cameras_path"]:
            raise ValidationError("need --scene or both --image and --cameras")
        images = [storage.read_png16(p)[:, :, :3] for p in cfg["images"]]
        frames = trajectory.load_trajectory(cfg["cameras_path"])
    h, w = images[0].shape[:2]
    cams = [frames[j].camera(w, h) for j in range(len(images))]
    reference = cams[0]
    sampling = DisparitySampling(cfg["d_min"], cfg["d_max"], cfg["planes"])

    if cfg["phi1"] == "gt":
        if not cfg["gt_mpi_dir"]:
            raise ValidationError("--phi1 gt requires --gt-mpi")
        phi1 = est.GroundTruthPredictor(storage.load_mpi(cfg["gt_mpi_dir"]))
    else:
        phi1 = est.PhotoConsistencyPredictor(cfg["temperature"], cfg["window"])
    if cfg["phi2"] == "zero":
        phi2 = est.ZeroFlowPredictor()
    else:
        phi2 = est.NearestDonorPredictor(cfg["search_radius"])

    result = est.run_two_step(images, cams, reference, sampling, phi1, phi2)
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    storage.save_mpi(result.initial, out / "initial_mpi")
    storage.save_mpi(result.final, out / "final_mpi")
    storage.save_flows(out / "flows.bin", result.flows.f_x, result.flows.f_y)
    _write_json(out / "provenance.json", result.provenance)
    if cfg["render_u"]:
        u = _parse_floats(cfg["render_u"], expect=2)
        camera = camera_at_offset(reference, u, cfg["render_s"])
        for tag, mpi_obj in (("initial", result.initial), ("final", result.final)):
            image, _ = composite(mpi_obj, camera)
            storage.write_png16(out / f"render_{tag}.png", image)
    _write_run(out, "pipeline run", cfg)
    click.echo(f"wrote pipeline outputs to {out}")


@main.group()
def metrics():
    """Disocclusion-aware evaluation."""


@metrics.command("eval")
@click.option("--pred", "pred_dir", required=True, type=click.Path(exists=True))
@click.option("--gt", "gt_dir", required=True, type=click.Path(exists=True))
@click.option("--mpi", "mpi_dir", required=True, type=click.Path(exists=True))
@click.option("--poses", "poses_path", required=True, type=click.Path(exists=True))
@click.option("--epsilon", default=0.075, show_default=True)
@click.option("--bins", default=64, show_default=True)
@click.option("--gt-scope", default="mask", show_default=True, type=click.Choice(["mask", "image"]))
@click.option("--dump-masks/--no-dump-masks", default=False, show_default=True,
              help="Also write each disocclusion mask as an 8-bit PNG.")
@click.option("--out", required=True, type=click.Path())
@click.pass_context
@guarded
def metrics_eval(ctx, **kwargs):
    """Score prediction frames against ground-truth frames; one JSON line
    per example plus an aggregate summary."""
    cfg = _resolve(ctx, "metrics eval", kwargs)
    mpi = storage.load_mpi(cfg["mpi_dir"])
    frames = trajectory.load_trajectory(cfg["poses_path"])
    pred_files = sorted(Path(cfg["pred_dir"]).glob("*.png"))
    gt_files = sorted(Path(cfg["gt_dir"]).glob("*.png"))
    if len(pred_files) != len(gt_files) or not pred_files:
        raise ValidationError(
            f"prediction/ground-truth counts differ "
            f"({len(pred_files)} vs {len(gt_files)})"
        )
    if len(frames) < len(pred_files):
        raise ValidationError("fewer poses than frames")
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    reports = []
    with open(out / "metrics.jsonl", "w") as fh:
        for k, (pf, gf) in enumerate(zip(pred_files, gt_files)):
            camera = frames[k].camera(mpi.reference.width, mpi.reference.height)
            pred = storage.read_png16(pf)[:, :, :3]
            gt = storage.read_png16(gf)[:, :, :3]
            report = met.evaluate(
                pred,
                gt,
                mpi,
                camera,
                epsilon=cfg["epsilon"],
                bins=cfg["bins"],
                gt_scope=cfg["gt_scope"],
            )
            reports.append(report)
            if cfg["dump_masks"]:
                from mpilab.render import disocclusion_mask

                mask = disocclusion_mask(mpi, camera, cfg["epsilon"])
                storage.write_png8(
                    out / f"mask_{pf.stem}.png", mask.mask.astype(np.float64)
                )
                _write_json(
                    out / f"mask_{pf.stem}.json",
                    {
                        "epsilon": cfg["epsilon"],
                        "num_planes": mpi.num_planes,
                        "pose": camera.pose.matrix34().ravel(),
                        "pixel_count": mask.pixel_count,
                    },
                )
            fh.write(
                json.dumps(
                    _jsonable(
                        {
                            "id": pf.stem,
                            "ssim_fov": report.ssim_fov,
                            "ssim_occ": report.ssim_occ,
                            "nat_occ": report.nat_occ,
                            "occ_pixel_count": report.occ_pixel_count,
                        }
                    ),
                    sort_keys=True,
                )
                + "\n"
            )
    defined = [r for r in reports if r.ssim_occ is not None]
    summary = {
        "count": len(reports),
        "ssim_fov_mean": float(np.mean([r.ssim_fov for r in reports])),
        "ssim_occ_mean": (
            float(np.mean([r.ssim_occ for r in defined])) if defined else None
        ),
        "nat_occ_mean": (
            float(np.mean([r.nat_occ for r in defined])) if defined else None
        ),
        "occ_defined_count": len(defined),
        "occ_pixel_total": int(sum(r.occ_pixel_count for r in reports)),
    }
    _write_json(out / "summary.json", summary)
    _write_run(out, "metrics eval", cfg)
    click.echo(f"evaluated {len(reports)} frames; summary in {out}")


@main.command()
@click.option("--cameras", "cameras_path", required=True, type=click.Path(exists=True))
@click.option("--frames", "frames_dir", default=None, type=click.Path(exists=True))
@click.option("--triplets", default=0, show_default=True, help="Sample this many triplets.")
@click.option("--extrapolate/--no-extrapolate", default=True, show_default=True)
@click.option("--max-gap", default=10, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", required=True, type=click.Path())
@click.pass_context
@guarded
def ingest(ctx, **kwargs):
    """Validate a camera trajectory file and emit a dataset manifest."""
    cfg = _resolve(ctx, "ingest", kwargs)
    frames = trajectory.load_trajectory(cfg["cameras_path"])
    manifest = {
        "source": str(cfg["cameras_path"]),
        "num_frames": len(frames),
        "frames": [
            {
                "index": k,
                "timestamp": f.timestamp,
                "fx": f.fx,
                "fy": f.fy,
                "cx": f.cx,
                "cy": f.cy,
                "pose": f.pose.matrix34().ravel(),
            }
            for k, f in enumerate(frames)
        ],
    }
    if cfg["frames_dir"]:
        images = sorted(Path(cfg["frames_dir"]).glob("*.png")) + sorted(
            Path(cfg["frames_dir"]).glob("*.jpg")
        )
        manifest["frames_dir"] = str(cfg["frames_dir"])
        manifest["image_count"] = len(images)
        manifest["image_count_matches"] = len(images) == len(frames)
    if cfg["triplets"]:
        rng = np.random.default_rng(cfg["seed"])
        manifest["triplets"] = trajectory.sample_triplets(
            len(frames),
            cfg["triplets"],
            rng,
            extrapolate=cfg["extrapolate"],
            max_gap=cfg["max_gap"],
        )
        manifest["triplet_sampling"] = {
            "extrapolate": cfg["extrapolate"],
            "max_gap": cfg["max_gap"],
            "seed": cfg["seed"],
        }
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "manifest.json", manifest)
    _write_run(out, "ingest", cfg)
    click.echo(f"validated {len(frames)} frames")


if __name__ == "__main__":
    main()
