"""Batch command-line front end.

File-based pipeline: every subcommand reads/writes plain JSON or CSV, embeds
the config digest and tool version in its outputs, and is individually
runnable. Exit codes: 0 ok, 2 validation failure, 3 numerical failure.

Heavy numerical imports happen inside the commands so that --threads can pin
the BLAS/OpenMP pool size before the libraries initialize.
"""

from __future__ import annotations

import functools
import hashlib
import json
import os
import sys
from pathlib import Path

import click

from .errors import NumericalError, ValidationError

EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def _load_config(path) -> dict:
    if path is None:
        raise ValidationError("this command needs --config")
    try:
        with open(path) as f:
            cfg = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ValidationError("config must be a JSON object")
    return cfg


def _config_digest(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()


def _stamp(cfg: dict) -> dict:
    from . import __version__

    return {"config_digest": _config_digest(cfg), "tool_version": __version__}


def _write_json(doc: dict, path) -> None:
    with open(path, "w") as f:
        json.dump(doc, f, sort_keys=True, indent=2)
        f.write("\n")


def _scene_from_config(cfg: dict):
    from .mesh import SceneSpec

    sc = cfg.get("scene")
    if sc is None:
        raise ValidationError("config missing 'scene' section")
    try:
        return SceneSpec(
            semi_axes=tuple(float(x) for x in sc["semi_axes_m"]),
            penetration_fraction=float(sc["penetration_fraction"]),
            substrate_dims=tuple(float(x) for x in sc["substrate_dims_m"]),
            element_size=float(sc["element_size_m"]),
            bottom_bc=sc.get("bottom_bc", "clamped"),
        )
    except KeyError as exc:
        raise ValidationError(f"scene config missing field {exc}") from exc


def _material_from_config(cfg: dict):
    from .constants import DIAMOND, material_from_config

    return material_from_config(cfg["material"]) if "material" in cfg else DIAMOND


def _siv_from_config(cfg: dict):
    from .hamiltonian import SivParams

    return SivParams.from_config(cfg.get("siv", {}))


def _q_from_config(cfg: dict):
    from .rates import QModel

    return QModel.from_config(cfg.get("q_model", {}))


def _band_from_config(cfg: dict):
    band = cfg.get("band_GHz", [0.0, 200.0])
    return float(band[0]) * 1e9, float(band[1]) * 1e9


def _delta_from_config(cfg: dict) -> float:
    return float(cfg.get("delta_GS_GHz", 46.0)) * 1e9


def handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ValidationError as exc:
            json.dump({"error": "validation", "message": str(exc)}, sys.stderr)
            sys.stderr.write("\n")
            sys.exit(EXIT_VALIDATION)
        except NumericalError as exc:
            json.dump({"error": "numerical", "message": str(exc)}, sys.stderr)
            sys.stderr.write("\n")
            sys.exit(EXIT_NUMERICAL)

    return wrapper


@click.group()
@click.option("--config", "config_path", type=click.Path(), default=None, help="JSON run config")
@click.option("--out", "out_dir", type=click.Path(), default=".", help="output directory")
@click.option("--threads", type=int, default=None, help="BLAS/OpenMP thread cap")
@click.option("--format", "out_format", type=click.Choice(["json", "csv"]), default="json")
@click.pass_context
def main(ctx, config_path, out_dir, threads, out_format):
    """Nanodiamond SiV- orbital relaxation toolkit."""
    if threads is not None:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(threads)
    ctx.ensure_object(dict)
    ctx.obj["config_path"] = config_path
    ctx.obj["out"] = Path(out_dir)
    ctx.obj["out"].mkdir(parents=True, exist_ok=True)
    ctx.obj["format"] = out_format


@main.command()
@click.pass_context
@handle_errors
def scene(ctx):
    """Build the voxel scene mesh and write it to mesh.json."""
    from .mesh import build_scene, write_mesh

    cfg = _load_config(ctx.obj["config_path"])
    mesh = _build_scene_checked(cfg)
    path = ctx.obj["out"] / "mesh.json"
    write_mesh(mesh, path)
    _write_json(
        {
            **_stamp(cfg),
            "mesh_file": str(path),
            "n_nodes": mesh.n_nodes,
            "n_elements": mesh.n_elements,
        },
        ctx.obj["out"] / "scene_summary.json",
    )
    click.echo(str(path))


def _build_scene_checked(cfg):
    from .mesh import build_scene

    return build_scene(_scene_from_config(cfg))


@main.command()
@click.argument("mesh_file", type=click.Path(exists=True))
@click.option("--json-modes", is_flag=True, help="write the mode file as pure JSON")
@click.pass_context
@handle_errors
def solve(ctx, mesh_file, json_modes):
    """Solve eigenmodes of MESH_FILE in the configured band; write modes.bin."""
    from .fem import assemble, solve_modes, write_modes
    from .mesh import read_mesh

    cfg = _load_config(ctx.obj["config_path"])
    mesh = read_mesh(mesh_file)
    system = assemble(mesh, _material_from_config(cfg))
    band = _band_from_config(cfg)
    modes = solve_modes(
        system,
        mesh,
        band,
        max_modes=int(cfg.get("max_modes", 400)),
        q_model=_q_from_config(cfg),
    )
    path = ctx.obj["out"] / ("modes.json" if json_modes else "modes.bin")
    write_modes(modes, path, fmt="json" if json_modes else "binary")
    _write_json(
        {
            **_stamp(cfg),
            "mode_file": str(path),
            "n_modes": len(modes),
            "band_GHz": [band[0] / 1e9, band[1] / 1e9],
            "frequencies_GHz": [f / 1e9 for f in modes.freqs_hz],
        },
        ctx.obj["out"] / "solve_summary.json",
    )
    click.echo(str(path))


@main.command()
@click.argument("mode_file", type=click.Path(exists=True))
@click.option("--sigma-ghz", type=float, default=1.0, help="Gaussian kernel width")
@click.option("--band-ghz", nargs=2, type=float, required=True, help="power-law fit band")
@click.option("--step-ghz", type=float, default=0.25, help="DOS grid step")
@click.pass_context
@handle_errors
def dos(ctx, mode_file, sigma_ghz, band_ghz, step_ghz):
    """Density of states of MODE_FILE plus a power-law fit over --band-ghz."""
    from .dos import dos as dos_curve
    from .dos import fit_power_law, write_dos_csv, write_fit_sidecar
    from .fem import read_modes

    cfg = _load_config(ctx.obj["config_path"]) if ctx.obj["config_path"] else {}
    modes = read_modes(mode_file)
    elastic = modes.elastic()
    if len(elastic) == 0:
        raise ValidationError("mode file contains no elastic modes")
    f_max = float(elastic.freqs_hz.max())
    curve = dos_curve(modes, sigma_ghz * 1e9, (0.0, f_max + 5 * sigma_ghz * 1e9, step_ghz * 1e9))
    fit = fit_power_law(curve, (band_ghz[0] * 1e9, band_ghz[1] * 1e9))
    csv_path = ctx.obj["out"] / "dos.csv"
    write_dos_csv(curve, csv_path)
    sidecar = ctx.obj["out"] / "dos_fit.json"
    write_fit_sidecar(fit, sidecar)
    _write_json(
        {**_stamp(cfg), "dos_csv": str(csv_path), "fit": {"p": fit.exponent, "rmse": fit.rmse}},
        ctx.obj["out"] / "dos_summary.json",
    )
    click.echo(str(csv_path))


@main.command("map")
@click.argument("mesh_file", type=click.Path(exists=True))
@click.argument("mode_file", type=click.Path(exists=True))
@click.option("--svg", is_flag=True, help="also render an xz-plane SVG heatmap")
@click.pass_context
@handle_errors
def map_cmd(ctx, mesh_file, mode_file, svg):
    """T1 ratio map over the xz-plane element centers."""
    import numpy as np

    from .fem import read_modes
    from .mesh import read_mesh
    from .rates import render_map_svg, t1_map, write_map_csv

    cfg = _load_config(ctx.obj["config_path"])
    mesh = read_mesh(mesh_file)
    modes = read_modes(mode_file)
    y0 = float(cfg.get("grid", {}).get("y_m", 0.0))
    centers = mesh.element_centers()
    # slice the single element layer whose centers lie nearest the requested
    # plane (the plane may coincide with an element face)
    dist = np.abs(centers[:, 1] - y0)
    y_near = centers[np.argmin(dist), 1]
    sel = np.abs(centers[:, 1] - y_near) < mesh.spacing / 2
    if not sel.any():
        raise ValidationError(f"no elements intersect the y = {y0:g} m plane")
    rmap = t1_map(
        modes,
        mesh,
        centers[sel],
        _siv_from_config(cfg),
        _delta_from_config(cfg),
        float(cfg.get("temperature_K", 0.0)),
        _q_from_config(cfg),
    )
    csv_path = ctx.obj["out"] / "t1_map.csv"
    write_map_csv(rmap, csv_path, ctx.obj["out"] / "t1_map_meta.json")
    if svg:
        render_map_svg(rmap, ctx.obj["out"] / "t1_map.svg")
    _write_json(
        {**_stamp(cfg), "map_csv": str(csv_path), **rmap.metadata},
        ctx.obj["out"] / "map_summary.json",
    )
    click.echo(str(csv_path))


@main.command()
@click.pass_context
@handle_errors
def bulk(ctx):
    """Analytical bulk T1 for the configured splitting and temperature."""
    from .rates import t1_bulk_analytic

    cfg = _load_config(ctx.obj["config_path"])
    t1 = t1_bulk_analytic(
        _material_from_config(cfg),
        _siv_from_config(cfg),
        _delta_from_config(cfg),
        float(cfg.get("temperature_K", 0.0)),
    )
    doc = {**_stamp(cfg), "T1_bulk_s": t1}
    _write_json(doc, ctx.obj["out"] / "bulk.json")
    click.echo(json.dumps(doc, sort_keys=True))


@main.command("analyze-spectrum")
@click.argument("spectrum_csv", type=click.Path(exists=True))
@click.pass_context
@handle_errors
def analyze_spectrum(ctx, spectrum_csv):
    """Fit the four-line spectrum: splittings and Boltzmann temperature."""
    from .experiment import Spectrum, fit_four_lines, splittings, temperature

    cfg = _load_config(ctx.obj["config_path"]) if ctx.obj["config_path"] else {}
    spec = Spectrum.from_csv(spectrum_csv)
    lines = fit_four_lines(spec)
    delta_es, delta_gs = splittings(lines)
    t = temperature(lines, delta_es)
    doc = {
        **_stamp(cfg),
        "delta_ES_GHz": delta_es / 1e9,
        "delta_GS_GHz": delta_gs / 1e9,
        "T_K": t,
        "lines": {
            name: {"center_Hz": ln.center, "fwhm_Hz": ln.fwhm, "area": ln.area}
            for name, ln in zip("ABCD", lines.lines)
        },
    }
    path = ctx.obj["out"] / "spectrum_analysis.json"
    _write_json(doc, path)
    click.echo(str(path))


@main.command("analyze-t1")
@click.argument("trace_csv", type=click.Path(exists=True))
@click.argument("schedule_json", type=click.Path(exists=True))
@click.pass_context
@handle_errors
def analyze_t1(ctx, trace_csv, schedule_json):
    """Extract peak heights from the pulse trace and fit the T1 recovery."""
    from .experiment import PulseTrace, fit_t1, peak_heights

    cfg = _load_config(ctx.obj["config_path"]) if ctx.obj["config_path"] else {}
    trace = PulseTrace.from_files(trace_csv, schedule_json)
    pts = peak_heights(trace)
    fit = fit_t1(pts)
    doc = {
        **_stamp(cfg),
        "T1_ns": fit.t1 * 1e9,
        "sigma_T1_ns": fit.t1_err * 1e9,
        "amplitude": fit.amplitude,
        "n_pulses": int(pts.shape[0]),
    }
    path = ctx.obj["out"] / "t1_analysis.json"
    _write_json(doc, path)
    click.echo(str(path))


@main.command()
@click.option("--spectrum-json", type=click.Path(exists=True), required=True)
@click.option("--t1-json", type=click.Path(exists=True), required=True)
@click.pass_context
@handle_errors
def report(ctx, spectrum_json, t1_json):
    """Combine prior analyses into a lifetime-extension table row."""
    from .rates import t1_bulk_analytic

    cfg = _load_config(ctx.obj["config_path"]) if ctx.obj["config_path"] else {}
    with open(spectrum_json) as f:
        spec = json.load(f)
    with open(t1_json) as f:
        t1doc = json.load(f)
    delta_gs = float(spec["delta_GS_GHz"]) * 1e9
    t_k = float(spec["T_K"])
    t1 = float(t1doc["T1_ns"]) * 1e-9
    t1_bulk = t1_bulk_analytic(_material_from_config(cfg), _siv_from_config(cfg), delta_gs, t_k)
    doc = {
        **_stamp(cfg),
        "delta_GS_GHz": delta_gs / 1e9,
        "T_K": t_k,
        "T1_ns": t1 * 1e9,
        "T1_bulk_ns": t1_bulk * 1e9,
        "ratio_to_bulk": t1 / t1_bulk,
    }
    path = ctx.obj["out"] / "report.json"
    _write_json(doc, path)
    click.echo(json.dumps(doc, sort_keys=True))


if __name__ == "__main__":
    main()
