"""Command-line client for the cable-degree toolkit.

Every command builds a typed request, hands it to the service layer
(in-process by default, or a remote server via --server), and renders
the response as human-readable text or canonical JSON. Reports never
embed wall-clock timings; set CABLEDEG_LOG=INFO to see those on
stderr, which keeps equal configurations byte-identical on stdout.
"""

from __future__ import annotations

import base64
import json
import logging
import os
import sys
from pathlib import Path

import click
from pydantic import ValidationError

from . import __version__
from .errors import CableDegError
from .service import handlers, models

log = logging.getLogger("cabledeg.cli")

FORMAT_CHOICES = click.Choice(["text", "structured"])


def _configure_logging() -> None:
    level_name = os.environ.get("CABLEDEG_LOG", "WARNING").upper()
    level = getattr(logging, level_name, logging.WARNING)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(name)s: %(message)s")


def _parse_point(_ctx, _param, value: str):
    parts = value.replace(" ", "").split(",")
    if len(parts) != 3:
        raise click.BadParameter(f"expected x,y,z, got {value!r}")
    try:
        return [float(p) for p in parts]
    except ValueError as exc:
        raise click.BadParameter(f"bad coordinate in {value!r}") from exc


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise click.ClickException(f"cannot read {path}: {exc}") from exc


def _mesh_format(path: str) -> str:
    suffix = Path(path).suffix.lower().lstrip(".")
    if suffix not in ("off", "obj"):
        raise click.ClickException(f"unsupported mesh format {suffix!r} (expected .off or .obj)")
    return suffix


def _dispatch(server: str | None, endpoint: str, request) -> dict:
    """Run a request against the in-process handlers or a remote server."""
    if server:
        import httpx

        url = f"{server.rstrip('/')}/{endpoint}"
        try:
            resp = httpx.post(url, json=request.model_dump(), timeout=600.0)
        except httpx.HTTPError as exc:
            raise click.ClickException(f"request to {url} failed: {exc}") from exc
        if resp.status_code != 200:
            try:
                body = resp.json()
                message = f"{body['error']}: {body['message']}"
            except Exception:
                message = f"server returned {resp.status_code}: {resp.text[:500]}"
            raise click.ClickException(message)
        return resp.json()
    try:
        handler = getattr(handlers, endpoint)
        return handler(request).model_dump()
    except CableDegError as exc:
        raise click.ClickException(f"{type(exc).__name__}: {exc}") from exc
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc


def _emit(payload: dict, fmt: str, out: str | None, to_text) -> None:
    if fmt == "structured":
        rendered = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    else:
        rendered = to_text(payload)
        if not rendered.endswith("\n"):
            rendered += "\n"
    if out:
        Path(out).write_text(rendered)
    else:
        click.echo(rendered, nl=False)


def _write_labels(payload: dict, dump_path: str | None) -> None:
    if dump_path is None:
        return
    encoded = payload.get("labels_base64")
    if encoded is None:
        raise click.ClickException("response carried no label dump")
    Path(dump_path).write_bytes(base64.b64decode(encoded))
    payload["labels_base64"] = None  # keep reports compact once dumped


def _wrap_validation(build):
    try:
        return build()
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(p) for p in first["loc"])
        raise click.ClickException(f"invalid {where}: {first['msg']}") from exc


# --------------------------------------------------------------------------
# Renderers


def _text_reduce(d: dict) -> str:
    lines = []
    for c in d["cables"]:
        simple = "yes" if c["simple"] else "no"
        lines.append(
            f"cable {c['cable_id']}: n={c['coefficient']} "
            f"({c['source']} -> {c['target']}), symbols={c['n_symbols']}, simple={simple}"
        )
        for violation in c["violations"]:
            lines.append(f"  violation: {violation}")
    if d["missing_words"]:
        lines.append("regions without a cable: " + ", ".join(d["missing_words"]))
    for note in d["notes"]:
        lines.append(f"note: {note}")
    if not d["cables"]:
        lines.append("no cable words")
    return "\n".join(lines)


def _text_region_lines(regions: list[dict], quantity: str) -> list[str]:
    lines = []
    for r in regions:
        rep = ", ".join(f"{x:.4f}" for x in r["representative"])
        count = r.get("voxel_count", r.get("pixel_count"))
        key = "index" if "index" in r else "winding"
        lines.append(
            f"region {r['label']}: {key}={r[key]} {quantity}={r[quantity]:.6f} "
            f"cells={count} rep=({rep})"
        )
    return lines


def _text_regions(d: dict) -> str:
    mr = d["mesh_report"]
    lines = [
        f"mesh: closed={'yes' if mr['closed'] else 'no'} "
        f"oriented={'yes' if mr['oriented'] else 'no'} "
        f"triangles={mr['n_triangles']} components={mr['n_components']}",
        f"grid: shape={tuple(d['shape'])} voxel={d['voxel_size']:.6f} "
        f"origin=({', '.join(f'{x:.4f}' for x in d['origin'])})",
    ]
    lines += _text_region_lines(d["regions"], "volume")
    if d["unassigned_count"]:
        lines.append(f"unassigned surface voxels: {d['unassigned_count']}")
    for note in mr["notes"] + d["notes"]:
        lines.append(f"note: {note}")
    return "\n".join(lines)


def _text_vdeg(d: dict) -> str:
    lines = [f"D = {d['degree']:.6f}", f"V_deg = {d['vdeg']:.6f}"]
    lines += _text_region_lines(d["regions"], "volume")
    return "\n".join(lines)


def _text_index(d: dict) -> str:
    agrees = "agrees" if d["oracle_agrees"] else "DISAGREES"
    return "\n".join(
        [
            f"index = {d['index']}",
            f"winding oracle = {d['winding']:.6f} (rounds to {d['oracle_index']}, {agrees})",
        ]
    )


def _text_sweep(d: dict) -> str:
    s = d["sense"]
    sense = "yes" if s["sense_preserving"] else ("degenerate" if s["degenerate"] else "no")
    lines = [
        f"swept volume = {d['swept_volume']:.6f} ({d['n_frames']} frames)",
        f"D = {d['degree']:.6f}, V_deg = {d['vdeg']:.6f}",
        f"margin over |D| = {d['margin_degree']:.6f}",
        f"margin over V_deg = {d['margin_vdeg']:.6f}",
        f"tolerance = {d['tolerance']:.6f}",
        f"violation = {'YES' if d['violation'] else 'no'}",
        f"sense-preserving = {sense} "
        f"(+{s['n_positive']}/-{s['n_negative']}/0:{s['n_zero']})",
    ]
    if d["stationary_prisms"] or d["mixed_sign_prisms"]:
        lines.append(
            f"prism annex: stationary={d['stationary_prisms']} "
            f"mixed-sign={d['mixed_sign_prisms']}"
        )
    return "\n".join(lines)


def _text_planar(d: dict) -> str:
    lines = [
        f"weighted area = {d['weighted_area']:.6f}",
        f"signed area = {d['signed_area']:.6f}",
        f"grid: shape={tuple(d['shape'])} pixel={d['pixel_size']:.6f}",
    ]
    lines += _text_region_lines(d["regions"], "area")
    for note in d["notes"]:
        lines.append(f"note: {note}")
    return "\n".join(lines)


# --------------------------------------------------------------------------
# Commands


@click.group()
@click.version_option(__version__)
@click.option(
    "--server",
    default=None,
    envvar="CABLEDEG_SERVER",
    help="Base URL of a running service; defaults to in-process execution.",
)
@click.pass_context
def main(ctx: click.Context, server: str | None) -> None:
    """Cable indices, region degrees, and null-homotopy volume bounds."""
    _configure_logging()
    ctx.ensure_object(dict)
    ctx.obj["server"] = server


@main.command()
@click.option("--words", "words_path", required=True, type=click.Path(), help="Word file.")
@click.option("--out", default=None, type=click.Path(), help="Write the report here.")
@click.option("--format", "fmt", default="text", type=FORMAT_CHOICES)
@click.pass_context
def reduce(ctx, words_path: str, out: str | None, fmt: str) -> None:
    """Reduce every cable word in a file to its coefficient."""
    req = _wrap_validation(lambda: models.ReduceRequest(words=_read(words_path)))
    payload = _dispatch(ctx.obj["server"], "reduce", req)
    _emit(payload, fmt, out, _text_reduce)


@main.command()
@click.option("--mesh", "mesh_path", required=True, type=click.Path(), help="OFF or OBJ mesh.")
@click.option("--resolution", default=64, show_default=True, help="Voxels per axis.")
@click.option(
    "--dump-labels",
    default=None,
    type=click.Path(),
    help="Write the raw voxel-label dump (int32 little-endian, x,y,z row-major) here.",
)
@click.option("--out", default=None, type=click.Path())
@click.option("--format", "fmt", default="text", type=FORMAT_CHOICES)
@click.pass_context
def regions(ctx, mesh_path, resolution, dump_labels, out, fmt) -> None:
    """Decompose the complement of a mesh into indexed regions."""
    req = _wrap_validation(
        lambda: models.RegionsRequest(
            mesh=_read(mesh_path),
            mesh_format=_mesh_format(mesh_path),
            resolution=resolution,
            include_labels=dump_labels is not None,
        )
    )
    payload = _dispatch(ctx.obj["server"], "regions", req)
    _write_labels(payload, dump_labels)
    _emit(payload, fmt, out, _text_regions)


@main.command()
@click.option("--mesh", "mesh_path", required=True, type=click.Path())
@click.option("--resolution", default=64, show_default=True)
@click.option("--out", default=None, type=click.Path())
@click.option("--format", "fmt", default="text", type=FORMAT_CHOICES)
@click.pass_context
def vdeg(ctx, mesh_path, resolution, out, fmt) -> None:
    """Total degree D and degree-weighted volume V_deg of a mesh."""
    req = _wrap_validation(
        lambda: models.VdegRequest(
            mesh=_read(mesh_path),
            mesh_format=_mesh_format(mesh_path),
            resolution=resolution,
        )
    )
    payload = _dispatch(ctx.obj["server"], "vdeg", req)
    _emit(payload, fmt, out, _text_vdeg)


@main.command()
@click.option("--mesh", "mesh_path", required=True, type=click.Path())
@click.option("--point", required=True, callback=_parse_point, help="Probe point x,y,z.")
@click.option("--seed", default=0, show_default=True, help="Jitter seed for retries.")
@click.option("--retries", default=12, show_default=True, help="Degenerate-cable retry budget.")
@click.option("--out", default=None, type=click.Path())
@click.option("--format", "fmt", default="text", type=FORMAT_CHOICES)
@click.pass_context
def index(ctx, mesh_path, point, seed, retries, out, fmt) -> None:
    """Cable index of a point, cross-checked against the winding oracle."""
    req = _wrap_validation(
        lambda: models.IndexRequest(
            mesh=_read(mesh_path),
            mesh_format=_mesh_format(mesh_path),
            point=point,
            seed=seed,
            retries=retries,
        )
    )
    payload = _dispatch(ctx.obj["server"], "index", req)
    _emit(payload, fmt, out, _text_index)


@main.command()
@click.option("--mesh", "mesh_path", default=None, type=click.Path(), help="Initial mesh.")
@click.option(
    "--homotopy",
    default="radial",
    type=click.Choice(["radial", "translate-return", "wobble"]),
    show_default=True,
)
@click.option("--frames", "frames_dir", default=None, type=click.Path(), help="Frame directory.")
@click.option("--n-frames", default=64, show_default=True, help="Frames for built-ins.")
@click.option("--amplitude", default=0.3, show_default=True, help="Wobble amplitude.")
@click.option("--resolution", default=64, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", default=None, type=click.Path())
@click.option("--format", "fmt", default="text", type=FORMAT_CHOICES)
@click.pass_context
def sweep(ctx, mesh_path, homotopy, frames_dir, n_frames, amplitude, resolution, seed, out, fmt):
    """Verify the swept-volume lower bound for a null homotopy."""
    if frames_dir is None and mesh_path is None:
        raise click.ClickException("sweep needs --mesh (built-in homotopy) or --frames DIR")
    frames = None
    mesh_text = None
    mesh_fmt = "off"
    if frames_dir is not None:
        frame_paths = sorted(
            p for p in Path(frames_dir).iterdir() if p.suffix.lower() in (".off", ".obj")
        )
        if len(frame_paths) < 2:
            raise click.ClickException(f"{frames_dir}: need at least 2 frame meshes")
        mesh_fmt = _mesh_format(str(frame_paths[0]))
        frames = [_read(str(p)) for p in frame_paths]
    else:
        mesh_text = _read(mesh_path)
        mesh_fmt = _mesh_format(mesh_path)
    req = _wrap_validation(
        lambda: models.SweepRequest(
            mesh=mesh_text,
            mesh_format=mesh_fmt,
            homotopy=homotopy,
            n_frames=n_frames,
            seed=seed,
            amplitude=amplitude,
            frames=frames,
            resolution=resolution,
        )
    )
    payload = _dispatch(ctx.obj["server"], "sweep", req)
    _emit(payload, fmt, out, _text_sweep)


@main.command()
@click.option("--curve", "curve_path", required=True, type=click.Path(), help="Curve file.")
@click.option("--resolution", default=128, show_default=True, help="Pixels per axis.")
@click.option(
    "--dump-labels",
    default=None,
    type=click.Path(),
    help="Write the raw pixel-label dump (int32 little-endian, x,y row-major) here.",
)
@click.option("--out", default=None, type=click.Path())
@click.option("--format", "fmt", default="text", type=FORMAT_CHOICES)
@click.pass_context
def planar(ctx, curve_path, resolution, dump_labels, out, fmt) -> None:
    """Winding-weighted area bound for a closed planar curve."""
    req = _wrap_validation(
        lambda: models.PlanarRequest(
            curve=_read(curve_path),
            resolution=resolution,
            include_labels=dump_labels is not None,
        )
    )
    payload = _dispatch(ctx.obj["server"], "planar", req)
    _write_labels(payload, dump_labels)
    _emit(payload, fmt, out, _text_planar)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8731, show_default=True)
def serve(host: str, port: int) -> None:
    """Run the HTTP service."""
    import uvicorn

    from .service import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
