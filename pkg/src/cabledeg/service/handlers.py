"""Service logic: one plain function per endpoint.

The CLI calls these directly when no server is configured; the FastAPI
app wraps them one-to-one. Timings are logged, never embedded in
responses, so identical requests produce identical response bodies.
"""

from __future__ import annotations

import base64
import logging
import tempfile
import time
from pathlib import Path

from .. import planar as planar_mod
from ..errors import WindingGuardError
from ..geom3d import (
    cable_index,
    load_mesh,
    solid_angle_winding,
    total_degree,
    validate_mesh,
    voxel_regions,
)
from ..geom3d.crossings import round_winding
from ..homotopy import builtin_homotopy, load_frames, verify_lower_bound
from ..words import CableSystemWord, _check_cable, parse_word_file, reduce_word
from . import models

log = logging.getLogger("cabledeg.service")


def _mesh_from_text(text: str, fmt: str, name: str = "mesh"):
    """Parse inline mesh text via a scratch file, keeping errors readable."""
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / f"{name}.{fmt}"
        path.write_text(text)
        try:
            return load_mesh(path)
        except Exception as exc:
            _rewrite_path(exc, tmp, "<request>")
            raise


def _rewrite_path(exc: Exception, tmp: str, replacement: str) -> None:
    """Strip scratch-directory paths out of an exception message."""
    if exc.args and isinstance(exc.args[0], str):
        exc.args = (exc.args[0].replace(tmp + "/", replacement + ":"),) + exc.args[1:]


def reduce(req: models.ReduceRequest) -> models.ReduceResponse:
    t0 = time.perf_counter()
    words = parse_word_file(req.words)
    cables = []
    for word in words:
        term = reduce_word(word)
        check = _check_cable(word)
        cables.append(
            models.CableResult(
                cable_id=word.cable_id,
                coefficient=term.coefficient,
                source=str(term.source),
                target=str(term.target),
                n_symbols=len(word),
                simple=check.simple,
                violations=list(check.violations),
            )
        )
    notes: list[str] = []
    missing: list[str] = []
    if words:
        try:
            system = CableSystemWord.from_words(words)
        except ValueError as exc:
            notes.append(f"not a one-cable-per-region system: {exc}")
        else:
            missing = sorted(str(r) for r in system.missing_words)
            notes.append(
                "pairwise cable disjointness is geometric; not checkable at word level"
            )
    log.info("reduce: %d cables in %.3fms", len(cables), 1e3 * (time.perf_counter() - t0))
    return models.ReduceResponse(
        cables=cables,
        all_simple=all(c.simple for c in cables),
        missing_words=missing,
        notes=notes,
    )


def _region_models(rm) -> list[models.RegionModel]:
    return [
        models.RegionModel(
            label=info.label.label,
            index=info.index,
            volume=info.volume,
            voxel_count=info.voxel_count,
            interior_count=info.interior_count,
            representative=list(info.representative),
        )
        for info in rm.regions
    ]


def regions(req: models.RegionsRequest) -> models.RegionsResponse:
    t0 = time.perf_counter()
    mesh = _mesh_from_text(req.mesh, req.mesh_format)
    report = validate_mesh(mesh)
    rm = voxel_regions(mesh, resolution=req.resolution)
    labels = (
        base64.b64encode(rm.dump_labels()).decode("ascii") if req.include_labels else None
    )
    log.info(
        "regions: %d regions at resolution %d in %.1fms",
        rm.n_regions,
        req.resolution,
        1e3 * (time.perf_counter() - t0),
    )
    return models.RegionsResponse(
        origin=list(rm.origin),
        voxel_size=rm.voxel_size,
        shape=list(rm.shape),
        regions=_region_models(rm),
        unassigned_count=rm.unassigned_count,
        notes=list(rm.notes),
        mesh_report=models.MeshReportModel(**report.to_dict()),
        labels_base64=labels,
    )


def vdeg(req: models.VdegRequest) -> models.VdegResponse:
    t0 = time.perf_counter()
    mesh = _mesh_from_text(req.mesh, req.mesh_format)
    td = total_degree(mesh, resolution=req.resolution)
    log.info("vdeg: resolution %d in %.1fms", req.resolution, 1e3 * (time.perf_counter() - t0))
    return models.VdegResponse(
        degree=td.degree,
        vdeg=td.vdeg,
        regions=_region_models(td.region_map),
    )


def index(req: models.IndexRequest) -> models.IndexResponse:
    t0 = time.perf_counter()
    mesh = _mesh_from_text(req.mesh, req.mesh_format)
    idx = cable_index(req.point, mesh, retry_budget=req.retries, seed=req.seed)
    winding = solid_angle_winding(req.point, mesh)
    try:
        oracle = round_winding(winding)
    except WindingGuardError:
        # Crossing route succeeded but the oracle sits in the guard
        # band: report the raw winding and the disagreement.
        oracle = idx
        return models.IndexResponse(
            index=idx, winding=winding, oracle_index=oracle, oracle_agrees=False
        )
    log.info("index: point %s in %.1fms", req.point, 1e3 * (time.perf_counter() - t0))
    return models.IndexResponse(
        index=idx,
        winding=winding,
        oracle_index=oracle,
        oracle_agrees=oracle == idx,
    )


def sweep(req: models.SweepRequest) -> models.SweepResponse:
    t0 = time.perf_counter()
    if req.frames is not None:
        if len(req.frames) < 2:
            raise ValueError("frames list needs at least 2 meshes")
        with tempfile.TemporaryDirectory() as tmp:
            width = max(4, len(str(len(req.frames))))
            for k, text in enumerate(req.frames):
                (Path(tmp) / f"frame_{k:0{width}d}.{req.mesh_format}").write_text(text)
            try:
                h = load_frames(tmp)
            except Exception as exc:
                _rewrite_path(exc, tmp, "<frames>")
                raise
    else:
        if req.mesh is None:
            raise ValueError("sweep needs either a mesh (for a built-in) or frames")
        mesh = _mesh_from_text(req.mesh, req.mesh_format)
        h = builtin_homotopy(
            req.homotopy, mesh, n_frames=req.n_frames, seed=req.seed, amplitude=req.amplitude
        )
    report = verify_lower_bound(h, resolution=req.resolution)
    log.info(
        "sweep: %d frames, resolution %d in %.1fms",
        h.n_steps + 1,
        req.resolution,
        1e3 * (time.perf_counter() - t0),
    )
    return models.SweepResponse(
        swept_volume=report.swept.volume,
        degree=report.degree,
        vdeg=report.vdeg,
        margin_degree=report.margin_degree,
        margin_vdeg=report.margin_vdeg,
        tolerance=report.tolerance,
        violation=report.violation,
        sense=models.SenseModel(**report.sense.to_dict()),
        stationary_prisms=report.swept.stationary_prisms,
        mixed_sign_prisms=report.swept.mixed_sign_prisms,
        n_frames=h.n_steps + 1,
    )


def planar(req: models.PlanarRequest) -> models.PlanarResponse:
    t0 = time.perf_counter()
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "curve.txt"
        path.write_text(req.curve)
        try:
            curve = planar_mod.load_curve(path)
        except Exception as exc:
            _rewrite_path(exc, tmp, "<request>")
            raise
    bound = planar_mod.homotopy_area_bound(curve, resolution=req.resolution)
    rm = bound.region_map
    labels = (
        base64.b64encode(rm.dump_labels()).decode("ascii") if req.include_labels else None
    )
    log.info(
        "planar: %d regions at resolution %d in %.1fms",
        len(rm.regions),
        req.resolution,
        1e3 * (time.perf_counter() - t0),
    )
    return models.PlanarResponse(
        weighted_area=bound.weighted_area,
        signed_area=bound.signed_area,
        origin=list(rm.origin),
        pixel_size=rm.pixel_size,
        shape=list(rm.shape),
        regions=[
            models.PlanarRegionModel(
                label=info.label.label,
                winding=info.winding,
                area=info.area,
                pixel_count=info.pixel_count,
                representative=list(info.representative),
            )
            for info in rm.regions
        ],
        notes=list(rm.notes),
        labels_base64=labels,
    )
