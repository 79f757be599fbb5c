"""Planar specialization: winding numbers of closed polygonal curves.

Everything here mirrors the 3D pipeline one dimension down. A probe ray
to a far exterior anchor plays the cable; the crossing sign comes from
the 2D cross product of ray direction and edge direction; pixels play
voxels. Winding numbers are computed twice, by signed ray crossings and
by the turning-angle sum, so each route checks the other.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import DegenerateCrossing, MeshFormatError, RetriesExhausted, WindingGuardError
from .words import EXTERIOR, RegionId, region

__all__ = [
    "PolyCurve",
    "PlanarRegionInfo",
    "PlanarRegionMap",
    "AreaBound",
    "load_curve",
    "save_curve",
    "unit_square",
    "circle_curve",
    "figure_eight",
    "winding_crossings",
    "winding_angle",
    "planar_regions",
    "homotopy_area_bound",
]

RAY_EPS = 1e-12
ANGLE_GUARD = 0.25
SURFACE = -1


@dataclass(frozen=True)
class PolyCurve:
    """Closed polygonal curve; the last point connects back to the first."""

    points: np.ndarray

    def __post_init__(self):
        p = np.ascontiguousarray(np.asarray(self.points, dtype=np.float64))
        if p.ndim != 2 or p.shape[1] != 2:
            raise ValueError(f"curve points must be (k, 2), got {p.shape}")
        if len(p) < 3:
            raise ValueError("closed curve needs at least 3 points")
        closed_pairs = np.vstack([p, p[:1]])
        if (np.linalg.norm(np.diff(closed_pairs, axis=0), axis=1) == 0.0).any():
            raise ValueError("curve has repeated consecutive points")
        object.__setattr__(self, "points", p)

    @property
    def n_edges(self) -> int:
        return len(self.points)

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Edge start and end arrays, each (n, 2), wrapping around."""
        p = self.points
        return p, np.roll(p, -1, axis=0)

    def reversed(self) -> "PolyCurve":
        return PolyCurve(self.points[::-1].copy())

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return self.points.min(axis=0), self.points.max(axis=0)

    def signed_area(self) -> float:
        """Shoelace area; positive for counter-clockwise simple curves."""
        a, b = self.edges()
        return float(np.sum(a[:, 0] * b[:, 1] - b[:, 0] * a[:, 1]) / 2.0)


def load_curve(path: str | Path) -> PolyCurve:
    """Read a closed curve: one 'x y' vertex per line, # comments allowed."""
    path = Path(path)
    pts = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 2:
            raise MeshFormatError(f"{path}:{lineno}: expected 2 coordinates, got {line!r}")
        try:
            pts.append([float(x) for x in parts])
        except ValueError as exc:
            raise MeshFormatError(f"{path}:{lineno}: bad coordinate in {line!r}") from exc
    if len(pts) < 3:
        raise MeshFormatError(f"{path}: closed curve needs at least 3 points")
    try:
        return PolyCurve(np.array(pts))
    except ValueError as exc:
        raise MeshFormatError(f"{path}: {exc}") from exc


def save_curve(curve: PolyCurve, path: str | Path) -> None:
    with Path(path).open("w") as fh:
        for x, y in curve.points:
            fh.write(f"{float(x)!r} {float(y)!r}\n")


# --------------------------------------------------------------------------
# Sample curves


def unit_square(ccw: bool = True) -> PolyCurve:
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    return PolyCurve(pts if ccw else pts[::-1])


def circle_curve(
    radius: float = 1.0,
    turns: int = 1,
    samples_per_turn: int = 64,
    center: tuple[float, float] = (0.0, 0.0),
) -> PolyCurve:
    """Circle traversed `turns` times (CCW for positive turns)."""
    if turns == 0:
        raise ValueError("turns must be nonzero")
    total = samples_per_turn * abs(turns)
    theta = np.linspace(0.0, 2.0 * np.pi * turns, total, endpoint=False)
    pts = np.column_stack([np.cos(theta), np.sin(theta)]) * radius
    # Successive turns get a tiny radial swirl so consecutive vertices
    # of different turns never coincide exactly.
    swirl = 1.0 + 1e-9 * np.arange(total)
    return PolyCurve(pts * swirl[:, None] + np.asarray(center))


def figure_eight(lobe: float = 1.0, samples: int = 128) -> PolyCurve:
    """Figure-eight with one CCW and one CW lobe of equal area.

    Gerono lemniscate (sin 2t, sin t) scaled so each lobe has area
    lobe; the upper lobe is traversed counter-clockwise (winding +1),
    the lower one clockwise (winding -1).
    """
    t = np.linspace(0.0, 2.0 * np.pi, samples, endpoint=False)
    x = np.sin(2.0 * t)
    y = np.sin(t)
    # Each lobe of (sin 2t, sin t) has area 4/3.
    scale = np.sqrt(lobe / (4.0 / 3.0))
    return PolyCurve(np.column_stack([x, y]) * scale)


# --------------------------------------------------------------------------
# Winding by signed ray crossings


def _ray_crossings(point: np.ndarray, direction: np.ndarray, curve: PolyCurve) -> int:
    """Signed crossings of the ray point + s*direction, s > 0.

    Raises DegenerateCrossing on hits within tolerance of an edge
    endpoint or on near-parallel incidence.
    """
    a, b = curve.edges()
    e = b - a
    # Solve point + s*d = a + u*e per edge.
    denom = direction[0] * e[:, 1] - direction[1] * e[:, 0]
    rel = a - point
    s_num = rel[:, 0] * e[:, 1] - rel[:, 1] * e[:, 0]
    u_num = rel[:, 0] * direction[1] - rel[:, 1] * direction[0]

    scale = max(float(np.abs(e).max()), 1.0)
    parallel = np.abs(denom) < RAY_EPS * scale
    if parallel.any():
        # A parallel edge is degenerate only if it lies on the ray's
        # line; rel parallel to the direction detects that.
        rel_norm = np.linalg.norm(rel, axis=1) + 1.0
        on_line = parallel & (np.abs(u_num) < 1e-9 * rel_norm)
        if on_line.any():
            k = int(np.nonzero(on_line)[0][0])
            raise DegenerateCrossing(
                f"ray runs along curve edge {k}", segment=0, triangle=k
            )

    live = ~parallel
    safe = np.where(live, denom, 1.0)
    s = np.where(live, s_num / safe, -1.0)
    u = np.where(live, u_num / safe, -1.0)

    eps = 1e-9
    u_band = (u > -eps) & (u < 1.0 + eps)
    # Ray origin on the edge itself (s ~ 0), or a hit grazing a vertex.
    origin_on_edge = live & (np.abs(s) <= eps) & u_band
    vertex_graze = live & (s > eps) & u_band & ((u < eps) | (u > 1.0 - eps))
    near = origin_on_edge | vertex_graze
    if near.any():
        k = int(np.nonzero(near)[0][0])
        raise DegenerateCrossing(
            f"ray from a point within tolerance of edge {k}"
            if bool(origin_on_edge[k])
            else f"ray passes within tolerance of a vertex of edge {k}",
            segment=0,
            triangle=k,
        )
    hits = live & (s > eps) & (u > eps) & (u < 1.0 - eps)
    # Crossing sign: +1 when the edge crosses the ray left-to-right as
    # seen along the ray, i.e. sign of cross(direction, edge).
    signs = np.sign(denom[hits])
    return int(signs.sum())


def winding_crossings(
    point,
    curve: PolyCurve,
    retry_budget: int = 12,
    seed: int = 0,
) -> int:
    """Winding number by signed ray crossings.

    Shoots a ray toward a pseudo-random far direction; on a degenerate
    hit (vertex graze, collinear run) retries with a fresh direction.
    Raises RetriesExhausted when the budget runs out.
    """
    p = np.asarray(point, dtype=np.float64)
    rng = np.random.default_rng(seed)
    base = 0.5772156649  # fixed irrational-ish first direction
    last = None
    for attempt in range(retry_budget + 1):
        theta = base if attempt == 0 else float(rng.uniform(0.0, 2.0 * np.pi))
        direction = np.array([np.cos(theta), np.sin(theta)])
        try:
            return _ray_crossings(p, direction, curve)
        except DegenerateCrossing as exc:
            last = exc
    raise RetriesExhausted(
        f"no transverse ray from {p.tolist()} after {retry_budget + 1} attempts (last: {last})"
    )


# --------------------------------------------------------------------------
# Winding by turning angle (independent oracle)


def winding_angle(point, curve: PolyCurve, guard: float = ANGLE_GUARD) -> int:
    """Winding number by summed turning angles of vertex directions.

    Accumulates the angle swept by the direction from the point to
    successive curve vertices, divides by 2*pi, and rounds. Raises
    WindingGuardError when the result is further than guard from an
    integer, which flags a point too close to the curve.
    """
    p = np.asarray(point, dtype=np.float64)
    rel = curve.points - p
    nxt = np.roll(rel, -1, axis=0)
    cross = rel[:, 0] * nxt[:, 1] - rel[:, 1] * nxt[:, 0]
    dot = np.einsum("ij,ij->i", rel, nxt)
    total = float(np.arctan2(cross, dot).sum()) / (2.0 * np.pi)
    nearest = round(total)
    if abs(total - nearest) >= guard:
        raise WindingGuardError(
            f"turning-angle winding {total:.6f} is not within {guard} of an integer; "
            "point too close to the curve"
        )
    return int(nearest)


def winding_angle_many(points, curve: PolyCurve) -> np.ndarray:
    """Raw (unrounded) turning-angle windings for many points."""
    pts = np.asarray(points, dtype=np.float64)
    rel = curve.points[None, :, :] - pts[:, None, :]
    nxt = np.roll(rel, -1, axis=1)
    cross = rel[:, :, 0] * nxt[:, :, 1] - rel[:, :, 1] * nxt[:, :, 0]
    dot = np.einsum("kij,kij->ki", rel, nxt)
    return np.arctan2(cross, dot).sum(axis=1) / (2.0 * np.pi)


# --------------------------------------------------------------------------
# Pixel regions and the area bound


@dataclass(frozen=True)
class PlanarRegionInfo:
    label: RegionId
    winding: int
    area: float
    pixel_count: int
    representative: tuple[float, float]

    def to_dict(self) -> dict:
        return {
            "label": self.label.label,
            "winding": self.winding,
            "area": self.area,
            "pixel_count": self.pixel_count,
            "representative": list(self.representative),
        }


@dataclass(frozen=True)
class PlanarRegionMap:
    """Labeled pixel grid over the complement of a closed curve."""

    origin: tuple[float, float]
    pixel_size: float
    shape: tuple[int, int]
    labels: np.ndarray = field(repr=False)
    regions: tuple[PlanarRegionInfo, ...]
    notes: tuple[str, ...] = ()

    @property
    def exterior(self) -> PlanarRegionInfo:
        return self.regions[0]

    @property
    def bounded(self) -> tuple[PlanarRegionInfo, ...]:
        return self.regions[1:]

    def to_dict(self) -> dict:
        return {
            "origin": list(self.origin),
            "pixel_size": self.pixel_size,
            "shape": list(self.shape),
            "n_regions": len(self.regions),
            "regions": [info.to_dict() for info in self.regions],
            "notes": list(self.notes),
        }

    def dump_labels(self) -> bytes:
        """Raw pixel labels: int32 little-endian, C order over (x, y)."""
        return np.ascontiguousarray(self.labels).astype("<i4").tobytes()


def _mark_curve_pixels(curve: PolyCurve, origin: np.ndarray, h: float, n: int) -> np.ndarray:
    """Pixels whose cell the curve passes through, by edge supersampling."""
    mask = np.zeros((n, n), dtype=bool)
    a, b = curve.edges()
    for k in range(curve.n_edges):
        length = float(np.linalg.norm(b[k] - a[k]))
        steps = max(2, int(np.ceil(length / (h * 0.25))) + 1)
        t = np.linspace(0.0, 1.0, steps)
        pts = a[k] * (1 - t)[:, None] + b[k] * t[:, None]
        cells = np.floor((pts - origin) / h).astype(int)
        cells = np.clip(cells, 0, n - 1)
        mask[cells[:, 0], cells[:, 1]] = True
    return mask


def planar_regions(
    curve: PolyCurve,
    resolution: int = 128,
    pad_fraction: float = 0.25,
    apportion: bool = True,
) -> PlanarRegionMap:
    """Decompose the curve complement on a square pixel grid.

    Same scheme as the 3D voxel decomposition: curve pixels set aside,
    4-connected flood fill, boundary-touching components merged into
    the exterior, winding per component at the pixel farthest from the
    curve, then curve pixels apportioned by the winding at their own
    centers so areas converge quadratically.
    """
    if resolution < 8:
        raise ValueError(f"resolution must be >= 8, got {resolution}")
    lo, hi = curve.bounds()
    extent = float(np.max(hi - lo)) or 1.0
    center = (lo + hi) / 2.0
    side = extent * (1.0 + 2.0 * pad_fraction)
    origin = center - side / 2.0
    h = side / resolution
    n = resolution

    on_curve = _mark_curve_pixels(curve, origin, h, n)
    structure = ndimage.generate_binary_structure(2, 1)
    comp, n_comp = ndimage.label(~on_curve, structure=structure)

    boundary_ids: set[int] = set()
    for edge_slice in (comp[0], comp[-1], comp[:, 0], comp[:, -1]):
        boundary_ids.update(int(v) for v in np.unique(edge_slice))
    boundary_ids.discard(0)
    bounded_ids = [i for i in range(1, n_comp + 1) if i not in boundary_ids]

    remap = np.full(n_comp + 1, SURFACE, dtype=np.int32)
    for cid in boundary_ids:
        remap[cid] = 0
    for new, cid in enumerate(bounded_ids, start=1):
        remap[cid] = new
    labels = np.where(on_curve, np.int32(SURFACE), remap[comp])

    if on_curve.any():
        dist = ndimage.distance_transform_cdt(~on_curve, metric="taxicab")
    else:
        dist = np.ones((n, n), dtype=np.int32)
    reps = {}
    for rid in range(0, len(bounded_ids) + 1):
        mask = labels == rid
        if not mask.any():
            continue
        flat = int(np.argmax(np.where(mask, dist, -1)))
        reps[rid] = np.unravel_index(flat, labels.shape)

    rep_ids = sorted(reps)
    rep_pts = origin + (np.array([reps[r] for r in rep_ids], dtype=np.float64) + 0.5) * h
    raw = winding_angle_many(rep_pts, curve)
    winding_of = {}
    for rid, w in zip(rep_ids, raw):
        nearest = round(float(w))
        if abs(float(w) - nearest) >= ANGLE_GUARD:
            raise WindingGuardError(
                f"region {rid} representative winding {float(w):.4f} inside guard band"
            )
        winding_of[rid] = int(nearest)

    notes = []
    credit: dict[int, float] = {}
    interior_counts = {rid: int((labels == rid).sum()) for rid in rep_ids}
    if apportion and on_curve.any():
        labels, credit = _apportion_pixels(curve, labels, on_curve, origin, h, winding_of)
    elif on_curve.any():
        notes.append("curve pixels excluded from areas (apportion=False)")

    cell = h * h
    infos = []
    for rid in rep_ids:
        count = int((labels == rid).sum())
        rep = origin + (np.asarray(reps[rid], dtype=np.float64) + 0.5) * h
        infos.append(
            PlanarRegionInfo(
                label=EXTERIOR if rid == 0 else region(str(rid)),
                winding=winding_of[rid],
                area=(interior_counts[rid] + credit.get(rid, 0.0)) * cell,
                pixel_count=count,
                representative=(float(rep[0]), float(rep[1])),
            )
        )
    return PlanarRegionMap(
        origin=(float(origin[0]), float(origin[1])),
        pixel_size=h,
        shape=(n, n),
        labels=labels,
        regions=tuple(infos),
        notes=tuple(notes),
    )


_SUBSAMPLE = 4  # per-axis subsamples when splitting curve pixels


def _apportion_pixels(
    curve: PolyCurve,
    labels: np.ndarray,
    on_curve: np.ndarray,
    origin: np.ndarray,
    h: float,
    winding_of: dict[int, int],
) -> tuple[np.ndarray, dict[int, float]]:
    """Split curve pixels among regions by subpixel winding coverage.

    Each curve pixel is sampled on a _SUBSAMPLE^2 grid; every subsample
    credits 1/_SUBSAMPLE^2 of the pixel to the region whose winding
    matches the value at that subsample (nearest labeled pixel breaks
    ties among same-winding regions). Fractional credit is what keeps
    areas accurate when the curve runs along pixel rows.

    Returns the label array with each curve pixel set to its majority
    region, and the fractional pixel credit per region id.
    """
    labels = labels.copy()
    cells = np.argwhere(on_curve)
    k = _SUBSAMPLE
    frac = (np.arange(k) + 0.5) / k
    offs = np.stack(np.meshgrid(frac, frac, indexing="ij"), axis=-1).reshape(-1, 2)
    samples = (cells[:, None, :] + offs[None, :, :]) * h + origin
    raw = winding_angle_many(samples.reshape(-1, 2), curve).reshape(len(cells), k * k)

    nearest = ndimage.distance_transform_edt(
        on_curve, return_distances=False, return_indices=True
    )
    near_label = labels[nearest[0], nearest[1]]
    shape = labels.shape
    offsets = ((1, 0), (-1, 0), (0, 1), (0, -1))
    credit: dict[int, float] = {}
    unit = 1.0 / (k * k)
    for (ix, iy), winds in zip(cells, raw):
        proposal = int(near_label[ix, iy])
        # Candidate regions adjacent to this pixel, keyed by winding.
        by_wind: dict[int, int] = {}
        if proposal != SURFACE:
            by_wind[winding_of[proposal]] = proposal
        for dx, dy in offsets:
            jx, jy = ix + dx, iy + dy
            if 0 <= jx < shape[0] and 0 <= jy < shape[1]:
                cand = int(labels[jx, jy])
                if cand != SURFACE:
                    by_wind.setdefault(winding_of[cand], cand)
        votes: dict[int, int] = {}
        for w in winds:
            target = round(float(w))
            if abs(float(w) - target) >= ANGLE_GUARD:
                chosen = proposal
            else:
                chosen = by_wind.get(target, proposal)
            votes[chosen] = votes.get(chosen, 0) + 1
        for rid, count in votes.items():
            if rid != SURFACE:
                credit[rid] = credit.get(rid, 0.0) + count * unit
        majority = max(votes.items(), key=lambda kv: (kv[1], -kv[0]))[0]
        labels[ix, iy] = majority
    return labels, credit


@dataclass(frozen=True)
class AreaBound:
    """Winding-weighted areas of the bounded regions of a curve."""

    weighted_area: float  # sum of |w| * area: the null-homotopy lower bound
    signed_area: float  # sum of w * area
    region_map: PlanarRegionMap

    def to_dict(self) -> dict:
        return {
            "weighted_area": self.weighted_area,
            "signed_area": self.signed_area,
            "regions": self.region_map.to_dict(),
        }


def homotopy_area_bound(
    curve: PolyCurve,
    resolution: int = 128,
    pad_fraction: float = 0.25,
    region_map: PlanarRegionMap | None = None,
) -> AreaBound:
    """Lower bound for the area swept by any null homotopy of the curve.

    Any contraction of the curve to a point must sweep each region at
    least |winding| times, so sum(|w| * area) bounds the swept area
    from below. The signed sum is reported alongside; it equals the
    shoelace integral up to discretization.
    """
    rm = region_map if region_map is not None else planar_regions(curve, resolution, pad_fraction)
    weighted = sum(abs(info.winding) * info.area for info in rm.bounded)
    signed = sum(info.winding * info.area for info in rm.bounded)
    return AreaBound(weighted_area=float(weighted), signed_area=float(signed), region_map=rm)
