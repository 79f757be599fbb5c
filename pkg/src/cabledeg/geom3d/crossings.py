"""Cable-surface crossings, per-point indices, and the winding oracle.

The index of a point is the signed count of transverse crossings along
any cable from the point to a far exterior anchor; the solid-angle
winding number is an independent way to compute the same integer and is
used to cross-check the crossing enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import DegenerateCrossing, MeshFormatError, RetriesExhausted, WindingGuardError
from .mesh import TriangleMesh

__all__ = [
    "Cable",
    "CrossingEvent",
    "straight_cable",
    "load_cable",
    "save_cable",
    "cable_crossings",
    "cable_index",
    "solid_angle_winding",
    "solid_angle_winding_many",
    "round_winding",
]

# Barycentric / tangential transversality tolerances. A hit this close
# to a triangle boundary or this close to tangential is refused rather
# than guessed at; callers jitter the cable and try again.
BARY_EPS = 1e-9
TANGENT_EPS = 1e-9
PARAM_EPS = 1e-9

# Guard half-width around integers for rounding winding numbers.
WINDING_GUARD = 0.25


@dataclass(frozen=True)
class Cable:
    """Open polyline from a probe point to an exterior anchor."""

    points: np.ndarray

    def __post_init__(self):
        p = np.ascontiguousarray(np.asarray(self.points, dtype=np.float64))
        if p.ndim != 2 or p.shape[1] != 3:
            raise ValueError(f"cable points must be (k, 3), got {p.shape}")
        if len(p) < 2:
            raise ValueError("cable needs at least 2 points")
        if (np.linalg.norm(np.diff(p, axis=0), axis=1) == 0.0).any():
            raise ValueError("cable has repeated consecutive points")
        object.__setattr__(self, "points", p)

    @property
    def n_segments(self) -> int:
        return len(self.points) - 1

    @property
    def start(self) -> np.ndarray:
        return self.points[0]

    @property
    def end(self) -> np.ndarray:
        return self.points[-1]


@dataclass(frozen=True)
class CrossingEvent:
    """One transverse cable-surface intersection.

    parameter: position along the cable in (0, 1), uniform per segment.
    sign: +1 if the cable tangent agrees with the triangle normal.
    """

    parameter: float
    position: tuple[float, float, float]
    triangle: int
    sign: int

    def to_dict(self) -> dict:
        return {
            "parameter": self.parameter,
            "position": list(self.position),
            "triangle": self.triangle,
            "sign": self.sign,
        }


def straight_cable(point, exterior) -> Cable:
    return Cable(np.array([point, exterior], dtype=np.float64))


def load_cable(path: str | Path) -> Cable:
    """Read a polyline: one 'x y z' vertex per line, # comments allowed."""
    path = Path(path)
    pts = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 3:
            raise MeshFormatError(f"{path}:{lineno}: expected 3 coordinates, got {line!r}")
        try:
            pts.append([float(x) for x in parts])
        except ValueError as exc:
            raise MeshFormatError(f"{path}:{lineno}: bad coordinate in {line!r}") from exc
    if len(pts) < 2:
        raise MeshFormatError(f"{path}: cable needs at least 2 points")
    try:
        return Cable(np.array(pts))
    except ValueError as exc:
        raise MeshFormatError(f"{path}: {exc}") from exc


def save_cable(cable: Cable, path: str | Path) -> None:
    with Path(path).open("w") as fh:
        for x, y, z in cable.points:
            fh.write(f"{float(x)!r} {float(y)!r} {float(z)!r}\n")


# --------------------------------------------------------------------------
# Segment-triangle intersection


def _segment_hits(
    p0: np.ndarray,
    p1: np.ndarray,
    mesh: TriangleMesh,
    segment_index: int,
) -> list[tuple[float, np.ndarray, int, int]]:
    """All transverse hits of one segment, as (t, position, triangle, sign).

    Raises DegenerateCrossing when any triangle is met within BARY_EPS of
    its boundary, within PARAM_EPS of a segment endpoint, or closer than
    TANGENT_EPS to tangentially.
    """
    a, b, c = mesh.corners()
    d = p1 - p0
    seg_len = float(np.linalg.norm(d))

    e1 = b - a
    e2 = c - a
    normal = np.cross(e1, e2)
    normal_len = np.linalg.norm(normal, axis=1)
    # det = -<d, e1 x e2>; |cos(tangent, normal)| = |det| / (|d| |n|)
    pvec = np.cross(d, e2)
    det = np.einsum("ij,ij->i", e1, pvec)
    cosang = np.abs(det) / np.maximum(seg_len * normal_len, 1e-300)

    parallel = cosang < TANGENT_EPS
    if parallel.any():
        # A parallel triangle only matters if the segment runs inside its
        # plane near the triangle itself; then the crossing is tangential.
        idx = np.nonzero(parallel)[0]
        rel = p0 - a[idx]
        dist = np.abs(np.einsum("ij,ij->i", rel, normal[idx])) / np.maximum(
            normal_len[idx], 1e-300
        )
        scale = max(seg_len, 1.0)
        close = dist < 1e-9 * scale
        if close.any():
            tri_lo = np.minimum(np.minimum(a[idx], b[idx]), c[idx])
            tri_hi = np.maximum(np.maximum(a[idx], b[idx]), c[idx])
            seg_lo = np.minimum(p0, p1) - 1e-9 * scale
            seg_hi = np.maximum(p0, p1) + 1e-9 * scale
            overlap = ((tri_lo <= seg_hi) & (tri_hi >= seg_lo)).all(axis=1)
            bad = idx[close & overlap]
            if len(bad):
                raise DegenerateCrossing(
                    f"segment {segment_index} runs tangentially along triangle {int(bad[0])}",
                    segment=segment_index,
                    triangle=int(bad[0]),
                )

    live = ~parallel
    if not live.any():
        return []
    inv = np.zeros_like(det)
    inv[live] = 1.0 / det[live]
    tvec = p0 - a
    u = np.einsum("ij,ij->i", tvec, pvec) * inv
    qvec = np.cross(tvec, e1)
    v = np.dot(qvec, d) * inv
    t = np.einsum("ij,ij->i", e2, qvec) * inv
    w = 1.0 - u - v

    inside = live & (u > BARY_EPS) & (v > BARY_EPS) & (w > BARY_EPS)
    near = (
        live
        & (u > -BARY_EPS)
        & (v > -BARY_EPS)
        & (w > -BARY_EPS)
        & ~inside
    )
    t_inside = (t > PARAM_EPS) & (t < 1.0 - PARAM_EPS)
    t_near = (t > -PARAM_EPS) & (t < 1.0 + PARAM_EPS) & ~t_inside

    bad = np.nonzero((near & (t_inside | t_near)) | (inside & t_near))[0]
    if len(bad):
        k = int(bad[0])
        raise DegenerateCrossing(
            f"segment {segment_index} meets triangle {k} within tolerance of "
            "an edge, vertex, or segment endpoint",
            segment=segment_index,
            triangle=k,
        )

    hits = np.nonzero(inside & t_inside)[0]
    out = []
    for k in hits:
        tk = float(t[k])
        pos = p0 + tk * d
        sign = 1 if float(np.dot(d, normal[k])) > 0.0 else -1
        out.append((tk, pos, int(k), sign))
    return out


def cable_crossings(cable: Cable, mesh: TriangleMesh) -> list[CrossingEvent]:
    """Every transverse crossing along the cable, sorted by parameter.

    The parameter is (segment + local t) / n_segments, monotone along
    the polyline. Raises DegenerateCrossing on any near-edge, near-vertex,
    near-endpoint, or near-tangential incidence.
    """
    if mesh.n_triangles == 0:
        return []
    events = []
    n = cable.n_segments
    for j in range(n):
        p0, p1 = cable.points[j], cable.points[j + 1]
        for t, pos, tri, sign in _segment_hits(p0, p1, mesh, j):
            events.append(
                CrossingEvent(
                    parameter=(j + t) / n,
                    position=(float(pos[0]), float(pos[1]), float(pos[2])),
                    triangle=tri,
                    sign=sign,
                )
            )
    events.sort(key=lambda e: e.parameter)
    return events


# --------------------------------------------------------------------------
# Per-point index


def default_exterior(mesh: TriangleMesh) -> np.ndarray:
    """A point safely outside the mesh bounding box.

    Offset along an incommensurate direction so that axis-aligned mesh
    features are unlikely to line up with probe cables.
    """
    if mesh.n_vertices == 0:
        return np.array([10.0, 7.0, 5.0])
    lo, hi = mesh.bounds()
    diag = float(np.linalg.norm(hi - lo)) or 1.0
    direction = np.array([0.7716245, 0.5285045, 0.3530817])
    return hi + diag * direction


def cable_index(
    point,
    mesh: TriangleMesh,
    exterior=None,
    retry_budget: int = 12,
    seed: int = 0,
) -> int:
    """Signed crossing count from point to the exterior anchor.

    Tries the straight cable first; each DegenerateCrossing retry bends
    the cable through a fresh pseudo-random waypoint (deterministic per
    seed). Raises RetriesExhausted when the budget runs out, which means
    pathological input or a point essentially on the surface.
    """
    point = np.asarray(point, dtype=np.float64)
    anchor = default_exterior(mesh) if exterior is None else np.asarray(exterior, np.float64)
    rng = np.random.default_rng(seed)
    span = float(np.linalg.norm(anchor - point)) or 1.0
    last = None
    for attempt in range(retry_budget + 1):
        if attempt == 0:
            cable = straight_cable(point, anchor)
        else:
            mid = (point + anchor) / 2.0
            offset = rng.uniform(-1.0, 1.0, size=3) * 0.35 * span
            cable = Cable(np.array([point, mid + offset, anchor]))
        try:
            events = cable_crossings(cable, mesh)
        except DegenerateCrossing as exc:
            last = exc
            continue
        return sum(e.sign for e in events)
    raise RetriesExhausted(
        f"no transverse cable from {point.tolist()} after {retry_budget + 1} attempts"
        f" (last: {last})"
    )


# --------------------------------------------------------------------------
# Solid-angle oracle


def solid_angle_winding(point, mesh: TriangleMesh) -> float:
    """Winding number of the surface around a point.

    Sum of signed solid angles subtended by each triangle, divided by
    4*pi (van Oosterom-Strackee formula). Integer-valued up to rounding
    for closed meshes; an independent oracle for cable_index.
    """
    return float(solid_angle_winding_many(np.asarray(point, np.float64)[None, :], mesh)[0])


def solid_angle_winding_many(points, mesh: TriangleMesh, chunk_cells: int = 4_000_000) -> np.ndarray:
    """Winding numbers for many points, evaluated in fixed order.

    Points are processed in chunks sized so that points x triangles stays
    near chunk_cells, keeping the broadcast arrays bounded.
    """
    pts = np.ascontiguousarray(np.asarray(points, dtype=np.float64))
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError(f"points must be (k, 3), got {pts.shape}")
    m = mesh.n_triangles
    if m == 0:
        return np.zeros(len(pts))
    va, vb, vc = mesh.corners()
    out = np.empty(len(pts))
    step = max(1, chunk_cells // m)
    for start in range(0, len(pts), step):
        p = pts[start : start + step]
        a = va[None, :, :] - p[:, None, :]
        b = vb[None, :, :] - p[:, None, :]
        c = vc[None, :, :] - p[:, None, :]
        la = np.linalg.norm(a, axis=2)
        lb = np.linalg.norm(b, axis=2)
        lc = np.linalg.norm(c, axis=2)
        numer = np.einsum("kij,kij->ki", a, np.cross(b, c))
        denom = (
            la * lb * lc
            + np.einsum("kij,kij->ki", a, b) * lc
            + np.einsum("kij,kij->ki", b, c) * la
            + np.einsum("kij,kij->ki", c, a) * lb
        )
        omega = 2.0 * np.arctan2(numer, denom)
        out[start : start + step] = omega.sum(axis=1) / (4.0 * np.pi)
    return out


def round_winding(value: float, guard: float = WINDING_GUARD) -> int:
    """Round a winding number to the nearest integer inside the guard band.

    Raises WindingGuardError if the value sits more than guard away from
    every integer, which indicates the sample point is too close to the
    surface (or the mesh is not closed).
    """
    nearest = round(value)
    if abs(value - nearest) >= guard:
        raise WindingGuardError(
            f"winding {value:.6f} is not within {guard} of an integer; "
            "sample point too close to the surface or mesh not closed"
        )
    return int(nearest)
