"""Triangle mesh container, file IO, and validation.

Meshes are vertex/triangle index arrays. Loaders accept OFF and
triangulated OBJ; everything downstream assumes the mesh passed
validation (closed, consistently oriented) unless stated otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import MeshFormatError

__all__ = [
    "TriangleMesh",
    "MeshReport",
    "load_mesh",
    "load_off",
    "load_obj",
    "save_off",
    "validate_mesh",
    "enclosed_volume",
]


@dataclass(frozen=True)
class TriangleMesh:
    """Indexed triangle set.

    vertices: (n, 3) float64 positions.
    triangles: (m, 3) int64 vertex indices, counter-clockwise seen
        from outside when the mesh is closed and oriented.
    """

    vertices: np.ndarray
    triangles: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.vertices, dtype=np.float64))
        t = np.ascontiguousarray(np.asarray(self.triangles, dtype=np.int64))
        if v.ndim != 2 or v.shape[1] != 3:
            raise ValueError(f"vertices must be (n, 3), got {v.shape}")
        if t.ndim != 2 or t.shape[1] != 3:
            raise ValueError(f"triangles must be (m, 3), got {t.shape}")
        if t.size and (t.min() < 0 or t.max() >= len(v)):
            raise ValueError("triangle index out of range")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", t)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def corners(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Per-triangle corner positions, three (m, 3) arrays."""
        v, t = self.vertices, self.triangles
        return v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]

    def normals(self) -> np.ndarray:
        """Unnormalized triangle normals (cross product, CCW outward)."""
        a, b, c = self.corners()
        return np.cross(b - a, c - a)

    def areas(self) -> np.ndarray:
        return 0.5 * np.linalg.norm(self.normals(), axis=1)

    def centroids(self) -> np.ndarray:
        a, b, c = self.corners()
        return (a + b + c) / 3.0

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices.min(axis=0), self.vertices.max(axis=0)


@dataclass(frozen=True)
class MeshReport:
    """Validation summary for a triangle mesh."""

    closed: bool
    oriented: bool
    n_vertices: int
    n_triangles: int
    n_components: int
    open_edges: tuple[tuple[int, int], ...]
    nonmanifold_edges: tuple[tuple[int, int], ...]
    misoriented_edges: tuple[tuple[int, int], ...]
    degenerate_triangles: tuple[int, ...]
    bbox_min: tuple[float, float, float]
    bbox_max: tuple[float, float, float]
    notes: tuple[str, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        """Mesh is usable for region/index computations."""
        return self.closed and self.oriented and not self.degenerate_triangles

    def to_dict(self) -> dict:
        return {
            "closed": self.closed,
            "oriented": self.oriented,
            "ok": self.ok,
            "n_vertices": self.n_vertices,
            "n_triangles": self.n_triangles,
            "n_components": self.n_components,
            "open_edges": [list(e) for e in self.open_edges],
            "nonmanifold_edges": [list(e) for e in self.nonmanifold_edges],
            "misoriented_edges": [list(e) for e in self.misoriented_edges],
            "degenerate_triangles": list(self.degenerate_triangles),
            "bbox_min": list(self.bbox_min),
            "bbox_max": list(self.bbox_max),
            "notes": list(self.notes),
        }


# --------------------------------------------------------------------------
# IO


def load_mesh(path: str | Path) -> TriangleMesh:
    """Load a mesh, dispatching on extension (.off or .obj)."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".off":
        return load_off(path)
    if suffix == ".obj":
        return load_obj(path)
    raise MeshFormatError(f"unsupported mesh format {suffix!r} (expected .off or .obj)")


def _meaningful_lines(text: str) -> list[tuple[int, str]]:
    """(line_number, content) pairs with blanks and # comments removed."""
    out = []
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append((i, line))
    return out


def load_off(path: str | Path) -> TriangleMesh:
    """Parse an OFF file. Faces must be triangles."""
    path = Path(path)
    lines = _meaningful_lines(path.read_text())
    if not lines:
        raise MeshFormatError(f"{path}: empty OFF file")
    pos = 0
    lineno, header = lines[pos]
    counts_line = None
    if header.upper().startswith("OFF"):
        rest = header[3:].strip()
        pos += 1
        if rest:
            # Counts may share the header line.
            counts_line = (lineno, rest)
    if counts_line is None:
        if pos >= len(lines):
            raise MeshFormatError(f"{path}: missing OFF counts line")
        counts_line = lines[pos]
        pos += 1
    lineno, counts = counts_line
    parts = counts.split()
    if len(parts) < 2:
        raise MeshFormatError(f"{path}:{lineno}: expected 'nv nf [ne]' counts")
    try:
        nv, nf = int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise MeshFormatError(f"{path}:{lineno}: bad OFF counts: {counts!r}") from exc

    if pos + nv + nf > len(lines):
        raise MeshFormatError(f"{path}: truncated OFF (need {nv} vertices, {nf} faces)")

    verts = np.empty((nv, 3), dtype=np.float64)
    for k in range(nv):
        lineno, line = lines[pos + k]
        parts = line.split()
        if len(parts) < 3:
            raise MeshFormatError(f"{path}:{lineno}: vertex needs 3 coordinates")
        try:
            verts[k] = [float(parts[0]), float(parts[1]), float(parts[2])]
        except ValueError as exc:
            raise MeshFormatError(f"{path}:{lineno}: bad vertex line: {line!r}") from exc
    pos += nv

    tris = np.empty((nf, 3), dtype=np.int64)
    for k in range(nf):
        lineno, line = lines[pos + k]
        parts = line.split()
        try:
            arity = int(parts[0])
            idx = [int(p) for p in parts[1 : 1 + arity]]
        except (ValueError, IndexError) as exc:
            raise MeshFormatError(f"{path}:{lineno}: bad face line: {line!r}") from exc
        if arity != 3 or len(idx) != 3:
            raise MeshFormatError(
                f"{path}:{lineno}: only triangular faces supported, got {arity}-gon"
            )
        tris[k] = idx
    try:
        return TriangleMesh(verts, tris)
    except ValueError as exc:
        raise MeshFormatError(f"{path}: {exc}") from exc


def load_obj(path: str | Path) -> TriangleMesh:
    """Parse a Wavefront OBJ. Faces must already be triangles."""
    path = Path(path)
    verts: list[list[float]] = []
    tris: list[list[int]] = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        tag = parts[0]
        if tag == "v":
            if len(parts) < 4:
                raise MeshFormatError(f"{path}:{lineno}: vertex needs 3 coordinates")
            try:
                verts.append([float(parts[1]), float(parts[2]), float(parts[3])])
            except ValueError as exc:
                raise MeshFormatError(f"{path}:{lineno}: bad vertex: {line!r}") from exc
        elif tag == "f":
            refs = parts[1:]
            if len(refs) != 3:
                raise MeshFormatError(
                    f"{path}:{lineno}: only triangular faces supported, got {len(refs)}-gon"
                )
            face = []
            for ref in refs:
                # v, v/vt, v/vt/vn, v//vn all start with the vertex index.
                head = ref.split("/", 1)[0]
                try:
                    i = int(head)
                except ValueError as exc:
                    raise MeshFormatError(f"{path}:{lineno}: bad face ref {ref!r}") from exc
                if i == 0:
                    raise MeshFormatError(f"{path}:{lineno}: OBJ indices are 1-based")
                face.append(i - 1 if i > 0 else len(verts) + i)
            tris.append(face)
        # Other tags (vn, vt, usemtl, o, g, s, mtllib) carry no geometry we need.
    if not verts:
        raise MeshFormatError(f"{path}: no vertices found")
    try:
        return TriangleMesh(np.array(verts), np.array(tris, dtype=np.int64).reshape(-1, 3))
    except ValueError as exc:
        raise MeshFormatError(f"{path}: {exc}") from exc


def save_off(mesh: TriangleMesh, path: str | Path) -> None:
    """Write a mesh as OFF with full float precision."""
    path = Path(path)
    with path.open("w") as fh:
        fh.write("OFF\n")
        fh.write(f"{mesh.n_vertices} {mesh.n_triangles} 0\n")
        for x, y, z in mesh.vertices:
            fh.write(f"{float(x)!r} {float(y)!r} {float(z)!r}\n")
        for a, b, c in mesh.triangles:
            fh.write(f"3 {a} {b} {c}\n")


# --------------------------------------------------------------------------
# Validation


def _edge_table(triangles: np.ndarray) -> dict[tuple[int, int], list[int]]:
    """Map undirected edge -> signed traversal counts.

    Value is [forward, backward] counts where forward means the edge
    appears as (lo, hi) in some triangle's boundary loop.
    """
    table: dict[tuple[int, int], list[int]] = {}
    for tri in triangles:
        a, b, c = int(tri[0]), int(tri[1]), int(tri[2])
        for u, v in ((a, b), (b, c), (c, a)):
            key = (u, v) if u < v else (v, u)
            rec = table.setdefault(key, [0, 0])
            rec[0 if u < v else 1] += 1
    return table


def _component_count(n_vertices: int, triangles: np.ndarray) -> int:
    """Connected components of the triangle adjacency graph.

    Isolated vertices (referenced by no triangle) are ignored.
    """
    if len(triangles) == 0:
        return 0
    parent = np.arange(n_vertices, dtype=np.int64)

    def find(x: int) -> int:
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    for tri in triangles:
        a, b, c = int(tri[0]), int(tri[1]), int(tri[2])
        ra, rb, rc = find(a), find(b), find(c)
        parent[rb] = ra
        parent[find(rc)] = find(ra)
    used = np.unique(triangles)
    return len({find(int(v)) for v in used})


def validate_mesh(mesh: TriangleMesh, area_eps: float = 1e-12) -> MeshReport:
    """Check closedness, orientation consistency, and degeneracy.

    closed: every edge is shared by exactly two triangles.
    oriented: every shared edge is traversed once in each direction,
        so neighboring triangles agree on which side is outside.
    Triangles with area below area_eps (relative to the bbox scale)
    are reported as degenerate.
    """
    table = _edge_table(mesh.triangles)
    open_edges = []
    nonmanifold = []
    misoriented = []
    for edge, (fwd, bwd) in table.items():
        total = fwd + bwd
        if total == 1:
            open_edges.append(edge)
        elif total > 2:
            nonmanifold.append(edge)
        elif fwd != 1:  # total == 2 but same direction twice
            misoriented.append(edge)

    if mesh.n_vertices:
        lo, hi = mesh.bounds()
        scale = float(np.max(hi - lo)) or 1.0
    else:
        lo = hi = np.zeros(3)
        scale = 1.0
    degenerate = np.nonzero(mesh.areas() <= area_eps * scale * scale)[0]

    closed = not open_edges and not nonmanifold
    oriented = closed and not misoriented
    notes = []
    if open_edges:
        notes.append(f"{len(open_edges)} boundary edge(s): surface is not closed")
    if nonmanifold:
        notes.append(f"{len(nonmanifold)} edge(s) shared by more than two triangles")
    if misoriented:
        notes.append(f"{len(misoriented)} edge(s) traversed twice in the same direction")
    if len(degenerate):
        notes.append(f"{len(degenerate)} triangle(s) with near-zero area")

    return MeshReport(
        closed=closed,
        oriented=oriented,
        n_vertices=mesh.n_vertices,
        n_triangles=mesh.n_triangles,
        n_components=_component_count(mesh.n_vertices, mesh.triangles),
        open_edges=tuple(sorted(open_edges)),
        nonmanifold_edges=tuple(sorted(nonmanifold)),
        misoriented_edges=tuple(sorted(misoriented)),
        degenerate_triangles=tuple(int(i) for i in degenerate),
        bbox_min=tuple(float(x) for x in lo),
        bbox_max=tuple(float(x) for x in hi),
        notes=tuple(notes),
    )


def enclosed_volume(mesh: TriangleMesh) -> float:
    """Signed volume enclosed by a closed oriented mesh.

    Divergence theorem over origin-anchored tetrahedra; positive when
    triangle normals point outward. Meaningless for open meshes.
    """
    a, b, c = mesh.corners()
    return float(np.einsum("ij,ij->i", a, np.cross(b, c)).sum() / 6.0)
