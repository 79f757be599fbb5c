"""Procedural test surfaces: icospheres and simple combinations."""

from __future__ import annotations

import numpy as np

from .mesh import TriangleMesh

__all__ = [
    "icosphere",
    "flip",
    "merge",
    "translate",
    "nested_icospheres",
    "overlapping_icospheres",
]


def _icosahedron() -> tuple[np.ndarray, np.ndarray]:
    """Unit icosahedron with outward CCW faces."""
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array(
        [
            (-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
            (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
            (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1),
        ],
        dtype=np.float64,
    )
    verts /= np.linalg.norm(verts[0])
    faces = np.array(
        [
            (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
            (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
            (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
            (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
        ],
        dtype=np.int64,
    )
    return verts, faces


def icosphere(
    subdivisions: int = 3,
    radius: float = 1.0,
    center: tuple[float, float, float] = (0.0, 0.0, 0.0),
) -> TriangleMesh:
    """Geodesic sphere: icosahedron with each edge split 2**subdivisions ways.

    Closed, consistently oriented, normals outward. Face count is
    20 * 4**subdivisions.
    """
    if subdivisions < 0:
        raise ValueError("subdivisions must be >= 0")
    verts, faces = _icosahedron()
    vlist = [tuple(v) for v in verts]
    cache: dict[tuple[int, int], int] = {}

    def midpoint(i: int, j: int) -> int:
        key = (i, j) if i < j else (j, i)
        hit = cache.get(key)
        if hit is not None:
            return hit
        p = np.array(vlist[i]) + np.array(vlist[j])
        p /= np.linalg.norm(p)
        vlist.append(tuple(p))
        cache[key] = len(vlist) - 1
        return cache[key]

    tris = [tuple(f) for f in faces]
    for _ in range(subdivisions):
        nxt = []
        for a, b, c in tris:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            nxt += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        tris = nxt

    v = np.array(vlist, dtype=np.float64) * radius + np.asarray(center, dtype=np.float64)
    return TriangleMesh(v, np.array(tris, dtype=np.int64))


def flip(mesh: TriangleMesh) -> TriangleMesh:
    """Reverse orientation of every triangle (normals point inward)."""
    t = mesh.triangles[:, [0, 2, 1]]
    return TriangleMesh(mesh.vertices.copy(), t)


def translate(mesh: TriangleMesh, offset) -> TriangleMesh:
    return TriangleMesh(mesh.vertices + np.asarray(offset, dtype=np.float64), mesh.triangles)


def merge(*meshes: TriangleMesh) -> TriangleMesh:
    """Disjoint union of meshes (indices offset, no welding)."""
    verts = []
    tris = []
    base = 0
    for m in meshes:
        verts.append(m.vertices)
        tris.append(m.triangles + base)
        base += m.n_vertices
    return TriangleMesh(np.vstack(verts), np.vstack(tris))


def nested_icospheres(
    subdivisions: int = 3,
    inner_radius: float = 1.0,
    outer_radius: float = 2.0,
) -> TriangleMesh:
    """Two concentric spheres, both with outward normals.

    The shell between them then has winding 1 and the core winding 2
    with respect to straight probes from far outside.
    """
    inner = icosphere(subdivisions, inner_radius)
    outer = icosphere(subdivisions, outer_radius)
    return merge(outer, inner)


def overlapping_icospheres(
    subdivisions: int = 3,
    radius: float = 1.0,
    separation: float = 1.0,
) -> TriangleMesh:
    """Two equal spheres whose interiors overlap: a self-intersecting
    closed surface. The lens-shaped overlap has winding 2."""
    left = icosphere(subdivisions, radius, center=(-separation / 2.0, 0.0, 0.0))
    right = icosphere(subdivisions, radius, center=(separation / 2.0, 0.0, 0.0))
    return merge(left, right)
