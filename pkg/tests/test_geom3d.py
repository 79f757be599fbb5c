"""Geometric kernel tests: meshes, crossings, winding, voxel regions.

Crossing signs are checked against a brute-force all-triangles oracle,
winding numbers against analytic values, and voxel volumes against
closed-form sphere volumes.
"""

import numpy as np
import pytest

from cabledeg.errors import (
    DegenerateCrossing,
    MeshFormatError,
    RetriesExhausted,
    WindingGuardError,
)
from cabledeg.geom3d import (
    Cable,
    TriangleMesh,
    build_cable_word,
    cable_crossings,
    cable_index,
    flip,
    icosphere,
    load_cable,
    load_mesh,
    merge,
    nested_icospheres,
    overlapping_icospheres,
    save_off,
    solid_angle_winding,
    solid_angle_winding_many,
    straight_cable,
    total_degree,
    validate_mesh,
    voxel_regions,
)
from cabledeg.geom3d.crossings import default_exterior, round_winding
from cabledeg.geom3d.mesh import enclosed_volume
from cabledeg.words import EXTERIOR, reduce_word

BALL = 4.0 * np.pi / 3.0


def brute_force_crossings(cable, mesh):
    """Independent intersection oracle: solve the 3x3 system per
    segment-triangle pair with plain linear algebra, no shared code
    with the production Moller-Trumbore path."""
    hits = []
    a, b, c = mesh.corners()
    nseg = len(cable.points) - 1
    for j in range(nseg):
        p0, p1 = cable.points[j], cable.points[j + 1]
        for k in range(mesh.n_triangles):
            mat = np.column_stack([p1 - p0, a[k] - b[k], a[k] - c[k]])
            if abs(np.linalg.det(mat)) < 1e-14:
                continue
            t, u, v = np.linalg.solve(mat, a[k] - p0)
            if 1e-9 < t < 1 - 1e-9 and u > 1e-9 and v > 1e-9 and u + v < 1 - 1e-9:
                normal = np.cross(b[k] - a[k], c[k] - a[k])
                sign = 1 if np.dot(p1 - p0, normal) > 0 else -1
                hits.append(((j + t) / nseg, sign))
    hits.sort()
    return hits


class TestMeshIO:
    def test_off_roundtrip(self, tmp_path):
        mesh = icosphere(1)
        path = tmp_path / "s.off"
        save_off(mesh, path)
        back = load_mesh(path)
        assert np.allclose(back.vertices, mesh.vertices)
        assert np.array_equal(back.triangles, mesh.triangles)

    def test_off_counts_on_header_line(self, tmp_path):
        path = tmp_path / "t.off"
        path.write_text("OFF 3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n")
        mesh = load_mesh(path)
        assert mesh.n_vertices == 3 and mesh.n_triangles == 1

    def test_obj(self, tmp_path):
        path = tmp_path / "t.obj"
        path.write_text(
            "# comment\nv 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1\n"
        )
        mesh = load_mesh(path)
        assert mesh.n_triangles == 1
        assert list(mesh.triangles[0]) == [0, 1, 2]

    def test_obj_negative_indices(self, tmp_path):
        path = tmp_path / "t.obj"
        path.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n")
        assert list(load_mesh(path).triangles[0]) == [0, 1, 2]

    def test_off_quad_rejected(self, tmp_path):
        path = tmp_path / "q.off"
        path.write_text("OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n")
        with pytest.raises(MeshFormatError, match="4-gon"):
            load_mesh(path)

    def test_truncated_off(self, tmp_path):
        path = tmp_path / "bad.off"
        path.write_text("OFF\n5 2 0\n0 0 0\n")
        with pytest.raises(MeshFormatError, match="truncated"):
            load_mesh(path)

    def test_unknown_extension(self, tmp_path):
        path = tmp_path / "m.stl"
        path.write_text("")
        with pytest.raises(MeshFormatError, match="unsupported"):
            load_mesh(path)

    def test_cable_file(self, tmp_path):
        path = tmp_path / "c.txt"
        path.write_text("# probe\n0 0 0\n1, 2, 3\n\n4 5 6\n")
        cable = load_cable(path)
        assert cable.points.shape == (3, 3)
        assert np.allclose(cable.points[1], [1, 2, 3])


class TestValidate:
    def test_icosphere_closed_oriented(self):
        report = validate_mesh(icosphere(2))
        assert report.closed and report.oriented and report.ok
        assert report.n_components == 1
        assert not report.open_edges

    def test_missing_triangle_reports_open_edges(self):
        mesh = icosphere(2)
        holed = TriangleMesh(mesh.vertices, mesh.triangles[1:])
        report = validate_mesh(holed)
        assert not report.closed
        assert len(report.open_edges) == 3

    def test_flipped_triangle_reports_misorientation(self):
        mesh = icosphere(2)
        tris = mesh.triangles.copy()
        tris[0] = tris[0][[0, 2, 1]]
        report = validate_mesh(TriangleMesh(mesh.vertices, tris))
        assert report.closed and not report.oriented
        assert len(report.misoriented_edges) == 3

    def test_degenerate_triangle_flagged(self):
        verts = np.array([[0, 0, 0], [1, 0, 0], [2, 0, 0], [0, 1, 0]], dtype=float)
        tris = np.array([[0, 1, 2], [0, 1, 3]])
        report = validate_mesh(TriangleMesh(verts, tris))
        assert report.degenerate_triangles == (0,)
        assert not report.ok

    def test_two_components_counted(self):
        report = validate_mesh(nested_icospheres(1))
        assert report.n_components == 2
        assert report.closed and report.oriented

    def test_enclosed_volume_converges(self):
        # Inscribed polyhedra approach the ball volume from below.
        v2 = enclosed_volume(icosphere(2))
        v3 = enclosed_volume(icosphere(3))
        assert v2 < v3 < BALL
        assert abs(v3 - BALL) / BALL < 0.01

    def test_flip_negates_volume(self):
        mesh = icosphere(2)
        assert enclosed_volume(flip(mesh)) == pytest.approx(-enclosed_volume(mesh))


class TestCrossings:
    def test_diameter_two_crossings(self):
        mesh = icosphere(3)
        cable = straight_cable([-2.0, 0.01, 0.02], [2.0, 0.01, 0.02])
        events = cable_crossings(cable, mesh)
        assert [e.sign for e in events] == [-1, 1]
        assert events[0].parameter < events[1].parameter

    def test_outside_segment_empty(self):
        mesh = icosphere(2)
        cable = straight_cable([2.0, 2.0, 2.0], [3.0, 3.0, 3.0])
        assert cable_crossings(cable, mesh) == []

    def test_nested_radial_two_positive(self):
        mesh = nested_icospheres(3, 1.0, 2.0)
        cable = straight_cable([0.013, 0.007, 0.011], [3.0, 0.21, 0.17])
        events = cable_crossings(cable, mesh)
        assert [e.sign for e in events] == [1, 1]

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(7)
        corpus = [icosphere(2), nested_icospheres(1), overlapping_icospheres(2)]
        checked = 0
        for mesh in corpus:
            for _ in range(25):
                p = rng.uniform(-2.5, 2.5, size=3)
                q = rng.uniform(-2.5, 2.5, size=3)
                cable = straight_cable(p, q)
                try:
                    got = [(e.parameter, e.sign) for e in cable_crossings(cable, mesh)]
                except DegenerateCrossing:
                    continue
                want = brute_force_crossings(cable, mesh)
                assert len(got) == len(want)
                for (tg, sg), (tw, sw) in zip(got, want):
                    assert tg == pytest.approx(tw, abs=1e-9)
                    assert sg == sw
                checked += 1
        assert checked > 60

    def test_vertex_hit_is_degenerate(self):
        mesh = icosphere(1)
        apex = mesh.vertices[np.argmax(mesh.vertices[:, 2])]
        cable = straight_cable([apex[0], apex[1], -3.0], [apex[0], apex[1], 3.0])
        with pytest.raises(DegenerateCrossing):
            cable_crossings(cable, mesh)

    def test_tangential_run_is_degenerate(self):
        verts = np.array(
            [[0, 0, 0], [4, 0, 0], [0, 4, 0], [0, 0, 4]], dtype=float
        )
        tris = np.array([[0, 1, 2], [0, 3, 1], [1, 3, 2], [0, 2, 3]])
        mesh = TriangleMesh(verts, tris)
        cable = straight_cable([1.0, 1.0, 0.0], [2.0, 1.4, 0.0])  # inside face z=0
        with pytest.raises(DegenerateCrossing, match="tangent"):
            cable_crossings(cable, mesh)

    def test_waypoint_on_surface_is_degenerate(self):
        mesh = icosphere(2)
        centroid = mesh.centroids()[17]
        cable = Cable(np.array([[0.0, 0.0, 0.0], centroid, [3.0, 3.0, 3.0]]))
        with pytest.raises(DegenerateCrossing):
            cable_crossings(cable, mesh)


class TestCableIndex:
    def test_inside_unit_sphere(self):
        assert cable_index([0.0, 0.0, 0.0], icosphere(3), [10.0, 0.0, 0.0]) == 1

    def test_outside_is_zero(self):
        assert cable_index([5.0, 5.0, 5.0], icosphere(3)) == 0

    def test_nested_core_is_two(self):
        assert cable_index([0.0, 0.0, 0.0], nested_icospheres(3)) == 2

    def test_retry_recovers_from_degenerate_straight_cable(self):
        mesh = icosphere(1)
        apex = mesh.vertices[np.argmax(mesh.vertices[:, 2])]
        # Straight cable passes exactly through a vertex; retries bend it.
        point = np.array([apex[0], apex[1], 0.0])
        exterior = np.array([apex[0], apex[1], 5.0])
        assert cable_index(point, mesh, exterior) == 1

    def test_point_on_surface_exhausts_retries(self):
        mesh = icosphere(1)
        on_surface = mesh.centroids()[4]
        with pytest.raises(RetriesExhausted):
            cable_index(on_surface, mesh, retry_budget=3)

    def test_cable_independence(self):
        # The index must not depend on which cable is used.
        rng = np.random.default_rng(11)
        mesh = overlapping_icospheres(2, 1.0, 1.0)
        for _ in range(20):
            p = rng.uniform(-1.8, 1.8, size=3)
            if abs(solid_angle_winding(p, mesh) - round(solid_angle_winding(p, mesh))) > 0.2:
                continue
            values = {cable_index(p, mesh, seed=s) for s in range(5)}
            assert len(values) == 1


class TestWinding:
    def test_unit_sphere_center(self):
        assert solid_angle_winding([0, 0, 0], icosphere(2)) == pytest.approx(1.0, abs=1e-6)

    def test_far_point_zero(self):
        assert solid_angle_winding([10, 0, 0], icosphere(2)) == pytest.approx(0.0, abs=1e-6)

    def test_nested_center_two(self):
        assert solid_angle_winding([0, 0, 0], nested_icospheres(2)) == pytest.approx(
            2.0, abs=1e-6
        )

    def test_flip_negates(self):
        mesh = icosphere(2)
        rng = np.random.default_rng(3)
        pts = rng.uniform(-1.5, 1.5, size=(50, 3))
        w = solid_angle_winding_many(pts, mesh)
        wf = solid_angle_winding_many(pts, flip(mesh))
        assert np.allclose(w, -wf, atol=1e-12)

    def test_agrees_with_cable_index_on_corpus(self):
        corpus = [
            icosphere(2),
            flip(icosphere(2)),
            nested_icospheres(1),
            overlapping_icospheres(1, 1.0, 1.0),
        ]
        rng = np.random.default_rng(5)
        checked = 0
        for mesh in corpus:
            pts = rng.uniform(-2.2, 2.2, size=(40, 3))
            winds = solid_angle_winding_many(pts, mesh)
            for p, w in zip(pts, winds):
                try:
                    rounded = round_winding(float(w))
                except WindingGuardError:
                    continue
                assert cable_index(p, mesh) == rounded
                checked += 1
        assert checked >= 140

    def test_guard_rejects_half_winding(self):
        with pytest.raises(WindingGuardError):
            round_winding(0.5)
        with pytest.raises(WindingGuardError):
            round_winding(0.26)
        assert round_winding(0.24) == 0
        assert round_winding(1.76) == 2
        assert round_winding(-0.9) == -1

    def test_empty_mesh_everywhere_zero(self):
        mesh = TriangleMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64))
        assert solid_angle_winding([1, 2, 3], mesh) == 0.0


class TestVoxelRegions:
    def test_unit_sphere_two_regions_volume(self):
        rm = voxel_regions(icosphere(3), resolution=64)
        assert rm.n_regions == 2
        interior = rm.bounded[0]
        assert interior.index == 1
        assert abs(interior.volume - BALL) / BALL < 0.02
        assert rm.exterior.index == 0
        assert rm.exterior.label is EXTERIOR

    def test_grid_frame_matches_documented_box(self):
        rm = voxel_regions(icosphere(2), resolution=16)
        assert rm.origin == pytest.approx((-1.5, -1.5, -1.5))
        assert rm.voxel_size == pytest.approx(3.0 / 16)

    def test_empty_mesh_single_exterior(self):
        mesh = TriangleMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64))
        rm = voxel_regions(mesh, resolution=8)
        assert rm.n_regions == 1
        assert rm.exterior.index == 0

    def test_nested_three_regions(self):
        rm = voxel_regions(nested_icospheres(3), resolution=64)
        assert rm.n_regions == 3
        indices = sorted(info.index for info in rm.bounded)
        assert indices == [1, 2]
        shell = rm.by_label("1") if rm.by_label("1").index == 1 else rm.by_label("2")
        core = rm.by_label("1") if rm.by_label("1").index == 2 else rm.by_label("2")
        assert shell.index == 1 and core.index == 2
        assert abs(core.volume - BALL) / BALL < 0.03
        assert abs(shell.volume - 7 * BALL) / (7 * BALL) < 0.03

    def test_resolution_floor(self):
        with pytest.raises(ValueError, match=">= 8"):
            voxel_regions(icosphere(1), resolution=4)

    def test_volume_error_shrinks_with_resolution(self):
        mesh = icosphere(3)
        errs = []
        for res in (32, 64, 128):
            rm = voxel_regions(mesh, resolution=res)
            errs.append(abs(rm.bounded[0].volume - enclosed_volume(mesh)))
        assert errs[2] < errs[0]

    def test_volumes_bounded_by_box(self):
        rm = voxel_regions(overlapping_icospheres(2, 1.0, 1.0), resolution=48)
        box = (rm.voxel_size * rm.shape[0]) ** 3
        assert sum(info.volume for info in rm.regions) <= box + 1e-9

    def test_label_dump_shape_and_dtype(self):
        rm = voxel_regions(icosphere(1), resolution=8)
        raw = rm.dump_labels()
        assert len(raw) == 8 * 8 * 8 * 4
        arr = np.frombuffer(raw, dtype="<i4").reshape(8, 8, 8)
        assert np.array_equal(arr, rm.labels)

    def test_overlapping_spheres_lens_region(self):
        rm = voxel_regions(overlapping_icospheres(3, 1.0, 1.0), resolution=64)
        indices = sorted(info.index for info in rm.bounded)
        # Two crescent regions of index 1 and the lens of index 2.
        assert indices == [1, 1, 2]


class TestTotalDegree:
    def test_unit_sphere(self):
        td = total_degree(icosphere(3), resolution=64)
        assert abs(td.degree - BALL) / BALL < 0.02
        assert abs(td.vdeg - BALL) / BALL < 0.02

    def test_flip_negates_degree_not_vdeg(self):
        td = total_degree(flip(icosphere(3)), resolution=64)
        assert abs(td.degree + BALL) / BALL < 0.02
        assert abs(td.vdeg - BALL) / BALL < 0.02

    def test_nested_value(self):
        td = total_degree(nested_icospheres(3), resolution=64)
        want = BALL * (2**3 - 1) + 2 * BALL
        assert abs(td.degree - want) / want < 0.02
        assert td.vdeg == pytest.approx(td.degree)


class TestBuildCableWord:
    def test_nested_core_to_exterior(self):
        mesh = nested_icospheres(3)
        rm = voxel_regions(mesh, resolution=48)
        cable = straight_cable([0.013, 0.007, 0.011], [4.0, 0.31, 0.23])
        word = build_cable_word(cable, mesh, rm, cable_id="core")
        assert len(word) == 2
        assert all(s.sign == 1 for s in word.symbols)
        assert word.symbols[0].source == word.home
        assert word.symbols[1].target is EXTERIOR
        assert reduce_word(word).coefficient == 2

    def test_detour_reduces_to_same(self):
        mesh = icosphere(3)
        rm = voxel_regions(mesh, resolution=48)
        direct = straight_cable([0.01, 0.02, 0.03], [3.1, 0.2, 0.1])
        detour = Cable(
            np.array(
                [
                    [0.01, 0.02, 0.03],
                    [2.4, 0.9, 0.2],  # exits
                    [0.05, 0.55, 0.1],  # dips back inside
                    [3.1, 0.2, 0.1],
                ]
            )
        )
        w_direct = build_cable_word(direct, mesh, rm)
        w_detour = build_cable_word(detour, mesh, rm)
        assert len(w_direct) == 1 and len(w_detour) == 3
        assert reduce_word(w_direct) == reduce_word(w_detour)

    def test_exterior_cable_empty_word(self):
        mesh = icosphere(2)
        rm = voxel_regions(mesh, resolution=32)
        cable = straight_cable([2.0, 2.0, 2.0], [3.0, 1.0, 0.5])
        word = build_cable_word(cable, mesh, rm)
        assert len(word) == 0
        assert word.home is EXTERIOR

    def test_word_coefficient_matches_cable_index(self):
        rng = np.random.default_rng(23)
        mesh = overlapping_icospheres(2, 1.0, 1.0)
        rm = voxel_regions(mesh, resolution=48)
        anchor = default_exterior(mesh)
        checked = 0
        for _ in range(30):
            p = rng.uniform(-1.2, 1.2, size=3)
            cable = straight_cable(p, anchor)
            try:
                word = build_cable_word(cable, mesh, rm)
            except DegenerateCrossing:
                continue
            assert reduce_word(word).coefficient == cable_index(p, mesh, anchor)
            checked += 1
        assert checked >= 20


class TestMergePrimitive:
    def test_merge_offsets_indices(self):
        m = merge(icosphere(0), icosphere(0, center=(5, 0, 0)))
        assert m.n_vertices == 2 * icosphere(0).n_vertices
        assert validate_mesh(m).closed
