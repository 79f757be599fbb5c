"""Homotopy tests: swept volumes, index traces, the lower bound."""

import numpy as np
import pytest

from cabledeg.errors import MeshFormatError
from cabledeg.geom3d import flip, icosphere
from cabledeg.geom3d.mesh import TriangleMesh, enclosed_volume, save_off
from cabledeg.homotopy import (
    DiscreteHomotopy,
    builtin_homotopy,
    index_trace,
    load_frames,
    radial_contraction,
    save_frames,
    sense_preserving_report,
    swept_volume,
    translate_return_contract,
    verify_lower_bound,
    wobble_contraction,
)

BALL = 4.0 * np.pi / 3.0


class TestDiscreteHomotopy:
    def test_rejects_uncollapsed_final_frame(self):
        mesh = icosphere(1)
        frames = np.stack([mesh.vertices, mesh.vertices * 0.5])
        with pytest.raises(ValueError, match="not collapsed"):
            DiscreteHomotopy(mesh.triangles, frames, np.array([0.0, 1.0]))

    def test_rejects_bad_times(self):
        mesh = icosphere(1)
        frames = np.stack([mesh.vertices, mesh.vertices * 0.0])
        with pytest.raises(ValueError, match="times"):
            DiscreteHomotopy(mesh.triangles, frames, np.array([0.0, 0.5]))

    def test_positions_interpolate(self):
        h = radial_contraction(icosphere(1), n_frames=5)
        mid = h.positions_at(0.5)
        assert np.allclose(mid, 0.5 * h.frames[0])
        assert np.allclose(h.positions_at(0.0), h.frames[0])
        assert np.allclose(h.positions_at(1.0), h.frames[-1])


class TestSweptVolume:
    def test_radial_contraction_equals_enclosed_volume(self):
        # Linear contraction prisms tile the ball exactly; the value
        # matches the mesh volume at any frame count.
        mesh = icosphere(3)
        sv = swept_volume(radial_contraction(mesh, n_frames=8))
        assert sv.volume == pytest.approx(enclosed_volume(mesh), rel=1e-9)
        assert sv.mixed_sign_prisms == 0

    def test_radial_contraction_near_ball(self):
        sv = swept_volume(radial_contraction(icosphere(4), n_frames=64))
        assert sv.volume == pytest.approx(BALL, rel=0.03)

    def test_refinement_stability(self):
        mesh = icosphere(2)
        v32 = swept_volume(radial_contraction(mesh, n_frames=32)).volume
        v64 = swept_volume(radial_contraction(mesh, n_frames=64)).volume
        assert abs(v64 - v32) / v32 < 0.01

    def test_stationary_then_snap(self):
        mesh = icosphere(2)
        frames = np.stack([mesh.vertices] * 4 + [mesh.vertices * 0.0])
        h = DiscreteHomotopy(mesh.triangles, frames, np.linspace(0.0, 1.0, 5))
        sv = swept_volume(h)
        # Only the last step moves: a cone fan over the origin.
        assert sv.volume == pytest.approx(enclosed_volume(mesh), rel=1e-9)
        assert sv.stationary_prisms == 3 * mesh.n_triangles
        assert sv.per_step[:3] == (0.0, 0.0, 0.0)

    def test_translate_return_contract_value(self):
        # Each pass sweeps the tube with two sheets: 2 passes x 2 x
        # (pi r^2 d) plus the final ball.
        mesh = icosphere(3)
        sv = swept_volume(translate_return_contract(mesh, n_frames=97))
        want = 4.0 * np.pi * 4.0 + enclosed_volume(mesh)
        assert sv.volume == pytest.approx(want, rel=0.02)

    def test_translation_invariance_of_step_volume(self):
        # Pure translation sweeps rate-independent volume: twice the
        # silhouette area times distance.
        mesh = icosphere(3)
        off = np.array([4.0, 0.0, 0.0])
        frames = np.stack([mesh.vertices, mesh.vertices + off, mesh.vertices * 0.0])
        h = DiscreteHomotopy(mesh.triangles, frames, np.array([0.0, 0.5, 1.0]))
        sv = swept_volume(h)
        assert sv.per_step[0] == pytest.approx(2.0 * np.pi * 4.0, rel=0.02)


class TestIndexTrace:
    def test_interior_point_radial(self):
        h = radial_contraction(icosphere(3), n_frames=32)
        trace = index_trace([0.3, 0.01, 0.02], h)
        assert trace.values == (1, 0)
        assert trace.n_jumps == 1
        # Sphere radius passes |p| at t = 1 - |p| (unit initial radius).
        expect = 1.0 - float(np.linalg.norm([0.3, 0.01, 0.02]))
        assert trace.times[0] == pytest.approx(expect, abs=0.02)
        assert trace.variation == 1

    def test_far_point_constant_zero(self):
        h = radial_contraction(icosphere(2), n_frames=16)
        trace = index_trace([5.0, 5.0, 5.0], h)
        assert trace.values == (0,)
        assert trace.n_jumps == 0

    def test_translate_return_axis_point(self):
        h = translate_return_contract(icosphere(2), n_frames=97)
        trace = index_trace([2.0, 0.013, 0.007], h)
        assert trace.values == (0, 1, 0, 1, 0)
        assert trace.n_jumps == 4
        assert trace.end == 0

    def test_trace_ends_zero_and_variation_bounds_start(self):
        rng = np.random.default_rng(6)
        h = wobble_contraction(icosphere(2), n_frames=24, seed=3)
        for _ in range(10):
            p = rng.uniform(-1.4, 1.4, size=3)
            try:
                trace = index_trace(p, h)
            except Exception:
                continue
            assert trace.end == 0
            assert abs(trace.start) <= trace.variation

    def test_monotone_for_radial(self):
        h = radial_contraction(icosphere(2), n_frames=16)
        rng = np.random.default_rng(8)
        for _ in range(10):
            p = rng.uniform(-0.9, 0.9, size=3)
            if np.linalg.norm(p) < 0.05 or abs(np.linalg.norm(p) - 1.0) < 0.05:
                continue
            trace = index_trace(p, h)
            diffs = np.diff(trace.values)
            assert all(d <= 0 for d in diffs)
            assert trace.variation == abs(trace.start)

    def test_terminal_point_rejected(self):
        h = radial_contraction(icosphere(1), n_frames=4)
        with pytest.raises(ValueError, match="terminal"):
            index_trace([0.0, 0.0, 0.0], h)

    def test_value_at(self):
        h = radial_contraction(icosphere(2), n_frames=16)
        trace = index_trace([0.5, 0.01, 0.01], h)
        assert trace.value_at(0.0) == 1
        assert trace.value_at(1.0) == 0
        jump = trace.times[0]
        assert trace.value_at(jump) == 0  # right-continuous


class TestSenseReport:
    def test_radial_contraction_inward(self):
        report = sense_preserving_report(radial_contraction(icosphere(2), 16))
        assert report.sense_preserving
        assert report.dominant_sign == -1
        assert report.n_positive == 0

    def test_flipped_sphere_contraction_outward_normals(self):
        report = sense_preserving_report(radial_contraction(flip(icosphere(2)), 16))
        assert report.sense_preserving
        assert report.dominant_sign == 1

    def test_translate_return_mixed(self):
        report = sense_preserving_report(translate_return_contract(icosphere(2), 25))
        assert not report.sense_preserving
        assert report.n_positive > 0 and report.n_negative > 0

    def test_constant_frames_degenerate(self):
        mesh = icosphere(1)
        frames = np.stack([mesh.vertices, mesh.vertices, mesh.vertices * 0.0])
        h = DiscreteHomotopy(mesh.triangles, frames, np.array([0.0, 0.5, 1.0]))
        first_step = sense_preserving_report(
            DiscreteHomotopy(
                mesh.triangles,
                np.stack([mesh.vertices * 0.0, mesh.vertices * 0.0]),
                np.array([0.0, 1.0]),
            )
        )
        assert first_step.degenerate
        assert first_step.dominant_sign == 0


class TestLowerBound:
    def test_radial_equality_case(self):
        h = radial_contraction(icosphere(3), n_frames=32)
        report = verify_lower_bound(h, resolution=48)
        assert not report.violation
        assert report.sense.sense_preserving
        assert abs(report.margin_degree) <= 0.05 * abs(report.degree)

    def test_translate_return_slack(self):
        h = translate_return_contract(icosphere(2), n_frames=49)
        report = verify_lower_bound(h, resolution=32)
        assert not report.violation
        assert report.margin_degree > 0.95 * 8.0 * np.pi
        assert not report.sense.sense_preserving

    def test_inside_out_sphere(self):
        h = radial_contraction(flip(icosphere(3)), n_frames=32)
        report = verify_lower_bound(h, resolution=48)
        assert report.degree < 0
        assert not report.violation
        assert abs(report.margin_degree) <= 0.05 * abs(report.degree)

    def test_wobble_corpus_respects_bound(self):
        mesh = icosphere(2)
        for seed in range(5):
            h = wobble_contraction(mesh, n_frames=24, seed=seed)
            report = verify_lower_bound(h, resolution=32)
            assert not report.violation, f"seed {seed}: {report.to_dict()}"
            assert report.swept.volume + report.tolerance >= abs(report.degree)


class TestBuiltinsAndIO:
    def test_builtin_names(self):
        mesh = icosphere(1)
        for name in ("radial", "translate-return", "wobble"):
            h = builtin_homotopy(name, mesh, n_frames=13, seed=1)
            assert h.n_steps >= 2
        with pytest.raises(ValueError, match="unknown homotopy"):
            builtin_homotopy("spin", mesh)

    def test_frame_directory_roundtrip(self, tmp_path):
        h = radial_contraction(icosphere(1), n_frames=5)
        save_frames(h, tmp_path / "frames")
        back = load_frames(tmp_path / "frames")
        assert back.n_steps == h.n_steps
        assert np.allclose(back.frames, h.frames)
        assert np.array_equal(back.triangles, h.triangles)

    def test_frame_directory_connectivity_mismatch(self, tmp_path):
        d = tmp_path / "frames"
        d.mkdir()
        save_off(icosphere(1), d / "a.off")
        save_off(icosphere(2), d / "b.off")
        with pytest.raises(MeshFormatError, match="connectivity"):
            load_frames(d)

    def test_frame_directory_not_collapsed(self, tmp_path):
        d = tmp_path / "frames"
        d.mkdir()
        mesh = icosphere(1)
        save_off(mesh, d / "a.off")
        save_off(TriangleMesh(mesh.vertices * 0.5, mesh.triangles), d / "b.off")
        with pytest.raises(MeshFormatError, match="collapsed"):
            load_frames(d)
