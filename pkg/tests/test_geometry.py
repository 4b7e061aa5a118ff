"""Mesh loading, validation, normalization, and the view schedule."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rocotex.geometry import (
    CameraView,
    MeshError,
    ViewPair,
    load_mesh,
    normalize_mesh,
    triangle_areas,
    view_schedule,
    write_obj,
)


class TestLoadMesh:
    def test_unit_cube(self, cube_obj):
        mesh = load_mesh(cube_obj)
        assert mesh.num_vertices == 24
        assert mesh.num_triangles == 12
        # synthesized normals are axis-aligned on a cube
        axes = np.abs(mesh.normals)
        assert np.allclose(axes.max(axis=1), 1.0, atol=1e-12)
        assert np.allclose(np.linalg.norm(mesh.normals, axis=1), 1.0, atol=1e-4)

    def test_missing_uvs_rejected(self, tmp_path):
        path = tmp_path / "nouv.obj"
        path.write_text(
            "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n", encoding="utf-8"
        )
        with pytest.raises(MeshError, match="UV-unwrapped"):
            load_mesh(path)

    def test_normal_only_faces_rejected(self, tmp_path):
        path = tmp_path / "vn_only.obj"
        path.write_text(
            "v 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1\n",
            encoding="utf-8",
        )
        with pytest.raises(MeshError, match="UV-unwrapped"):
            load_mesh(path)

    def test_single_triangle_uv_area(self, tmp_path):
        path = tmp_path / "tri.obj"
        path.write_text(
            "v 0 0 0\nv 1 0 0\nv 0 1 0\n"
            "vt 0 0\nvt 1 0\nvt 0 1\n"
            "f 1/1 2/2 3/3\n",
            encoding="utf-8",
        )
        mesh = load_mesh(path)
        assert mesh.num_triangles == 1
        assert triangle_areas(mesh.uvs, mesh.triangles)[0] == pytest.approx(0.5)

    def test_malformed_record_reports_line(self, tmp_path):
        path = tmp_path / "bad.obj"
        path.write_text("v 0 0 0\nv 1 0 0\nv oops 1 0\n", encoding="utf-8")
        with pytest.raises(MeshError, match="line 3"):
            load_mesh(path)

    def test_quad_faces_fan_triangulated(self, tmp_path):
        path = tmp_path / "quadface.obj"
        path.write_text(
            "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\n"
            "vt 0 0\nvt 1 0\nvt 1 1\nvt 0 1\n"
            "f 1/1 2/2 3/3 4/4\n",
            encoding="utf-8",
        )
        mesh = load_mesh(path)
        assert mesh.num_triangles == 2

    def test_unknown_records_warn(self, tmp_path):
        path = tmp_path / "extra.obj"
        path.write_text(
            "mtllib foo.mtl\no thing\n"
            "v 0 0 0\nv 1 0 0\nv 0 1 0\n"
            "vt 0 0\nvt 1 0\nvt 0 1\n"
            "f 1/1 2/2 3/3\n",
            encoding="utf-8",
        )
        with pytest.warns(UserWarning, match="ignored OBJ record"):
            load_mesh(path)

    def test_negative_indices(self, tmp_path):
        path = tmp_path / "neg.obj"
        path.write_text(
            "v 0 0 0\nv 1 0 0\nv 0 1 0\n"
            "vt 0 0\nvt 1 0\nvt 0 1\n"
            "f -3/-3 -2/-2 -1/-1\n",
            encoding="utf-8",
        )
        assert load_mesh(path).num_triangles == 1

    def test_uv_out_of_range_rejected(self, tmp_path):
        path = tmp_path / "uvrange.obj"
        path.write_text(
            "v 0 0 0\nv 1 0 0\nv 0 1 0\n"
            "vt 0 0\nvt 2 0\nvt 0 1\n"
            "f 1/1 2/2 3/3\n",
            encoding="utf-8",
        )
        with pytest.raises(MeshError, match="uv"):
            load_mesh(path)

    def test_roundtrip_export_import(self, cube_obj, tmp_path):
        mesh = load_mesh(cube_obj)
        out = tmp_path / "roundtrip.obj"
        write_obj(mesh, out)
        again = load_mesh(out)
        np.testing.assert_allclose(again.positions, mesh.positions, atol=1e-6)
        np.testing.assert_allclose(again.uvs, mesh.uvs, atol=1e-6)
        np.testing.assert_array_equal(again.triangles, mesh.triangles)


class TestNormalizeMesh:
    def test_recenters_and_scales(self, cube_obj):
        mesh = load_mesh(cube_obj)
        big = type(mesh)(
            positions=mesh.positions * 4.0,  # cube spanning [-2, 2]^3
            normals=mesh.normals,
            uvs=mesh.uvs,
            triangles=mesh.triangles,
        )
        normed = normalize_mesh(big)
        assert np.allclose(normed.bbox_center(), 0.0, atol=1e-12)
        assert normed.bounding_radius() == pytest.approx(1.0, abs=1e-12)

    def test_idempotent(self, sphere_mesh):
        once = normalize_mesh(sphere_mesh)
        twice = normalize_mesh(once)
        assert np.abs(twice.positions - once.positions).max() < 1e-6

    def test_translation_removed(self, cube_obj):
        mesh = load_mesh(cube_obj)
        moved = type(mesh)(
            positions=mesh.positions + np.array([10.0, 0.0, 0.0]),
            normals=mesh.normals,
            uvs=mesh.uvs,
            triangles=mesh.triangles,
        )
        a = normalize_mesh(mesh)
        b = normalize_mesh(moved)
        np.testing.assert_allclose(a.positions, b.positions, atol=1e-9)

    def test_degenerate_rejected(self, cube_obj):
        mesh = load_mesh(cube_obj)
        flat = type(mesh)(
            positions=np.zeros_like(mesh.positions),
            normals=mesh.normals,
            uvs=mesh.uvs,
            triangles=mesh.triangles,
        )
        with pytest.raises(MeshError, match="degenerate"):
            normalize_mesh(flat)


class TestViewSchedule:
    def test_default_two_pairs_four_viewpoints(self):
        pairs = view_schedule(pair_count=2)
        assert len(pairs) == 2
        azimuths = [(p.view_i.azimuth, p.view_j.azimuth) for p in pairs]
        assert azimuths == [(0.0, 180.0), (90.0, 270.0)]
        assert pairs[0].label == "front-back"
        assert pairs[1].label == "right-left"

    def test_single_pair(self):
        pairs = view_schedule(pair_count=1)
        assert len(pairs) == 1
        assert (pairs[0].view_i.azimuth, pairs[0].view_j.azimuth) == (0.0, 180.0)

    def test_third_pair_elevated(self):
        pairs = view_schedule(pair_count=3, extra_elevation=45.0)
        third = pairs[2]
        assert (third.view_i.azimuth, third.view_j.azimuth) == (0.0, 180.0)
        assert third.view_i.elevation == 45.0
        assert third.view_j.elevation == 45.0

    def test_pair_count_zero_rejected(self):
        with pytest.raises(ValueError):
            view_schedule(pair_count=0)

    def test_deterministic(self):
        a = view_schedule(pair_count=4)
        b = view_schedule(pair_count=4)
        assert a == b

    @settings(max_examples=50, deadline=None)
    @given(
        azimuth=st.floats(0.0, 360.0, allow_nan=False),
        radius=st.floats(1.0, 10.0, allow_nan=False),
    )
    def test_pair_directions_antiparallel(self, azimuth, radius):
        # exact antiparallelism holds at elevation 0 (the default schedule);
        # equal nonzero elevations mirror the vertical component instead
        pair = ViewPair(
            CameraView(azimuth, 0.0, radius, width=32, height=32),
            CameraView(azimuth + 180.0, 0.0, radius, width=32, height=32),
        )
        target = np.zeros(3)
        di = target - pair.view_i.eye()
        dj = target - pair.view_j.eye()
        di /= np.linalg.norm(di)
        dj /= np.linalg.norm(dj)
        assert np.abs(di + dj).max() < 1e-6

    def test_elevated_pair_horizontally_antiparallel(self):
        pair = view_schedule(pair_count=3, extra_elevation=45.0)[2]
        di = -pair.view_i.eye()
        dj = -pair.view_j.eye()
        horiz_i = np.array([di[0], di[2]]) / np.linalg.norm([di[0], di[2]])
        horiz_j = np.array([dj[0], dj[2]]) / np.linalg.norm([dj[0], dj[2]])
        assert np.abs(horiz_i + horiz_j).max() < 1e-6

    def test_mismatched_pair_rejected(self):
        with pytest.raises(ValueError):
            ViewPair(
                CameraView(0.0, 0.0, 2.5, width=32, height=32),
                CameraView(90.0, 0.0, 2.5, width=32, height=32),
            )


class TestCameraView:
    def test_transforms_invertible(self):
        view = CameraView(azimuth=33.0, elevation=17.0, radius=3.0, width=64, height=48)
        assert abs(np.linalg.det(view.view_matrix())) > 1e-9
        assert abs(np.linalg.det(view.projection_matrix())) > 1e-12

    def test_projection_center(self):
        view = CameraView(azimuth=0.0, elevation=0.0, radius=2.5, width=64, height=64)
        px, py, w = view.project_points(np.zeros((1, 3)))
        assert px[0] == pytest.approx(32.0)
        assert py[0] == pytest.approx(32.0)
        assert w[0] == pytest.approx(2.5)

    def test_aspect_matches_resolution(self):
        view = CameraView(azimuth=0.0, elevation=0.0, radius=2.5, width=200, height=100)
        assert view.aspect == 2.0
