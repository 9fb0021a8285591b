"""Tests for the indexed PG(3,q) model and the pencil of quadrics."""

import os
from unittest.mock import patch

import numpy as np
import pytest

from cameron_liebler.core.field import QuadraticCharacter, build_field
from cameron_liebler.core.geometry import (
    BASE_MARKER,
    PI_MARKER,
    CapacityExceeded,
    InvalidOmega,
    LineKind,
    NotOnGeometry,
    PencilTangency,
    Point,
    build_geometry,
    eval_pencil,
    line_quadric_profile,
    pencil_partition,
    pi_characters_constant,
    polar_image,
    polar_lines,
    polar_plane,
    polar_vectors,
    tangent_members,
    tangent_pencil_member,
)
from cameron_liebler.core.klein import klein_relation


def _dot(spec, a, b):
    """Bilinear pairing of coordinate vectors along the last axis."""
    prods = np.asarray(spec.mul(a, b))
    total = prods[..., 0]
    for k in range(1, prods.shape[-1]):
        total = spec.add(total, prods[..., k])
    return np.asarray(total)


class TestEnumeration:
    """Tests for point, line and plane enumeration."""

    @pytest.mark.parametrize("q", [3, 5, 7])
    def test_counts(self, geometry_of, q):
        g = geometry_of(q)
        assert g.n_points == (q * q + 1) * (q + 1)
        assert g.n_planes == g.n_points
        assert g.n_lines == (q * q + 1) * (q * q + q + 1)
        assert g.line_points.shape == (g.n_lines, q + 1)
        assert g.point_lines.shape == (g.n_points, q * q + q + 1)
        assert g.plane_lines.shape == (g.n_points, q * q + q + 1)

    @pytest.mark.slow
    def test_extension_field_counts(self):
        g = build_geometry(build_field(3, 2))
        assert g.n_points == 82 * 10
        assert g.n_lines == 82 * 91

    def test_points_normalised(self, geom5):
        lead = geom5.points[np.arange(geom5.n_points), (geom5.points != 0).argmax(axis=1)]
        assert np.all(lead == 1)
        assert np.all(np.diff(geom5.point_keys) > 0)

    def test_lines_normalised_and_sorted(self, geom5):
        lead = geom5.lines[np.arange(geom5.n_lines), (geom5.lines != 0).argmax(axis=1)]
        assert np.all(lead == 1)
        assert np.all(np.diff(geom5.line_keys) > 0)

    def test_plucker_vectors_on_klein_quadric(self, geom5):
        assert np.all(klein_relation(geom5.field, geom5.lines) == 0)

    def test_points_of_line_lie_in_its_planes(self, geom5):
        spec = geom5.field
        pts = geom5.points[geom5.line_points][:, :, None, :]
        planes = geom5.points[geom5.line_planes][:, None, :, :]
        assert np.all(_dot(spec, pts, planes) == 0)

    def test_line_through_recovers_every_line(self, geom3):
        for line_id in range(geom3.n_lines):
            a, b = geom3.line_points[line_id][:2]
            assert geom3.line_through(int(a), int(b)) == line_id

    def test_two_lines_through_point_pair_is_unique(self, geom3):
        """Every pair of distinct points lies on exactly one line."""
        pair_count = np.zeros((geom3.n_points, geom3.n_points), dtype=np.int64)
        for pts in geom3.line_points:
            for a in pts:
                for b in pts:
                    if a != b:
                        pair_count[a, b] += 1
        off_diagonal = ~np.eye(geom3.n_points, dtype=bool)
        assert np.all(pair_count[off_diagonal] == 1)

    def test_reference_points(self, geom7):
        assert geom7.point(geom7.u3).coords == (0, 0, 1, 0)
        assert geom7.plane(geom7.pi).dual_coords == (0, 0, 0, 1)
        assert isinstance(geom7.point(geom7.u1), Point)

    def test_pi_and_u3_line_masks(self, geom7):
        q = 7
        assert int(geom7.in_pi.sum()) == q * q + q + 1
        assert int(geom7.through_u3.sum()) == q * q + q + 1
        assert int((geom7.in_pi & geom7.through_u3).sum()) == q + 1
        assert set(geom7.lines_in(geom7.pi)) == set(np.flatnonzero(geom7.in_pi))
        assert set(geom7.lines_through(geom7.u3)) == set(np.flatnonzero(geom7.through_u3))

    def test_pi_trace(self, geom5):
        off_pi = ~geom5.in_pi
        traces = geom5.pi_trace[off_pi]
        assert np.all(geom5.points[traces, 3] == 0)
        assert np.all(geom5.pi_trace[geom5.in_pi] == -1)

    def test_line_record(self, geom3):
        line = geom3.line(5)
        assert len(line.point_ids) == 4
        assert len(line.plane_ids) == 4
        assert line.plucker == tuple(int(c) for c in geom3.lines[5])


class TestLookupErrors:
    """Tests for invalid ids and coordinates."""

    def test_point_id_out_of_range(self, geom3):
        with pytest.raises(NotOnGeometry):
            geom3.point(geom3.n_points)

    def test_line_id_negative(self, geom3):
        with pytest.raises(NotOnGeometry):
            geom3.line(-1)

    def test_zero_vector(self, geom3):
        with pytest.raises(NotOnGeometry):
            geom3.point_id((0, 0, 0, 0))

    def test_line_through_same_point(self, geom3):
        with pytest.raises(NotOnGeometry):
            geom3.line_through(0, 0)

    def test_plucker_off_klein_quadric(self, geom3):
        """(1,0,0,0,0,1) violates p01p23 − p02p13 + p03p12 = 0."""
        with pytest.raises(NotOnGeometry):
            geom3.line_id((1, 0, 0, 0, 0, 1))

    def test_point_id_accepts_unnormalised(self, geom5):
        assert geom5.point_id((0, 0, 3, 0)) == geom5.u3


class TestBuildOptions:
    """Tests for capacity and omega handling."""

    def test_capacity_exceeded(self):
        with pytest.raises(CapacityExceeded) as exc_info:
            build_geometry(build_field(5), max_q=3)
        assert exc_info.value.q == 5

    @pytest.mark.parametrize("omega", [0, 1, 2, 4])
    def test_omega_must_be_nonsquare(self, omega):
        with pytest.raises(InvalidOmega):
            build_geometry(build_field(7), omega=omega)

    def test_omega_from_settings(self):
        with patch.dict(os.environ, {"CL_OMEGA": "5"}):
            g = build_geometry(build_field(7))
        assert g.omega == 5

    def test_default_omega_is_smallest_nonsquare(self, geom7):
        assert geom7.omega == 3


class TestPencil:
    """Tests for the pencil Q_λ = X1² − ωX2² + λX4² + X3X4."""

    @pytest.mark.parametrize("q", [3, 5, 7])
    def test_every_member_has_q2_plus_1_points(self, geometry_of, q):
        g = geometry_of(q)
        for lam in range(q):
            pts = g.quadric_points(lam)
            assert len(pts) == q * q + 1
            assert g.u3 in pts

    def test_eval_pencil(self, geom7):
        assert eval_pencil(geom7, 0, geom7.u1) is QuadraticCharacter.SQUARE
        assert eval_pencil(geom7, 3, geom7.u3) is QuadraticCharacter.ZERO

    @pytest.mark.parametrize("q", [3, 5, 7])
    def test_partition(self, geometry_of, q):
        partition = pencil_partition(geometry_of(q))
        for lam in range(q):
            assert int((partition == lam).sum()) == q * q
        assert int((partition == PI_MARKER).sum()) == q * q + q
        assert int((partition == BASE_MARKER).sum()) == 1

    def test_characters_constant_on_pi(self, geom5):
        assert pi_characters_constant(geom5)

    @pytest.mark.parametrize("q", [5, 7])
    def test_unique_tangent_member_off_pi(self, geometry_of, q):
        g = geometry_of(q)
        avoiding = ~g.in_pi & ~g.through_u3
        assert np.all(tangent_members(g)[avoiding] >= 0)

    @pytest.mark.parametrize("q", [5, 7])
    def test_lines_through_u3_off_pi_secant_to_all(self, geometry_of, q):
        g = geometry_of(q)
        column = ~g.in_pi & g.through_u3
        assert np.all(g.line_zero_counts[:, column] == 2)


class TestLineProfiles:
    """Tests for line/quadric classification on coordinate lines."""

    def test_line_in_pi_through_u3_is_tangent(self, geom7):
        line = geom7.line_through(geom7.u1, geom7.u3)
        for lam in range(7):
            profile = line_quadric_profile(geom7, line, lam)
            assert profile.kind is LineKind.TANGENT
            assert profile.points == (geom7.u3,)

    def test_line_u1_u4(self, geom7):
        """On (s,0,0,t) the form is s² + λt²: external iff −λ is a non-square."""
        u4 = geom7.point_id((0, 0, 0, 1))
        line = geom7.line_through(geom7.u1, u4)
        assert line_quadric_profile(geom7, line, 0).kind is LineKind.TANGENT
        assert line_quadric_profile(geom7, line, 1).kind is LineKind.EXTERNAL
        assert line_quadric_profile(geom7, line, 3).kind is LineKind.SECANT

    def test_tangent_pencil_member_outcomes(self, geom7):
        u4 = geom7.point_id((0, 0, 0, 1))
        off_pi = tangent_pencil_member(geom7, geom7.line_through(geom7.u1, u4))
        assert off_pi.kind is PencilTangency.UNIQUE_MEMBER
        assert off_pi.lam == 0
        assert (
            tangent_pencil_member(geom7, geom7.line_through(geom7.u1, geom7.u3)).kind
            is PencilTangency.PI_THROUGH_U3
        )
        assert (
            tangent_pencil_member(geom7, geom7.line_through(geom7.u1, geom7.u2)).kind
            is PencilTangency.PI_AVOIDING_U3
        )
        assert (
            tangent_pencil_member(geom7, geom7.line_through(geom7.u3, u4)).kind
            is PencilTangency.THROUGH_U3_OFF_PI
        )


class TestPolarity:
    """Tests for the polarities ⊥_λ."""

    @pytest.mark.parametrize("lam", [0, 1, 3])
    def test_polar_plane_of_base_point_is_pi(self, geom7, lam):
        assert polar_plane(geom7, lam, geom7.u3) == geom7.pi

    @pytest.mark.parametrize("lam", [0, 2])
    def test_polar_lines_are_an_involution(self, geom5, lam):
        polars = polar_lines(geom5, lam)
        assert np.array_equal(polar_lines(geom5, lam, polars), np.arange(geom5.n_lines))

    @pytest.mark.parametrize("lam", [0, 4])
    def test_quadric_points_lie_in_their_tangent_planes(self, geom5, lam):
        pts = geom5.points[geom5.quadric_points(lam)]
        planes = polar_vectors(geom5, lam, pts)
        assert np.all(_dot(geom5.field, pts, planes) == 0)

    def test_polars_of_tangent_lines_are_tangent(self, geom5):
        polars = polar_lines(geom5, 0)
        tangent = geom5.line_zero_counts[0] == 1
        assert np.all(tangent[polars[tangent]])

    def test_polar_image_dispatch(self, geom5):
        plane = polar_image(geom5, 0, geom5.point(geom5.u3))
        assert plane.id == geom5.pi
        line = polar_image(geom5, 0, geom5.line(0))
        assert line.id == int(polar_lines(geom5, 0, [0])[0])
        with pytest.raises(TypeError):
            polar_image(geom5, 0, "not a point")
