"""Tests for the Klein-quadric tight-set check."""

from fractions import Fraction

import numpy as np
import pytest

from cameron_liebler.core.classes import Family, bruen_drudge, construct, meet_counts, verify_cl
from cameron_liebler.core.klein import (
    EmptySet,
    evaluate_counts,
    histogram,
    klein_form,
    klein_image,
    klein_meet_counts,
    lines_meet,
    tight_set_check,
)


class TestKleinForm:
    """Tests for the polarised Klein form."""

    def test_lines_meet_iff_they_share_a_point(self, geom3):
        """All 130² pairs at q = 3 against point-set intersection."""
        incidence = np.zeros((geom3.n_lines, geom3.n_points), dtype=np.int64)
        np.put_along_axis(incidence, geom3.line_points, 1, axis=1)
        shares = (incidence @ incidence.T) > 0
        form = np.asarray(klein_form(geom3.field, geom3.lines[:, None, :], geom3.lines[None, :, :]))
        assert np.array_equal(form == 0, shares)
        for a in range(geom3.n_lines):
            for b in range(geom3.n_lines):
                assert lines_meet(geom3, a, b) == shares[a, b]

    def test_line_meets_itself(self, geom5):
        assert lines_meet(geom5, 17, 17)

    def test_skew_lines(self, geom5):
        u4 = geom5.point_id((0, 0, 0, 1))
        a = geom5.line_through(geom5.u1, geom5.u2)
        b = geom5.line_through(geom5.u3, u4)
        assert not lines_meet(geom5, a, b)

    def test_form_is_symmetric(self, geom5):
        rng = np.random.default_rng(7)
        a, b = rng.integers(0, geom5.n_lines, size=(2, 50))
        left = klein_form(geom5.field, geom5.lines[a], geom5.lines[b])
        right = klein_form(geom5.field, geom5.lines[b], geom5.lines[a])
        assert np.array_equal(left, right)

    def test_klein_image(self, geom3):
        point = klein_image(geom3, 3)
        assert point.line_id == 3
        assert point.coords == tuple(int(c) for c in geom3.lines[3])


class TestTightSetCheck:
    """Tests for i-tightness over the Klein quadric."""

    def test_point_star_is_one_tight(self, geom5):
        report = tight_set_check(geom5, geom5.lines_through(0))
        assert report.passed
        assert report.i == 1
        assert report.histogram_in == {5 * 5 + 6: 31}

    def test_bruen_drudge_class(self, dec5):
        """x = 13 at q = 5: 13·6 + 25 = 103 on the class, 78 off it."""
        line_class = bruen_drudge(dec5)
        report = tight_set_check(dec5.geometry, line_class.ids(), line_class.parameter)
        assert report.passed
        assert report.i == 13
        assert report.target_in == 103
        assert report.target_out == 78
        assert set(report.histogram_in) == {103}
        assert set(report.histogram_out) == {78}
        assert report.witnesses == []

    def test_size_not_a_multiple(self, geom3):
        report = tight_set_check(geom3, [0, 1, 2])
        assert not report.passed
        assert "not a multiple" in report.reason
        assert report.witnesses

    def test_claimed_parameter_mismatch(self, geom3):
        report = tight_set_check(geom3, geom3.lines_through(0), i=Fraction(2))
        assert not report.passed
        assert "claimed i = 2" in report.reason

    def test_empty_set(self, geom3):
        with pytest.raises(EmptySet):
            tight_set_check(geom3, [])

    def test_removing_a_line_breaks_tightness(self, geom5):
        """Point 0 is off plane 0, so swapping one star line for a line of the plane keeps |T| = q²+q+1."""
        star = [int(x) for x in geom5.lines_through(0)]
        mixed = star[1:] + [int(geom5.lines_in(0)[0])]
        report = tight_set_check(geom5, mixed)
        assert not report.passed

    @pytest.mark.parametrize("q", [5, 7])
    def test_random_sets_of_class_size_fail(self, geometry_of, q):
        """A random 403-line set at q = 5 (1425 at q = 7) is not (q²+1)/2-tight."""
        g = geometry_of(q)
        rng = np.random.default_rng(q)
        size = (q * q + 1) * (q * q + q + 1) // 2
        for _ in range(3):
            ids = rng.choice(g.n_lines, size=size, replace=False)
            report = tight_set_check(g, ids, Fraction(q * q + 1, 2))
            assert report.passed is False
            assert report.witnesses

    def test_report_to_dict(self, geom3):
        data = tight_set_check(geom3, geom3.lines_through(0)).to_dict()
        assert data["criterion"] == "tight_set"
        assert data["i"] == "1"
        assert data["target_in"] == str(1 * 4 + 9)
        assert data["passed"] is True


class TestMeetCounts:
    """Tests for the chunked fold."""

    def test_chunking_and_workers_do_not_change_counts(self, dec5):
        ids = bruen_drudge(dec5).ids()
        g = dec5.geometry
        baseline = klein_meet_counts(g, ids, workers=1, chunk_size=g.n_lines)
        chunked = klein_meet_counts(g, ids, workers=4, chunk_size=37)
        assert np.array_equal(baseline, chunked)

    @pytest.mark.parametrize("family", list(Family))
    @pytest.mark.parametrize(
        "q", [5, pytest.param(9, marks=pytest.mark.slow), pytest.param(11, marks=pytest.mark.slow)]
    )
    def test_agrees_with_star_counts(self, decomposition_of, q, family):
        """The Klein fold and the line-star sums are independent but must agree."""
        dec = decomposition_of(q)
        g = dec.geometry
        line_class = construct(dec, family)
        klein = klein_meet_counts(g, line_class.ids())
        stars = meet_counts(g, line_class.mask(g.n_lines))
        assert np.array_equal(klein, stars)
        assert verify_cl(g, line_class).passed
        assert tight_set_check(g, line_class.ids(), line_class.parameter).passed

    @pytest.mark.slow
    def test_extension_field_fold(self, geometry_of):
        g = geometry_of(9)
        counts = klein_meet_counts(g, g.lines_through(0))
        report = evaluate_counts(g, g.lines_through(0), counts, "tight_set")
        assert report.passed

    def test_histogram(self):
        assert histogram(np.array([3, 1, 3, 3])) == {1: 1, 3: 3}
