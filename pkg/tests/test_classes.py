"""Tests for the orbit decomposition and the three class constructions."""

from dataclasses import FrozenInstanceError
from fractions import Fraction

import numpy as np
import pytest

from cameron_liebler.core.classes import (
    DerivationPair,
    Family,
    InvalidDerivationPair,
    LineClass,
    PreconditionViolated,
    SizeMismatch,
    StepKind,
    bruen_drudge,
    complement,
    construct,
    count_meeting,
    cp_gmp,
    default_pair,
    derivation_sets,
    derive,
    derive_sequence,
    expected_tactical_matrices,
    meet_counts,
    pi_external_lines,
    tactical_matrices,
    u3_secant_lines,
    verify_cl,
)


def _line_class_size(q: int) -> int:
    return (q * q + 1) * (q * q + q + 1) // 2


class TestDecompose:
    """Tests for the point and line families of E."""

    @pytest.mark.parametrize("q", [3, 5, 7])
    def test_family_sizes(self, decomposition_of, q):
        sizes = decomposition_of(q).sizes()
        assert sizes["E"] == q * q + 1
        assert sizes["Os"] == sizes["On"] == q * (q * q + 1) // 2
        assert sizes["L0"] == sizes["L1"] == (q + 1) * (q * q + 1) // 2
        assert sizes["L2"] == sizes["L3"] == q * q * (q * q + 1) // 2
        assert sizes["pi0"] == sizes["pi1"] == q * (q + 1) // 2
        assert sizes["t0"] == sizes["t1"] == (q + 1) // 2

    def test_families_partition_lines(self, dec5):
        total = dec5.L0.astype(int) + dec5.L1 + dec5.L2 + dec5.L3
        assert np.all(total == 1)

    def test_families_partition_points(self, dec5):
        total = dec5.E.astype(int) + dec5.Os + dec5.On
        assert np.all(total == 1)

    def test_ids(self, dec3):
        assert np.array_equal(dec3.ids("L0"), np.flatnonzero(dec3.L0))

    @pytest.mark.parametrize("q", [3, 5, 7])
    def test_tactical_matrices(self, decomposition_of, q):
        block, point = tactical_matrices(decomposition_of(q))
        expected_block, expected_point = expected_tactical_matrices(q)
        assert np.array_equal(block, expected_block)
        assert np.array_equal(point, expected_point)


class TestBruenDrudge:
    """Tests for L′ = L0 ∪ L3."""

    @pytest.mark.parametrize("q,size", [(3, 65), (5, 403), (7, 1425)])
    def test_size(self, decomposition_of, q, size):
        line_class = bruen_drudge(decomposition_of(q))
        assert line_class.size == size
        assert line_class.parameter == Fraction(q * q + 1, 2)

    @pytest.mark.parametrize("q", [3, 5, 7])
    def test_verify(self, decomposition_of, q):
        dec = decomposition_of(q)
        report = verify_cl(dec.geometry, bruen_drudge(dec))
        x = (q * q + 1) // 2
        assert report.passed
        assert report.criterion == "line_meets"
        assert set(report.histogram_in) == {x * (q + 1) + q * q}
        assert set(report.histogram_out) == {x * (q + 1)}

    def test_provenance(self, dec5):
        (step,) = bruen_drudge(dec5).provenance
        assert step.kind is StepKind.FAMILY
        assert step.family is Family.BRUEN_DRUDGE
        assert step.to_dict() == {"kind": "family", "family": "bd"}


class TestPerturbed:
    """Tests for L″ = (L′ ∖ L3′) ∪ L2′."""

    @pytest.mark.parametrize("q", [5, 7])
    def test_swapped_sets(self, decomposition_of, q):
        dec = decomposition_of(q)
        assert int(pi_external_lines(dec).sum()) == q * q
        assert int(u3_secant_lines(dec).sum()) == q * q

    @pytest.mark.parametrize("q", [5, 7])
    def test_verify(self, decomposition_of, q):
        dec = decomposition_of(q)
        line_class = cp_gmp(dec)
        assert line_class.size == _line_class_size(q)
        assert verify_cl(dec.geometry, line_class).passed

    def test_differs_from_bruen_drudge(self, dec7):
        assert cp_gmp(dec7).lines != bruen_drudge(dec7).lines


class TestDerivation:
    """Tests for the (L ∖ A) ∪ B switch."""

    @pytest.mark.parametrize("q", [5, 7])
    def test_derivation_sets(self, decomposition_of, q):
        dec = decomposition_of(q)
        sets = derivation_sets(dec, default_pair(dec.geometry))
        part = q * q * (q + 1) // 2
        for name in ("T10", "T11", "T20", "T21"):
            assert int(getattr(sets, name).sum()) == part
        assert not np.any(sets.A & sets.B)

    @pytest.mark.parametrize("q,pair", [(5, (1, 2)), (5, (4, 3)), (7, (1, 3)), (7, (2, 5))])
    def test_derived_class_verifies(self, decomposition_of, q, pair):
        dec = decomposition_of(q)
        derived = derive(dec, bruen_drudge(dec), DerivationPair.create(dec.geometry, *pair))
        assert derived.size == _line_class_size(q)
        report = verify_cl(dec.geometry, derived)
        assert report.passed, report.witnesses

    def test_derived_class_is_new(self, dec7):
        original = bruen_drudge(dec7)
        derived = construct(dec7, Family.DERIVED)
        assert derived.lines != original.lines
        changed = original.lines ^ derived.lines
        assert len(changed) == 2 * 7 * 7 * 8

    def test_derived_from_perturbed(self, dec7):
        derived = derive(dec7, cp_gmp(dec7), default_pair(dec7.geometry))
        assert verify_cl(dec7.geometry, derived).passed

    def test_multiple_derivation(self, dec7):
        g = dec7.geometry
        pairs = [DerivationPair.create(g, 1, 3), DerivationPair.create(g, 2, 5)]
        derived = derive_sequence(dec7, bruen_drudge(dec7), pairs)
        assert verify_cl(g, derived).passed
        kinds = [step.kind for step in derived.provenance]
        assert kinds == [StepKind.FAMILY, StepKind.DERIVE, StepKind.DERIVE]
        assert derived.provenance[2].to_dict() == {"kind": "derive", "lambda1": 2, "lambda2": 5}

    def test_repeated_lambda_rejected(self, dec7):
        g = dec7.geometry
        pairs = [DerivationPair.create(g, 1, 3), DerivationPair.create(g, 1, 5)]
        with pytest.raises(PreconditionViolated, match="repeated lambda1"):
            derive_sequence(dec7, bruen_drudge(dec7), pairs)

    def test_deriving_twice_with_same_pair_fails(self, dec7):
        pair = default_pair(dec7.geometry)
        once = derive(dec7, bruen_drudge(dec7), pair)
        with pytest.raises(PreconditionViolated) as exc_info:
            derive(dec7, once, pair)
        assert exc_info.value.missing_from_A
        assert exc_info.value.colliding_in_B

    def test_wrong_parameter(self, dec5):
        star = LineClass(5, frozenset(int(x) for x in dec5.geometry.lines_through(0)), Fraction(1))
        with pytest.raises(PreconditionViolated, match="parameter"):
            derive(dec5, star, default_pair(dec5.geometry))

    @pytest.mark.parametrize("pair", [(3, 3), (1, 1), (0, 3), (1, 0), (1, 7)])
    def test_invalid_pair(self, geom7, pair):
        with pytest.raises(InvalidDerivationPair):
            DerivationPair.create(geom7, *pair)

    def test_default_pair(self, geom7, geom5):
        assert default_pair(geom7) == DerivationPair(1, 3)
        assert default_pair(geom5) == DerivationPair(1, 2)


class TestVerify:
    """Tests for the line-star meet counts."""

    def test_size_mismatch(self, dec5):
        line_class = bruen_drudge(dec5)
        smaller = LineClass(5, line_class.lines - {min(line_class.lines)}, line_class.parameter)
        with pytest.raises(SizeMismatch) as exc_info:
            verify_cl(dec5.geometry, smaller)
        assert exc_info.value.divisor == 31

    def test_swapped_line_fails(self, dec5):
        """Swap one class line for one outside: the size is kept but counts break."""
        line_class = bruen_drudge(dec5)
        outside = next(i for i in range(dec5.geometry.n_lines) if i not in line_class)
        lines = (line_class.lines - {min(line_class.lines)}) | {outside}
        report = verify_cl(dec5.geometry, LineClass(5, lines, line_class.parameter))
        assert not report.passed
        assert report.witnesses

    @pytest.mark.parametrize("q", [5, 7])
    def test_random_sets_of_class_size_fail(self, geometry_of, q):
        g = geometry_of(q)
        rng = np.random.default_rng(20240101 + q)
        parameter = Fraction(q * q + 1, 2)
        for _ in range(5):
            ids = rng.choice(g.n_lines, size=_line_class_size(q), replace=False)
            report = verify_cl(g, LineClass(q, frozenset(int(i) for i in ids), parameter))
            assert report.passed is False
            assert report.witnesses

    def test_count_meeting_matches_vector(self, dec5):
        g = dec5.geometry
        mask = bruen_drudge(dec5).mask(g.n_lines)
        proper = meet_counts(g, mask, proper=True)
        for line_id in (0, 100, 500, g.n_lines - 1):
            assert count_meeting(g, mask, line_id) == proper[line_id]

    def test_proper_counts_drop_the_line_itself(self, dec5):
        g = dec5.geometry
        mask = bruen_drudge(dec5).mask(g.n_lines)
        diff = meet_counts(g, mask) - meet_counts(g, mask, proper=True)
        assert np.array_equal(diff, mask.astype(np.int64))


class TestComplementAndConstruct:
    def test_complement(self, dec5):
        g = dec5.geometry
        line_class = bruen_drudge(dec5)
        other = complement(g, line_class)
        assert other.size == g.n_lines - line_class.size
        assert other.parameter == Fraction(13)
        assert other.provenance[-1].kind is StepKind.COMPLEMENT
        assert verify_cl(g, other).passed

    def test_construct_dispatch(self, dec5):
        assert construct(dec5, "bd").lines == bruen_drudge(dec5).lines
        assert construct(dec5, Family.PERTURBED).lines == cp_gmp(dec5).lines

    def test_construct_with_pairs(self, dec7):
        g = dec7.geometry
        line_class = construct(dec7, "derived", [DerivationPair.create(g, 2, 6)])
        assert line_class.provenance[-1].lambda1 == 2

    def test_line_class_is_immutable(self, dec3):
        line_class = bruen_drudge(dec3)
        with pytest.raises(FrozenInstanceError):
            line_class.lines = frozenset()
        with pytest.raises(AttributeError):
            line_class.lines.add(0)
