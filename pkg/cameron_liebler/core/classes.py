"""Line classes of parameter (q²+1)/2: orbit decomposition, constructions, derivation.

The elliptic quadric E = E_0 splits the lines of PG(3,q) into four families:
L0 and L1 (tangent lines whose q remaining points are all square or all non-square
points of Q), L2 (secant) and L3 (external). From these:

- the Bruen-Drudge class L′ = L0 ∪ L3,
- the perturbed class L″ = (L′ ∖ L3′) ∪ L2′, where L3′ are the L3-lines of π and
  L2′ the secant lines through U3,
- derived classes (L ∖ A) ∪ B for a pair (λ1 square, λ2 non-square) of pencil members.

verify_cl checks the Cameron-Liebler meet counts through line stars. This is a
separate code path from the Klein-form fold in cameron_liebler.core.klein.
"""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any

import numpy as np

from cameron_liebler.config import get_settings
from cameron_liebler.core.field import (
    FieldElement,
    QuadraticCharacter,
    canonical_nonsquare,
    code_of,
)
from cameron_liebler.core.geometry import Geometry, StructureViolation
from cameron_liebler.core.klein import TightSetReport, evaluate_counts
from cameron_liebler.core.logging import get_logger

logger = get_logger(__name__)


class InvalidDerivationPair(ValueError):
    """Raised when λ1 is not a nonzero square or λ2 is not a non-square."""

    def __init__(self, lambda1: int, lambda2: int):
        self.lambda1 = lambda1
        self.lambda2 = lambda2
        super().__init__(
            f"Derivation pair ({lambda1}, {lambda2}) needs a nonzero square and a non-square"
        )


class PreconditionViolated(ValueError):
    """The derivation hypotheses A ⊆ L and B ∩ L = ∅ do not hold."""

    def __init__(
        self,
        reason: str,
        missing_from_A: list[int] | None = None,
        colliding_in_B: list[int] | None = None,
        step: int | None = None,
    ):
        self.reason = reason
        self.missing_from_A = missing_from_A or []
        self.colliding_in_B = colliding_in_B or []
        self.step = step
        where = f" at step {step}" if step is not None else ""
        super().__init__(f"Derivation precondition failed{where}: {reason}")


class SizeMismatch(ValueError):
    """Raised when a line set size is not a multiple of q²+q+1."""

    def __init__(self, size: int, divisor: int):
        self.size = size
        self.divisor = divisor
        super().__init__(f"{size} lines is not a multiple of q²+q+1 = {divisor}")


class Family(str, Enum):
    BRUEN_DRUDGE = "bd"
    PERTURBED = "cpgmp"
    DERIVED = "derived"


class StepKind(str, Enum):
    FAMILY = "family"
    DERIVE = "derive"
    COMPLEMENT = "complement"


@dataclass(frozen=True)
class ProvenanceStep:
    kind: StepKind
    family: Family | None = None
    lambda1: int | None = None
    lambda2: int | None = None

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {"kind": self.kind.value}
        if self.family is not None:
            data["family"] = self.family.value
        if self.lambda1 is not None:
            data["lambda1"] = self.lambda1
            data["lambda2"] = self.lambda2
        return data


@dataclass(frozen=True)
class LineClass:
    """A set of line ids with its declared parameter and construction history."""

    q: int
    lines: frozenset[int]
    parameter: Fraction
    provenance: tuple[ProvenanceStep, ...] = ()

    @property
    def size(self) -> int:
        return len(self.lines)

    def ids(self) -> np.ndarray:
        return np.fromiter(sorted(self.lines), dtype=np.int64, count=len(self.lines))

    def mask(self, n_lines: int) -> np.ndarray:
        mask = np.zeros(n_lines, dtype=bool)
        mask[self.ids()] = True
        return mask

    def __contains__(self, line_id: object) -> bool:
        return line_id in self.lines


@dataclass(frozen=True)
class DerivationPair:
    """(λ1, λ2): a nonzero square and a non-square of GF(q)."""

    lambda1: int
    lambda2: int

    @classmethod
    def create(
        cls,
        geometry: Geometry,
        lambda1: int | FieldElement,
        lambda2: int | FieldElement,
    ) -> "DerivationPair":
        """Validate and build a pair.

        Raises:
            InvalidDerivationPair: If the square classes are wrong.
        """
        l1, l2 = code_of(lambda1), code_of(lambda2)
        spec = geometry.field
        if not (0 <= l1 < spec.q and 0 <= l2 < spec.q):
            raise InvalidDerivationPair(l1, l2)
        if spec.character(l1) != QuadraticCharacter.SQUARE:
            raise InvalidDerivationPair(l1, l2)
        if spec.character(l2) != QuadraticCharacter.NONSQUARE:
            raise InvalidDerivationPair(l1, l2)
        return cls(l1, l2)


def default_pair(geometry: Geometry) -> DerivationPair:
    """Smallest nonzero square and smallest non-square."""
    return DerivationPair.create(geometry, 1, canonical_nonsquare(geometry.field))


@dataclass(frozen=True, eq=False)
class OrbitDecomposition:
    """Point and line families of PG(3,q) with respect to E.

    Line and point families are boolean masks over line and point ids.
    """

    geometry: Geometry = field(repr=False)
    E: np.ndarray = field(repr=False)
    Os: np.ndarray = field(repr=False)
    On: np.ndarray = field(repr=False)
    pi0: np.ndarray = field(repr=False)
    pi1: np.ndarray = field(repr=False)
    L0: np.ndarray = field(repr=False)
    L1: np.ndarray = field(repr=False)
    L2: np.ndarray = field(repr=False)
    L3: np.ndarray = field(repr=False)
    t0: np.ndarray = field(repr=False)
    t1: np.ndarray = field(repr=False)

    @property
    def q(self) -> int:
        return self.geometry.q

    def ids(self, name: str) -> np.ndarray:
        """Sorted ids of a named family, e.g. ids("L0")."""
        return np.flatnonzero(getattr(self, name))

    def sizes(self) -> dict[str, int]:
        names = ("E", "Os", "On", "pi0", "pi1", "L0", "L1", "L2", "L3", "t0", "t1")
        return {name: int(getattr(self, name).sum()) for name in names}


@dataclass(frozen=True, eq=False)
class DerivationSets:
    """T10, T11, T20, T21 and A = T11 ∪ T20, B = T10 ∪ T21 as line masks."""

    pair: DerivationPair
    T10: np.ndarray = field(repr=False)
    T11: np.ndarray = field(repr=False)
    T20: np.ndarray = field(repr=False)
    T21: np.ndarray = field(repr=False)

    @property
    def A(self) -> np.ndarray:
        return self.T11 | self.T20

    @property
    def B(self) -> np.ndarray:
        return self.T10 | self.T21


def _expect(check: str, expected: Any, actual: Any) -> None:
    if expected != actual:
        raise StructureViolation(check, expected, actual)


def decompose(geometry: Geometry) -> OrbitDecomposition:
    """Split points and lines of PG(3,q) into the families defined by E.

    Raises:
        StructureViolation: If a tangent line has mixed point types or a count fails.
    """
    q = geometry.q
    chars = geometry.characters[0]
    E = chars == QuadraticCharacter.ZERO
    Os = chars == QuadraticCharacter.SQUARE
    On = chars == QuadraticCharacter.NONSQUARE

    zeros = geometry.line_zero_counts[0]
    tangent = zeros == 1
    line_chars = chars[geometry.line_points]
    n_square = (line_chars == QuadraticCharacter.SQUARE).sum(axis=1)
    n_nonsquare = (line_chars == QuadraticCharacter.NONSQUARE).sum(axis=1)
    L0 = tangent & (n_square == q)
    L1 = tangent & (n_nonsquare == q)
    _expect("tangent lines with mixed point types", 0, int((tangent & ~(L0 | L1)).sum()))
    L2 = zeros == 2
    L3 = zeros == 0

    in_pi = geometry.points[:, 3] == 0
    pi0 = Os & in_pi
    pi1 = On & in_pi
    lines_in_pi = geometry.in_pi
    t0 = L0 & lines_in_pi & (pi0[geometry.line_points].sum(axis=1) == q)
    t1 = L1 & lines_in_pi & (pi1[geometry.line_points].sum(axis=1) == q)

    tangent_size = (q + 1) * (q * q + 1) // 2
    chord_size = q * q * (q * q + 1) // 2
    _expect("|L0|", tangent_size, int(L0.sum()))
    _expect("|L1|", tangent_size, int(L1.sum()))
    _expect("|L2|", chord_size, int(L2.sum()))
    _expect("|L3|", chord_size, int(L3.sum()))
    _expect("|E|", q * q + 1, int(E.sum()))
    half_points = q * (q * q + 1) // 2
    _expect("|Os|", half_points, int(Os.sum()))
    _expect("|On|", half_points, int(On.sum()))
    _expect("|pi0|", q * (q + 1) // 2, int(pi0.sum()))
    _expect("|pi1|", q * (q + 1) // 2, int(pi1.sum()))
    _expect("|t0|", (q + 1) // 2, int(t0.sum()))
    _expect("|t1|", (q + 1) // 2, int(t1.sum()))
    pencil_at_u3 = lines_in_pi & geometry.through_u3
    _expect("t0 ∪ t1 = lines of π through U3", True, bool(np.array_equal(t0 | t1, pencil_at_u3)))

    decomposition = OrbitDecomposition(geometry, E, Os, On, pi0, pi1, L0, L1, L2, L3, t0, t1)
    logger.info("Orbit decomposition", extra={"q": q, **decomposition.sizes()})
    return decomposition


def tactical_matrices(decomposition: OrbitDecomposition) -> tuple[np.ndarray, np.ndarray]:
    """Block- and point-tactical matrices of the (E, Os, On) × (L0..L3) decomposition.

    Returns:
        (block, point): block[i, j] is the number of points of point family i on a line
        of line family j; point[i, j] the number of lines of family j through a point of
        family i.

    Raises:
        StructureViolation: If some count is not constant over its family.
    """
    g = decomposition.geometry
    point_family = np.select([decomposition.E, decomposition.Os, decomposition.On], [0, 1, 2])
    line_family = np.select(
        [decomposition.L0, decomposition.L1, decomposition.L2, decomposition.L3], [0, 1, 2, 3]
    )

    per_line = np.stack([(point_family[g.line_points] == i).sum(axis=1) for i in range(3)], axis=1)
    per_point = np.stack([(line_family[g.point_lines] == j).sum(axis=1) for j in range(4)], axis=1)

    block = np.zeros((3, 4), dtype=np.int64)
    point = np.zeros((3, 4), dtype=np.int64)
    for j in range(4):
        for i in range(3):
            values = np.unique(per_line[line_family == j, i])
            _expect(f"block-tactical ({i}, {j}) constant", 1, len(values))
            block[i, j] = values[0]
    for i in range(3):
        for j in range(4):
            values = np.unique(per_point[point_family == i, j])
            _expect(f"point-tactical ({i}, {j}) constant", 1, len(values))
            point[i, j] = values[0]
    return block, point


def expected_tactical_matrices(q: int) -> tuple[np.ndarray, np.ndarray]:
    """Closed forms of the two tactical matrices."""
    h_minus, h_plus = (q - 1) // 2, (q + 1) // 2
    block = np.array(
        [[1, 1, 2, 0], [q, 0, h_minus, h_plus], [0, q, h_minus, h_plus]], dtype=np.int64
    )
    point = np.array(
        [
            [h_plus, h_plus, q * q, 0],
            [q + 1, 0, q * h_minus, q * h_plus],
            [0, q + 1, q * h_minus, q * h_plus],
        ],
        dtype=np.int64,
    )
    return block, point


def _class_parameter(q: int) -> Fraction:
    return Fraction(q * q + 1, 2)


def _to_class(q: int, mask: np.ndarray, parameter: Fraction, provenance) -> LineClass:
    return LineClass(
        q=q,
        lines=frozenset(int(x) for x in np.flatnonzero(mask)),
        parameter=parameter,
        provenance=tuple(provenance),
    )


def bruen_drudge(decomposition: OrbitDecomposition) -> LineClass:
    """L′ = L0 ∪ L3."""
    q = decomposition.q
    line_class = _to_class(
        q,
        decomposition.L0 | decomposition.L3,
        _class_parameter(q),
        [ProvenanceStep(StepKind.FAMILY, Family.BRUEN_DRUDGE)],
    )
    _expect("|L′|", (q * q + 1) * (q * q + q + 1) // 2, line_class.size)
    logger.info("Constructed class", extra={"q": q, "family": "bd", "size": line_class.size})
    return line_class


def pi_external_lines(decomposition: OrbitDecomposition) -> np.ndarray:
    """L3′: lines of L3 contained in π."""
    return decomposition.L3 & decomposition.geometry.in_pi


def u3_secant_lines(decomposition: OrbitDecomposition) -> np.ndarray:
    """L2′: lines of L2 through U3."""
    return decomposition.L2 & decomposition.geometry.through_u3


def cp_gmp(decomposition: OrbitDecomposition) -> LineClass:
    """L″ = (L′ ∖ L3′) ∪ L2′."""
    q = decomposition.q
    l3_prime = pi_external_lines(decomposition)
    l2_prime = u3_secant_lines(decomposition)
    _expect("|L3′|", q * q, int(l3_prime.sum()))
    _expect("|L2′|", q * q, int(l2_prime.sum()))

    mask = ((decomposition.L0 | decomposition.L3) & ~l3_prime) | l2_prime
    line_class = _to_class(
        q, mask, _class_parameter(q), [ProvenanceStep(StepKind.FAMILY, Family.PERTURBED)]
    )
    logger.info("Constructed class", extra={"q": q, "family": "cpgmp", "size": line_class.size})
    return line_class


def derivation_sets(decomposition: OrbitDecomposition, pair: DerivationPair) -> DerivationSets:
    """The four tangent-line families of a derivation pair.

    Raises:
        StructureViolation: If a size or the external/secant split of A and B fails.
    """
    g = decomposition.geometry
    q = g.q
    tangent1 = g.line_zero_counts[pair.lambda1] == 1
    tangent2 = g.line_zero_counts[pair.lambda2] == 1

    trace = g.pi_trace
    has_trace = trace >= 0
    safe = np.where(has_trace, trace, 0)
    through_pi0 = has_trace & decomposition.pi0[safe]
    through_pi1 = has_trace & decomposition.pi1[safe]

    sets = DerivationSets(
        pair=pair,
        T10=decomposition.L2 & tangent1 & through_pi0,
        T11=decomposition.L3 & tangent1 & through_pi1,
        T20=decomposition.L3 & tangent2 & through_pi0,
        T21=decomposition.L2 & tangent2 & through_pi1,
    )

    part = q * q * (q + 1) // 2
    for name in ("T10", "T11", "T20", "T21"):
        _expect(f"|{name}|", part, int(getattr(sets, name).sum()))
    A, B = sets.A, sets.B
    _expect("|A|", 2 * part, int(A.sum()))
    _expect("|B|", 2 * part, int(B.sum()))
    _expect("A consists of external lines", True, bool(np.all(decomposition.L3[A])))
    _expect("B consists of secant lines", True, bool(np.all(decomposition.L2[B])))
    _expect("A, B avoid π", 0, int(((A | B) & g.in_pi).sum()))
    return sets


def meet_counts(geometry: Geometry, mask: np.ndarray, proper: bool = False) -> np.ndarray:
    """For every line ℓ, the number of lines of the set meeting ℓ.

    Sums star counts over the q+1 points of ℓ: a line r ≠ ℓ meeting ℓ is counted once,
    ℓ itself q+1 times. Self-inclusive counts keep ℓ once; proper counts drop it.
    """
    mask = np.asarray(mask, dtype=bool)
    stars = mask[geometry.point_lines].sum(axis=1)
    totals = stars[geometry.line_points].sum(axis=1)
    overcount = geometry.q + 1 if proper else geometry.q
    return totals - overcount * mask.astype(np.int64)


def count_meeting(geometry: Geometry, mask: np.ndarray, line_id: int, proper: bool = True) -> int:
    """Number of lines of the set meeting ℓ (excluding ℓ itself when proper)."""
    mask = np.asarray(mask, dtype=bool)
    stars = mask[geometry.point_lines[geometry.line_points[line_id]]].sum()
    overcount = geometry.q + 1 if proper else geometry.q
    return int(stars - overcount * int(mask[line_id]))


def verify_cl(geometry: Geometry, line_class: LineClass) -> TightSetReport:
    """Check the Cameron-Liebler meet counts for every line.

    Each line of the class must meet x(q+1)+q² lines of it (itself included) and every
    other line x(q+1), with x = |L| / (q²+q+1).

    Raises:
        SizeMismatch: If |L| is not a multiple of q²+q+1.
    """
    q = geometry.q
    divisor = q * q + q + 1
    if line_class.size % divisor:
        raise SizeMismatch(line_class.size, divisor)

    mask = line_class.mask(geometry.n_lines)
    counts = meet_counts(geometry, mask, proper=False)
    report = evaluate_counts(
        geometry, line_class.ids(), counts, "line_meets", line_class.parameter
    )
    logger.info(
        "Cameron-Liebler check",
        extra={"q": q, "size": line_class.size, "x": str(report.i), "passed": report.passed},
    )
    return report


def _check_preconditions(
    sets: DerivationSets,
    mask: np.ndarray,
    step: int | None,
) -> None:
    limit = get_settings().witness_limit
    missing = np.flatnonzero(sets.A & ~mask)
    colliding = np.flatnonzero(sets.B & mask)
    if len(missing) or len(colliding):
        raise PreconditionViolated(
            f"{len(missing)} lines of A missing from L, {len(colliding)} lines of B in L",
            missing_from_A=[int(x) for x in missing[:limit]],
            colliding_in_B=[int(x) for x in colliding[:limit]],
            step=step,
        )


def derive(
    decomposition: OrbitDecomposition,
    line_class: LineClass,
    pair: DerivationPair,
    step: int | None = None,
) -> LineClass:
    """(L ∖ A) ∪ B for the derivation sets of pair.

    Raises:
        PreconditionViolated: If L has the wrong parameter, A ⊄ L or B ∩ L ≠ ∅.
    """
    q = decomposition.q
    if line_class.parameter != _class_parameter(q):
        raise PreconditionViolated(
            f"parameter {line_class.parameter} is not (q²+1)/2 = {_class_parameter(q)}",
            step=step,
        )
    sets = derivation_sets(decomposition, pair)
    mask = line_class.mask(decomposition.geometry.n_lines)
    _check_preconditions(sets, mask, step)

    derived = (mask & ~sets.A) | sets.B
    result = _to_class(
        q,
        derived,
        line_class.parameter,
        (*line_class.provenance, ProvenanceStep(StepKind.DERIVE, None, pair.lambda1, pair.lambda2)),
    )
    logger.info(
        "Derived class",
        extra={"q": q, "lambda1": pair.lambda1, "lambda2": pair.lambda2, "size": result.size},
    )
    return result


def derive_sequence(
    decomposition: OrbitDecomposition,
    line_class: LineClass,
    pairs: list[DerivationPair],
) -> LineClass:
    """Apply derive for each pair in turn.

    Raises:
        PreconditionViolated: On repeated λ1 or λ2 values (before any step), or at the
            first step whose hypotheses fail.
    """
    lambda1s = [p.lambda1 for p in pairs]
    lambda2s = [p.lambda2 for p in pairs]
    if len(set(lambda1s)) != len(lambda1s):
        raise PreconditionViolated(f"repeated lambda1 values in {lambda1s}")
    if len(set(lambda2s)) != len(lambda2s):
        raise PreconditionViolated(f"repeated lambda2 values in {lambda2s}")

    result = line_class
    for step, pair in enumerate(pairs):
        result = derive(decomposition, result, pair, step=step)
    return result


def complement(geometry: Geometry, line_class: LineClass) -> LineClass:
    """All lines not in L; parameter q²+1−x."""
    q = geometry.q
    mask = ~line_class.mask(geometry.n_lines)
    return _to_class(
        q,
        mask,
        Fraction(q * q + 1) - line_class.parameter,
        (*line_class.provenance, ProvenanceStep(StepKind.COMPLEMENT)),
    )


def construct(
    decomposition: OrbitDecomposition,
    family: Family | str,
    pairs: list[DerivationPair] | None = None,
) -> LineClass:
    """Build a family member; derived classes start from L′ and default to one pair."""
    family = Family(family)
    if family is Family.BRUEN_DRUDGE:
        return bruen_drudge(decomposition)
    if family is Family.PERTURBED:
        return cp_gmp(decomposition)
    if pairs is None:
        pairs = [default_pair(decomposition.geometry)]
    return derive_sequence(decomposition, bruen_drudge(decomposition), pairs)
