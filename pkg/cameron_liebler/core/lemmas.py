"""Exhaustive checks of the intersection counts behind the constructions.

Each check evaluates a closed-form prediction on every line (or point) of its domain
and records the histogram of observed values, so a failure shows what was seen
instead of only that something was off.
"""

from dataclasses import dataclass
from typing import Any

import numpy as np

from cameron_liebler.core.classes import (
    DerivationPair,
    OrbitDecomposition,
    derivation_sets,
    expected_tactical_matrices,
    meet_counts,
    tactical_matrices,
)
from cameron_liebler.core.field import QuadraticCharacter
from cameron_liebler.core.geometry import (
    BASE_MARKER,
    PI_MARKER,
    Geometry,
    pencil_partition,
    pi_characters_constant,
    polar_lines,
    polar_vectors,
    quadric_in_square_points,
    tangent_members,
)
from cameron_liebler.core.klein import histogram
from cameron_liebler.core.logging import get_logger

logger = get_logger(__name__)


@dataclass
class LemmaCheck:
    name: str
    passed: bool
    checked: int
    observed: dict[int, int]
    detail: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "checked": self.checked,
            "observed": {str(k): v for k, v in self.observed.items()},
            "detail": self.detail,
        }


def _check(name: str, observed: np.ndarray, expected: Any, detail: str = "") -> LemmaCheck:
    observed = np.asarray(observed)
    expected = np.broadcast_to(np.asarray(expected), observed.shape)
    return LemmaCheck(
        name=name,
        passed=bool(np.array_equal(observed, expected)),
        checked=int(observed.size),
        observed=histogram(observed) if observed.size else {},
        detail=detail,
    )


def secant_external_meets(decomposition: OrbitDecomposition) -> list[LemmaCheck]:
    """Secant and external lines each meet (q+1)²/2 lines of L0 and of L1."""
    g = decomposition.geometry
    q = g.q
    domain = decomposition.L2 | decomposition.L3
    target = (q + 1) ** 2 // 2
    return [
        _check(
            f"secant/external lines meet {name}",
            meet_counts(g, getattr(decomposition, name), proper=True)[domain],
            target,
            f"(q+1)²/2 = {target}",
        )
        for name in ("L0", "L1")
    ]


def tangent_meets(decomposition: OrbitDecomposition) -> list[LemmaCheck]:
    """A tangent line meets q²+(q−1)/2 lines of its own family and (q+1)/2 of the other."""
    g = decomposition.geometry
    q = g.q
    same, other = q * q + (q - 1) // 2, (q + 1) // 2
    counts = {name: meet_counts(g, getattr(decomposition, name), proper=True) for name in ("L0", "L1")}
    return [
        _check("L0 lines meet L0", counts["L0"][decomposition.L0], same),
        _check("L0 lines meet L1", counts["L1"][decomposition.L0], other),
        _check("L1 lines meet L1", counts["L1"][decomposition.L1], same),
        _check("L1 lines meet L0", counts["L0"][decomposition.L1], other),
    ]


def polar_tangent_lines(decomposition: OrbitDecomposition) -> list[LemmaCheck]:
    """t^⊥ stays in the family of t iff q ≡ 3 (mod 4), in both line and plane form."""
    g = decomposition.geometry
    q = g.q
    keeps_family = q % 4 == 3
    polars = polar_lines(g, 0)
    checks = [
        _check(
            "polar of an L0 line lies in L0",
            decomposition.L0[polars[decomposition.L0]],
            keeps_family,
        ),
        _check(
            "polar of an L1 line lies in L1",
            decomposition.L1[polars[decomposition.L1]],
            keeps_family,
        ),
    ]

    planes = g.point_ids(polar_vectors(g, 0, g.points))
    in_plane = {
        name: getattr(decomposition, name)[g.plane_lines[planes]].sum(axis=1) for name in ("L0", "L1")
    }
    full, empty = q + 1, 0
    os_l0 = full if keeps_family else empty
    checks += [
        _check("L0 lines in P^⊥, P square point", in_plane["L0"][decomposition.Os], os_l0),
        _check("L1 lines in P^⊥, P square point", in_plane["L1"][decomposition.Os], full - os_l0),
        _check("L0 lines in P^⊥, P non-square point", in_plane["L0"][decomposition.On], full - os_l0),
        _check("L1 lines in P^⊥, P non-square point", in_plane["L1"][decomposition.On], os_l0),
    ]
    return checks


def pencil_checks(geometry: Geometry) -> list[LemmaCheck]:
    """Pencil partition, unique tangency and the square-type properties of each member."""
    q = geometry.q
    spec = geometry.field
    partition = pencil_partition(geometry)
    per_member = np.array([(partition == lam).sum() for lam in range(q)])
    checks = [
        _check("points on each E_λ off U3", per_member, q * q),
        _check("points of π∖{U3}", np.array([(partition == PI_MARKER).sum()]), q * q + q),
        _check("base point", np.array([(partition == BASE_MARKER).sum()]), 1),
    ]

    off_pi = ~geometry.in_pi
    avoiding = off_pi & ~geometry.through_u3
    members = tangent_members(geometry)
    checks.append(
        _check("lines off π avoiding U3 have a unique tangent member", members[avoiding] >= 0, True)
    )
    checks.append(
        _check(
            "lines through U3 off π are secant to every member",
            geometry.line_zero_counts[:, off_pi & geometry.through_u3],
            2,
        )
    )

    square_type = [quadric_in_square_points(geometry, lam) for lam in range(q)]
    predicted = [spec.character(spec.neg(lam)) == QuadraticCharacter.SQUARE for lam in range(q)]
    checks.append(_check("E_λ ⊆ Os iff −λ is a nonzero square", np.array(square_type), np.array(predicted)))
    checks.append(_check("Q_λ constant on π", np.array([pi_characters_constant(geometry)]), True))
    return checks


def tangent_trace_checks(decomposition: OrbitDecomposition) -> list[LemmaCheck]:
    """For λ ≠ 0, a line tangent to E_λ off π meets E in 2 or 0 points by its π-trace.

    Through a point of π0 it is secant exactly when λ is a square; through π1 exactly
    when λ is a non-square.
    """
    g = decomposition.geometry
    spec = g.field
    trace = g.pi_trace
    has_trace = trace >= 0
    safe = np.where(has_trace, trace, 0)
    via_pi0 = has_trace & decomposition.pi0[safe]
    observed, expected = [], []
    for lam in range(1, g.q):
        tangent = (g.line_zero_counts[lam] == 1) & has_trace
        square = spec.character(lam) == QuadraticCharacter.SQUARE
        secant_expected = np.where(via_pi0[tangent], square, not square)
        observed.append(g.line_zero_counts[0][tangent])
        expected.append(np.where(secant_expected, 2, 0))
    return [
        _check(
            "tangent lines to E_λ meet E by their π-trace",
            np.concatenate(observed),
            np.concatenate(expected),
        )
    ]


def tactical_checks(decomposition: OrbitDecomposition) -> list[LemmaCheck]:
    block, point = tactical_matrices(decomposition)
    expected_block, expected_point = expected_tactical_matrices(decomposition.q)
    return [
        _check("block-tactical matrix", block, expected_block),
        _check("point-tactical matrix", point, expected_point),
    ]


def predicted_ab_meets(decomposition: OrbitDecomposition) -> np.ndarray:
    """Predicted |A_ℓ| = |B_ℓ| for every line ℓ outside A ∪ B.

    q² for lines of π through U3, q(q+1) for the other lines of π and for lines through
    U3 off π, and q(q+2) otherwise.
    """
    g = decomposition.geometry
    q = g.q
    in_pi, through_u3 = g.in_pi, g.through_u3
    return np.select(
        [in_pi & through_u3, in_pi | through_u3],
        [q * q, q * (q + 1)],
        default=q * (q + 2),
    )


def derivation_checks(decomposition: OrbitDecomposition, pair: DerivationPair) -> list[LemmaCheck]:
    """Meet counts of A and B that make the derivation preserve the class."""
    g = decomposition.geometry
    q = g.q
    sets = derivation_sets(decomposition, pair)
    A, B = sets.A, sets.B
    a_counts = meet_counts(g, A, proper=True)
    b_counts = meet_counts(g, B, proper=True)
    outside = ~(A | B)
    big, small = (3 * q * q + 3 * q - 2) // 2, (q * q + 3 * q) // 2
    predicted = predicted_ab_meets(decomposition)

    checks = [
        _check("|A_ℓ| = |B_ℓ| off A ∪ B", a_counts[outside] - b_counts[outside], 0),
        _check("|A_ℓ| case values off A ∪ B", a_counts[outside], predicted[outside]),
        _check("|A_ℓ| for ℓ in A", a_counts[A], big),
        _check("|B_ℓ| for ℓ in A", b_counts[A], small),
        _check("|A_ℓ| for ℓ in B", a_counts[B], small),
        _check("|B_ℓ| for ℓ in B", b_counts[B], big),
    ]

    # Tangent families of E_λ1 and E_λ2 split by the square type of their other points
    for lam, (square_part, nonsquare_part) in (
        (pair.lambda1, (sets.T10 | decomposition.t0, sets.T11 | decomposition.t1)),
        (pair.lambda2, (sets.T20 | decomposition.t0, sets.T21 | decomposition.t1)),
    ):
        tangent = g.line_zero_counts[lam] == 1
        chars = g.characters[lam][g.line_points]
        squares = tangent & ((chars == QuadraticCharacter.SQUARE).sum(axis=1) == q)
        nonsquares = tangent & ((chars == QuadraticCharacter.NONSQUARE).sum(axis=1) == q)
        checks.append(_check(f"square tangent lines of E_{lam}", squares, square_part))
        checks.append(_check(f"non-square tangent lines of E_{lam}", nonsquares, nonsquare_part))
    return checks


def run_lemma_suite(
    decomposition: OrbitDecomposition,
    pair: DerivationPair | None = None,
) -> list[LemmaCheck]:
    """All count checks; derivation checks only when a pair is given."""
    checks = (
        secant_external_meets(decomposition)
        + tangent_meets(decomposition)
        + polar_tangent_lines(decomposition)
        + pencil_checks(decomposition.geometry)
        + tangent_trace_checks(decomposition)
        + tactical_checks(decomposition)
    )
    if pair is not None:
        checks += derivation_checks(decomposition, pair)

    failed = [c.name for c in checks if not c.passed]
    logger.info(
        "Lemma suite",
        extra={"q": decomposition.q, "checks": len(checks), "failed": failed},
    )
    return checks
