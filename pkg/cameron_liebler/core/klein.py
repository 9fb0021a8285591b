"""Klein correspondence and tight-set verification.

A line of PG(3,q) is a point of the Klein quadric Q+(5,q) through its Plücker vector.
Two lines meet iff their Plücker vectors are conjugate under the polarised form

    B(p, p') = p01 p'23 + p23 p'01 − p02 p'13 − p13 p'02 + p03 p'12 + p12 p'03.

The tight-set check counts |P^⊥ ∩ T| for every Klein point P. The count includes P
itself when P ∈ T, since B(P, P) = 0 on the quadric. The fold is evaluated as an
integer matrix product over GF(p): every element of GF(q) acts on digit vectors through
its e×e multiplication matrix, so B(P, r) for a whole chunk of P against all of T is one
matmul followed by a reduction mod p.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Any

import numpy as np

from cameron_liebler.config import get_settings
from cameron_liebler.core.field import FieldSpec
from cameron_liebler.core.geometry import Geometry
from cameron_liebler.core.logging import get_logger
from cameron_liebler.workers.pool import run_chunked

logger = get_logger(__name__)

# w = J p' such that B(p, p') = sum_k p_k w_k: (source index, negate)
_CONJUGATE = ((5, False), (4, True), (3, False), (2, False), (1, True), (0, False))


class EmptySet(ValueError):
    """Raised when a verification is asked to check an empty line set."""

    def __init__(self, message: str = "Cannot verify an empty line set"):
        super().__init__(message)


@dataclass(frozen=True)
class KleinPoint:
    coords: tuple[int, ...]
    line_id: int


@dataclass
class TightSetReport:
    """Outcome of a meet-count verification.

    Attributes:
        i: Tightness parameter inferred from the set size (|T| / (q²+q+1)).
        passed: True iff every in-set count is i(q+1)+q² and every other count i(q+1).
        histogram_in: count -> multiplicity over lines in the set.
        histogram_out: count -> multiplicity over lines off the set.
        witnesses: Up to witness_limit failing line ids.
        criterion: Which code path produced the counts.
        reason: Why the check failed structurally, if it did.
    """

    q: int
    i: Fraction
    passed: bool
    histogram_in: dict[int, int]
    histogram_out: dict[int, int]
    witnesses: list[int]
    criterion: str
    reason: str | None = None
    counts: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def target_in(self) -> Fraction:
        return self.i * (self.q + 1) + self.q**2

    @property
    def target_out(self) -> Fraction:
        return self.i * (self.q + 1)

    def to_dict(self) -> dict[str, Any]:
        return {
            "criterion": self.criterion,
            "i": str(self.i),
            "passed": self.passed,
            "target_in": str(self.target_in),
            "target_out": str(self.target_out),
            "histogram_in": {str(k): v for k, v in self.histogram_in.items()},
            "histogram_out": {str(k): v for k, v in self.histogram_out.items()},
            "witnesses": self.witnesses,
            "reason": self.reason,
        }


def histogram(values: np.ndarray) -> dict[int, int]:
    """Value -> multiplicity, ascending by value."""
    uniq, counts = np.unique(np.asarray(values), return_counts=True)
    return {int(v): int(c) for v, c in zip(uniq, counts)}


def klein_image(geometry: Geometry, line_id: int) -> KleinPoint:
    """The Klein quadric point of a line."""
    return KleinPoint(tuple(int(c) for c in geometry.lines[line_id]), int(line_id))


def klein_form(spec: FieldSpec, p: np.ndarray, p_prime: np.ndarray) -> Any:
    """B(p, p') over GF(q), vectorised over leading axes."""
    p = np.asarray(p, dtype=np.int64)
    p_prime = np.asarray(p_prime, dtype=np.int64)
    total = 0
    for k, (src, negate) in enumerate(_CONJUGATE):
        w = spec.neg(p_prime[..., src]) if negate else p_prime[..., src]
        total = spec.add(total, spec.mul(p[..., k], w))
    return total


def klein_relation(spec: FieldSpec, p: np.ndarray) -> Any:
    """p01 p23 − p02 p13 + p03 p12, zero exactly on the Klein quadric."""
    p = np.asarray(p, dtype=np.int64)
    return spec.add(
        spec.sub(spec.mul(p[..., 0], p[..., 5]), spec.mul(p[..., 1], p[..., 4])),
        spec.mul(p[..., 2], p[..., 3]),
    )


def lines_meet(geometry: Geometry, line_a: int, line_b: int) -> bool:
    """True iff two lines share a point; a line meets itself."""
    return klein_form(geometry.field, geometry.lines[line_a], geometry.lines[line_b]) == 0


@lru_cache(maxsize=8)
def _multiplication_matrices(spec: FieldSpec) -> np.ndarray:
    return np.stack([spec.multiplication_matrix(a) for a in range(spec.q)])


def _conjugate_operator(spec: FieldSpec, pluckers: np.ndarray) -> np.ndarray:
    """(6e, |T|·e) integer matrix W with digits(B(P, r)) = digits(P) @ W mod p."""
    w = np.stack(
        [spec.neg(pluckers[:, src]) if neg else pluckers[:, src] for src, neg in _CONJUGATE],
        axis=1,
    )
    mats = _multiplication_matrices(spec)[w]  # (T, 6, e_out, e_in)
    e = spec.e
    return mats.transpose(1, 3, 0, 2).reshape(6 * e, len(pluckers) * e)


def klein_meet_counts(
    geometry: Geometry,
    lines: np.ndarray,
    workers: int | None = None,
    chunk_size: int | None = None,
) -> np.ndarray:
    """|P^⊥ ∩ T| for every Klein point P, self-inclusive."""
    settings = get_settings()
    workers = workers or settings.verify_workers
    chunk_size = chunk_size or settings.verify_chunk_size

    spec = geometry.field
    e = spec.e
    # Exact in float64: every dot product is below 6e·p²
    operator = _conjugate_operator(spec, geometry.lines[np.asarray(lines)]).astype(np.float64)
    digits = spec.digit_table[geometry.lines].reshape(geometry.n_lines, 6 * e).astype(np.float64)
    n_set = len(lines)

    def fold(start: int, stop: int) -> np.ndarray:
        values = (digits[start:stop] @ operator) % spec.p
        zero = ~values.reshape(stop - start, n_set, e).any(axis=2)
        return zero.sum(axis=1)

    parts = run_chunked(fold, geometry.n_lines, chunk_size, workers)
    return np.concatenate(parts).astype(np.int64)


def evaluate_counts(
    geometry: Geometry,
    lines: np.ndarray,
    counts: np.ndarray,
    criterion: str,
    i: Fraction | int | None = None,
) -> TightSetReport:
    """Compare per-line meet counts with the two target values."""
    q = geometry.q
    size = len(lines)
    inferred = Fraction(size, q * q + q + 1)
    in_set = np.zeros(geometry.n_lines, dtype=bool)
    in_set[lines] = True

    reason = None
    if i is not None and Fraction(i) != inferred:
        reason = f"claimed i = {Fraction(i)} but |T| = {size} gives {inferred}"
    elif inferred.denominator != 1:
        reason = f"|T| = {size} is not a multiple of q²+q+1 = {q * q + q + 1}"

    if inferred.denominator == 1:
        target_in = int(inferred) * (q + 1) + q * q
        target_out = int(inferred) * (q + 1)
        failing = np.where(in_set, counts != target_in, counts != target_out)
    else:
        failing = np.ones(geometry.n_lines, dtype=bool)
    witnesses = [int(x) for x in np.flatnonzero(failing)[: get_settings().witness_limit]]

    return TightSetReport(
        q=q,
        i=inferred,
        passed=reason is None and not failing.any(),
        histogram_in=histogram(counts[in_set]),
        histogram_out=histogram(counts[~in_set]),
        witnesses=witnesses,
        criterion=criterion,
        reason=reason,
        counts=counts,
    )


def tight_set_check(
    geometry: Geometry,
    lines,
    i: Fraction | int | None = None,
    workers: int | None = None,
) -> TightSetReport:
    """Check that the Klein image of a line set is i-tight.

    Args:
        geometry: The geometry.
        lines: Line ids of the set T.
        i: Claimed parameter; inferred from |T| when omitted.
        workers: Threads for the fold; settings.verify_workers by default.

    Raises:
        EmptySet: If T is empty.
    """
    ids = np.asarray(sorted(int(x) for x in lines), dtype=np.int64)
    if len(ids) == 0:
        raise EmptySet()

    counts = klein_meet_counts(geometry, ids, workers=workers)
    report = evaluate_counts(geometry, ids, counts, "tight_set", i)
    logger.info(
        "Tight-set check",
        extra={"q": geometry.q, "size": len(ids), "i": str(report.i), "passed": report.passed},
    )
    return report
