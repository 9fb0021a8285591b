"""Exhaustive multiple-derivation search with spectrum fingerprints.

A sequence of derivations with distinct λ1's and distinct λ2's removes the union of the
A-sets and adds the union of the B-sets, so its result depends only on the set of
λ1's and the set of λ2's. The search therefore enumerates pairs of equal-size subsets
(squares, non-squares), zips each pair in ascending order into one canonical sequence,
and deduplicates the resulting classes by their (plane string, star string).
"""

import sys
from dataclasses import dataclass, field
from itertools import combinations
from math import comb
from typing import Any, Iterator

from tqdm import tqdm

from cameron_liebler.config import get_settings
from cameron_liebler.core.classes import (
    DerivationPair,
    Family,
    OrbitDecomposition,
    PreconditionViolated,
    construct,
    derive_sequence,
    verify_cl,
)
from cameron_liebler.core.field import FieldSpec, nonsquares, nonzero_squares
from cameron_liebler.core.klein import tight_set_check
from cameron_liebler.core.logging import get_logger
from cameron_liebler.core.spectra import (
    classify,
    match_known,
    plane_spectrum,
    spectrum_string,
    star_spectrum,
)

logger = get_logger(__name__)


class InvalidSearchDepth(ValueError):
    """Raised when the depth exceeds the number of squares (q−1)/2."""

    def __init__(self, depth: int, max_depth: int):
        self.depth = depth
        self.max_depth = max_depth
        super().__init__(f"Search depth {depth} is outside [0, {max_depth}]")


@dataclass
class SearchHit:
    """One distinct spectrum fingerprint with its first representative."""

    planes: str
    stars: str
    label: str
    known: str | None
    provenance: list[tuple[int, int]]
    sequences: int = 1
    verified: bool = True

    def to_dict(self) -> dict[str, Any]:
        return {
            "planes": self.planes,
            "stars": self.stars,
            "classification": self.label,
            "known": self.known,
            "provenance": [list(pair) for pair in self.provenance],
            "sequences": self.sequences,
            "verified": self.verified,
        }


@dataclass
class SearchResult:
    q: int
    start: Family
    depth: int
    explored: int = 0
    failed_preconditions: int = 0
    partial: bool = False
    hits: dict[tuple[str, str], SearchHit] = field(default_factory=dict)

    @property
    def fingerprints(self) -> list[SearchHit]:
        """Hits in canonical (plane string, star string) order."""
        return [self.hits[key] for key in sorted(self.hits)]

    def to_dict(self) -> dict[str, Any]:
        return {
            "q": self.q,
            "start": self.start.value,
            "depth": self.depth,
            "explored": self.explored,
            "failed_preconditions": self.failed_preconditions,
            "partial": self.partial,
            "fingerprints": [hit.to_dict() for hit in self.fingerprints],
        }


def sequence_count(q: int, depth: int) -> int:
    half = (q - 1) // 2
    return sum(comb(half, k) ** 2 for k in range(depth + 1))


def canonical_sequences(spec: FieldSpec, depth: int) -> Iterator[list[DerivationPair]]:
    """Zipped (squares, non-squares) subset pairs of size 0..depth, ascending.

    Raises:
        InvalidSearchDepth: If depth is outside [0, (q−1)/2], before anything is yielded.
    """
    half = (spec.q - 1) // 2
    if not 0 <= depth <= half:
        raise InvalidSearchDepth(depth, half)
    squares, others = nonzero_squares(spec), nonsquares(spec)

    def generate() -> Iterator[list[DerivationPair]]:
        for k in range(depth + 1):
            for chosen_squares in combinations(squares, k):
                for chosen_others in combinations(others, k):
                    yield [DerivationPair(a, b) for a, b in zip(chosen_squares, chosen_others)]

    return generate()


def run_search(
    decomposition: OrbitDecomposition,
    start: Family | str = Family.BRUEN_DRUDGE,
    depth: int | None = None,
    budget: int | None = None,
    klein: bool = False,
    progress: bool = True,
) -> SearchResult:
    """Derive from a start family along every canonical sequence up to depth.

    Args:
        decomposition: Orbit decomposition of the geometry.
        start: bd or cpgmp.
        depth: Maximum number of derivations; (q−1)/2 when omitted.
        budget: Maximum number of classes to evaluate; settings.search_budget by default.
        klein: Also run the tight-set check on each class.
        progress: Show a tqdm bar on stderr.

    Raises:
        InvalidSearchDepth: If depth is out of range.
        ValueError: If start is the derived family.
    """
    start = Family(start)
    if start is Family.DERIVED:
        raise ValueError("Search starts from bd or cpgmp")
    g = decomposition.geometry
    q = g.q
    depth = (q - 1) // 2 if depth is None else depth
    budget = get_settings().search_budget if budget is None else budget
    sequences = canonical_sequences(g.field, depth)

    base = construct(decomposition, start)
    result = SearchResult(q=q, start=start, depth=depth)
    total = sequence_count(q, depth)

    with tqdm(total=total, desc=f"search q={q}", file=sys.stderr, disable=not progress) as bar:
        for pairs in sequences:
            if result.explored >= budget:
                result.partial = True
                break
            result.explored += 1
            bar.update(1)
            try:
                line_class = derive_sequence(decomposition, base, pairs)
            except PreconditionViolated:
                result.failed_preconditions += 1
                continue

            planes = spectrum_string(plane_spectrum(g, line_class))
            stars = spectrum_string(star_spectrum(g, line_class))
            key = (planes, stars)
            verified = verify_cl(g, line_class).passed
            if klein:
                verified = verified and tight_set_check(g, line_class.ids(), line_class.parameter).passed

            if key in result.hits:
                hit = result.hits[key]
                hit.sequences += 1
                hit.verified = hit.verified and verified
                continue
            result.hits[key] = SearchHit(
                planes=planes,
                stars=stars,
                label=classify(g, line_class).value,
                known=match_known(q, planes, stars),
                provenance=[(p.lambda1, p.lambda2) for p in pairs],
                verified=verified,
            )

    logger.info(
        "Derivation search",
        extra={
            "q": q,
            "start": start.value,
            "explored": result.explored,
            "distinct": len(result.hits),
            "partial": result.partial,
        },
    )
    return result
