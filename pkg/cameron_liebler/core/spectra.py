"""Character spectra of line classes and fingerprint classification.

The plane character of a class at a plane σ is the number of class lines in σ; the
star character at a point P is the number of class lines through P. A spectrum is
the multiset of characters over all planes (or all points), written as ascending
"value^multiplicity" items where multiplicity 1 is printed bare:

    13^49, 21^126, 29^77, 37^98, 45^49, 53
"""

from dataclasses import dataclass
from enum import Enum
from itertools import product
from typing import Any

import numpy as np

from cameron_liebler.core.classes import DerivationPair, LineClass
from cameron_liebler.core.field import FieldSpec, QuadraticCharacter
from cameron_liebler.core.geometry import Geometry
from cameron_liebler.core.klein import histogram
from cameron_liebler.core.logging import get_logger

logger = get_logger(__name__)


class SpectrumKind(str, Enum):
    PLANES = "planes"
    STARS = "stars"


class ClassLabel(str, Enum):
    BRUEN_DRUDGE = "BruenDrudge"
    PERTURBED_BD = "PerturbedBD"
    DERIVED_NEW = "DerivedNew"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class CharacterSpectrum:
    """Character value -> multiplicity, ascending by value."""

    kind: SpectrumKind
    entries: tuple[tuple[int, int], ...]

    @classmethod
    def from_values(cls, kind: SpectrumKind, values: np.ndarray) -> "CharacterSpectrum":
        return cls(kind, tuple(histogram(values).items()))

    @property
    def support(self) -> frozenset[int]:
        return frozenset(value for value, _ in self.entries)

    @property
    def total(self) -> int:
        """Number of planes (or points) counted."""
        return sum(m for _, m in self.entries)

    @property
    def weighted_sum(self) -> int:
        return sum(v * m for v, m in self.entries)

    def as_dict(self) -> dict[int, int]:
        return dict(self.entries)

    def __str__(self) -> str:
        return spectrum_string(self)


@dataclass(frozen=True)
class FamilyFingerprint:
    """Closed-form character sets of a known family at one q."""

    label: ClassLabel
    plane_values: frozenset[int]
    star_values: frozenset[int]

    def contains(self, planes: frozenset[int], stars: frozenset[int]) -> bool:
        return planes <= self.plane_values and stars <= self.star_values


@dataclass(frozen=True)
class KnownSpectrum:
    """A derived-class spectrum pair found by earlier computer search."""

    label: str
    planes: str
    stars: str


# Derived classes from L′ at q = 7, 9, 11 (plane string, star string)
KNOWN_DERIVED_SPECTRA: dict[int, tuple[KnownSpectrum, ...]] = {
    7: (
        KnownSpectrum(
            "i",
            "13^49, 21^126, 29^77, 37^98, 45^49, 53",
            "4, 12^49, 20^98, 28^77, 36^126, 44^49",
        ),
    ),
    9: (
        KnownSpectrum(
            "i",
            "16^81, 36^207, 46^288, 56^81, 66^162, 86",
            "5, 25^162, 35^81, 45^288, 55^207, 75^81",
        ),
        KnownSpectrum(
            "ii",
            "26^162, 36^207, 46^126, 56^162, 66^162, 86",
            "5, 25^162, 35^162, 45^126, 55^207, 65^162",
        ),
        KnownSpectrum(
            "iii",
            "26^162, 36^126, 46^288, 56^162, 76^81, 86",
            "5, 15^81, 35^162, 45^288, 55^126, 65^162",
        ),
    ),
    11: (
        KnownSpectrum(
            "i",
            "31^121, 43^121, 55^308, 67^429, 79^242, 91^121, 103^121, 127",
            "6, 30^121, 42^121, 54^242, 66^429, 78^308, 90^121, 102^121",
        ),
        KnownSpectrum(
            "ii",
            "43^242, 55^550, 67^187, 79^121, 91^242, 103^121, 127",
            "6, 30^121, 42^242, 54^121, 66^187, 78^550, 90^242",
        ),
        KnownSpectrum(
            "iii",
            "43^242, 55^429, 67^308, 79^363, 115^121, 127",
            "6, 18^121, 54^363, 66^308, 78^429, 90^242",
        ),
        KnownSpectrum(
            "iv",
            "31^121, 43^242, 55^187, 67^187, 79^484, 91^242, 127",
            "6, 42^242, 54^484, 66^187, 78^187, 90^242, 102^121",
        ),
        KnownSpectrum(
            "v",
            "19^121, 55^429, 67^308, 79^363, 91^242, 127",
            "6, 42^242, 54^363, 66^308, 78^429, 114^121",
        ),
    ),
}


def plane_characters(geometry: Geometry, mask: np.ndarray) -> np.ndarray:
    """Number of set lines in each plane."""
    return np.asarray(mask, dtype=bool)[geometry.plane_lines].sum(axis=1)


def star_characters(geometry: Geometry, mask: np.ndarray) -> np.ndarray:
    """Number of set lines through each point."""
    return np.asarray(mask, dtype=bool)[geometry.point_lines].sum(axis=1)


def plane_spectrum(geometry: Geometry, line_class: LineClass) -> CharacterSpectrum:
    values = plane_characters(geometry, line_class.mask(geometry.n_lines))
    return CharacterSpectrum.from_values(SpectrumKind.PLANES, values)


def star_spectrum(geometry: Geometry, line_class: LineClass) -> CharacterSpectrum:
    values = star_characters(geometry, line_class.mask(geometry.n_lines))
    return CharacterSpectrum.from_values(SpectrumKind.STARS, values)


def spectrum_string(spectrum: CharacterSpectrum) -> str:
    """Ascending "value^multiplicity" items joined by ", "; multiplicity 1 bare."""
    return ", ".join(str(v) if m == 1 else f"{v}^{m}" for v, m in spectrum.entries)


def parse_spectrum_string(text: str, kind: SpectrumKind = SpectrumKind.PLANES) -> CharacterSpectrum:
    """Inverse of spectrum_string.

    Raises:
        ValueError: On malformed items.
    """
    entries: dict[int, int] = {}
    for item in (part.strip() for part in text.split(",")):
        if not item:
            continue
        value, _, mult = item.partition("^")
        entries[int(value)] = entries.get(int(value), 0) + (int(mult) if mult else 1)
    return CharacterSpectrum(kind, tuple(sorted(entries.items())))


def complement_spectrum(spectrum: CharacterSpectrum, q: int) -> CharacterSpectrum:
    """Spectrum of the complementary class: value -> q²+q+1 − value."""
    full = q * q + q + 1
    return CharacterSpectrum(
        spectrum.kind, tuple(sorted((full - v, m) for v, m in spectrum.entries))
    )


def family_fingerprints(q: int) -> dict[ClassLabel, FamilyFingerprint]:
    """Character sets of L′, L″ and single-step derived classes at q."""
    half_up, half_down = (q + 1) // 2, (q - 1) // 2
    tri_up, tri_down = q * (q + 1) // 2, q * (q - 1) // 2
    return {
        ClassLabel.BRUEN_DRUDGE: FamilyFingerprint(
            ClassLabel.BRUEN_DRUDGE,
            frozenset({q * q + half_up, tri_down, tri_up + 1}),
            frozenset({half_up, tri_up, tri_up + q + 1}),
        ),
        ClassLabel.PERTURBED_BD: FamilyFingerprint(
            ClassLabel.PERTURBED_BD,
            frozenset({half_up, tri_down - 1, tri_up, tri_up + q + 1, q * q + half_down}),
            frozenset({(q + 3) // 2, tri_down, tri_up + 1, tri_up + q + 2, q * q + half_up}),
        ),
        ClassLabel.DERIVED_NEW: FamilyFingerprint(
            ClassLabel.DERIVED_NEW,
            frozenset(
                {q * q + half_up, q * q - 3 * half_up}
                | {tri_down + k * (q + 1) for k in (3, 2, 1, 0, -1)}
                | {tri_up - 2 * (q + 1), tri_down - 2 * (q + 1)}
            ),
            frozenset({half_up, 5 * half_up} | {tri_up + k * (q + 1) for k in (-2, -1, 0, 1, 2, 3)}),
        ),
    }


def classify(geometry: Geometry, line_class: LineClass) -> ClassLabel:
    """Necessary-condition classifier by spectrum support.

    Distinct labels imply projective inequivalence; equal labels imply nothing.
    DerivedNew needs q ≥ 7, a star character 5(q+1)/2, no character q²+q+1 and
    supports inside the single-derivation character sets.
    """
    q = geometry.q
    planes = plane_spectrum(geometry, line_class).support
    stars = star_spectrum(geometry, line_class).support
    prints = family_fingerprints(q)

    for label in (ClassLabel.BRUEN_DRUDGE, ClassLabel.PERTURBED_BD):
        if prints[label].contains(planes, stars):
            return label

    star_marker = 5 * (q + 1) // 2
    spread_marker = q * q + q + 1
    if q < 7 or star_marker not in stars or spread_marker in planes | stars:
        return ClassLabel.UNKNOWN
    if prints[ClassLabel.DERIVED_NEW].contains(planes, stars):
        return ClassLabel.DERIVED_NEW
    return ClassLabel.UNKNOWN


def eight_character_condition(spec: FieldSpec, pair: DerivationPair) -> bool:
    """Whether a1..a4 (squares) and b1..b4 (non-squares) realise all four patterns.

    Each a_k, b_k lies outside {0, λ1, λ2}; the pattern of c is the pair of square
    classes of (c − λ1, c − λ2). When all four patterns occur for both squares and
    non-squares, the derived class has exactly eight characters of each kind.
    """
    excluded = {0, pair.lambda1, pair.lambda2}
    wanted = set(product((QuadraticCharacter.SQUARE, QuadraticCharacter.NONSQUARE), repeat=2))
    found: dict[int, set] = {QuadraticCharacter.SQUARE: set(), QuadraticCharacter.NONSQUARE: set()}
    for c in range(spec.q):
        if c in excluded:
            continue
        pattern = (
            QuadraticCharacter(spec.character(spec.sub(c, pair.lambda1))),
            QuadraticCharacter(spec.character(spec.sub(c, pair.lambda2))),
        )
        found[int(spec.character(c))].add(pattern)
    return all(found[kind] >= wanted for kind in found)


def match_known(q: int, planes: str, stars: str) -> str | None:
    """Label of a known derived spectrum pair, with a "c" suffix for complements."""
    for known in KNOWN_DERIVED_SPECTRA.get(q, ()):
        if (planes, stars) == (known.planes, known.stars):
            return known.label
        comp_planes = complement_spectrum(parse_spectrum_string(known.planes), q)
        comp_stars = complement_spectrum(parse_spectrum_string(known.stars, SpectrumKind.STARS), q)
        if (planes, stars) == (spectrum_string(comp_planes), spectrum_string(comp_stars)):
            return f"{known.label}c"
    return None


def spectra_report(geometry: Geometry, line_class: LineClass) -> dict[str, Any]:
    """Both spectrum strings, value maps and the classification."""
    planes = plane_spectrum(geometry, line_class)
    stars = star_spectrum(geometry, line_class)
    planes_text, stars_text = spectrum_string(planes), spectrum_string(stars)
    label = classify(geometry, line_class)
    logger.info("Spectra", extra={"q": geometry.q, "label": label.value})
    return {
        "planes": planes_text,
        "stars": stars_text,
        "plane_entries": {str(v): m for v, m in planes.entries},
        "star_entries": {str(v): m for v, m in stars.entries},
        "classification": label.value,
        "known": match_known(geometry.q, planes_text, stars_text),
    }
