"""JSON persistence of line classes.

A document names its field by (p, e, modulus) and the pencil parameter ω, and lists the
class as normalised Plücker 6-tuples in ascending lexicographic order. Serialisation is
deterministic: the same class always gives the same bytes.
"""

import json
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel, Field, ValidationError, field_validator

from cameron_liebler.core.classes import Family, LineClass, ProvenanceStep, StepKind
from cameron_liebler.core.field import build_field
from cameron_liebler.core.geometry import Geometry, InvalidOmega, NotOnGeometry, build_geometry
from cameron_liebler.core.klein import klein_relation

SCHEMA_VERSION = 1


class DocumentError(ValueError):
    """Raised when a document cannot be parsed or does not describe a line set."""


class FieldBlock(BaseModel):
    """The field GF(p^e) and the pencil parameter."""

    p: int = Field(..., description="Odd prime characteristic")
    e: int = Field(1, ge=1, description="Extension degree")
    modulus: list[int] = Field(..., description="Defining polynomial, highest degree first")
    omega: int = Field(..., ge=1, description="Non-square code used by the pencil")


class ProvenanceEntry(BaseModel):
    kind: StepKind
    family: Family | None = None
    lambda1: int | None = None
    lambda2: int | None = None


class ClassBlock(BaseModel):
    """The line set with its parameter and history."""

    parameter: str = Field(..., description="Parameter x as an integer or fraction string")
    provenance: list[ProvenanceEntry] = Field(default_factory=list)
    lines: list[list[int]] = Field(..., description="Normalised Plücker 6-tuples")

    @field_validator("parameter")
    @classmethod
    def validate_parameter(cls, v: str) -> str:
        try:
            Fraction(v)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"parameter {v!r} is not a rational number") from exc
        return v

    @field_validator("lines")
    @classmethod
    def validate_lines(cls, v: list[list[int]]) -> list[list[int]]:
        for row in v:
            if len(row) != 6:
                raise ValueError(f"Plücker tuple {row} does not have 6 entries")
        return v


class LineClassDocument(BaseModel):
    schema_version: int = SCHEMA_VERSION
    field_block: FieldBlock = Field(..., alias="field")
    class_block: ClassBlock = Field(..., alias="class")
    reports: dict[str, Any] | None = None

    model_config = {"populate_by_name": True}


def document_from_class(
    geometry: Geometry,
    line_class: LineClass,
    reports: dict[str, Any] | None = None,
) -> LineClassDocument:
    spec = geometry.field
    rows = sorted(tuple(int(c) for c in geometry.lines[i]) for i in line_class.ids())
    return LineClassDocument(
        field=FieldBlock(p=spec.p, e=spec.e, modulus=list(spec.modulus), omega=geometry.omega),
        **{
            "class": ClassBlock(
                parameter=str(line_class.parameter),
                provenance=[ProvenanceEntry(**step.to_dict()) for step in line_class.provenance],
                lines=[list(row) for row in rows],
            )
        },
        reports=reports,
    )


def serialize(document: LineClassDocument) -> str:
    return document.model_dump_json(by_alias=True, exclude_none=True)


def parse_document(text: str) -> LineClassDocument:
    """Parse and schema-validate a document.

    Raises:
        DocumentError: On malformed JSON, schema errors or an unknown schema version.
    """
    try:
        document = LineClassDocument.model_validate_json(text)
    except ValidationError as exc:
        raise DocumentError(f"Invalid line class document: {exc.error_count()} errors") from exc
    if document.schema_version != SCHEMA_VERSION:
        raise DocumentError(f"Unsupported schema version {document.schema_version}")
    return document


def read_document(path: str | Path) -> LineClassDocument:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DocumentError(f"Cannot read {path}: {exc}") from exc
    return parse_document(text)


def write_document(document: LineClassDocument, path: str | Path) -> None:
    Path(path).write_text(serialize(document) + "\n", encoding="utf-8")


def load_class(
    document: LineClassDocument,
    max_q: int | None = None,
) -> tuple[Geometry, LineClass]:
    """Rebuild the geometry and the line class a document describes.

    Raises:
        DocumentError: If the field, a Plücker tuple or the line list is invalid.
    """
    block = document.field_block
    try:
        spec = build_field(block.p, block.e)
    except ValueError as exc:
        raise DocumentError(str(exc)) from exc
    if list(spec.modulus) != block.modulus:
        raise DocumentError(f"Modulus {block.modulus} differs from the canonical {list(spec.modulus)}")

    try:
        geometry = build_geometry(spec, omega=block.omega, max_q=max_q)
    except InvalidOmega as exc:
        raise DocumentError(str(exc)) from exc

    rows = np.asarray(document.class_block.lines, dtype=np.int64).reshape(-1, 6)
    if rows.size and (rows.min() < 0 or rows.max() >= spec.q):
        raise DocumentError("Plücker entries must be field codes in [0, q)")
    if rows.size and np.any(np.asarray(klein_relation(spec, rows)) != 0):
        raise DocumentError("A Plücker tuple does not satisfy the Klein relation")
    try:
        ids = geometry.line_ids(rows) if rows.size else np.zeros(0, dtype=np.int64)
    except NotOnGeometry as exc:
        raise DocumentError(str(exc)) from exc
    if len(np.unique(ids)) != len(ids):
        raise DocumentError("Duplicate lines in document")

    provenance = tuple(
        ProvenanceStep(
            kind=entry.kind, family=entry.family, lambda1=entry.lambda1, lambda2=entry.lambda2
        )
        for entry in document.class_block.provenance
    )
    line_class = LineClass(
        q=spec.q,
        lines=frozenset(int(i) for i in ids),
        parameter=Fraction(document.class_block.parameter),
        provenance=provenance,
    )
    return geometry, line_class


def dumps_report(report: dict[str, Any]) -> str:
    """Reports are JSON with stable key order."""
    return json.dumps(report, indent=2, sort_keys=True, default=str)
