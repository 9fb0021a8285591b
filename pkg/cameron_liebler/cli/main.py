#!/usr/bin/env python3
"""Command-line interface.

Subcommands:
    construct  Build a Bruen-Drudge, perturbed or derived class and write its document.
    verify     Run the line-meet and tight-set checks on a document.
    spectra    Plane and star character strings plus fingerprint classification.
    search     Enumerate multiple derivations and list distinct spectrum fingerprints.
    symmetry   Close Γ = ΨΦ and report invariance and orbit sizes.
    lemmas     Run the exhaustive intersection-count checks for one q.

Exit codes: 0 pass, 1 verification failed, 2 usage or parse error, 3 structural
violation during construction, 4 budget exhausted.
"""

import argparse
import logging
import sys
import time
from enum import IntEnum
from typing import Any

import numpy as np

from cameron_liebler.cli.documents import (
    DocumentError,
    document_from_class,
    dumps_report,
    load_class,
    read_document,
    serialize,
    write_document,
)
from cameron_liebler.core.classes import (
    DerivationPair,
    Family,
    InvalidDerivationPair,
    PreconditionViolated,
    SizeMismatch,
    complement,
    construct,
    decompose,
    verify_cl,
)
from cameron_liebler.core.field import build_field_of_order
from cameron_liebler.core.geometry import (
    CapacityExceeded,
    InvalidOmega,
    StructureViolation,
    build_geometry,
)
from cameron_liebler.core.klein import EmptySet, tight_set_check
from cameron_liebler.core.lemmas import run_lemma_suite
from cameron_liebler.core.logging import get_logger, run_context, setup_logging
from cameron_liebler.core.search import InvalidSearchDepth, run_search
from cameron_liebler.core.spectra import spectra_report
from cameron_liebler.core.symmetry import ClosureBudgetExceeded, symmetry_report

logger = get_logger(__name__)


class ExitCode(IntEnum):
    OK = 0
    VERIFY_FAILED = 1
    USAGE = 2
    STRUCTURE = 3
    BUDGET = 4


def parse_pair(text: str) -> tuple[int, int]:
    """Parse "λ1,λ2" as two field codes."""
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"pair {text!r} must look like 1,3")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"pair {text!r} must hold two integers") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cameron-liebler",
        description="Cameron-Liebler line classes of PG(3,q) with parameter (q²+1)/2",
    )
    parser.add_argument("--log-level", type=str, default=None, help="Override the log level")
    parser.add_argument("--json-logs", action="store_true", help="Emit JSON log lines on stderr")
    parser.add_argument("--max-q", type=int, default=None, help="Raise the geometry capacity bound")
    sub = parser.add_subparsers(dest="command", required=True)

    p_construct = sub.add_parser("construct", help="Build a class and write its document")
    p_construct.add_argument("--q", type=int, required=True, help="Odd prime power")
    p_construct.add_argument(
        "--family",
        type=str,
        default="bd",
        choices=[f.value for f in Family],
        help="bd (L′), cpgmp (L″) or derived (L′ after derivations)",
    )
    p_construct.add_argument(
        "--pair",
        type=parse_pair,
        action="append",
        default=None,
        help="Derivation pair λ1,λ2 as field codes; repeat for multiple derivation",
    )
    p_construct.add_argument("--omega", type=int, default=None, help="Pencil non-square code")
    p_construct.add_argument("--complement", action="store_true", help="Emit the complement class")
    p_construct.add_argument(
        "--with-report", action="store_true", help="Embed the line-meet report in the document"
    )
    p_construct.add_argument("--output", type=str, default=None, help="Output path (stdout if omitted)")

    p_verify = sub.add_parser("verify", help="Verify a class document")
    p_verify.add_argument("input", type=str, help="Document path")
    p_verify.add_argument("--skip-klein", action="store_true", help="Run the line-meet check only")
    p_verify.add_argument("--workers", type=int, default=None, help="Threads for the Klein fold")

    p_spectra = sub.add_parser("spectra", help="Character spectra of a class document")
    p_spectra.add_argument("input", type=str, help="Document path")

    p_search = sub.add_parser("search", help="Multiple-derivation search")
    p_search.add_argument("--q", type=int, required=True, help="Odd prime power")
    p_search.add_argument("--depth", type=int, default=None, help="Maximum derivations, ≤ (q−1)/2")
    p_search.add_argument(
        "--start", type=str, default="bd", choices=["bd", "cpgmp"], help="Start family"
    )
    p_search.add_argument("--budget", type=int, default=None, help="Maximum classes evaluated")
    p_search.add_argument("--klein", action="store_true", help="Also run the tight-set check")
    p_search.add_argument("--no-progress", action="store_true", help="Hide the progress bar")

    p_symmetry = sub.add_parser("symmetry", help="Γ-invariance of a class document")
    p_symmetry.add_argument("input", type=str, help="Document path")

    p_lemmas = sub.add_parser("lemmas", help="Exhaustive intersection-count checks")
    p_lemmas.add_argument("--q", type=int, required=True, help="Odd prime power")
    p_lemmas.add_argument("--pair", type=parse_pair, default=None, help="Derivation pair λ1,λ2")

    return parser


def _emit(payload: dict[str, Any]) -> None:
    sys.stdout.write(dumps_report(payload) + "\n")


def _geometry(q: int, omega: int | None, max_q: int | None):
    spec = build_field_of_order(q)
    return build_geometry(spec, omega=omega, max_q=max_q)


def cmd_construct(args: argparse.Namespace) -> ExitCode:
    geometry = _geometry(args.q, args.omega, args.max_q)
    decomposition = decompose(geometry)
    family = Family(args.family)
    pairs = None
    if args.pair:
        if family is not Family.DERIVED:
            raise ValueError("--pair only applies to --family derived")
        pairs = [DerivationPair.create(geometry, l1, l2) for l1, l2 in args.pair]

    line_class = construct(decomposition, family, pairs)
    if args.complement:
        line_class = complement(geometry, line_class)

    reports = {"line_meets": verify_cl(geometry, line_class).to_dict()} if args.with_report else None
    document = document_from_class(geometry, line_class, reports)
    if args.output:
        write_document(document, args.output)
    else:
        sys.stdout.write(serialize(document) + "\n")
    return ExitCode.OK


def cmd_verify(args: argparse.Namespace) -> ExitCode:
    started = time.perf_counter()
    geometry, line_class = load_class(read_document(args.input), args.max_q)
    report: dict[str, Any] = {"q": geometry.q, "size": line_class.size}
    try:
        line_meets = verify_cl(geometry, line_class)
    except SizeMismatch as exc:
        report.update({"passed": False, "reason": str(exc)})
        report["runtime_seconds"] = round(time.perf_counter() - started, 3)
        _emit(report)
        return ExitCode.VERIFY_FAILED

    report["line_meets"] = line_meets.to_dict()
    passed = line_meets.passed
    if not args.skip_klein:
        tight = tight_set_check(
            geometry, line_class.ids(), line_class.parameter, workers=args.workers
        )
        report["tight_set"] = tight.to_dict()
        report["agree"] = bool(np.array_equal(line_meets.counts, tight.counts))
        passed = passed and tight.passed and report["agree"]

    report["passed"] = passed
    report["runtime_seconds"] = round(time.perf_counter() - started, 3)
    _emit(report)
    return ExitCode.OK if passed else ExitCode.VERIFY_FAILED


def cmd_spectra(args: argparse.Namespace) -> ExitCode:
    geometry, line_class = load_class(read_document(args.input), args.max_q)
    _emit({"q": geometry.q, "size": line_class.size, **spectra_report(geometry, line_class)})
    return ExitCode.OK


def cmd_search(args: argparse.Namespace) -> ExitCode:
    started = time.perf_counter()
    geometry = _geometry(args.q, None, args.max_q)
    result = run_search(
        decompose(geometry),
        start=args.start,
        depth=args.depth,
        budget=args.budget,
        klein=args.klein,
        progress=not args.no_progress,
    )
    payload = result.to_dict()
    payload["runtime_seconds"] = round(time.perf_counter() - started, 3)
    _emit(payload)
    if result.partial:
        return ExitCode.BUDGET
    if not all(hit.verified for hit in result.fingerprints):
        return ExitCode.VERIFY_FAILED
    return ExitCode.OK


def cmd_symmetry(args: argparse.Namespace) -> ExitCode:
    geometry, line_class = load_class(read_document(args.input), args.max_q)
    _emit({"q": geometry.q, **symmetry_report(geometry, line_class)})
    return ExitCode.OK


def cmd_lemmas(args: argparse.Namespace) -> ExitCode:
    geometry = _geometry(args.q, None, args.max_q)
    pair = DerivationPair.create(geometry, *args.pair) if args.pair else None
    checks = run_lemma_suite(decompose(geometry), pair)
    passed = all(check.passed for check in checks)
    _emit({"q": geometry.q, "passed": passed, "checks": [c.to_dict() for c in checks]})
    return ExitCode.OK if passed else ExitCode.VERIFY_FAILED


COMMANDS = {
    "construct": cmd_construct,
    "verify": cmd_verify,
    "spectra": cmd_spectra,
    "search": cmd_search,
    "symmetry": cmd_symmetry,
    "lemmas": cmd_lemmas,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    level = logging.getLevelName(args.log_level.upper()) if args.log_level else None
    setup_logging(level=level if isinstance(level, int) else None, json_format=args.json_logs or None)

    with run_context():
        logger.info("Command started", extra={"command": args.command})
        try:
            return int(COMMANDS[args.command](args))
        except EmptySet as exc:
            sys.stderr.write(f"verification failed: {exc}\n")
            return int(ExitCode.VERIFY_FAILED)
        except (
            DocumentError,
            CapacityExceeded,
            InvalidOmega,
            InvalidDerivationPair,
            PreconditionViolated,
            InvalidSearchDepth,
            ValueError,
        ) as exc:
            logger.error("Invalid input", extra={"error": str(exc)})
            sys.stderr.write(f"error: {exc}\n")
            return int(ExitCode.USAGE)
        except StructureViolation as exc:
            logger.error("Structure violation", extra={"check": exc.check})
            sys.stderr.write(f"structure violation: {exc}\n")
            return int(ExitCode.STRUCTURE)
        except ClosureBudgetExceeded as exc:
            sys.stderr.write(f"budget exhausted: {exc}\n")
            return int(ExitCode.BUDGET)


if __name__ == "__main__":
    sys.exit(main())
