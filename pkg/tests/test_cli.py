"""Tests for the command-line interface."""

import argparse
import json
import logging
import os
from unittest.mock import patch

import pytest

from cameron_liebler.cli.main import ExitCode, build_parser, main, parse_pair
from cameron_liebler.config import get_settings


@pytest.fixture(autouse=True)
def restore_root_logger():
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


def _stdout_json(capsys) -> dict:
    return json.loads(capsys.readouterr().out)


@pytest.fixture
def bd5_path(tmp_path, capsys):
    path = tmp_path / "bd5.json"
    assert main(["construct", "--q", "5", "--output", str(path)]) == ExitCode.OK
    capsys.readouterr()
    return path


class TestParser:
    def test_parse_pair(self):
        assert parse_pair("1,3") == (1, 3)

    @pytest.mark.parametrize("text", ["1", "1,2,3", "a,b"])
    def test_parse_pair_rejects(self, text):
        with pytest.raises(argparse.ArgumentTypeError):
            parse_pair(text)

    def test_repeated_pairs(self):
        args = build_parser().parse_args(
            ["construct", "--q", "7", "--family", "derived", "--pair", "1,3", "--pair", "2,5"]
        )
        assert args.pair == [(1, 3), (2, 5)]

    def test_missing_command(self):
        assert main([]) == ExitCode.USAGE

    def test_malformed_pair(self):
        assert main(["construct", "--q", "7", "--family", "derived", "--pair", "1"]) == ExitCode.USAGE


class TestConstruct:
    def test_stdout_document(self, capsys):
        assert main(["construct", "--q", "3"]) == ExitCode.OK
        document = _stdout_json(capsys)
        assert document["class"]["parameter"] == "5"
        assert len(document["class"]["lines"]) == 65

    def test_complement(self, capsys):
        assert main(["construct", "--q", "5", "--complement"]) == ExitCode.OK
        document = _stdout_json(capsys)
        assert document["class"]["parameter"] == "13"
        assert document["class"]["provenance"][-1] == {"kind": "complement"}

    def test_with_report(self, capsys):
        assert main(["construct", "--q", "5", "--family", "cpgmp", "--with-report"]) == ExitCode.OK
        assert _stdout_json(capsys)["reports"]["line_meets"]["passed"] is True

    def test_even_q(self):
        assert main(["construct", "--q", "8"]) == ExitCode.USAGE

    def test_capacity(self):
        assert main(["--max-q", "3", "construct", "--q", "5"]) == ExitCode.USAGE

    def test_pair_needs_derived_family(self):
        assert main(["construct", "--q", "5", "--pair", "1,2"]) == ExitCode.USAGE

    def test_invalid_pair(self):
        assert main(["construct", "--q", "7", "--family", "derived", "--pair", "3,3"]) == ExitCode.USAGE

    def test_non_square_omega(self):
        assert main(["construct", "--q", "7", "--omega", "2"]) == ExitCode.USAGE


class TestVerify:
    def test_passes(self, bd5_path, capsys):
        assert main(["verify", str(bd5_path)]) == ExitCode.OK
        report = _stdout_json(capsys)
        assert report["passed"] is True
        assert report["agree"] is True
        assert report["line_meets"]["target_in"] == "103"
        assert report["tight_set"]["target_out"] == "78"
        assert "runtime_seconds" in report

    def test_skip_klein(self, bd5_path, capsys):
        assert main(["verify", str(bd5_path), "--skip-klein", "--workers", "2"]) == ExitCode.OK
        assert "tight_set" not in _stdout_json(capsys)

    def test_removed_line_is_size_mismatch(self, bd5_path, capsys):
        payload = json.loads(bd5_path.read_text())
        payload["class"]["lines"].pop()
        bd5_path.write_text(json.dumps(payload))
        assert main(["verify", str(bd5_path)]) == ExitCode.VERIFY_FAILED
        report = _stdout_json(capsys)
        assert report["passed"] is False
        assert "not a multiple" in report["reason"]

    def test_swapped_line_fails(self, bd5_path, capsys, geom5):
        payload = json.loads(bd5_path.read_text())
        present = {tuple(row) for row in payload["class"]["lines"]}
        outside = next(
            [int(c) for c in row] for row in geom5.lines if tuple(int(c) for c in row) not in present
        )
        payload["class"]["lines"][0] = outside
        bd5_path.write_text(json.dumps(payload))
        assert main(["verify", str(bd5_path)]) == ExitCode.VERIFY_FAILED
        report = _stdout_json(capsys)
        assert report["passed"] is False
        assert report["agree"] is True

    def test_empty_class(self, bd5_path):
        payload = json.loads(bd5_path.read_text())
        payload["class"]["lines"] = []
        payload["class"]["parameter"] = "0"
        bd5_path.write_text(json.dumps(payload))
        assert main(["verify", str(bd5_path)]) == ExitCode.VERIFY_FAILED

    def test_missing_file(self, tmp_path):
        assert main(["verify", str(tmp_path / "absent.json")]) == ExitCode.USAGE


class TestAnalysisCommands:
    def test_spectra_of_derived_class(self, tmp_path, capsys):
        path = tmp_path / "derived7.json"
        args = ["construct", "--q", "7", "--family", "derived", "--pair", "1,3", "--output", str(path)]
        assert main(args) == ExitCode.OK
        assert main(["spectra", str(path)]) == ExitCode.OK
        report = _stdout_json(capsys)
        assert report["classification"] == "DerivedNew"
        assert report["known"] == "i"

    def test_symmetry(self, bd5_path, capsys):
        assert main(["symmetry", str(bd5_path)]) == ExitCode.OK
        report = _stdout_json(capsys)
        assert report["order"] == 150
        assert report["invariant"] is True

    def test_symmetry_budget(self, bd5_path):
        with patch.dict(os.environ, {"CL_CLOSURE_BUDGET": "10"}):
            # bd5_path already ran main() and cached settings; re-read the patched env.
            get_settings.cache_clear()
            assert main(["symmetry", str(bd5_path)]) == ExitCode.BUDGET

    def test_search(self, capsys):
        assert main(["search", "--q", "5", "--no-progress"]) == ExitCode.OK
        report = _stdout_json(capsys)
        assert report["explored"] == 6
        assert report["partial"] is False

    def test_search_budget(self, capsys):
        assert main(["search", "--q", "5", "--budget", "2", "--no-progress"]) == ExitCode.BUDGET
        assert _stdout_json(capsys)["partial"] is True

    def test_search_depth(self):
        assert main(["search", "--q", "5", "--depth", "3", "--no-progress"]) == ExitCode.USAGE

    def test_lemmas(self, capsys):
        assert main(["lemmas", "--q", "5", "--pair", "1,2"]) == ExitCode.OK
        report = _stdout_json(capsys)
        assert report["passed"] is True
        assert all(check["passed"] for check in report["checks"])

    def test_json_logs(self, capsys):
        assert main(["--json-logs", "--log-level", "info", "lemmas", "--q", "3"]) == ExitCode.OK
        lines = [line for line in capsys.readouterr().err.splitlines() if line.startswith("{")]
        assert lines
        assert all("run_id" in json.loads(line) for line in lines)
