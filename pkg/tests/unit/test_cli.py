"""Tests for the command-line interface."""

import json

import pytest

from src.cli import EXIT_CONFIG, EXIT_DOCUMENT_FAILURES, EXIT_OK, build_parser, main
from src.models.document import FieldClass
from src.services.training_export import export_training_config
from tests.conftest import FIXTURES_DIR


@pytest.fixture
def data_dir(tmp_path):
    """Generate three invoices, the second one without a stamp."""
    out = tmp_path / "data"
    assert main(["synth", "--docs", "3", "--seed", "5", "--omit", "1:Stamp", "--out", str(out)]) == EXIT_OK
    return out


class TestParser:
    """Test argument parsing."""

    def test_omit_option(self):
        """Test the omit option parses rank and classes."""
        args = build_parser().parse_args(["synth", "--omit", "3:Stamp,Signature"])
        assert args.omit == [(3, frozenset({FieldClass.STAMP, FieldClass.SIGNATURE}))]

    def test_skew_option(self):
        """Test the skew option parses rank and angle."""
        args = build_parser().parse_args(["synth", "--skew", "2:7.5"])
        assert args.skew == [(2, 7.5)]

    @pytest.mark.parametrize("argv", [["synth", "--omit", "3"], ["synth", "--skew", "x:1"], ["bogus"]])
    def test_invalid_arguments(self, argv):
        """Test malformed options exit with the argparse usage code."""
        with pytest.raises(SystemExit) as exc_info:
            build_parser().parse_args(argv)
        assert exc_info.value.code == 2


class TestSynthAndValidate:
    """Test synth then validate end to end."""

    def test_synth_writes_manifest(self, data_dir):
        """Test the generated files."""
        manifest = json.loads((data_dir / "manifest.json").read_text())
        assert [r["id"] for r in manifest["records"]] == ["doc-0000", "doc-0001", "doc-0002"]
        assert (data_dir / "ocr" / "doc-0000.tsv").is_file()

    def test_validate(self, data_dir, tmp_path, capsys):
        """Test reports are written and explained."""
        out = tmp_path / "run"
        code = main(["validate", str(data_dir / "manifest.json"), "--out", str(out)])
        assert code == EXIT_OK
        summary = json.loads((out / "summary.json").read_text())
        assert summary["verdicts"] == {"Valid": 2, "Invalid": 1, "Unsupported": 0}
        report = json.loads((out / "reports" / "doc-0001.json").read_text())
        assert report["verdict"] == "Invalid"
        assert "doc-0001: Invalid, failed: stamp" in capsys.readouterr().out.splitlines()

    def test_document_failure_exit_code(self, data_dir, tmp_path):
        """Test a failing document gives exit code 1."""
        (data_dir / "ocr" / "doc-0002.tsv").unlink()
        code = main(["validate", str(data_dir / "manifest.json"), "--out", str(tmp_path / "run")])
        assert code == EXIT_DOCUMENT_FAILURES

    def test_eval_tokens(self, data_dir, tmp_path):
        """Test the token evaluation output."""
        out = tmp_path / "eval"
        assert main(["eval-tokens", str(data_dir / "manifest.json"), "--out", str(out)]) == EXIT_OK
        assert json.loads((out / "token_eval.json").read_text())["micro"]["f1"] == 1.0


class TestConfigurationErrors:
    """Test exit code 2 on configuration errors."""

    def test_missing_config_file(self, tmp_path):
        """Test an unreadable config file."""
        assert main(["export-train-config", "--track", "layout", "--config", str(tmp_path / "none.json")]) == EXIT_CONFIG

    def test_missing_manifest(self, tmp_path):
        """Test an unreadable manifest."""
        assert main(["validate", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == EXIT_CONFIG

    def test_missing_model(self, data_dir, tmp_path):
        """Test a missing model file is reported before any document runs."""
        code = main(
            [
                "validate",
                str(data_dir / "manifest.json"),
                "--detector-backend",
                f"onnx:{tmp_path / 'missing.onnx'}",
                "--out",
                str(tmp_path / "run"),
            ]
        )
        assert code == EXIT_CONFIG
        assert not (tmp_path / "run").exists()

    def test_unknown_track(self, tmp_path):
        """Test an unknown training track."""
        assert main(["export-train-config", "--track", "ocr", "--out", str(tmp_path)]) == EXIT_CONFIG


class TestExportTrainConfig:
    """Test the export-train-config command."""

    def test_writes_file(self, tmp_path):
        """Test the export lands in the output directory."""
        assert main(["export-train-config", "--track", "detection", "--out", str(tmp_path)]) == EXIT_OK
        written = json.loads((tmp_path / "train_detection.json").read_text())
        assert written == export_training_config("detection")


class TestStats:
    """Test the stats command."""

    def test_counts_table(self, capsys):
        """Test the instance table from recorded counts."""
        code = main(["stats", "--counts", str(FIXTURES_DIR / "instance_counts.json")])
        assert code == EXIT_OK
        assert capsys.readouterr().out == (FIXTURES_DIR / "instance_counts.txt").read_text(encoding="utf-8")

    def test_counts_csv(self, capsys):
        """Test the CSV rendering."""
        main(["stats", "--counts", str(FIXTURES_DIR / "instance_counts.json"), "--format", "csv"])
        assert capsys.readouterr().out == (FIXTURES_DIR / "instance_counts.csv").read_text(encoding="utf-8")

    def test_nothing_to_count(self):
        """Test stats without input is a configuration error."""
        assert main(["stats"]) == EXIT_CONFIG

    def test_manifest_stats(self, data_dir, tmp_path):
        """Test dataset statistics are written."""
        out = tmp_path / "stats"
        assert main(["stats", str(data_dir / "manifest.json"), "--out", str(out)]) == EXIT_OK
        stats = json.loads((out / "stats.json").read_text())
        assert stats["class_distribution"]["Stamp"] == 2
        assert stats["class_distribution"]["Title"] == 3
