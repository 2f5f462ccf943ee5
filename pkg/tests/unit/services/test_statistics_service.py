"""Tests for dataset statistics and instance count tables."""

import json

import pytest

from src.models.document import ANNOTATION_CLASSES, FieldClass
from src.services.statistics_service import (
    INSTANCE_COLUMNS,
    class_distribution,
    imbalance_ratio,
    imbalance_summary,
    instance_frame,
    instance_table_csv,
    plot_class_distribution,
    render_instance_table,
)
from tests.conftest import FIXTURES_DIR


@pytest.fixture
def published_counts():
    """Load the per-engine instance counts."""
    raw = json.loads((FIXTURES_DIR / "instance_counts.json").read_text(encoding="utf-8"))
    columns = dict(INSTANCE_COLUMNS)
    return {engine: {columns[label]: n for label, n in counts.items()} for engine, counts in raw.items()}


class TestClassDistribution:
    """Test class_distribution()."""

    def test_counts_annotations(self, small_manifest):
        """Test each annotatable class is counted once."""
        counts = class_distribution(small_manifest)
        assert list(counts) == list(ANNOTATION_CLASSES)
        assert set(counts.values()) == {1}

    def test_empty(self):
        """Test an empty dataset counts zero everywhere."""
        assert set(class_distribution([]).values()) == {0}


class TestImbalanceRatio:
    """Test imbalance_ratio()."""

    def test_published_ratios(self, published_counts):
        """Test the background share per engine."""
        assert imbalance_ratio(published_counts["Azure OCR"]) == pytest.approx(31715 / 1548)
        assert imbalance_ratio(published_counts["Tesseract"]) == pytest.approx(6272 / 941)

    def test_no_fields(self):
        """Test background-only counts."""
        assert imbalance_ratio({FieldClass.OTHER: 3}) == float("inf")
        assert imbalance_ratio({}) == 0.0

    def test_summary_is_json_safe(self, published_counts):
        """Test engines without field tokens get a null ratio."""
        summary = imbalance_summary({**published_counts, "blank": {FieldClass.OTHER: 12}})
        assert summary["blank"] is None
        assert summary["Tesseract"] == pytest.approx(6272 / 941)
        assert json.loads(json.dumps(summary, allow_nan=False))["blank"] is None


class TestInstanceTables:
    """Test the instance count tables."""

    def test_text_golden(self, published_counts):
        """Test the aligned text table."""
        expected = (FIXTURES_DIR / "instance_counts.txt").read_text(encoding="utf-8")
        assert render_instance_table(published_counts) == expected

    def test_csv_golden(self, published_counts):
        """Test the CSV table."""
        expected = (FIXTURES_DIR / "instance_counts.csv").read_text(encoding="utf-8")
        assert instance_table_csv(published_counts) == expected

    def test_frame_columns(self, published_counts):
        """Test the frame uses the published column order."""
        frame = instance_frame(published_counts)
        assert list(frame.columns) == ["OCR", "O", "Title", "Date", "Client", "Total", "Total Value"]
        assert frame.loc[frame["OCR"] == "Tesseract", "Client"].item() == 161

    def test_missing_classes_zero(self):
        """Test classes absent from the counts show zero."""
        table = render_instance_table({"mock": {FieldClass.TITLE: 2}})
        assert table.splitlines()[1].split() == ["mock", "0", "2", "0", "0", "0", "0"]


class TestPlotClassDistribution:
    """Test plot_class_distribution()."""

    def test_writes_png(self, tmp_path, small_manifest):
        """Test a PNG chart is written."""
        path = plot_class_distribution(class_distribution(small_manifest), tmp_path / "plots" / "classes.png")
        assert path.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
