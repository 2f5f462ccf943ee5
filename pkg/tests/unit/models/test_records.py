"""Tests for OCR, detection and report models."""

import json

import pytest

from src.exceptions import InvoiceValidationError
from src.models.bounding_box import BBox
from src.models.detection import Detection
from src.models.document import FieldClass
from src.models.ocr import LabeledToken, OcrToken, SequenceExample, TokenPrediction
from src.models.report import CriterionResult, Evidence, EvidenceKind, ValidationReport, Verdict


class TestOcrToken:
    """Test OcrToken model."""

    def test_blank_text_rejected(self):
        """Test whitespace-only text is rejected."""
        with pytest.raises(InvoiceValidationError):
            OcrToken("  ", BBox(0, 0, 1, 1))

    def test_confidence_range(self):
        """Test confidence must lie in [0, 1]."""
        with pytest.raises(InvoiceValidationError):
            OcrToken("a", BBox(0, 0, 1, 1), 1.5)

    def test_dict_round_trip(self):
        """Test dictionary conversion."""
        token = OcrToken("Total", BBox(1, 2, 3, 4), 0.5)
        assert OcrToken.from_dict(token.to_dict()) == token


class TestLabeledToken:
    """Test LabeledToken invariant."""

    def test_other_without_source(self):
        """Test Other tokens carry no source annotation."""
        token = OcrToken("x", BBox(0, 0, 1, 1))
        assert LabeledToken(token, FieldClass.OTHER).source_annotation is None

    def test_field_requires_source(self):
        """Test a field label needs a source annotation."""
        token = OcrToken("x", BBox(0, 0, 1, 1))
        with pytest.raises(InvoiceValidationError):
            LabeledToken(token, FieldClass.TITLE)

    def test_other_with_source_rejected(self):
        """Test Other with a source annotation is inconsistent."""
        token = OcrToken("x", BBox(0, 0, 1, 1))
        with pytest.raises(InvoiceValidationError):
            LabeledToken(token, FieldClass.OTHER, 0)

    def test_prediction_from_labeled(self):
        """Test a ground-truth prediction is certain."""
        token = OcrToken("x", BBox(0, 0, 1, 1))
        prediction = TokenPrediction.from_labeled(LabeledToken(token, FieldClass.DATE, 2))
        assert prediction.label is FieldClass.DATE
        assert prediction.confidence == 1.0


class TestSequenceExample:
    """Test SequenceExample model."""

    def test_box_count_must_match(self):
        """Test one normalized box per token."""
        token = OcrToken("x", BBox(0, 0, 1, 1))
        with pytest.raises(InvoiceValidationError):
            SequenceExample("d", 0, 0, (token,), ())

    def test_normalized_range(self):
        """Test normalized coordinates stay on the 0-1000 grid."""
        token = OcrToken("x", BBox(0, 0, 1, 1))
        with pytest.raises(InvoiceValidationError):
            SequenceExample("d", 0, 0, (token,), ((0, 0, 1001, 10),))

    def test_json_line(self):
        """Test the JSON line carries words, boxes and labels."""
        token = OcrToken("Total", BBox(10, 10, 20, 20), 0.9)
        example = SequenceExample("d", 0, 0, (token,), ((100, 50, 200, 100),), (FieldClass.TOTAL,))
        payload = json.loads(example.to_json_line())
        assert payload["words"] == ["Total"]
        assert payload["boxes"] == [[100, 50, 200, 100]]
        assert payload["labels"] == ["Total"]
        assert SequenceExample.from_json_line(example.to_json_line()) == example


class TestDetection:
    """Test Detection model."""

    def test_keyword_class_rejected(self):
        """Test only Stamp and Signature can be detected."""
        with pytest.raises(InvoiceValidationError):
            Detection(FieldClass.TITLE, BBox(0, 0, 1, 1), 0.5)

    def test_score_range(self):
        """Test scores outside [0, 1] are rejected."""
        with pytest.raises(InvoiceValidationError):
            Detection(FieldClass.STAMP, BBox(0, 0, 1, 1), 1.2)

    def test_sort_key_orders_by_score_then_box(self):
        """Test ties on score are broken by box coordinates."""
        a = Detection(FieldClass.STAMP, BBox(5, 0, 6, 1), 0.8)
        b = Detection(FieldClass.STAMP, BBox(1, 0, 2, 1), 0.8)
        c = Detection(FieldClass.STAMP, BBox(9, 9, 10, 10), 0.9)
        assert sorted([a, b, c], key=Detection.sort_key) == [c, b, a]

    def test_dict_round_trip(self, stamp_detection):
        """Test dictionary conversion."""
        assert Detection.from_dict(stamp_detection.to_dict()) == stamp_detection


class TestValidationReport:
    """Test ValidationReport schema."""

    def _report(self):
        return ValidationReport(
            document_id="inv-001",
            verdict=Verdict.INVALID,
            criteria=(
                CriterionResult(
                    name="field:Title",
                    field_class=FieldClass.TITLE,
                    satisfied=True,
                    evidence=Evidence(kind=EvidenceKind.TOKEN, text="INVOICE", box=(1, 2, 3, 4), score=0.9),
                    candidates=1,
                ),
                CriterionResult(name="stamp", field_class=FieldClass.STAMP, satisfied=False),
            ),
            criteria_snapshot={"require_stamp": True},
        )

    def test_schema_version(self):
        """Test reports carry schema version 1."""
        assert json.loads(self._report().to_json())["schema_version"] == 1

    def test_failed_criteria(self):
        """Test failed criteria are listed in order."""
        assert [c.name for c in self._report().failed_criteria] == ["stamp"]

    def test_json_round_trip(self):
        """Test the JSON form reloads to an equal report."""
        report = self._report()
        assert ValidationReport.from_json(report.to_json()) == report

    def test_unknown_key_rejected(self):
        """Test the schema rejects unknown keys."""
        data = json.loads(self._report().to_json())
        data["extra"] = 1
        with pytest.raises(ValueError):
            ValidationReport.model_validate(data)

    def test_report_is_frozen(self):
        """Test reports are immutable."""
        with pytest.raises(ValueError):
            self._report().verdict = Verdict.VALID
