"""Tests for token labeling and sequence encoding."""

import pytest

from src.exceptions import EmptyDocumentError, InvoiceValidationError
from src.models.bounding_box import BBox
from src.models.document import CLASS_ORDER, Annotation, FieldClass
from src.models.ocr import LabeledToken, OcrToken
from src.services.labeling_service import (
    assign_labels,
    build_sequence_examples,
    count_label_instances,
    merge_windows,
    normalize_box,
    read_json_lines,
    write_json_lines,
)


def make_tokens(count):
    """Build a row of small tokens on a 200x100 page."""
    return [OcrToken(f"w{i}", BBox(i * 10, 0, i * 10 + 5, 5), 0.9) for i in range(count)]


class TestAssignLabels:
    """Test assign_labels()."""

    def test_invoice_fields(self, invoice_tokens, invoice_annotations):
        """Test each word takes the class of the field box around it."""
        labeled = assign_labels(invoice_tokens, invoice_annotations)
        assert [t.label for t in labeled] == [
            FieldClass.TITLE,
            FieldClass.CLIENT,
            FieldClass.DATE,
            FieldClass.TOTAL,
            FieldClass.TOTAL_VALUE,
            FieldClass.OTHER,
        ]
        assert labeled[0].source_annotation == 0
        assert labeled[-1].source_annotation is None

    def test_one_output_per_token(self, invoice_tokens, invoice_annotations):
        """Test the output keeps the input order and length."""
        labeled = assign_labels(invoice_tokens, invoice_annotations)
        assert [t.token for t in labeled] == invoice_tokens

    def test_smaller_annotation_wins_tie(self):
        """Test equal ratios prefer the smaller annotation."""
        annotations = [
            Annotation(FieldClass.TITLE, BBox(0, 0, 100, 100)),
            Annotation(FieldClass.CLIENT, BBox(0, 0, 20, 20)),
        ]
        (labeled,) = assign_labels([OcrToken("a", BBox(0, 0, 10, 10), 1.0)], annotations)
        assert labeled.label is FieldClass.CLIENT
        assert labeled.source_annotation == 1

    def test_lower_index_wins_full_tie(self):
        """Test identical annotations prefer the first one."""
        annotations = [
            Annotation(FieldClass.TITLE, BBox(0, 0, 20, 20)),
            Annotation(FieldClass.DATE, BBox(0, 0, 20, 20)),
        ]
        (labeled,) = assign_labels([OcrToken("a", BBox(0, 0, 10, 10), 1.0)], annotations)
        assert labeled.label is FieldClass.TITLE

    def test_higher_ratio_wins(self):
        """Test the annotation covering more of the token wins."""
        annotations = [
            Annotation(FieldClass.TITLE, BBox(0, 0, 6, 10)),
            Annotation(FieldClass.DATE, BBox(3, 0, 10, 10)),
        ]
        (labeled,) = assign_labels([OcrToken("a", BBox(0, 0, 10, 10), 1.0)], annotations)
        assert labeled.label is FieldClass.DATE

    @pytest.mark.parametrize(("threshold", "expected"), [(0.5, FieldClass.TOTAL), (0.6, FieldClass.OTHER)])
    def test_threshold_inclusive(self, threshold, expected):
        """Test a ratio equal to the threshold is accepted."""
        annotation = Annotation(FieldClass.TOTAL, BBox(5, 0, 20, 10))
        (labeled,) = assign_labels([OcrToken("a", BBox(0, 0, 10, 10), 1.0)], [annotation], threshold)
        assert labeled.label is expected

    def test_object_annotations_ignored(self):
        """Test stamps do not label words by default."""
        annotation = Annotation(FieldClass.STAMP, BBox(0, 0, 50, 50))
        (labeled,) = assign_labels([OcrToken("seal", BBox(5, 5, 20, 20), 1.0)], [annotation])
        assert labeled.label is FieldClass.OTHER

    def test_no_annotations(self, invoice_tokens):
        """Test every word is Other without annotations."""
        assert {t.label for t in assign_labels(invoice_tokens, [])} == {FieldClass.OTHER}


class TestCountLabelInstances:
    """Test count_label_instances()."""

    def test_counts_every_class(self, invoice_tokens, invoice_annotations):
        """Test all classes are reported, zeros included."""
        labeled = assign_labels(invoice_tokens, invoice_annotations)
        counts = count_label_instances([labeled, labeled])
        assert list(counts) == list(CLASS_ORDER)
        assert counts[FieldClass.TITLE] == 2
        assert counts[FieldClass.OTHER] == 2
        assert counts[FieldClass.STAMP] == 0


class TestNormalizeBox:
    """Test normalize_box()."""

    def test_scaling(self):
        """Test pixel boxes map onto the 0-1000 grid."""
        assert normalize_box(BBox(10, 20, 40, 30), 200, 100) == (50, 200, 200, 300)

    def test_full_page(self):
        """Test the full page maps to the full grid."""
        assert normalize_box(BBox(0, 0, 200, 100), 200, 100) == (0, 0, 1000, 1000)

    def test_truncates(self):
        """Test fractional grid values are truncated."""
        assert normalize_box(BBox(1, 1, 2, 2), 3, 3) == (333, 333, 666, 666)

    def test_invalid_dimensions(self):
        """Test zero dimensions are rejected."""
        with pytest.raises(InvoiceValidationError):
            normalize_box(BBox(0, 0, 1, 1), 0, 10)


class TestBuildSequenceExamples:
    """Test build_sequence_examples()."""

    def test_single_window(self, invoice_tokens):
        """Test a short document fits in one window."""
        (example,) = build_sequence_examples(invoice_tokens, 200, 100, document_id="d")
        assert example.words == [t.text for t in invoice_tokens]
        assert example.labels is None
        assert example.boxes[0] == (60, 60, 440, 140)

    def test_windows_without_overlap(self):
        """Test windows split the sequence in consecutive chunks."""
        examples = build_sequence_examples(make_tokens(10), 200, 100, max_sequence_length=4)
        assert [len(e) for e in examples] == [4, 4, 2]
        assert [e.offset for e in examples] == [0, 4, 8]
        assert [e.window_index for e in examples] == [0, 1, 2]

    def test_windows_with_stride(self):
        """Test consecutive windows share stride tokens."""
        examples = build_sequence_examples(make_tokens(10), 200, 100, max_sequence_length=4, stride=1)
        assert [e.offset for e in examples] == [0, 3, 6]
        assert examples[0].words[-1] == examples[1].words[0]

    def test_merge_restores_sequence(self):
        """Test merged windows give back the original sequence."""
        tokens = make_tokens(10)
        examples = build_sequence_examples(tokens, 200, 100, max_sequence_length=4, stride=2)
        assert merge_windows(examples) == tokens

    def test_labels_carried(self, invoice_tokens, invoice_annotations):
        """Test labeled tokens keep their labels in the windows."""
        labeled = assign_labels(invoice_tokens, invoice_annotations)
        (example,) = build_sequence_examples(labeled, 200, 100)
        assert example.labels == tuple(t.label for t in labeled)

    def test_empty_document(self):
        """Test a document without words is rejected."""
        with pytest.raises(EmptyDocumentError):
            build_sequence_examples([], 200, 100, document_id="empty")

    def test_invalid_stride(self):
        """Test the stride must be shorter than the window."""
        with pytest.raises(InvoiceValidationError):
            build_sequence_examples(make_tokens(3), 200, 100, max_sequence_length=4, stride=4)


class TestJsonLines:
    """Test JSON lines persistence."""

    def test_written_lines_read_back(self, tmp_path, invoice_tokens, invoice_annotations):
        """Test windows read back equal to the written ones."""
        labeled = assign_labels(invoice_tokens, invoice_annotations)
        examples = build_sequence_examples(labeled, 200, 100, max_sequence_length=4, document_id="d")
        path = tmp_path / "nested" / "sequences.jsonl"
        assert write_json_lines(examples, path) == 2
        assert read_json_lines(path) == examples

    def test_label_values_in_file(self, tmp_path, invoice_tokens, invoice_annotations):
        """Test labels are written with their display names."""
        labeled = assign_labels(invoice_tokens, invoice_annotations)
        path = tmp_path / "sequences.jsonl"
        write_json_lines(build_sequence_examples(labeled, 200, 100), path)
        assert '"TotalValue"' in path.read_text(encoding="utf-8")


def test_labeled_token_invariant():
    """Test Other labels cannot carry a source annotation."""
    with pytest.raises(InvoiceValidationError):
        LabeledToken(OcrToken("a", BBox(0, 0, 1, 1), 1.0), FieldClass.OTHER, 0)
