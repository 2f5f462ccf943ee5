"""Tests for layout and detector backends."""

import numpy as np
import pytest

from src.clients.backends import (
    MockDetectorBackend,
    MockLayoutBackend,
    SerializedDetectorBackend,
    check_scores,
    resolve_backend,
)
from src.exceptions import BackendConfigError, BackendFailureError
from src.models.bounding_box import BBox
from src.models.document import NUM_CLASSES, FieldClass
from src.services.labeling_service import build_sequence_examples


class TestMockLayoutBackend:
    """Test MockLayoutBackend."""

    def test_one_hot_from_ground_truth(self, invoice_record, invoice_tokens):
        """Test each token row is one-hot on its aligned class."""
        backend = MockLayoutBackend({invoice_record.id: invoice_record.annotations})
        (example,) = build_sequence_examples(invoice_tokens, 200, 100, document_id=invoice_record.id)
        scores = backend.predict(example, invoice_record.image)
        assert scores.shape == (len(invoice_tokens), NUM_CLASSES)
        np.testing.assert_array_equal(scores.sum(axis=1), np.ones(len(invoice_tokens)))
        labels = [FieldClass.from_index(i) for i in scores.argmax(axis=1)]
        assert labels == [
            FieldClass.TITLE,
            FieldClass.CLIENT,
            FieldClass.DATE,
            FieldClass.TOTAL,
            FieldClass.TOTAL_VALUE,
            FieldClass.OTHER,
        ]

    def test_unknown_document_is_background(self, blank_image, invoice_tokens):
        """Test a document without ground truth is all Other."""
        (example,) = build_sequence_examples(invoice_tokens, 200, 100, document_id="unknown")
        scores = MockLayoutBackend().predict(example, blank_image)
        assert set(scores.argmax(axis=1)) == {FieldClass.OTHER.index}


class TestMockDetectorBackend:
    """Test MockDetectorBackend."""

    def test_detects_annotated_objects(self, invoice_record):
        """Test stamps and signatures yield a detection and a shifted duplicate."""
        backend = MockDetectorBackend({invoice_record.id: invoice_record.annotations})
        detections = backend.predict(invoice_record.image, invoice_record.id)
        assert len(detections) == 4
        stamp, duplicate = detections[0], detections[1]
        assert stamp.field_class is FieldClass.STAMP
        assert stamp.score == 0.95
        assert duplicate.score == 0.6
        assert duplicate.box == BBox(121, 61, 181, 91)

    def test_without_duplicates(self, invoice_record):
        """Test duplicates can be disabled."""
        backend = MockDetectorBackend({invoice_record.id: invoice_record.annotations}, duplicates=False)
        assert len(backend.predict(invoice_record.image, invoice_record.id)) == 2

    def test_keyword_annotations_ignored(self, invoice_record):
        """Test only object classes are detected."""
        backend = MockDetectorBackend({invoice_record.id: invoice_record.annotations})
        classes = {d.field_class for d in backend.predict(invoice_record.image, invoice_record.id)}
        assert classes == {FieldClass.STAMP, FieldClass.SIGNATURE}


class TestResolveBackend:
    """Test resolve_backend()."""

    def test_mock_layout(self):
        """Test the mock layout descriptor."""
        assert isinstance(resolve_backend("mock", "layout"), MockLayoutBackend)

    def test_mock_detector(self):
        """Test the mock detector descriptor."""
        assert isinstance(resolve_backend("mock", "detector"), MockDetectorBackend)

    def test_unknown_descriptor(self):
        """Test an unknown descriptor fails fast."""
        with pytest.raises(BackendConfigError):
            resolve_backend("torch:model.pt", "detector")

    def test_missing_onnx_model(self, tmp_path):
        """Test a missing model file is a configuration error."""
        with pytest.raises(BackendConfigError):
            resolve_backend(f"onnx:{tmp_path / 'missing.onnx'}", "detector")

    def test_layout_onnx_needs_tokenizer(self, tmp_path):
        """Test the ONNX layout model requires a tokenizer name."""
        with pytest.raises(BackendConfigError):
            resolve_backend(f"onnx:{tmp_path / 'layout.onnx'}", "layout")

    def test_unknown_kind(self):
        """Test an unknown backend kind."""
        with pytest.raises(BackendConfigError):
            resolve_backend("mock", "classifier")


class TestSerializedBackend:
    """Test the serializing wrapper."""

    def test_delegates(self, invoice_record):
        """Test the wrapper returns the inner predictions."""
        inner = MockDetectorBackend({invoice_record.id: invoice_record.annotations})
        wrapped = SerializedDetectorBackend(inner)
        assert wrapped.predict(invoice_record.image, invoice_record.id) == inner.predict(
            invoice_record.image, invoice_record.id
        )


class TestCheckScores:
    """Test check_scores()."""

    def test_valid_shape(self):
        """Test a well-formed score matrix passes."""
        assert check_scores(np.zeros((3, NUM_CLASSES)), 3).shape == (3, NUM_CLASSES)

    def test_wrong_shape(self):
        """Test a score matrix with the wrong row count fails."""
        with pytest.raises(BackendFailureError):
            check_scores(np.zeros((2, NUM_CLASSES)), 3)

    def test_non_finite(self):
        """Test NaN scores fail."""
        scores = np.zeros((1, NUM_CLASSES))
        scores[0, 0] = np.nan
        with pytest.raises(BackendFailureError):
            check_scores(scores, 1)
