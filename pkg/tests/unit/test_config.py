"""Tests for configuration module."""

import json

import pytest

from src.config import (
    DEFAULT_CONFIG,
    BackendConfig,
    DetectionAugConfig,
    KeywordAugConfig,
    LabelingConfig,
    OcrClientConfig,
    PipelineConfig,
    ValidationCriteria,
    load_config,
    parse_config,
)
from src.exceptions import ConfigurationError
from src.models.document import FieldClass


class TestOcrClientConfig:
    """Test OcrClientConfig model."""

    def test_default_timeout(self):
        """Test default timeout."""
        assert OcrClientConfig().timeout == 30

    def test_default_max_retries(self):
        """Test default max retries."""
        assert OcrClientConfig().max_retries == 3

    def test_default_retry_delay(self):
        """Test default retry delay."""
        assert OcrClientConfig().retry_delay == 1.0

    def test_default_in_flight_cap(self):
        """Test the default number of concurrent requests."""
        assert OcrClientConfig().max_in_flight == 4

    def test_from_env(self, monkeypatch):
        """Test credentials are read from the environment."""
        monkeypatch.setenv("OCR_ENDPOINT", "https://ocr.example.test")
        monkeypatch.setenv("OCR_KEY", "k")
        config = OcrClientConfig.from_env(max_in_flight=2)
        assert config.endpoint == "https://ocr.example.test"
        assert config.key == "k"
        assert config.max_in_flight == 2

    def test_from_env_missing(self, monkeypatch):
        """Test missing variables leave credentials unset."""
        monkeypatch.delenv("OCR_ENDPOINT", raising=False)
        monkeypatch.delenv("OCR_KEY", raising=False)
        assert OcrClientConfig.from_env().endpoint is None


class TestAugmentationConfig:
    """Test augmentation configs."""

    def test_keyword_defaults(self):
        """Test published keyword-track defaults."""
        config = KeywordAugConfig()
        assert config.median_blur_kernel == 3
        assert config.pad_ratio == 0.05
        assert config.max_rotation_deg == 5.0
        assert config.rotation_interpolation == "cubic"

    def test_detection_defaults(self):
        """Test published detection-track defaults."""
        config = DetectionAugConfig()
        assert config.rotation_probability == 0.5
        assert config.max_rotation_deg == 10.0
        assert config.jitter.probability == 0.4
        assert config.noise_probability == 0.3
        assert config.noise_multiplier_range == (0.5, 1.0)

    def test_even_kernel_rejected(self):
        """Test an even median kernel is rejected."""
        with pytest.raises(ValueError):
            KeywordAugConfig(median_blur_kernel=4)

    def test_noise_range_rejected(self):
        """Test noise multipliers outside [0.5, 1.0] are rejected."""
        with pytest.raises(ValueError):
            DetectionAugConfig(noise_multiplier_range=(0.2, 1.0))


class TestBackendConfig:
    """Test backend descriptors."""

    @pytest.mark.parametrize("descriptor", ["mock", "onnx:models/layout.onnx"])
    def test_known_descriptors(self, descriptor):
        """Test accepted descriptors."""
        assert BackendConfig(layout=descriptor).layout == descriptor

    @pytest.mark.parametrize("descriptor", ["torch:model.pt", "onnx:", ""])
    def test_unknown_descriptor(self, descriptor):
        """Test unknown descriptors are rejected."""
        with pytest.raises(ValueError):
            BackendConfig(detector=descriptor)


class TestLabelingConfig:
    """Test windowing settings."""

    def test_stride_must_be_below_length(self):
        """Test stride >= max_sequence_length is rejected."""
        with pytest.raises(ValueError):
            LabelingConfig(max_sequence_length=8, stride=8)


class TestValidationCriteria:
    """Test validation criteria."""

    def test_defaults(self):
        """Test the default criteria require everything."""
        criteria = ValidationCriteria()
        assert criteria.required_fields == {
            FieldClass.TITLE,
            FieldClass.CLIENT,
            FieldClass.DATE,
            FieldClass.TOTAL,
            FieldClass.TOTAL_VALUE,
        }
        assert criteria.require_stamp is True
        assert criteria.require_signature is True
        assert criteria.min_detection_score == 0.5

    def test_other_not_required(self):
        """Test Other cannot be a required field."""
        with pytest.raises(ValueError):
            ValidationCriteria(required_fields={FieldClass.OTHER})

    def test_snapshot_orders_fields(self):
        """Test the snapshot lists fields in class order."""
        snapshot = ValidationCriteria().snapshot()
        assert snapshot["required_fields"] == ["Title", "Client", "Date", "Total", "TotalValue"]


class TestPipelineConfig:
    """Test the full pipeline config."""

    def test_default_seed(self):
        """Test default master seed."""
        assert DEFAULT_CONFIG.seed == 0

    def test_fingerprint_stable(self):
        """Test equal configs have equal fingerprints."""
        assert PipelineConfig().fingerprint() == DEFAULT_CONFIG.fingerprint()
        assert len(DEFAULT_CONFIG.fingerprint()) == 64

    def test_fingerprint_changes_with_values(self):
        """Test any value change changes the fingerprint."""
        assert PipelineConfig(seed=1).fingerprint() != DEFAULT_CONFIG.fingerprint()

    def test_fingerprint_ignores_runtime_settings(self):
        """Test worker count and output directory do not change the fingerprint."""
        assert PipelineConfig(jobs=4, output_dir="elsewhere").fingerprint() == DEFAULT_CONFIG.fingerprint()

    def test_overrides_take_precedence(self):
        """Test command-line values override file values."""
        config = PipelineConfig(seed=3).with_overrides(seed=7, layout_backend="onnx:m.onnx", jobs=2)
        assert config.seed == 7
        assert config.backends.layout == "onnx:m.onnx"
        assert config.backends.detector == "mock"
        assert config.jobs == 2

    def test_none_overrides_keep_values(self):
        """Test unset overrides keep file values."""
        config = PipelineConfig(seed=3, output_dir="runs").with_overrides()
        assert config.seed == 3
        assert config.output_dir == "runs"

    def test_invalid_override(self):
        """Test an invalid override is a configuration error."""
        with pytest.raises(ConfigurationError):
            DEFAULT_CONFIG.with_overrides(detector_backend="bogus")

    def test_frozen(self):
        """Test configs are immutable."""
        with pytest.raises(ValueError):
            DEFAULT_CONFIG.seed = 5


class TestLoadConfig:
    """Test parse_config() and load_config()."""

    def test_none_gives_default(self):
        """Test no path yields the default config."""
        assert load_config(None) == DEFAULT_CONFIG

    def test_load_file(self, tmp_path):
        """Test loading a JSON file."""
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"seed": 42, "detection": {"score_threshold": 0.3}}))
        config = load_config(path)
        assert config.seed == 42
        assert config.detection.score_threshold == 0.3
        assert config.detection.nms_iou_threshold == 0.5

    def test_unknown_key_rejected(self):
        """Test unknown keys are rejected with their path."""
        with pytest.raises(ConfigurationError, match="detection.bogus"):
            parse_config({"detection": {"bogus": 1}})

    def test_invalid_value(self):
        """Test an out-of-range value is rejected."""
        with pytest.raises(ConfigurationError, match="seed"):
            parse_config({"seed": -1})

    def test_missing_file(self, tmp_path):
        """Test an unreadable file is a configuration error."""
        with pytest.raises(ConfigurationError):
            load_config(tmp_path / "missing.json")

    def test_invalid_json(self, tmp_path):
        """Test malformed JSON is a configuration error."""
        path = tmp_path / "bad.json"
        path.write_text("{seed: 1")
        with pytest.raises(ConfigurationError):
            load_config(path)

    def test_non_object_rejected(self, tmp_path):
        """Test a JSON array is rejected."""
        path = tmp_path / "list.json"
        path.write_text("[1, 2]")
        with pytest.raises(ConfigurationError):
            load_config(path)
