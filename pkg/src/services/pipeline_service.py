"""
Pipeline d'inférence complet.

Par document : OCR → étiquetage et classification des tokens ; détection
→ filtrage → NMS ; puis décision de validité. Les documents sont traités
en parallèle, les échecs isolés, les sorties triées par identifiant.
"""

import logging
import os
import platform
import time
from collections import Counter, defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path
from typing import Any

from ..clients.backends import DetectorBackend, LayoutBackend, resolve_backend
from ..clients.ocr_engines import OcrEngine
from ..config import PipelineConfig
from ..exceptions import InvoiceValidationError
from ..models.detection import Detection
from ..models.document import Annotation, DatasetManifest, DocumentRecord, FieldClass
from ..models.evaluation import DetectionEvalReport, TokenEvalReport
from ..models.report import ValidationReport, Verdict
from ..repositories.report_repository import ReportRepository
from .inference_service import detect, predict_tokens
from .labeling_service import assign_labels, build_sequence_examples
from .metrics_service import mean_ap, precision_recall_f1
from .ocr_service import OcrService, build_engine
from .validation_service import validate

logger = logging.getLogger(__name__)

TRACKED_PACKAGES = ("numpy", "opencv-python-headless", "pillow", "pandas", "pydantic", "scipy", "levenshtein")


@dataclass(frozen=True)
class DocumentFailure:
    """Échec isolé d'un document."""

    document_id: str
    stage: str
    error: str
    message: str

    def to_dict(self) -> dict[str, str]:
        return {
            "document_id": self.document_id,
            "stage": self.stage,
            "error": self.error,
            "message": self.message,
        }


@dataclass
class DocumentOutcome:
    document_id: str
    report: ValidationReport | None = None
    failure: DocumentFailure | None = None
    predicted: list[FieldClass] = field(default_factory=list)
    gold: list[FieldClass] = field(default_factory=list)
    detections: list[Detection] = field(default_factory=list)
    annotations: tuple[Annotation, ...] = ()
    timings: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class PipelineResult:
    """
    Résultat d'un run.

    Attributes:
        reports: Rapports de validation, triés par identifiant
        failures: Échecs isolés, triés par identifiant
        token_eval: Évaluation des tokens (None si aucun document évalué)
        detection_eval: Évaluation de la détection
        run_info: Manifeste de run (empreinte, graine, versions, durées)
    """

    reports: tuple[ValidationReport, ...]
    failures: tuple[DocumentFailure, ...]
    token_eval: TokenEvalReport | None
    detection_eval: DetectionEvalReport | None
    run_info: dict[str, Any]

    @property
    def exit_code(self) -> int:
        return 1 if self.failures else 0

    def summary(self) -> dict[str, Any]:
        verdicts = Counter(r.verdict.value for r in self.reports)
        return {
            "documents": len(self.reports) + len(self.failures),
            "verdicts": {v.value: verdicts.get(v.value, 0) for v in Verdict},
            "failures": [f.to_dict() for f in self.failures],
            "reports": [{"id": r.document_id, "verdict": r.verdict.value} for r in self.reports],
            "token_eval": self.token_eval.to_dict() if self.token_eval else None,
            "detection_eval": self.detection_eval.to_dict() if self.detection_eval else None,
        }


def library_versions() -> dict[str, str]:
    versions = {"python": platform.python_version()}
    for name in TRACKED_PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "absent"
    return versions


class _Stopwatch:
    def __init__(self, timings: dict[str, float]):
        self.timings = timings

    def __call__(self, stage: str):
        return _Stage(self.timings, stage)


class _Stage:
    def __init__(self, timings: dict[str, float], stage: str):
        self.timings, self.stage = timings, stage

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.timings[self.stage] = self.timings.get(self.stage, 0.0) + time.perf_counter() - self.start
        return False


class PipelineService:
    """
    Service d'exécution du pipeline sur un manifeste.

    Les backends et le moteur OCR sont résolus à la construction : un
    descripteur inconnu échoue avant le traitement du premier document.

    Attributes:
        config: Configuration du pipeline
        ocr: Service OCR
        layout: Backend de mise en page
        detector: Backend de détection
    """

    def __init__(
        self,
        config: PipelineConfig,
        manifest: DatasetManifest,
        manifest_dir: str | Path = ".",
        engine: OcrEngine | None = None,
        layout: LayoutBackend | None = None,
        detector: DetectorBackend | None = None,
    ):
        """
        Initialise le service.

        Args:
            config: Configuration validée
            manifest: Documents à traiter (vérité terrain des backends mock)
            manifest_dir: Dossier du manifeste (sorties OCR rejouées dans <dossier>/ocr)
            engine: Moteur OCR (défaut : d'après config.ocr)
            layout: Backend de mise en page (défaut : d'après config.backends)
            detector: Backend de détection (défaut : d'après config.backends)

        Raises:
            BackendConfigError: Descripteur de backend inconnu
            ConfigurationError: Moteur OCR mal configuré
        """
        self.config = config
        self.manifest = manifest
        ground_truth = {r.id: r.annotations for r in manifest}
        self.ocr = OcrService(engine or build_engine(config.ocr, Path(manifest_dir) / "ocr"))
        self.layout = layout or resolve_backend(
            config.backends.layout, "layout", ground_truth, config.backends.tokenizer
        )
        self.detector = detector or resolve_backend(config.backends.detector, "detector", ground_truth)

    @property
    def postprocessing(self) -> dict[str, float]:
        return {
            "score_threshold": self.config.detection.score_threshold,
            "nms_iou_threshold": self.config.detection.nms_iou_threshold,
        }

    def process(self, record: DocumentRecord) -> DocumentOutcome:
        """
        Traite un document ; toute erreur est capturée et rapportée.

        Args:
            record: Document

        Returns:
            Rapport ou échec, plus les données d'évaluation
        """
        outcome = DocumentOutcome(record.id, annotations=record.annotations)
        stage = _Stopwatch(outcome.timings)
        current = "ocr"
        try:
            fingerprint = self.config.fingerprint()
            if record.handwritten:
                with stage("validate"):
                    outcome.report = validate(
                        [], [], True, self.config.criteria, record.id, fingerprint, self.postprocessing
                    )
                return outcome

            with stage("ocr"):
                tokens = self.ocr.extract(record)

            current = "classify"
            with stage("classify"):
                predictions = []
                if tokens:
                    examples = build_sequence_examples(
                        tokens,
                        record.image.width,
                        record.image.height,
                        self.config.labeling.max_sequence_length,
                        self.config.labeling.stride,
                        record.id,
                    )
                    predictions = predict_tokens(self.layout, examples, record.image)
                gold = assign_labels(tokens, record.annotations, self.config.labeling.overlap_threshold)
                outcome.predicted = [p.label for p in predictions]
                outcome.gold = [g.label for g in gold]

            current = "detect"
            with stage("detect"):
                outcome.detections = detect(
                    self.detector,
                    record.image,
                    record.id,
                    self.config.detection.score_threshold,
                    self.config.detection.nms_iou_threshold,
                )

            current = "validate"
            with stage("validate"):
                outcome.report = validate(
                    predictions,
                    outcome.detections,
                    False,
                    self.config.criteria,
                    record.id,
                    fingerprint,
                    self.postprocessing,
                )
        except (InvoiceValidationError, OSError, ValueError) as e:
            logger.error("Échec du document %s (%s): %s", record.id, current, e)
            outcome.failure = DocumentFailure(record.id, current, type(e).__name__, str(e))
            outcome.report = None
        except Exception as e:
            logger.exception("Erreur inattendue pour %s (%s)", record.id, current)
            outcome.failure = DocumentFailure(record.id, current, type(e).__name__, str(e))
            outcome.report = None
        return outcome

    def run(self, jobs: int | None = None) -> PipelineResult:
        """
        Traite tous les documents du manifeste.

        Args:
            jobs: Nombre de workers (défaut : config.jobs ou nombre de CPU)

        Returns:
            Résultat du run
        """
        workers = jobs or self.config.jobs or os.cpu_count() or 1
        started = time.perf_counter()
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = sorted(pool.map(self.process, self.manifest), key=lambda o: o.document_id)

        reports = tuple(o.report for o in outcomes if o.report is not None)
        failures = tuple(o.failure for o in outcomes if o.failure is not None)
        evaluated = [o for o in outcomes if o.report is not None and o.report.verdict is not Verdict.UNSUPPORTED]

        token_eval = None
        detection_eval = None
        if evaluated:
            token_eval = precision_recall_f1(
                [label for o in evaluated for label in o.predicted],
                [label for o in evaluated for label in o.gold],
            )
            detection_eval = mean_ap(
                {o.document_id: o.detections for o in evaluated},
                {o.document_id: o.annotations for o in evaluated},
            )

        timings: dict[str, float] = defaultdict(float)
        for o in outcomes:
            for name, seconds in o.timings.items():
                timings[name] += seconds
        run_info = {
            "config_fingerprint": self.config.fingerprint(),
            "seed": self.config.seed,
            "split": self.manifest.split.value,
            "documents": len(outcomes),
            "jobs": workers,
            "versions": library_versions(),
            "timings": {k: round(v, 6) for k, v in sorted(timings.items())},
            "wall_clock": round(time.perf_counter() - started, 6),
            "failures": [f.to_dict() for f in failures],
        }
        logger.info(
            "%d document(s) traité(s), %d échec(s) en %.2fs",
            len(outcomes),
            len(failures),
            run_info["wall_clock"],
        )
        return PipelineResult(reports, failures, token_eval, detection_eval, run_info)


def run_pipeline(
    config: PipelineConfig,
    manifest: DatasetManifest,
    manifest_dir: str | Path = ".",
    out_dir: str | Path | None = None,
) -> PipelineResult:
    """
    Exécute le pipeline et écrit les sorties.

    Sorties : <out>/reports/<id>.json, <out>/run.json, <out>/summary.json.

    Args:
        config: Configuration validée
        manifest: Documents à traiter
        manifest_dir: Dossier du manifeste
        out_dir: Dossier de sortie (défaut : config.output_dir)

    Returns:
        Résultat du run
    """
    result = PipelineService(config, manifest, manifest_dir).run()
    repository = ReportRepository(out_dir or config.output_dir)
    repository.save_all(result.reports)
    repository.write_run(result.run_info)
    repository.write_summary(result.summary())
    return result


