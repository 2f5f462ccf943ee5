"""
Interface en ligne de commande.

Chaque sous-commande lit et écrit des fichiers JSON documentés, de sorte
que les étapes se composent par fichiers. Codes de sortie : 0 succès,
1 échec d'au moins un document, 2 erreur de configuration.
"""

import argparse
import json
import logging
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from .clients.ocr_engines import RecordedOcrEngine
from .clients.ocr_parsers import format_local_engine_output
from .config import PipelineConfig, load_config
from .exceptions import BackendConfigError, ConfigurationError, InvoiceValidationError, ManifestError
from .models.document import DatasetManifest, FieldClass
from .repositories.manifest_repository import ManifestRepository
from .repositories.report_repository import write_json
from .services.augmentation_service import AugmentationService
from .services.fixture_service import FixtureOptions, synth_fixture
from .services.labeling_service import (
    assign_labels,
    build_sequence_examples,
    count_label_instances,
    write_json_lines,
)
from .services.metrics_service import render_detection_table, render_token_table
from .services.ocr_service import OcrService, build_engine
from .services.pipeline_service import PipelineService, run_pipeline
from .services.statistics_service import (
    INSTANCE_COLUMNS,
    class_distribution,
    imbalance_summary,
    instance_table_csv,
    plot_class_distribution,
    render_instance_table,
)
from .services.training_export import TRACKS, write_training_config
from .services.validation_service import explain

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DOCUMENT_FAILURES = 1
EXIT_CONFIG = 2


# ==================== PARSING DES OPTIONS ====================


def _class_list(value: str) -> frozenset[FieldClass]:
    try:
        return frozenset(FieldClass(v.strip()) for v in value.split(",") if v.strip())
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from e


def _omit(value: str) -> tuple[int, frozenset[FieldClass]]:
    """Format "<rang>:<Classe>[,<Classe>...]", ex: "3:Stamp,Signature"."""
    index, sep, classes = value.partition(":")
    if not sep:
        raise argparse.ArgumentTypeError(f"Format attendu <rang>:<Classe,...>: {value!r}")
    try:
        return int(index), _class_list(classes)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from e


def _skew(value: str) -> tuple[int, float]:
    """Format "<rang>:<angle>", ex: "2:7.5"."""
    index, sep, angle = value.partition(":")
    try:
        if not sep:
            raise ValueError(value)
        return int(index), float(angle)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"Format attendu <rang>:<angle>: {value!r}") from e


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="Fichier de configuration JSON")
    common.add_argument("--seed", type=int, help="Graine maître (prioritaire sur le fichier)")
    common.add_argument("--backend", help="Backend des deux modèles: mock | onnx:<chemin>")
    common.add_argument("--layout-backend", help="Backend du modèle de mise en page")
    common.add_argument("--detector-backend", help="Backend du détecteur")
    common.add_argument("--out", type=Path, help="Dossier de sortie")
    common.add_argument("--jobs", type=int, help="Nombre de workers")
    common.add_argument("-v", "--verbose", action="store_true", help="Journalisation DEBUG")
    return common


def build_parser() -> argparse.ArgumentParser:
    """Construit le parseur et ses sous-commandes."""
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="invoicevalidator",
        description="Validation automatique de factures: OCR, champs, tampons et signatures.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    synth = commands.add_parser("synth", parents=[common], help="Génère des factures synthétiques")
    synth.add_argument("--docs", type=int, default=10, help="Nombre de documents")
    synth.add_argument("--omit", type=_omit, action="append", default=[], help="<rang>:<Classe,...>")
    synth.add_argument("--handwritten", type=int, action="append", default=[], help="Rang manuscrit")
    synth.add_argument("--skew", type=_skew, action="append", default=[], help="<rang>:<angle>")
    synth.add_argument("--blur", type=int, action="append", default=[], help="Rang flouté")

    augment = commands.add_parser("augment", parents=[common], help="Augmente un manifeste")
    augment.add_argument("manifest", type=Path)
    augment.add_argument("--track", choices=("keyword", "detection"), default="keyword")

    ocr = commands.add_parser("ocr", parents=[common], help="Extrait les tokens OCR")
    ocr.add_argument("manifest", type=Path)
    ocr.add_argument("--compare", type=Path, help="Dossier de sorties TSV de référence")

    label = commands.add_parser("label", parents=[common], help="Étiquette les tokens et encode les séquences")
    label.add_argument("manifest", type=Path)

    stats = commands.add_parser("stats", parents=[common], help="Statistiques du jeu de données")
    stats.add_argument("manifest", type=Path, nargs="?")
    stats.add_argument("--counts", type=Path, help="Comptes d'instances par moteur OCR (JSON)")
    stats.add_argument("--format", choices=("text", "csv"), default="text")
    stats.add_argument("--plot", type=Path, help="Diagramme PNG de la distribution des classes")

    for name, help_text in (
        ("eval-tokens", "Évalue la classification des tokens"),
        ("eval-detect", "Évalue la détection des tampons et signatures"),
        ("validate", "Valide chaque document du manifeste"),
    ):
        sub = commands.add_parser(name, parents=[common], help=help_text)
        sub.add_argument("manifest", type=Path)

    export = commands.add_parser(
        "export-train-config", parents=[common], help="Exporte les hyperparamètres d'entraînement"
    )
    export.add_argument("--track", required=True, help=f"Piste: {' | '.join(TRACKS)}")
    return parser


# ==================== CONFIGURATION ====================


def resolve_config(args: argparse.Namespace) -> PipelineConfig:
    """
    Configuration effective : défauts < fichier < options.

    Raises:
        ConfigurationError: Fichier ou valeur invalide
    """
    config = load_config(args.config)
    return config.with_overrides(
        seed=args.seed,
        layout_backend=args.layout_backend or args.backend,
        detector_backend=args.detector_backend or args.backend,
        output_dir=str(args.out) if args.out is not None else None,
        jobs=args.jobs,
    )


def _load_manifest(path: Path) -> DatasetManifest:
    return ManifestRepository(path).load()


def _print_json(payload: Any) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


# ==================== SOUS-COMMANDES ====================


def cmd_synth(args: argparse.Namespace, config: PipelineConfig) -> int:
    options = FixtureOptions(
        omit=dict(args.omit),
        handwritten=frozenset(args.handwritten),
        skew=dict(args.skew),
        blur=frozenset(args.blur),
    )
    result = synth_fixture(config.seed, args.docs, config.output_dir, options)
    print(f"{len(result.manifest)} document(s) -> {result.manifest_path}")
    return EXIT_OK


def cmd_augment(args: argparse.Namespace, config: PipelineConfig) -> int:
    manifest = _load_manifest(args.manifest)
    service = AugmentationService(
        config.keyword_augmentation, config.detection_augmentation, config.jobs or 1
    )
    results = service.augment_manifest(manifest, args.track, config.seed)
    out_dir = Path(config.output_dir)
    augmented = DatasetManifest(manifest.split, tuple(r.record for r in results))
    path = ManifestRepository(out_dir / "manifest.json", manifest.split).write(augmented)
    write_json(
        out_dir / "augmentation.json",
        {
            "seed": config.seed,
            "track": args.track,
            "documents": [
                {
                    "id": r.record.id,
                    "ops": [{"name": op.name, "params": op.params} for op in r.trace],
                    "guard_triggered": r.guard_triggered,
                }
                for r in results
            ],
        },
    )
    print(f"{len(augmented)} document(s) augmenté(s) -> {path}")
    return EXIT_OK


def cmd_ocr(args: argparse.Namespace, config: PipelineConfig) -> int:
    manifest = _load_manifest(args.manifest)
    service = OcrService(build_engine(config.ocr, args.manifest.parent / "ocr"))
    out_dir = Path(config.output_dir) / "ocr"
    out_dir.mkdir(parents=True, exist_ok=True)

    extracted = {}
    failures = 0
    for record in manifest:
        try:
            extracted[record.id] = service.extract(record)
        except (InvoiceValidationError, OSError) as e:
            logger.error("OCR impossible pour %s: %s", record.id, e)
            failures += 1
            continue
        (out_dir / f"{record.id}.tsv").write_text(
            format_local_engine_output(extracted[record.id]), encoding="utf-8"
        )

    if args.compare is not None:
        reference_engine = OcrService(RecordedOcrEngine(args.compare, "tesseract"))
        reference = {r.id: reference_engine.extract(r) for r in manifest}
        comparison = OcrService.compare(extracted, reference)
        write_json(Path(config.output_dir) / "ocr_comparison.json", comparison.to_dict())
        _print_json(comparison.to_dict())
    return EXIT_DOCUMENT_FAILURES if failures else EXIT_OK


def cmd_label(args: argparse.Namespace, config: PipelineConfig) -> int:
    manifest = _load_manifest(args.manifest)
    service = OcrService(build_engine(config.ocr, args.manifest.parent / "ocr"))
    examples, labeled = [], []
    for record in manifest:
        if record.handwritten:
            continue
        tokens = service.extract(record)
        gold = assign_labels(tokens, record.annotations, config.labeling.overlap_threshold)
        labeled.append(gold)
        if not tokens:
            continue
        examples.extend(
            build_sequence_examples(
                gold,
                record.image.width,
                record.image.height,
                config.labeling.max_sequence_length,
                config.labeling.stride,
                record.id,
            )
        )
    out_dir = Path(config.output_dir)
    written = write_json_lines(examples, out_dir / "sequences.jsonl")
    counts = count_label_instances(labeled)
    write_json(out_dir / "label_counts.json", {c.value: n for c, n in counts.items()})
    print(f"{written} séquence(s) -> {out_dir / 'sequences.jsonl'}")
    return EXIT_OK


def _parse_counts(path: Path) -> dict[str, dict[FieldClass, int]]:
    aliases = {label: cls for label, cls in INSTANCE_COLUMNS}
    aliases.update({c.value: c for c in FieldClass})
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
        return {
            engine: {aliases[key]: int(value) for key, value in counts.items()}
            for engine, counts in data.items()
        }
    except (OSError, json.JSONDecodeError, KeyError, AttributeError, TypeError, ValueError) as e:
        raise ConfigurationError(f"Fichier de comptes invalide {path}: {e}") from e


def cmd_stats(args: argparse.Namespace, config: PipelineConfig) -> int:
    rows: dict[str, dict[FieldClass, int]] = {}
    if args.counts is not None:
        rows.update(_parse_counts(args.counts))

    if args.manifest is not None:
        manifest = _load_manifest(args.manifest)
        distribution = class_distribution(manifest)
        service = OcrService(build_engine(config.ocr, args.manifest.parent / "ocr"))
        labeled = [
            assign_labels(service.extract(r), r.annotations, config.labeling.overlap_threshold)
            for r in manifest
            if not r.handwritten
        ]
        rows[config.ocr.engine] = count_label_instances(labeled)
        write_json(
            Path(config.output_dir) / "stats.json",
            {
                "class_distribution": {c.value: n for c, n in distribution.items()},
                "label_counts": {
                    name: {c.value: n for c, n in counts.items()} for name, counts in rows.items()
                },
                "imbalance_ratio": imbalance_summary(rows),
            },
        )
        if args.plot is not None:
            plot_class_distribution(distribution, args.plot)
    elif args.plot is not None:
        raise ConfigurationError("--plot demande un manifeste")

    if not rows:
        raise ConfigurationError("stats demande un manifeste ou --counts")
    if args.format == "csv":
        sys.stdout.write(instance_table_csv(rows))
    else:
        sys.stdout.write(render_instance_table(rows))
    return EXIT_OK


def _evaluate(args: argparse.Namespace, config: PipelineConfig):
    manifest = _load_manifest(args.manifest)
    return PipelineService(config, manifest, args.manifest.parent).run()


def cmd_eval_tokens(args: argparse.Namespace, config: PipelineConfig) -> int:
    result = _evaluate(args, config)
    if result.token_eval is None:
        logger.warning("Aucun document évaluable")
        return result.exit_code
    write_json(Path(config.output_dir) / "token_eval.json", result.token_eval.to_dict())
    print(render_token_table({config.ocr.engine: result.token_eval}))
    return result.exit_code


def cmd_eval_detect(args: argparse.Namespace, config: PipelineConfig) -> int:
    result = _evaluate(args, config)
    if result.detection_eval is None:
        logger.warning("Aucun document évaluable")
        return result.exit_code
    write_json(Path(config.output_dir) / "detection_eval.json", result.detection_eval.to_dict())
    print(render_detection_table({config.backends.detector: result.detection_eval}))
    return result.exit_code


def cmd_validate(args: argparse.Namespace, config: PipelineConfig) -> int:
    manifest = _load_manifest(args.manifest)
    result = run_pipeline(config, manifest, args.manifest.parent)
    for report in result.reports:
        print("\n".join(explain(report)))
    for failure in result.failures:
        print(f"{failure.document_id}: échec ({failure.stage}) {failure.message}")
    return result.exit_code


def cmd_export_train_config(args: argparse.Namespace, config: PipelineConfig) -> int:
    path = write_training_config(args.track, Path(config.output_dir) / f"train_{args.track}.json")
    print(path.read_text(encoding="utf-8"), end="")
    return EXIT_OK


COMMANDS = {
    "synth": cmd_synth,
    "augment": cmd_augment,
    "ocr": cmd_ocr,
    "label": cmd_label,
    "stats": cmd_stats,
    "eval-tokens": cmd_eval_tokens,
    "eval-detect": cmd_eval_detect,
    "validate": cmd_validate,
    "export-train-config": cmd_export_train_config,
}


def main(argv: Sequence[str] | None = None) -> int:
    """
    Point d'entrée de la ligne de commande.

    Args:
        argv: Arguments (défaut : sys.argv[1:])

    Returns:
        Code de sortie
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        config = resolve_config(args)
        return COMMANDS[args.command](args, config)
    except (ConfigurationError, BackendConfigError, ManifestError) as e:
        logger.error("%s", e)
        return EXIT_CONFIG
    except InvoiceValidationError as e:
        logger.error("%s", e)
        return EXIT_DOCUMENT_FAILURES
