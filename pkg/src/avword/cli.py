"""Command-line surface for the recognition pipeline.

Subcommands cover the whole loop: `synth` writes a synthetic corpus,
`extract` turns manifest records into feature vectors, `train` fits the
eigenspace on the training split, `evaluate` scores the test split, and
`print-config` emits every tunable with its default. All file outputs
are written atomically; exit status is 0 only when nothing failed.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import classifier, dataset, featio, mfcc, pca, roi, zernike
from .config import PipelineConfig, dumps, load_config


class CliError(Exception):
    """User-facing failure; printed as a message, not a traceback."""


def _components_arg(text: str):
    if text == "all":
        return "all"
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected 'all' or an integer, got {text!r}"
        ) from None


def _pipeline_config(args) -> PipelineConfig:
    """Config file first, then flag overrides."""
    cfg = load_config(args.config) if getattr(args, "config", None) else PipelineConfig()
    if getattr(args, "seed", None) is not None:
        cfg.split.seed = args.seed
    if getattr(args, "components", None) is not None:
        cfg.pca_components = args.components
    cfg.validate()
    return cfg


def _visual_features(record, cfg: PipelineConfig) -> np.ndarray:
    frames = roi.read_frame_sequence(record.frames_dir)
    height, width = frames[0].shape[:2]
    box = record.mouth_box or roi.full_frame_box(width, height)
    if cfg.roi.feature_source == "binary":
        masks = [roi.preprocess_frame(f, box, cfg.roi) for f in frames]
    else:
        masks = [roi.preprocess_frame_gray(f, box, cfg.roi) for f in frames]
    return zernike.sequence_features(masks, cfg.zernike)


def _audio_features(record, cfg: PipelineConfig) -> np.ndarray:
    rate, signal = mfcc.read_wav(record.audio_path)
    return mfcc.sequence_features(signal, rate, cfg.mfcc)


def cmd_extract(args) -> int:
    cfg = _pipeline_config(args)
    records = dataset.load_manifest(args.manifest, check_paths=False)
    visual = args.modality == "visual"
    dim = (
        len(cfg.zernike.indices) * cfg.zernike.n_frames
        if visual
        else cfg.mfcc.feature_dim()
    )
    ids, rows, labels = [], [], []
    skipped, failed = [], []
    for record in records:
        source = record.frames_dir if visual else record.audio_path
        if source is None:
            skipped.append(record.id)
            continue
        try:
            vector = _visual_features(record, cfg) if visual else _audio_features(record, cfg)
        except Exception as err:
            failed.append(f"{record.id}: {err}")
            continue
        ids.append(record.id)
        rows.append(vector)
        labels.append(record.label)
    matrix = np.vstack(rows) if rows else np.zeros((0, dim))
    featio.write_features_csv(args.out, ids, matrix, labels)
    for rec_id in skipped:
        print(f"avword extract: skipped {rec_id}: no {args.modality} media", file=sys.stderr)
    for message in failed:
        print(f"avword extract: failed {message}", file=sys.stderr)
    print(
        f"extracted {len(ids)} of {len(records)} records"
        f" (dim {matrix.shape[1]}) -> {args.out}"
    )
    return 1 if failed else 0


def cmd_train(args) -> int:
    cfg = _pipeline_config(args)
    ids, matrix, labels = featio.read_features_csv(args.features)
    records = dataset.load_manifest(args.manifest, check_paths=False)
    train_records, _ = dataset.split_records(records, cfg.split)
    train_ids = {r.id for r in train_records}
    keep = [i for i, rec_id in enumerate(ids) if rec_id in train_ids]
    if len(keep) < 2:
        raise CliError(
            f"{args.features}: {len(keep)} training vectors in the split; need at least 2"
        )
    model = pca.fit(matrix[keep].T, [labels[i] for i in keep], cfg.pca_components)
    if model.n_components == 0:
        print(
            "avword train: warning: 0 components kept;"
            " matching will use distance from the training mean",
            file=sys.stderr,
        )
    pca.save_model(args.out, model)
    featio.atomic_write_text(
        Path(f"{args.out}.eigenvalues.csv"), pca.eigenvalues_csv(model)
    )
    print(
        f"trained on {len(keep)} vectors (dim {model.dim}),"
        f" kept {model.n_components} components -> {args.out}"
    )
    return 0


def cmd_evaluate(args) -> int:
    cfg = _pipeline_config(args)
    ids, matrix, labels = featio.read_features_csv(args.features)
    model = pca.load_model(args.model)
    if matrix.shape[1] != model.dim:
        raise CliError(
            f"{args.features}: feature dim {matrix.shape[1]}"
            f" does not match dim {model.dim} of model {args.model}"
        )
    records = dataset.load_manifest(args.manifest, check_paths=False)
    _, test_records = dataset.split_records(records, cfg.split)
    test_ids = {r.id for r in test_records}
    keep = [i for i, rec_id in enumerate(ids) if rec_id in test_ids]
    predictions = [classifier.classify(matrix[i], model) for i in keep]
    truths = [labels[i] for i in keep]
    classes = sorted(set(model.labels) | set(truths))
    cm = classifier.evaluate(predictions, truths, classes)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    featio.atomic_write_text(out / "confusion.csv", classifier.confusion_csv(cm))
    featio.atomic_write_text(out / "confusion.txt", classifier.confusion_table(cm))
    featio.atomic_write_text(out / "metrics.csv", classifier.metrics_csv(cm))
    correct, total = cm.overall()
    print(
        f"{Path(args.features).stem}: overall accuracy"
        f" {classifier.format_percent(correct, total)} ({correct}/{total})"
    )
    return 0


def cmd_synth(args) -> int:
    manifest = dataset.synth_corpus(
        args.out,
        n_classes=args.classes,
        n_per_class=args.per_class,
        seed=args.seed,
        noise_level=args.noise,
    )
    print(manifest)
    return 0


def cmd_print_config(args) -> int:
    cfg = load_config(args.config) if args.config else PipelineConfig()
    text = dumps(cfg)
    if args.out:
        featio.atomic_write_text(args.out, text)
    else:
        print(text, end="")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="avword",
        description="Isolated-word recognition from lip shapes and audio.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic audio-visual corpus")
    p.add_argument("--out", required=True, type=Path, help="corpus directory")
    p.add_argument("--classes", type=int, default=12)
    p.add_argument("--per-class", dest="per_class", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise", type=float, default=0.0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("extract", help="compute one feature vector per utterance")
    p.add_argument("--manifest", required=True, type=Path)
    p.add_argument("--modality", required=True, choices=("visual", "audio"))
    p.add_argument("--out", required=True, type=Path, help="feature CSV path")
    p.add_argument("--config", type=Path)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train", help="fit the eigenspace on the training split")
    p.add_argument("features", type=Path, help="feature CSV from extract")
    p.add_argument("--manifest", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path, help="model file path")
    p.add_argument("--config", type=Path)
    p.add_argument("--seed", type=int, help="overrides split.seed")
    p.add_argument(
        "--components", type=_components_arg, help="overrides pca.components"
    )
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="classify the test split and write metrics")
    p.add_argument("features", type=Path, help="feature CSV from extract")
    p.add_argument("--model", required=True, type=Path)
    p.add_argument("--manifest", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path, help="metrics directory")
    p.add_argument("--config", type=Path)
    p.add_argument("--seed", type=int, help="overrides split.seed")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("print-config", help="emit the full configuration")
    p.add_argument("--config", type=Path, help="echo this file instead of defaults")
    p.add_argument("--out", type=Path, help="write to a file instead of stdout")
    p.set_defaults(func=cmd_print_config)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as err:
        print(f"avword {args.command}: error: {err}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as err:
        print(f"avword {args.command}: error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
