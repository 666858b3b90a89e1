"""``mgtdetect`` command line: stats, train, eval, predict, presets.

Exit codes: 0 success, 1 usage error, 2 data or model error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import warnings
from pathlib import Path
from typing import Optional, Sequence

from mgtdetect.corpus import CorpusError, LabelScheme, compute_stats, load_jsonl
from mgtdetect.evaluate import evaluate
from mgtdetect.features import EmbeddingError
from mgtdetect.persist import ModelFormatError
from mgtdetect.pipeline import (
    DEFAULT_SEED,
    PRESETS,
    PipelineConfig,
    load_pipeline,
    pipeline_fit,
    pipeline_predict,
    preset,
    save_pipeline,
)

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2

log = logging.getLogger("mgtdetect")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _common(p: argparse.ArgumentParser, *names: str) -> None:
    if "scheme" in names:
        p.add_argument("--scheme", choices=["a", "b"], help="label scheme: a (binary) or b (six-way)")
    if "preprocess" in names:
        p.add_argument("--preprocess", choices=["none", "v1", "v2"], help="cleaning regime")
    if "config" in names:
        p.add_argument("--config", help="pipeline config JSON")
    if "model" in names:
        p.add_argument("--model", required=True, help="fitted model file (.mgtd)")
    if "seed" in names:
        p.add_argument("--seed", type=_seed, help=f"random seed (default {DEFAULT_SEED})")
    if "out" in names:
        p.add_argument("--out", help="output path")
    if "embeddings" in names:
        p.add_argument("--embeddings", help="pretrained word vectors in text format")


def _seed(value: str) -> int:
    try:
        seed = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {value!r}") from None
    if not 0 <= seed < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return seed


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mgtdetect", description="Detect machine-generated text.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("stats", help="print corpus statistics as JSON")
    p.add_argument("data", help="JSONL file")
    _common(p, "scheme", "out")

    p = sub.add_parser("train", help="fit a pipeline and write a model file")
    p.add_argument("data", help="labelled training JSONL")
    p.add_argument("--preset", choices=PRESETS, help="named configuration")
    _common(p, "scheme", "preprocess", "config", "seed", "out", "embeddings")

    p = sub.add_parser("eval", help="score a model on labelled JSONL and write metrics.json")
    p.add_argument("data", help="labelled JSONL")
    _common(p, "scheme", "model", "out", "embeddings")

    p = sub.add_parser("predict", help="write one 'id<TAB>label' line per document")
    p.add_argument("data", help="JSONL file")
    p.add_argument("--labels-as-names", action="store_true", help="emit class names instead of ids")
    _common(p, "scheme", "model", "out", "embeddings")

    sub.add_parser("presets", help="list preset names")
    return parser


def _threads() -> int:
    raw = os.environ.get("MGTDETECT_THREADS", "1").strip() or "1"
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"MGTDETECT_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise UsageError("MGTDETECT_THREADS must be >= 0")
    return n if n > 0 else (os.cpu_count() or 1)


def _model_scheme_check(fp, args) -> LabelScheme:
    if args.scheme is not None and LabelScheme.from_name(args.scheme) != fp.scheme:
        raise ValueError(
            f"--scheme {args.scheme} does not match the model's scheme {fp.scheme.kind.value}"
        )
    return fp.scheme


def cmd_stats(args) -> int:
    ds = load_jsonl(args.data, LabelScheme.from_name(args.scheme or "a"))
    text = json.dumps(compute_stats(ds).to_dict(), indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_train(args) -> int:
    if args.preset and args.config:
        raise UsageError("train: give either --preset or --config, not both")
    if not args.preset and not args.config:
        raise UsageError("train: one of --preset or --config is required")
    seed = args.seed if args.seed is not None else None
    if args.preset:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore" if args.embeddings else "default")
            cfg = preset(args.preset, embeddings=args.embeddings)
        cfg = cfg.with_overrides(scheme=args.scheme, preprocess=args.preprocess, seed=seed)
    else:
        cfg = PipelineConfig.from_json(args.config).with_overrides(
            scheme=args.scheme, preprocess=args.preprocess, seed=seed, embeddings=args.embeddings
        )
    out = args.out or "model.mgtd"
    print(
        f"mgtdetect train: seed={cfg.seed} scheme={cfg.scheme.kind.value} "
        f"preprocess={cfg.preprocess.value} model={cfg.model.type}",
        file=sys.stderr,
    )
    ds = load_jsonl(args.data, cfg.scheme)
    fp = pipeline_fit(cfg, ds, n_jobs=_threads())
    save_pipeline(fp, out)
    print(f"wrote {out}", file=sys.stderr)
    return EXIT_OK


def cmd_eval(args) -> int:
    fp = load_pipeline(args.model, embeddings=args.embeddings)
    scheme = _model_scheme_check(fp, args)
    print(f"mgtdetect eval: seed={fp.config.seed} scheme={scheme.kind.value}", file=sys.stderr)
    ds = load_jsonl(args.data, scheme)
    metrics = evaluate(fp, ds)
    out = args.out or "metrics.json"
    Path(out).write_text(metrics.to_json(), encoding="utf-8")
    sys.stdout.write(metrics.report(title=f"{Path(args.data).name}"))
    print(f"wrote {out}", file=sys.stderr)
    return EXIT_OK


def cmd_predict(args) -> int:
    fp = load_pipeline(args.model, embeddings=args.embeddings)
    scheme = _model_scheme_check(fp, args)
    ds = load_jsonl(args.data, scheme)
    preds = pipeline_predict(fp, ds.texts)
    lines = []
    for doc, pred in zip(ds.documents, preds):
        label = scheme.class_names[pred] if args.labels_as_names else str(pred)
        lines.append(f"{doc.id}\t{label}\n")
    text = "".join(lines)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_presets(args) -> int:
    for name in PRESETS:
        print(name)
    return EXIT_OK


COMMANDS = {
    "stats": cmd_stats,
    "train": cmd_train,
    "eval": cmd_eval,
    "predict": cmd_predict,
    "presets": cmd_presets,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("mgtdetect: a subcommand is required (stats, train, eval, predict, presets)")
        logging.basicConfig(
            level=logging.INFO if args.verbose else logging.WARNING,
            format="%(levelname)s %(name)s: %(message)s",
        )
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    except (CorpusError, EmbeddingError, ModelFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
