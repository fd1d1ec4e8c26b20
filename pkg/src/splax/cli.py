"""Command-line entry point.

Subcommands: predict, evaluate, gridsearch, features, llm-eval. Exit codes:
0 success, 1 internal error, 2 input/environment error, 3 validation error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .backend import HttpScoringClient
from .chunker import build_features
from .config import RunConfig
from .data import parse_predictions, parse_squad, write_predictions
from .errors import (
    BackendUnavailableError,
    ConfigError,
    ParseError,
    ProtocolError,
    SplaxError,
    ValidationError,
)
from .gridsearch import GridSpec, emit_heatmap, run_grid
from .llm import (
    ChatCompletionClient,
    api_key_from_env,
    load_few_shot_messages,
    run_llm_eval,
    write_records,
)
from .metrics import evaluate
from .pipeline import derive_vocab, predict
from .tokenizer import load_vocab, tokenize_with_offsets

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_INPUT = 2
EXIT_VALIDATION = 3


def _int_list(raw: str) -> list[int]:
    try:
        return [int(part) for part in raw.split(",") if part.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {raw!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="splax", description="Extractive QA over long texts via overlapping context windows."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="INI config file; flags override its values")
        p.add_argument("--jobs", type=int, help="worker bound passed down to backends")

    def add_chunking(p):
        p.add_argument("--length", type=int, help="context tokens per window")
        p.add_argument("--overlap", type=int, help="tokens shared by consecutive windows")
        p.add_argument("--max-len", type=int, dest="model_max_len", help="total model input length")
        p.add_argument("--max-question-tokens", type=int)

    def add_backend(p):
        p.add_argument("--backend", dest="backend_kind", choices=("oracle", "lexical", "http"))
        p.add_argument("--endpoint", dest="backend_endpoint", help="http backend URL")
        p.add_argument("--batch-size", type=int, dest="backend_batch_size")
        p.add_argument("--timeout", type=float, dest="backend_timeout")
        p.add_argument("--retries", type=int, dest="backend_retries")

    p = sub.add_parser("predict", help="run the span-prediction pipeline over a dataset")
    add_common(p)
    add_chunking(p)
    add_backend(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--vocab", help="vocab.txt; omitted = derive a whole-word vocab from the dataset")
    p.add_argument("--max-answer-tokens", type=int, dest="max_answer_tokens")
    p.add_argument("--n-best", type=int, dest="n_best")
    p.add_argument("--score-mode", dest="score_mode", choices=("raw", "normalized"))
    p.add_argument("--out", required=True, help="predictions JSON path")
    p.add_argument("--manifest", help="run manifest JSON path (default: <out>.manifest.json)")

    p = sub.add_parser("evaluate", help="score a predictions file against a dataset")
    add_common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--predictions", required=True)
    p.add_argument("--strict", action="store_true", help="fail when any prediction is missing")
    p.add_argument("--per-question", help="optional per-question TSV output path")

    p = sub.add_parser("features", help="emit model-ready features as JSON lines")
    add_common(p)
    add_chunking(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--vocab")
    p.add_argument("--with-labels", action="store_true")
    p.add_argument("--out", help="output JSONL path (default: stdout)")

    p = sub.add_parser("gridsearch", help="sweep segment length x overlap over a dataset")
    add_common(p)
    add_backend(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--vocab")
    p.add_argument("--lengths", type=_int_list, help="comma-separated segment lengths")
    p.add_argument("--overlaps", type=_int_list, help="comma-separated overlaps")
    p.add_argument("--max-len", type=int, dest="model_max_len")
    p.add_argument("--max-question-tokens", type=int)
    p.add_argument("--out", required=True, help="grid CSV path (also the resume checkpoint)")
    p.add_argument("--heatmap", help="optional heatmap SVG path")
    p.add_argument("--metric", choices=("em", "f1"), default="em")
    p.add_argument("--no-resume", action="store_true")
    p.add_argument("--parallel", type=int, default=1,
                   help="grid points to run concurrently (default 1: fair wall times)")

    p = sub.add_parser("llm-eval", help="run the chat-model baseline over a dataset")
    add_common(p)
    p.add_argument("--mode", choices=("direct", "chain"), default="direct")
    p.add_argument("--endpoint", dest="llm_endpoint", required=True)
    p.add_argument("--model", dest="llm_model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True, help="predictions JSON path")
    p.add_argument("--records", help="per-question records JSONL path")
    p.add_argument("--few-shot", dest="llm_few_shot_file",
                   help="JSON array of exemplar chat messages prepended to every call")
    return parser


def _overrides_from_args(args: argparse.Namespace) -> dict:
    keys = (
        "length",
        "overlap",
        "model_max_len",
        "max_question_tokens",
        "max_answer_tokens",
        "n_best",
        "score_mode",
        "backend_kind",
        "backend_endpoint",
        "backend_batch_size",
        "backend_timeout",
        "backend_retries",
        "llm_endpoint",
        "llm_model",
        "llm_few_shot_file",
        "jobs",
    )
    out = {k: getattr(args, k) for k in keys if hasattr(args, k)}
    if getattr(args, "mode", None):
        out["llm_mode"] = args.mode
    return out


def _load_config(args: argparse.Namespace) -> RunConfig:
    return RunConfig.load(config_file=args.config, overrides=_overrides_from_args(args))


def _load_vocab_and_examples(args, cfg):
    examples = parse_squad(args.dataset)
    if getattr(args, "vocab", None):
        vocab = load_vocab(args.vocab)
    else:
        vocab = derive_vocab(examples)
    return examples, vocab


def _check_backend(cfg: RunConfig) -> None:
    descriptor = cfg.backend_descriptor()
    if descriptor.kind == "http" and not HttpScoringClient(descriptor).healthy():
        raise BackendUnavailableError(f"backend unavailable: {descriptor.endpoint}")


def cmd_predict(args) -> int:
    cfg = _load_config(args)
    chunk_cfg = cfg.chunk_config()  # validate before any work
    extraction_cfg = cfg.extraction_config()
    backend = cfg.backend_descriptor()
    examples, vocab = _load_vocab_and_examples(args, cfg)
    _check_backend(cfg)

    started = time.perf_counter()
    preds, stats = predict(examples, vocab, chunk_cfg, backend, extraction_cfg)
    wall = time.perf_counter() - started
    write_predictions(preds, args.out)
    manifest = {
        "config": cfg.snapshot(),
        "dataset": str(args.dataset),
        "vocab": str(args.vocab) if args.vocab else "derived-from-dataset",
        "backend_kind": backend.kind,
        "chunk_stats": stats.to_json_dict(),
        "wall_time_s": wall,
        "predictions": str(args.out),
    }
    manifest_path = args.manifest or f"{args.out}.manifest.json"
    Path(manifest_path).write_text(json.dumps(manifest, indent=2), encoding="utf-8")
    print(f"wrote {len(preds)} predictions to {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    examples = parse_squad(args.dataset)
    preds = parse_predictions(args.predictions)
    report = evaluate(examples, preds, strict=args.strict)
    print(json.dumps(report.to_json_dict()))
    if args.per_question:
        with Path(args.per_question).open("w", encoding="utf-8") as fh:
            fh.write("qid\tem\tf1\n")
            for qid, (em, f1) in report.per_question.items():
                fh.write(f"{qid}\t{em}\t{f1:.6f}\n")
    return EXIT_OK


def cmd_features(args) -> int:
    cfg = _load_config(args)
    chunk_cfg = cfg.chunk_config()
    examples, vocab = _load_vocab_and_examples(args, cfg)
    sink = Path(args.out).open("w", encoding="utf-8") if args.out else sys.stdout
    try:
        for ex in examples:
            tc = tokenize_with_offsets(ex.context, vocab)
            for feature in build_features(ex, tc, chunk_cfg, vocab, with_labels=args.with_labels):
                sink.write(json.dumps(feature.to_json_dict()) + "\n")
    finally:
        if args.out:
            sink.close()
    return EXIT_OK


def cmd_gridsearch(args) -> int:
    cfg = _load_config(args)
    spec = GridSpec(
        lengths=tuple(args.lengths) if args.lengths else GridSpec.lengths,
        overlaps=tuple(args.overlaps) if args.overlaps else GridSpec.overlaps,
        backend=cfg.backend_descriptor(),
        model_max_len=cfg.model_max_len,
        max_question_tokens=cfg.max_question_tokens,
        extraction=cfg.extraction_config(),
    )
    examples, vocab = _load_vocab_and_examples(args, cfg)
    _check_backend(cfg)
    result = run_grid(
        spec, examples, vocab, out_csv=args.out, resume=not args.no_resume,
        max_parallel=args.parallel,
    )
    if args.heatmap:
        emit_heatmap(result, args.metric, args.heatmap)
    print(f"completed {len(result.rows)} grid points -> {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_llm_eval(args) -> int:
    cfg = _load_config(args)
    examples = parse_squad(args.dataset)
    few_shot = load_few_shot_messages(cfg.llm_few_shot_file) if cfg.llm_few_shot_file else None
    client = ChatCompletionClient(
        cfg.llm_endpoint,
        cfg.llm_model,
        api_key=api_key_from_env(),
        timeout=cfg.llm_timeout,
        few_shot_messages=few_shot,
    )
    preds, records = run_llm_eval(examples, client, cfg.llm_mode, max_in_flight=cfg.llm_max_in_flight)
    write_predictions(preds, args.out)
    if args.records:
        write_records(records, args.records)
    violations = sum(1 for r in records if r.format_violation)
    print(
        f"wrote {len(preds)} predictions ({violations}/{len(records)} format violations)",
        file=sys.stderr,
    )
    return EXIT_OK


_COMMANDS = {
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
    "features": cmd_features,
    "gridsearch": cmd_gridsearch,
    "llm-eval": cmd_llm_eval,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (FileNotFoundError, ParseError, BackendUnavailableError, ProtocolError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValidationError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SplaxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
