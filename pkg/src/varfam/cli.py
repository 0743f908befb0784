"""Command-line entry point: train, induce, pipeline, serve, bench, report.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.
Primary outputs are written atomically (temp file + rename), so an
interrupted run never leaves partial files behind. ``VF_LOG`` controls log
verbosity (DEBUG/INFO/WARNING/ERROR).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

from . import __version__
from .artifacts import (
    ArtifactError,
    ConfigError,
    RunConfig,
    load_config,
    write_families_jsonl,
    write_run_metadata,
    write_summary_csv,
)
from .bench import (
    BenchmarkError,
    GeneratorSpec,
    evaluate_recovery,
    generate_corpus,
    load_truth,
    random_pairing_baseline,
)
from .embeddings import EmbeddingModel, ModelError
from .induction import InductionError
from .ingest import CorpusError, read_stats_jsonl, write_stats_jsonl
from .pipeline import run_induce, run_pipeline, run_train

logger = logging.getLogger("varfam.cli")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2

_FATAL = (ConfigError, CorpusError, ModelError, InductionError, ArtifactError, BenchmarkError)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _setup_logging() -> None:
    level = os.environ.get("VF_LOG", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    config = load_config(args.config) if args.config else RunConfig()
    if getattr(args, "mode", None):
        config.mode = args.mode
    if getattr(args, "seed", None) is not None:
        config.rng_seed = args.seed
    if getattr(args, "workers", None) is not None:
        config.workers = args.workers
    if getattr(args, "corpus", None):
        config.corpus = str(args.corpus)
    if getattr(args, "model", None):
        config.model = str(args.model)
    if getattr(args, "out", None):
        config.out = str(args.out)
    config.validate()
    return config


def build_parser() -> _Parser:
    parser = _Parser(prog="varfam", description=__doc__)
    parser.add_argument("--version", action="version", version=f"varfam {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="ingest a corpus and train the embedding model")
    train.add_argument("--config", type=Path, help="JSON config file")
    train.add_argument("--corpus", type=Path, required=True, help="JSONL corpus")
    train.add_argument("--model", type=Path, required=True, help="output model path")
    train.add_argument("--vec", type=Path, help="also export plain-text vectors here")
    train.add_argument("--seed", type=int, help="override rng_seed")
    train.add_argument("--workers", type=int, help="training worker threads")
    train.set_defaults(func=cmd_train)

    induce = sub.add_parser("induce", help="induce, score, and prune variant families")
    induce.add_argument("--config", type=Path)
    induce.add_argument("--model", type=Path, required=True, help="trained model path")
    induce.add_argument("--stats", type=Path, help="token stats (default: <model>.stats.jsonl)")
    induce.add_argument("--out", type=Path, required=True, help="output directory")
    induce.add_argument("--mode", choices=("open", "strict"))
    induce.set_defaults(func=cmd_induce)

    pipe = sub.add_parser("pipeline", help="train and induce in one invocation")
    pipe.add_argument("--config", type=Path)
    pipe.add_argument("--corpus", type=Path, required=True)
    pipe.add_argument("--out", type=Path, required=True)
    pipe.add_argument("--model", type=Path, help="also persist the trained model here")
    pipe.add_argument("--mode", choices=("open", "strict"))
    pipe.add_argument("--seed", type=int)
    pipe.add_argument("--workers", type=int)
    pipe.add_argument("--dry-run", action="store_true", help="validate config and exit")
    pipe.set_defaults(func=cmd_pipeline)

    serve = sub.add_parser("serve", help="serve families for annotation over HTTP")
    serve.add_argument("--families", type=Path, required=True, help="families JSONL")
    serve.add_argument(
        "--annotations", type=Path, default=Path("annotations.jsonl"),
        help="append-only annotation log",
    )
    serve.add_argument("--bind", default="127.0.0.1:8000", help="host:port")
    serve.add_argument("--static", type=Path, help="static frontend directory")
    serve.set_defaults(func=cmd_serve)

    bench = sub.add_parser("bench", help="synthetic corpus generation and evaluation")
    bench_sub = bench.add_subparsers(dest="bench_command", required=True)

    gen = bench_sub.add_parser("generate", help="generate a corpus with planted families")
    gen.add_argument("--out", type=Path, required=True, help="corpus JSONL path")
    gen.add_argument("--truth", type=Path, required=True, help="ground-truth JSON path")
    gen.add_argument("--families", type=int, default=20)
    gen.add_argument("--variants-min", type=int, default=3)
    gen.add_argument("--variants-max", type=int, default=5)
    gen.add_argument("--users", type=int, default=200)
    gen.add_argument("--records", type=int, default=50_000)
    gen.add_argument("--zipf", type=float, default=1.1)
    gen.add_argument("--seed", type=int, default=13)
    gen.set_defaults(func=cmd_bench_generate)

    ev = bench_sub.add_parser("evaluate", help="score recovered families against ground truth")
    ev.add_argument("--families", type=Path, required=True, help="recovered families JSONL")
    ev.add_argument("--truth", type=Path, required=True)
    ev.add_argument("--stats", type=Path, required=True, help="token stats JSONL")
    ev.add_argument("--config", type=Path)
    ev.add_argument("--baseline-pairs", type=int, default=0,
                    help="also report a random baseline with this many pairs")
    ev.set_defaults(func=cmd_bench_evaluate)

    report = sub.add_parser("report", help="render figures and aggregates for a families file")
    report.add_argument("--families", type=Path, required=True)
    report.add_argument("--out", type=Path, help="output directory (default: alongside input)")
    report.add_argument("--annotations", type=Path, help="annotation log for category figure")
    report.set_defaults(func=cmd_report)

    return parser


def cmd_train(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    outcome = run_train(config, args.corpus, workers=config.workers)
    model_path = Path(args.model)
    model_path.parent.mkdir(parents=True, exist_ok=True)
    tmp = model_path.with_name(model_path.name + ".tmp")
    outcome.model.save(tmp)
    os.replace(tmp, model_path)
    write_stats_jsonl(outcome.stats, model_path.with_name(model_path.name + ".stats.jsonl"))
    write_run_metadata(model_path.with_name(model_path.name + ".meta.json"), outcome.metadata)
    if args.vec:
        outcome.model.export_vec(args.vec)
    print(
        f"trained model: {len(outcome.model)} vocabulary tokens from "
        f"{outcome.record_count} records -> {model_path}"
    )
    return EXIT_OK


def cmd_induce(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    model = EmbeddingModel.load(args.model)
    stats_path = args.stats or args.model.with_name(args.model.name + ".stats.jsonl")
    stats = read_stats_jsonl(stats_path)
    outcome = run_induce(config, model, stats)
    out_dir = Path(args.out)
    echo = config.echo_hash()
    kept = write_families_jsonl(outcome.families, out_dir / "families.jsonl", echo)
    write_summary_csv(outcome.families, out_dir / "summary.csv")
    write_run_metadata(out_dir / "run_metadata.json", outcome.metadata)
    print(f"induced {kept} families ({config.mode} mode) -> {out_dir}")
    return EXIT_OK


def cmd_pipeline(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    if args.dry_run:
        print(json.dumps(config.echo(), indent=2, sort_keys=True))
        return EXIT_OK
    started = time.perf_counter()
    train_outcome, induce_outcome = run_pipeline(config, args.corpus, workers=config.workers)
    out_dir = Path(args.out)
    echo = config.echo_hash()
    kept = write_families_jsonl(induce_outcome.families, out_dir / "families.jsonl", echo)
    write_summary_csv(induce_outcome.families, out_dir / "summary.csv")
    induce_outcome.metadata["timing_seconds"]["total"] = round(
        time.perf_counter() - started, 3
    )
    write_run_metadata(out_dir / "run_metadata.json", induce_outcome.metadata)
    if args.model:
        model_path = Path(args.model)
        model_path.parent.mkdir(parents=True, exist_ok=True)
        tmp = model_path.with_name(model_path.name + ".tmp")
        train_outcome.model.save(tmp)
        os.replace(tmp, model_path)
        write_stats_jsonl(
            train_outcome.stats, model_path.with_name(model_path.name + ".stats.jsonl")
        )
    print(
        f"pipeline: {train_outcome.record_count} records, "
        f"{len(train_outcome.model)} vocabulary tokens, {kept} families -> {out_dir}"
    )
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .api import AnnotationStore, create_app, load_families

    families = load_families(args.families)
    store = AnnotationStore(args.annotations)
    static = args.static if args.static and Path(args.static).is_dir() else None
    app = create_app(families, store, static_dir=static)
    host, _, port = args.bind.rpartition(":")
    if not host or not port.isdigit():
        raise ConfigError(f"--bind must be host:port, got {args.bind!r}")
    print(f"serving {len(families)} families on http://{host}:{port}")
    try:
        uvicorn.run(app, host=host, port=int(port), log_level="warning")
    except SystemExit:  # uvicorn startup failure, e.g. port already in use
        print(f"varfam: error: could not serve on {args.bind}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_bench_generate(args: argparse.Namespace) -> int:
    spec = GeneratorSpec(
        num_families=args.families,
        variants_min=args.variants_min,
        variants_max=args.variants_max,
        users=args.users,
        records=args.records,
        zipf_exponent=args.zipf,
        rng_seed=args.seed,
    )
    summary = generate_corpus(spec, args.out, args.truth)
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def cmd_bench_evaluate(args: argparse.Namespace) -> int:
    from .artifacts import read_families_jsonl

    config = load_config(args.config) if args.config else RunConfig()
    truth = load_truth(args.truth)
    stats = read_stats_jsonl(args.stats)
    learnable = {
        token for token, entry in stats.items() if entry.corpus_frequency >= config.min_count
    }
    families = read_families_jsonl(args.families)
    found = [family.members for family in families]
    metrics = evaluate_recovery(found, truth, learnable)
    result = {"config": config.echo(), "recovery": metrics.as_dict()}
    if args.baseline_pairs > 0:
        baseline = random_pairing_baseline(
            args.baseline_pairs, learnable, truth, rng_seed=config.rng_seed
        )
        result["random_baseline"] = baseline.as_dict()
    print(json.dumps(result, indent=2))
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    from .report import write_report

    out_dir = args.out or Path(args.families).parent
    written = write_report(args.families, out_dir, annotations_path=args.annotations)
    for path in written:
        print(path)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse --help/--version or usage error
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _FATAL as exc:
        print(f"varfam: error: {exc}", file=sys.stderr)
        usage_errors = (ConfigError,)
        return EXIT_USAGE if isinstance(exc, usage_errors) else EXIT_RUNTIME
    except OSError as exc:
        print(f"varfam: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
