"""Command-line entry points: run pipelines, evaluate, query, serve."""

from __future__ import annotations

import argparse
import sys

from .corpus import SplitSpec, load_corpus, load_hierarchy
from .evaluation import format_report_table, run_experiment, save_report_json
from .pipeline import PipelineError, load_config, run_pipeline, validate_config
from .service import ServiceError, load_engine


def _add_run(subparsers) -> None:
    parser = subparsers.add_parser("run", help="execute a configured pipeline")
    parser.add_argument("--config", required=True, help="YAML pipeline configuration")
    parser.add_argument("--baseline", action="store_true", default=None,
                        help="evaluate baselines only, dropping the reranker")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--project", default=None)
    parser.add_argument("--corpus", default=None, help="override paths.corpus")
    parser.add_argument("--hierarchy", default=None, help="override paths.hierarchy")
    parser.add_argument("--model", default=None, help="override paths.model")
    parser.add_argument("--report-json", default=None, help="override paths.report_json")
    parser.add_argument("--report-table", default=None, help="override paths.report_table")


def _add_extract(subparsers) -> None:
    parser = subparsers.add_parser(
        "extract", help="mine a corpus from a source tree (needs fassist-extract)"
    )
    parser.add_argument("--repo", required=True, help="root of the source tree")
    parser.add_argument("--out-corpus", required=True, help="corpus output path")
    parser.add_argument("--out-hierarchy", required=True, help="hierarchy output path")
    parser.add_argument("--include-private", action="store_true")
    parser.add_argument("--project", default=None)
    parser.add_argument("--url-template", default=None)


def _add_evaluate(subparsers) -> None:
    parser = subparsers.add_parser("evaluate", help="split, train, and report metrics")
    parser.add_argument("--corpus", required=True)
    parser.add_argument("--hierarchy", default=None)
    parser.add_argument("--seed", type=int, default=13)
    parser.add_argument("--baseline", action="store_true")
    parser.add_argument("--systems", default=None,
                        help="comma-separated subset of bow,term_match,translation,reranker")
    parser.add_argument("--em-iterations", type=int, default=10)
    parser.add_argument("--epochs", type=int, default=10)
    parser.add_argument("--report-json", default=None)
    parser.add_argument("--report-table", default=None)


def _add_query(subparsers) -> None:
    parser = subparsers.add_parser("query", help="rank components for one query")
    parser.add_argument("--model", required=True)
    parser.add_argument("--corpus", required=True)
    parser.add_argument("--hierarchy", default=None)
    parser.add_argument("--text", required=True)
    parser.add_argument("--k", type=int, default=10)


def _add_serve(subparsers) -> None:
    parser = subparsers.add_parser("serve", help="start the HTTP query service")
    parser.add_argument("--model", required=True)
    parser.add_argument("--corpus", required=True)
    parser.add_argument("--hierarchy", default=None)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    parser.add_argument("--static-dir", default=None,
                        help="directory with the web UI bundle")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fassist",
        description="natural-language function retrieval over API documentation",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    _add_run(subparsers)
    _add_extract(subparsers)
    _add_evaluate(subparsers)
    _add_query(subparsers)
    _add_serve(subparsers)
    return parser


def _cmd_run(args) -> int:
    config = load_config(args.config)
    raw_overrides = {
        "seed": args.seed,
        "project": args.project,
        "baseline": args.baseline,
    }
    updates = {k: v for k, v in raw_overrides.items() if v is not None}
    path_overrides = {
        "corpus": args.corpus,
        "hierarchy": args.hierarchy,
        "model": args.model,
        "report_json": args.report_json,
        "report_table": args.report_table,
    }
    paths = dict(config.paths)
    paths.update({k: v for k, v in path_overrides.items() if v is not None})
    if updates or paths != config.paths:
        merged = {
            "tasks": list(config.tasks),
            "project": updates.get("project", config.project),
            "seed": updates.get("seed", config.seed),
            "baseline": updates.get("baseline", config.baseline),
            "paths": paths,
            "split": config.split,
            "translation": config.translation,
            "phrases": config.phrases,
            "reranker": config.reranker,
            "bow": config.bow,
            "evaluate": config.evaluate,
            "extract": config.extract,
            "serve": config.serve,
        }
        config = validate_config(merged)
    state = run_pipeline(config)
    if state.report is not None:
        sys.stdout.write(format_report_table(state.report))
    return 0


def _cmd_extract(args) -> int:
    import subprocess

    command = [
        "fassist-extract",
        "--repo", args.repo,
        "--out-corpus", args.out_corpus,
        "--out-hierarchy", args.out_hierarchy,
    ]
    if args.include_private:
        command.append("--include-private")
    if args.project:
        command += ["--project", args.project]
    if args.url_template:
        command += ["--url-template", args.url_template]
    try:
        completed = subprocess.run(command)
    except FileNotFoundError:
        sys.stderr.write(
            "fassist-extract is not installed; install the extractor package\n"
        )
        return 2
    return completed.returncode


def _cmd_evaluate(args) -> int:
    corpus = load_corpus(args.corpus)
    if args.hierarchy:
        from dataclasses import replace

        corpus = replace(corpus, hierarchy=load_hierarchy(args.hierarchy))
    if args.baseline:
        systems = ["bow", "term_match", "translation"]
    elif args.systems:
        systems = [name.strip() for name in args.systems.split(",") if name.strip()]
    else:
        systems = None
    from .reranker import RerankTrainConfig

    cfg = RerankTrainConfig(epochs=args.epochs)
    report = run_experiment(
        corpus,
        spec=SplitSpec(seed=args.seed),
        systems=systems,
        em_iterations=args.em_iterations,
        rerank_cfg=cfg,
        bow_cfg=cfg,
    )
    if args.report_json:
        save_report_json(report, args.report_json)
    if args.report_table:
        with open(args.report_table, "w", encoding="utf-8") as handle:
            handle.write(format_report_table(report))
    sys.stdout.write(format_report_table(report))
    return 0


def _cmd_query(args) -> int:
    engine = load_engine(args.model, args.corpus, args.hierarchy)
    try:
        results = engine.answer_query(args.text, args.k)
    except ServiceError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    for result in results:
        line = f"{result.rank:>3}  {result.score:+.4f}  {result.signature}"
        if result.description:
            line += f"  # {result.description}"
        sys.stdout.write(line + "\n")
    return 0


def _cmd_serve(args) -> int:
    from .service import serve

    serve(
        args.model,
        args.corpus,
        hierarchy_path=args.hierarchy,
        host=args.host,
        port=args.port,
        static_dir=args.static_dir,
    )
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "extract": _cmd_extract,
        "evaluate": _cmd_evaluate,
        "query": _cmd_query,
        "serve": _cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except (PipelineError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
