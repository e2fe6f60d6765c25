"""Command-line entry point.

    kgqa kg stats <graph>
    kgqa translate <question> --config CFG
    kgqa err <question> <cql> (--graph G | --config CFG) [--gold A ...]
    kgqa search <question> (--graph G | --config CFG)
    kgqa run <config> [-o report.json]
    kgqa eval <report>

Exit codes: 0 success, 1 config/load failure, 2 run finished with
per-question errors recorded.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

from kgqa.err import ErrConfig, correct_cql
from kgqa.graph import KnowledgeGraph, load_triples
from kgqa.llm import Gateway, GatewayError
from kgqa.metrics import Report, aggregate
from kgqa.pipeline import ConfigError, PipelineConfig, build_gateway, timed_run, translate, write_report
from kgqa.searcher import RetrievalError, answer_by_retrieval, retrieve

EXIT_OK, EXIT_CONFIG, EXIT_QUESTION_ERRORS = 0, 1, 2


def _print_json(obj) -> None:
    print(json.dumps(obj, indent=2, ensure_ascii=False, sort_keys=True))


def _graph_and_gateway(args) -> tuple[KnowledgeGraph, Gateway | None, PipelineConfig | None]:
    config = PipelineConfig.from_file(args.config) if args.config else None
    if args.graph:
        graph_path = Path(args.graph)
    elif config is not None:
        graph_path = config.resolve(config.graph)
    else:
        raise ConfigError("give --graph or --config")
    try:
        graph = load_triples(graph_path)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot load graph: {exc}") from None
    gateway = build_gateway(config) if config is not None else None
    return graph, gateway, config


def cmd_kg_stats(args) -> int:
    try:
        graph = load_triples(args.graph)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot load graph: {exc}") from None
    _print_json(graph.stats())
    return EXIT_OK


def cmd_translate(args) -> int:
    config = PipelineConfig.from_file(args.config)
    print(translate(args.question, build_gateway(config)))
    return EXIT_OK


def cmd_err(args) -> int:
    graph, gateway, config = _graph_and_gateway(args)
    base = config.err if config is not None else ErrConfig()
    err_config = ErrConfig(
        top_k=args.top_k or base.top_k,
        candidate_limit=max(args.candidate_limit or base.candidate_limit, args.top_k or base.top_k),
        selection_mode=args.mode or ("oracle" if args.gold else base.selection_mode),
    )
    gold = frozenset(args.gold) if args.gold else None
    result = correct_cql(args.question, args.cql, graph, err_config, selector=gateway, gold=gold)
    doc = asdict(result)
    doc["best_answers"] = sorted(result.best_answers)
    _print_json(doc)
    return EXIT_OK


def cmd_search(args) -> int:
    graph, gateway, _ = _graph_and_gateway(args)
    if args.verbose:
        ctx = retrieve(args.question, graph)
        print("entities:", ", ".join(ctx.topic_entities) or "-", file=sys.stderr)
        print("context:", ctx.verbalized or "-", file=sys.stderr)
    for answer in sorted(answer_by_retrieval(args.question, graph, reader=gateway)):
        print(answer)
    return EXIT_OK


def _print_aggregates(report: Report) -> None:
    for key, value in report.aggregates().items():
        print(f"{key:>10}: {100 * value:6.2f}")
    for tag, scores in report.by_difficulty.items():
        print(f"{tag:>10}: n={int(scores['count'])} acc_ex={100 * scores['acc_ex']:.2f} f1={100 * scores['f1']:.2f}")


def cmd_run(args) -> int:
    config = PipelineConfig.from_file(args.config)
    overrides = {}
    if args.workflows:
        overrides["workflows"] = args.workflows
    if args.concurrency:
        overrides["concurrency"] = args.concurrency
    if args.sigma is not None or args.rule:
        fusion = config.fusion
        overrides["fusion"] = type(fusion)(
            sigma=fusion.sigma if args.sigma is None else args.sigma, rule=args.rule or fusion.rule
        )
    if overrides:
        config = config.replace(**overrides)
    report, runtime = timed_run(config)
    if args.output:
        write_report(report, args.output, runtime)
    _print_aggregates(report)
    failed = sum(bool(r.errors) for r in report.records)
    if failed:
        print(f"{failed} question(s) recorded errors", file=sys.stderr)
        return EXIT_QUESTION_ERRORS
    return EXIT_OK


def cmd_eval(args) -> int:
    try:
        doc = json.loads(Path(args.report).read_text(encoding="utf-8"))
        stored = Report.from_dict(doc)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"cannot read report: {exc}") from None
    recomputed = aggregate(stored.records, stored.config)
    _print_aggregates(recomputed)
    drift = {
        k: (stored.aggregates()[k], v)
        for k, v in recomputed.aggregates().items()
        if abs(stored.aggregates()[k] - v) > 1e-12
    }
    if drift:
        print(f"stored aggregates disagree with records: {drift}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kgqa", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--log-level", default="WARNING")
    sub = parser.add_subparsers(dest="command", required=True)

    kg = sub.add_parser("kg", help="knowledge graph utilities")
    kg_sub = kg.add_subparsers(dest="kg_command", required=True)
    stats = kg_sub.add_parser("stats", help="count triples, entities and relations")
    stats.add_argument("graph")
    stats.set_defaults(func=cmd_kg_stats)

    tr = sub.add_parser("translate", help="generate CQL for a question")
    tr.add_argument("question")
    tr.add_argument("--config", required=True)
    tr.set_defaults(func=cmd_translate)

    err = sub.add_parser("err", help="repair entity/relation names in a CQL query")
    err.add_argument("question")
    err.add_argument("cql")
    err.add_argument("--graph")
    err.add_argument("--config")
    err.add_argument("--gold", action="append", help="gold answer (repeatable); enables oracle mode")
    err.add_argument("--top-k", type=int)
    err.add_argument("--candidate-limit", type=int)
    err.add_argument("--mode", choices=["oracle", "heuristic"])
    err.set_defaults(func=cmd_err)

    se = sub.add_parser("search", help="answer a question by one-hop retrieval")
    se.add_argument("question")
    se.add_argument("--graph")
    se.add_argument("--config")
    se.add_argument("--verbose", action="store_true")
    se.set_defaults(func=cmd_search)

    run = sub.add_parser("run", help="run a benchmark from a config file")
    run.add_argument("config")
    run.add_argument("-o", "--output", help="write the JSON report here")
    run.add_argument("--workflows", choices=["both", "translator", "searcher"])
    run.add_argument("--concurrency", type=int)
    run.add_argument("--sigma", type=float)
    run.add_argument("--rule", choices=["dda", "bna"])
    run.set_defaults(func=cmd_run)

    ev = sub.add_parser("eval", help="recompute and print the aggregates of a report")
    ev.add_argument("report")
    ev.set_defaults(func=cmd_eval)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GatewayError, RetrievalError) as exc:
        print(f"model call failed: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
