#!/usr/bin/env python3
"""Workflow, fusion-threshold and ERR-mode ablations on synthetic corpora.

Prints one table per experiment, averaged over seeds:
  * translator-only vs searcher-only vs combined workflows
  * dda over a sweep of sigma, against bna
  * ERR in oracle vs heuristic selection mode
"""

import argparse
import statistics

from kgqa.err import ErrConfig
from kgqa.fusion import FusionConfig
from kgqa.llm import Gateway
from kgqa.pipeline import PipelineConfig, evaluate
from kgqa.stubs import ReaderStub, SelectorStub, TranslatorStub
from kgqa.synthetic import make_corpus

SIGMAS = (0.0, 0.25, 0.5, 0.75, 1.0)


def run(corpus, **overrides):
    config = PipelineConfig(graph="<memory>", dataset="<memory>").replace(**overrides)
    gateway = Gateway(
        {"translator": TranslatorStub(corpus.translator_table), "selector": SelectorStub(), "reader": ReaderStub()}
    )
    report = evaluate(corpus.examples, corpus.graph, config, gateway)
    return report.acc_ex, report.macro_f1


def table(title, rows):
    print(f"\n{title}")
    print(f"  {'setting':<28}{'acc_ex':>8}{'f1':>8}")
    for name, scores in rows:
        acc = statistics.fmean(s[0] for s in scores)
        f1 = statistics.fmean(s[1] for s in scores)
        print(f"  {name:<28}{100 * acc:8.1f}{100 * f1:8.1f}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--questions", type=int, default=100)
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--garble", type=float, default=0.1)
    args = ap.parse_args()
    corpora = [make_corpus(args.questions, seed, garble_rate=args.garble) for seed in range(args.seeds)]
    oracle = ErrConfig(selection_mode="oracle")

    table(
        "workflows (dda, sigma=1, oracle ERR)",
        [(wf, [run(c, workflows=wf, err=oracle) for c in corpora]) for wf in ("both", "translator", "searcher")],
    )
    rows = [(f"dda sigma={s}", [run(c, err=oracle, fusion=FusionConfig(s, "dda")) for c in corpora]) for s in SIGMAS]
    rows.append(("bna", [run(c, err=oracle, fusion=FusionConfig(1.0, "bna")) for c in corpora]))
    table("fusion rule", rows)
    table(
        "ERR selection (translator only)",
        [
            (mode, [run(c, workflows="translator", err=ErrConfig(selection_mode=mode)) for c in corpora])
            for mode in ("oracle", "heuristic")
        ],
    )


if __name__ == "__main__":
    main()
