"""End-to-end acceptance criteria, one test each.

Every test prints (and records for the terminal summary) a single
``criterion N: PASS|FAIL`` line before asserting.
"""

import json
import os
import random
import subprocess
import sys
import time
from fractions import Fraction
from itertools import product

import pytest

from conftest import ACCEPTANCE_LINES, DATA, MOVIE_QUESTION, MOVIES, PAPER_QUERY
from kgqa.cql import execute_cql, parse_cql
from kgqa.err import ErrConfig, correct_cql
from kgqa.fusion import bna, dda
from kgqa.graph import load_triples
from kgqa.llm import Gateway
from kgqa.metrics import EvaluationRecord, aggregate, normalize_cql, prf1
from kgqa.pipeline import DatasetExample, PipelineConfig, evaluate, run_benchmark, translate
from kgqa.searcher import answer_by_retrieval
from kgqa.synthetic import make_corpus, write_corpus
from oracles import brute_force_execute
from oracles import prf1 as ref_prf1
from strategies import random_ast, random_graph


def record(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def test_criterion_1_worked_example():
    start = time.perf_counter()
    config = PipelineConfig.from_file(DATA / "tiny_config.json")
    graph = load_triples(config.resolve(config.graph))
    example = DatasetExample(MOVIE_QUESTION, MOVIES)
    report = evaluate([example], graph, config)
    elapsed = time.perf_counter() - start
    rec = report.records[0]
    translator_cql = translate(MOVIE_QUESTION, Gateway({"translator": _table_stub()}))
    ok = (
        translator_cql == PAPER_QUERY
        and rec.translator_answers == MOVIES
        and rec.searcher_answers == MOVIES
        and rec.pred_answers == MOVIES
        and elapsed < 1.0
    )
    record(1, ok, f"translator={sorted(rec.translator_answers)} searcher={sorted(rec.searcher_answers)} "
                  f"fused={sorted(rec.pred_answers)} in {elapsed:.3f}s")
    assert ok


def _table_stub():
    from kgqa.stubs import TranslatorStub

    return TranslatorStub.from_file(DATA / "tiny_translator.json")


def test_criterion_2_executor_oracle():
    start = time.perf_counter()
    mismatches, non_empty = 0, 0
    n = 600
    for seed in range(n):
        rng = random.Random(seed)
        graph, ast = random_graph(rng, 100), random_ast(rng)
        got = execute_cql(ast, graph)
        non_empty += bool(got) and not ast.is_count
        mismatches += got != brute_force_execute(ast, graph)
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and elapsed < 60
    record(2, ok, f"{n} graph/query pairs, {mismatches} mismatches, {non_empty} non-empty, {elapsed:.1f}s")
    assert ok


def test_criterion_3_metric_oracle():
    rng = random.Random(7)
    universe = list("abcdefghij")
    pairs = [(frozenset(rng.sample(universe, rng.randint(0, 6))), frozenset(rng.sample(universe, rng.randint(0, 6))))
             for _ in range(1200)]
    pairs += [(frozenset(), frozenset()), (frozenset(), frozenset("a")), (frozenset("a"), frozenset())]
    worst = 0.0
    for pred, gold in pairs:
        worst = max(worst, *(abs(x - y) for x, y in zip(prf1(pred, gold), ref_prf1(pred, gold))))
    conventions = (
        prf1(set(), set()) == (1.0, 1.0, 1.0)
        and prf1(set(), {"a"}) == (0.0, 0.0, 0.0)
        and prf1({"a"}, set()) == (0.0, 0.0, 0.0)
    )
    records = [EvaluationRecord.score(f"q{i}", g, p) for i, (p, g) in enumerate(pairs)]
    report = aggregate(records)
    exact = [sum(Fraction(ref_prf1(p, g)[k]) for p, g in pairs) / len(pairs) for k in range(3)]
    agg_err = max(abs(a - float(b)) for a, b in zip((report.macro_p, report.macro_r, report.macro_f1), exact))
    acc_ok = report.acc_ex == sum(p == g for p, g in pairs) / len(pairs)
    ok = worst < 1e-12 and agg_err < 1e-12 and conventions and acc_ok
    record(3, ok, f"{len(pairs)} pairs, max |prf1 err|={worst:.1e}, max |aggregate err|={agg_err:.1e}")
    assert ok


def test_criterion_4_fusion():
    rng = random.Random(11)
    universe = list("abcdefg")
    sigmas = [0.0, 0.25, 0.5, 0.75, 1.0]
    violations = 0
    n = 0
    for _ in range(1500):
        s, i, gold = (frozenset(rng.sample(universe, rng.randint(0, 5))) for _ in range(3))
        n += 1
        f = lambda x: ref_prf1(x, gold)[2]  # noqa: E731
        top = f(dda(s, i, gold, 1.0))
        if not (top == max(f(s), f(i)) and top >= f(bna(s, i))):
            violations += 1
        scores = [f(dda(s, i, gold, sigma)) for sigma in sigmas]
        if scores != sorted(scores):
            violations += 1
    # The exhaustive small case: every triple of subsets of a 3-element universe.
    subsets = [frozenset(c for c, keep in zip("abc", bits) if keep) for bits in product([0, 1], repeat=3)]
    for s, i, gold in product(subsets, repeat=3):
        n += 1
        f = lambda x: ref_prf1(x, gold)[2]  # noqa: E731
        scores = [f(dda(s, i, gold, sigma)) for sigma in sigmas]
        if scores != sorted(scores) or scores[-1] != max(f(s), f(i)) or scores[-1] < f(bna(s, i)):
            violations += 1
    ok = violations == 0
    record(4, ok, f"{n} instances, {violations} violations")
    assert ok


def test_criterion_5_err_guarantees():
    corpus = make_corpus(50, seed=0)
    config = ErrConfig(top_k=3, candidate_limit=10, selection_mode="oracle")
    retrievable = restored = parse_ok = idempotent = 0
    for case in corpus.cases:
        res = correct_cql(case.question, case.generated_cql, corpus.graph, config, gold=case.gold_answers)
        try:
            parse_cql(res.best)
            parse_ok += 1
        except Exception:
            pass
        again = correct_cql(case.question, res.best, corpus.graph, config, gold=case.gold_answers)
        idempotent += normalize_cql(again.best) == normalize_cql(res.best)
        if case.true_entity in corpus.graph.find_relative_entities(case.mention, config.candidate_limit):
            retrievable += 1
            restored += bool(res.best_answers) and res.best_answers == case.gold_answers
    n = len(corpus.cases)
    rate = restored / retrievable if retrievable else 0.0
    ok = rate >= 0.9 and parse_ok == n and idempotent == n
    record(5, ok, f"restored {restored}/{retrievable} retrievable ({rate:.0%}), parse {parse_ok}/{n}, "
                  f"idempotent {idempotent}/{n}")
    assert ok


def test_criterion_6_workflow_ordering(tmp_path):
    config_path = write_corpus(make_corpus(50, seed=0, garble_rate=0.1), tmp_path)
    config = PipelineConfig.from_file(config_path)
    scores = {}
    for wf in ("both", "translator", "searcher"):
        report = run_benchmark(config.replace(workflows=wf))
        scores[wf] = (report.acc_ex, report.macro_f1)
    ok = all(scores["both"][k] >= scores["translator"][k] >= scores["searcher"][k] for k in (0, 1))
    detail = " ".join(f"{wf}: acc_ex={a:.3f} f1={f:.3f}" for wf, (a, f) in scores.items())
    record(6, ok, detail)
    assert ok


def _run_cli(config_path, out, concurrency):
    cmd = [sys.executable, "-m", "kgqa", "run", str(config_path), "-o", str(out), "--concurrency", str(concurrency)]
    return subprocess.run(cmd, capture_output=True, text=True).returncode


def _without_runtime(path):
    doc = json.loads(path.read_text(encoding="utf-8"))
    doc.pop("runtime")
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False)


def test_criterion_7_determinism(tmp_path):
    config_path = write_corpus(make_corpus(40, seed=5, garble_rate=0.1), tmp_path / "synthetic")
    outputs, codes = [], []
    for cfg in (config_path, DATA / "tiny_config.json"):
        texts = []
        for k, concurrency in enumerate((1, 8, 1, 8)):
            out = tmp_path / f"report_{len(outputs)}_{k}.json"
            codes.append(_run_cli(cfg, out, concurrency))
            texts.append(_without_runtime(out))
        outputs.append(texts)
    ok = all(code == 0 for code in codes) and all(len(set(t)) == 1 for t in outputs)
    record(7, ok, f"{sum(len(t) for t in outputs)} runs at caps 1/8, exit codes {sorted(set(codes))}, "
                  f"distinct reports per config {[len(set(t)) for t in outputs]}")
    assert ok


LIVE = os.environ.get("KGQA_LIVE_ENDPOINT")


@pytest.mark.skipif(not LIVE, reason="set KGQA_LIVE_ENDPOINT and KGQA_LIVE_MODEL to run the live smoke test")
def test_criterion_8_live_smoke():
    from kgqa.llm import OpenAIChatBackend

    backend = OpenAIChatBackend(LIVE, os.environ.get("KGQA_LIVE_MODEL", "gpt-4o-mini"))
    gateway = Gateway({"translator": backend, "reader": backend})
    graph = load_triples(DATA / "tiny_kg.csv")
    cql = translate(MOVIE_QUESTION, gateway)
    answers = answer_by_retrieval(MOVIE_QUESTION, graph, reader=gateway)
    record(8, True, f"translate -> {cql[:60]!r}; search -> {sorted(answers)}")
    assert isinstance(cql, str) and isinstance(answers, frozenset)
