"""Dataset loading, per-question orchestration and benchmark runs."""

from __future__ import annotations

import dataclasses
import json
import logging
import os
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterable, Literal, Mapping

from kgqa.cql.mentions import extract_entities, extract_relations
from kgqa.err import ErrConfig, correct_cql
from kgqa.fusion import FusionConfig, fuse
from kgqa.graph import KnowledgeGraph, load_triples
from kgqa.llm import ROLES, Backend, Gateway, OpenAIChatBackend, build_request
from kgqa.metrics import EvaluationRecord, Report, aggregate
from kgqa.searcher import answer_by_retrieval
from kgqa.stubs import ReaderStub, SelectorStub, TranslatorStub

log = logging.getLogger(__name__)

Workflows = Literal["both", "translator", "searcher"]


class ConfigError(ValueError):
    """Bad or unloadable run configuration."""


class DatasetFormatError(ValueError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no


@dataclass(frozen=True)
class DatasetExample:
    question: str
    gold_answers: frozenset[str] = frozenset()
    gold_cql: str | None = None

    def __post_init__(self) -> None:
        if not self.question or not self.question.strip():
            raise ValueError("question must be non-empty")

    def to_json(self) -> dict[str, Any]:
        d: dict[str, Any] = {"question": self.question}
        if self.gold_cql is not None:
            d["cql"] = self.gold_cql
        d["answers"] = sorted(self.gold_answers)
        return d


def parse_example(obj: Any) -> DatasetExample:
    if not isinstance(obj, dict):
        raise ValueError("record is not a JSON object")
    question = obj.get("question")
    if not isinstance(question, str) or not question.strip():
        raise ValueError("'question' must be a non-empty string")
    cql = obj.get("cql")
    if cql is not None and not isinstance(cql, str):
        raise ValueError("'cql' must be a string")
    answers = obj.get("answers", [])
    if not isinstance(answers, list) or not all(isinstance(a, str) for a in answers):
        raise ValueError("'answers' must be an array of strings")
    return DatasetExample(question, frozenset(answers), cql)


def load_dataset(path: str | os.PathLike) -> list[DatasetExample]:
    """Read a JSONL file of ``{"question", "cql"?, "answers"}`` objects, in order."""
    examples = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                examples.append(parse_example(json.loads(line)))
            except ValueError as exc:  # JSONDecodeError is a ValueError
                raise DatasetFormatError(line_no, str(exc)) from None
    return examples


def dump_dataset(examples: Iterable[DatasetExample], path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ex in examples:
            fh.write(json.dumps(ex.to_json(), ensure_ascii=False) + "\n")


def difficulty(gold_cql: str | None) -> str | None:
    """'complex' for COUNT(*), WHERE, ORDER BY or several entities/relations."""
    if not gold_cql:
        return None
    text = gold_cql.lower()
    if re.search(r"count\s*\(\s*\*\s*\)", text) or re.search(r"\bwhere\b", text) or re.search(r"\border\s+by\b", text):
        return "complex"
    if len(extract_entities(gold_cql)) >= 2 or len(extract_relations(gold_cql)) >= 2:
        return "complex"
    return "simple"


@dataclass(frozen=True)
class BackendConfig:
    type: Literal["stub", "http"] = "stub"
    table: str | None = None  # translator stub: question -> CQL JSON file
    endpoint: str | None = None
    model: str | None = None
    api_key_env: str | None = "OPENAI_API_KEY"
    timeout: float = 60.0
    max_retries: int = 3

    def build(self, role: str, base_dir: Path) -> Backend:
        if self.type == "http":
            if not self.endpoint or not self.model:
                raise ConfigError(f"{role}: http backend needs 'endpoint' and 'model'")
            return OpenAIChatBackend(self.endpoint, self.model, self.api_key_env, self.timeout, self.max_retries)
        if self.type != "stub":
            raise ConfigError(f"{role}: unknown backend type {self.type!r}")
        if role == "translator":
            if not self.table:
                raise ConfigError("translator stub needs a 'table' file")
            try:
                return TranslatorStub.from_file(base_dir / self.table)
            except (OSError, ValueError) as exc:
                raise ConfigError(f"cannot load translator table: {exc}") from None
        return SelectorStub() if role == "selector" else ReaderStub()


@dataclass(frozen=True)
class PipelineConfig:
    graph: str
    dataset: str
    err: ErrConfig = ErrConfig()
    fusion: FusionConfig = FusionConfig()
    backends: Mapping[str, BackendConfig] = field(default_factory=dict)
    workflows: Workflows = "both"
    concurrency: int = 1
    base_dir: Path = Path(".")

    def __post_init__(self) -> None:
        if self.workflows not in ("both", "translator", "searcher"):
            raise ConfigError(f"unknown workflows value {self.workflows!r}")
        if self.concurrency < 1:
            raise ConfigError("concurrency must be positive")
        unknown = set(self.backends) - set(ROLES)
        if unknown:
            raise ConfigError(f"unknown backend roles {sorted(unknown)}")

    @classmethod
    def from_dict(cls, d: Mapping[str, Any], base_dir: str | os.PathLike = ".") -> "PipelineConfig":
        try:
            return cls(
                graph=d["graph"],
                dataset=d["dataset"],
                err=ErrConfig(**d.get("err", {})),
                fusion=FusionConfig(**d.get("fusion", {})),
                backends={role: BackendConfig(**spec) for role, spec in d.get("backends", {}).items()},
                workflows=d.get("workflows", "both"),
                concurrency=int(d.get("concurrency", 1)),
                base_dir=Path(base_dir),
            )
        except KeyError as exc:
            raise ConfigError(f"missing config key {exc}") from None
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_file(cls, path: str | os.PathLike) -> "PipelineConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_dict(data, path.parent)

    def resolve(self, p: str) -> Path:
        return self.base_dir / p

    def snapshot(self) -> dict[str, Any]:
        """Semantic settings only; scheduling (concurrency) is left out."""
        return {
            "graph": self.graph,
            "dataset": self.dataset,
            "err": asdict(self.err),
            "fusion": asdict(self.fusion),
            "backends": {k: asdict(v) for k, v in sorted(self.backends.items())},
            "workflows": self.workflows,
        }

    def replace(self, **changes: Any) -> "PipelineConfig":
        return dataclasses.replace(self, **changes)


def build_gateway(config: PipelineConfig) -> Gateway:
    backends = {role: spec.build(role, config.base_dir) for role, spec in config.backends.items()}
    return Gateway(backends, max_in_flight=max(config.concurrency, 1))


_FENCE = re.compile(r"^```[\w-]*\s*|\s*```$")


def translate(question: str, gateway: Gateway) -> str:
    """Generated CQL for a question; "" when the model produced nothing."""
    request = build_request("translator", {"question": question}, question=question)
    return _FENCE.sub("", gateway.generate(request).text.strip()).strip()


def answer_question(
    example: DatasetExample, graph: KnowledgeGraph, config: PipelineConfig, gateway: Gateway
) -> EvaluationRecord:
    """Run the configured workflows for one question and score the fused answer.

    A failure in one workflow is recorded and the other workflow's answer is
    used; if both fail the prediction is empty.
    """
    q, gold = example.question, example.gold_answers
    errors: list[str] = []
    s: frozenset[str] | None = None
    i: frozenset[str] | None = None
    pred_cql: str | None = None

    if config.workflows in ("both", "translator"):
        try:
            cql_p = translate(q, gateway)
            if cql_p:
                pred_cql = cql_p
                result = correct_cql(
                    q,
                    cql_p,
                    graph,
                    config.err,
                    selector=gateway,
                    gold=gold if config.err.selection_mode == "oracle" else None,
                )
                pred_cql = result.best
                s = result.best_answers if result.candidates else frozenset()
            else:
                s = frozenset()
        except Exception as exc:  # isolate per-question failures
            errors.append(f"translator: {type(exc).__name__}: {exc}")

    if config.workflows in ("both", "searcher"):
        try:
            i = answer_by_retrieval(q, graph, reader=gateway)
        except Exception as exc:
            errors.append(f"searcher: {type(exc).__name__}: {exc}")

    if s is not None and i is not None:
        final = fuse(s, i, gold, config.fusion)
    else:
        final = s if s is not None else i if i is not None else frozenset()

    return EvaluationRecord.score(
        q,
        gold,
        final,
        gold_cql=example.gold_cql,
        pred_cql=pred_cql,
        difficulty=difficulty(example.gold_cql),
        translator_answers=s,
        searcher_answers=i,
        errors=errors,
    )


def evaluate(
    examples: list[DatasetExample], graph: KnowledgeGraph, config: PipelineConfig, gateway: Gateway | None = None
) -> Report:
    if not examples:
        raise ConfigError("dataset is empty")
    gateway = gateway or build_gateway(config)
    if config.concurrency == 1:
        records = [answer_question(ex, graph, config, gateway) for ex in examples]
    else:
        with ThreadPoolExecutor(max_workers=config.concurrency) as pool:
            records = list(pool.map(lambda ex: answer_question(ex, graph, config, gateway), examples))
    return aggregate(records, config.snapshot())


def load_inputs(config: PipelineConfig) -> tuple[KnowledgeGraph, list[DatasetExample]]:
    try:
        graph = load_triples(config.resolve(config.graph))
        examples = load_dataset(config.resolve(config.dataset))
    except (OSError, ValueError) as exc:
        raise ConfigError(f"load failure: {exc}") from None
    return graph, examples


def run_benchmark(config: PipelineConfig) -> Report:
    graph, examples = load_inputs(config)
    return evaluate(examples, graph, config)


def report_document(report: Report, runtime: Mapping[str, Any] | None = None) -> dict[str, Any]:
    doc = report.to_dict()
    if runtime is not None:
        doc["runtime"] = dict(runtime)
    return doc


def write_report(report: Report, path: str | os.PathLike, runtime: Mapping[str, Any] | None = None) -> None:
    text = json.dumps(report_document(report, runtime), indent=2, sort_keys=True, ensure_ascii=False)
    Path(path).write_text(text + "\n", encoding="utf-8")


def timed_run(config: PipelineConfig) -> tuple[Report, dict[str, Any]]:
    start = time.perf_counter()
    report = run_benchmark(config)
    return report, {"concurrency": config.concurrency, "elapsed_seconds": round(time.perf_counter() - start, 6)}
