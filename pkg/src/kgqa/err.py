"""Entity and relation replacement (ERR).

A generated query often names things slightly wrong ("Jackie Chan" where
the graph stores "Jackie Chan [Hong Kong actor]").  ERR pulls the names
out of the raw query text, swaps each entity for a graph entity chosen from
fuzzy candidates, tries the top-k closest graph relations for the first
relation, and keeps the best-executing rewrite.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Literal, Sequence

from kgqa.cql import CqlError, ExecutionError, execute_cql, parse_cql
from kgqa.cql.mentions import find_mentions, replace_mentions, substitute
from kgqa.graph import KnowledgeGraph
from kgqa.llm import Gateway, build_request
from kgqa.metrics import f1_score
from kgqa.text import bigram_dice

log = logging.getLogger(__name__)

SelectionMode = Literal["oracle", "heuristic"]
Scorer = Callable[[str, str], float]


class SelectionError(ValueError):
    """No candidate to choose from."""


@dataclass(frozen=True)
class ErrConfig:
    top_k: int = 3
    candidate_limit: int = 10
    selection_mode: SelectionMode = "heuristic"

    def __post_init__(self) -> None:
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        if self.candidate_limit < self.top_k:
            raise ValueError("candidate_limit must be >= top_k")
        if self.selection_mode not in ("oracle", "heuristic"):
            raise ValueError(f"unknown selection_mode {self.selection_mode!r}")


@dataclass
class CorrectionResult:
    best: str
    candidates: list[str]
    chosen_entities: list[tuple[str, str]]
    chosen_relations: list[str]
    mode_used: SelectionMode
    best_answers: frozenset[str] = frozenset()
    warnings: list[str] = field(default_factory=list)


def sim_score(a: str, b: str) -> float:
    """Symmetric similarity in [0, 1]: Dice coefficient of character bigrams."""
    return bigram_dice(a, b)


def stub_select(mention: str, candidates: Sequence[str], scorer: Scorer = sim_score) -> str:
    """Highest-scoring candidate; on ties the mention itself, then lexicographic."""
    if not candidates:
        raise SelectionError(f"no candidates for {mention!r}")
    return min(candidates, key=lambda c: (-scorer(mention, c), c != mention, c))


def _clean_choice(text: str) -> str:
    return text.strip().strip("\"'`").strip()


def select_entity(
    question: str,
    mention: str,
    candidates: Sequence[str],
    selector: Gateway | None = None,
    scorer: Scorer = sim_score,
) -> str:
    """Pick the graph entity a mention refers to.

    With no selector (or a selector gateway lacking the role) the stub rule
    applies.  A live choice outside the candidate list falls back to it.
    """
    if not candidates:
        raise SelectionError(f"no candidates for {mention!r}")
    if len(candidates) == 1:
        return candidates[0]
    if selector is None or not selector.has("selector"):
        return stub_select(mention, candidates, scorer)
    request = build_request(
        "selector",
        {"question": question, "mention": mention, "candidates": list(candidates)},
        question=question,
        mention=mention,
        candidates="\n".join(f"- {c}" for c in candidates),
    )
    choice = _clean_choice(selector.generate(request).text)
    if choice in candidates:
        return choice
    log.info("selector returned non-candidate %r for %r; using similarity rule", choice, mention)
    return stub_select(mention, candidates, scorer)


def rank_relations(
    relation: str, graph: KnowledgeGraph, config: ErrConfig, scorer: Scorer = sim_score
) -> list[tuple[str, float]]:
    """Top-k (name, score) graph relations for a relation mention."""
    pool = graph.find_relative_relations(relation, config.candidate_limit)
    scored = sorted(((r, scorer(r, relation)) for r in pool), key=lambda x: (-x[1], x[0] != relation, x[0]))
    return scored[: config.top_k]


def correct_cql(
    question: str,
    cql_p: str,
    graph: KnowledgeGraph,
    config: ErrConfig = ErrConfig(),
    selector: Gateway | None = None,
    gold: frozenset[str] | set[str] | None = None,
    scorer: Scorer = sim_score,
) -> CorrectionResult:
    """Repair entity and first-relation names of a generated query.

    In ``oracle`` mode the candidate whose execution has the highest F1
    against ``gold`` wins (earliest on ties).  In ``heuristic`` mode the
    first candidate with a non-empty execution wins, else the first one.
    """
    if not cql_p or not cql_p.strip():
        raise ValueError("cql_p must be non-empty")
    if config.selection_mode == "oracle" and gold is None:
        raise ValueError("oracle selection needs gold answers")

    entities = [m.value for m in find_mentions(cql_p, "entity")]
    relations = [m.value for m in find_mentions(cql_p, "relation")]
    warnings: list[str] = []

    chosen: dict[str, str] = {}
    for e in entities:
        if e in chosen:
            continue
        pool = graph.find_relative_entities(e, config.candidate_limit)
        chosen[e] = select_entity(question, e, pool, selector, scorer) if pool else e
        if not pool:
            warnings.append(f"no graph candidates for entity {e!r}; kept as is")
    rewritten = replace_mentions(cql_p, "entity", [chosen[e] for e in entities]) if entities else cql_p

    kept_relations: list[str] = []
    texts: list[str] = []
    if relations:
        r = relations[0]
        kept_relations = [name for name, _ in rank_relations(r, graph, config, scorer)]
        if not kept_relations:
            warnings.append(f"no graph candidates for relation {r!r}; kept as is")
            kept_relations = [r]
        texts = [substitute(rewritten, r, r2, "relation", 0) for r2 in kept_relations]
    else:
        texts = [rewritten]

    candidates: list[str] = []
    answers: list[frozenset[str]] = []
    for text in dict.fromkeys(texts):
        try:
            ast = parse_cql(text)
        except CqlError as exc:
            warnings.append(f"dropped unparseable candidate: {exc}")
            continue
        try:
            answer = execute_cql(ast, graph)
        except ExecutionError as exc:
            warnings.append(f"candidate failed to execute: {exc}")
            answer = frozenset()
        candidates.append(text)
        answers.append(answer)

    result = CorrectionResult(
        best=cql_p,
        candidates=candidates,
        chosen_entities=[(e, chosen[e]) for e in entities],
        chosen_relations=kept_relations,
        mode_used=config.selection_mode,
        warnings=warnings,
    )
    if not candidates:
        return result
    if config.selection_mode == "oracle":
        scores = [f1_score(a, gold) for a in answers]
        idx = scores.index(max(scores))
    else:
        idx = next((i for i, a in enumerate(answers) if a), 0)
    result.best = candidates[idx]
    result.best_answers = answers[idx]
    return result
