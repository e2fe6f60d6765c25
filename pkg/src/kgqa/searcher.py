"""Retrieval-augmented answering: topic entities -> one-hop triples -> reader."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from kgqa.graph import KnowledgeGraph, Triple
from kgqa.llm import Gateway, GatewayError, build_request
from kgqa.text import base_name, char_bigrams

MAX_CONTEXT_TRIPLES = 200
ANSWER_PREFIX = "ANSWER:"

# A live extractor maps a question to raw entity mentions.
Extractor = Callable[[str], Sequence[str]]


class RetrievalError(RuntimeError):
    """The reader call failed; distinct from an empty answer."""


@dataclass(frozen=True)
class RetrievalContext:
    topic_entities: tuple[str, ...]
    triples: tuple[Triple, ...]
    verbalized: str

    def __post_init__(self) -> None:
        heads = set(self.topic_entities)
        if any(t.head not in heads for t in self.triples):
            raise ValueError("retrieved triple does not start at a topic entity")
        if self.verbalized != verbalize(self.triples):
            raise ValueError("verbalized text does not match the triples")


def dictionary_entities(question: str, graph: KnowledgeGraph) -> list[str]:
    """Longest-match, left-to-right scan for entity names in the question.

    Both full names and their qualifier-stripped base names count as
    matches; a base name expands to every entity carrying it.
    """
    forms = graph.surface_forms
    if not forms:
        return []
    longest = max(map(len, forms))
    found: list[str] = []
    i = 0
    while i < len(question):
        for j in range(min(len(question), i + longest), i, -1):
            names = forms.get(question[i:j])
            if names:
                found.extend(names)
                i = j
                break
        else:
            i += 1
    return list(dict.fromkeys(found))


def extract_topic_entities(question: str, graph: KnowledgeGraph, extractor: Extractor | None = None) -> list[str]:
    if not question:
        raise ValueError("question must be non-empty")
    if extractor is None:
        return dictionary_entities(question, graph)
    linked = []
    for mention in extractor(question):
        top = graph.find_relative_entities(mention, 1) if mention else []
        linked.extend(top)
    return list(dict.fromkeys(linked))


def verbalize(triples: Sequence[Triple]) -> str:
    return " ".join(f"The {t.relation} of {t.head} is {t.tail}." for t in triples)


def retrieve(
    question: str,
    graph: KnowledgeGraph,
    extractor: Extractor | None = None,
    max_triples: int = MAX_CONTEXT_TRIPLES,
) -> RetrievalContext:
    entities = extract_topic_entities(question, graph, extractor)
    triples: list[Triple] = []
    for e in entities:
        triples.extend(graph.one_hop_subgraph(e))
    kept = tuple(dict.fromkeys(triples))[:max_triples]
    return RetrievalContext(tuple(entities), kept, verbalize(kept))


def _content_bigrams(text: str) -> set[str]:
    return {g for g in char_bigrams(text.casefold()) if not any(ch.isspace() for ch in g)}


def grounded_tails(question: str, triples: Sequence[Triple]) -> list[str]:
    """Offline reader rule.

    Tails of triples whose relation shares a (case-folded, whitespace-free)
    character bigram with the question; all tails if none does.  Topic
    entity names are blanked out of the question first, otherwise their
    letters would match almost any relation.
    """
    for head in sorted({t.head for t in triples}, key=len, reverse=True):
        question = question.replace(head, " ").replace(base_name(head) or head, " ")
    q = _content_bigrams(question)
    hits = [t.tail for t in triples if _content_bigrams(t.relation) & q]
    return list(dict.fromkeys(hits or [t.tail for t in triples]))


def parse_answer_labels(text: str) -> frozenset[str]:
    answers = set()
    for line in text.splitlines():
        line = line.strip()
        if line.startswith(ANSWER_PREFIX):
            value = line[len(ANSWER_PREFIX) :].strip()
            if value:
                answers.add(value)
    return frozenset(answers)


def format_answer_labels(answers: Sequence[str]) -> str:
    return "\n".join(f"{ANSWER_PREFIX} {a}" for a in answers)


def answer_by_retrieval(
    question: str,
    graph: KnowledgeGraph,
    extractor: Extractor | None = None,
    reader: Gateway | None = None,
    max_triples: int = MAX_CONTEXT_TRIPLES,
) -> frozenset[str]:
    """Answer a question from verbalized one-hop triples of its topic entities.

    Without a reader gateway the offline :func:`grounded_tails` rule answers.
    """
    ctx = retrieve(question, graph, extractor, max_triples)
    if not ctx.topic_entities or not ctx.triples:
        return frozenset()
    if reader is None or not reader.has("reader"):
        return frozenset(grounded_tails(question, ctx.triples))
    request = build_request(
        "reader",
        {"question": question, "triples": [[t.head, t.relation, t.tail] for t in ctx.triples]},
        question=question,
        knowledge=ctx.verbalized,
    )
    try:
        response = reader.generate(request)
    except GatewayError as exc:
        raise RetrievalError(f"reader call failed: {exc}") from exc
    return parse_answer_labels(response.text)
