"""In-memory triple store with exact and fuzzy name lookup."""

from __future__ import annotations

import csv
import os
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Iterator, TextIO

from rapidfuzz.distance import Levenshtein

from kgqa.text import base_name, bigram_dice, char_bigrams


class TripleFormatError(ValueError):
    """A record in a triple file could not be parsed."""

    def __init__(self, line_no: int, raw: str, reason: str):
        super().__init__(f"line {line_no}: {reason}: {raw!r}")
        self.line_no = line_no
        self.raw = raw
        self.reason = reason


@dataclass(frozen=True, order=True)
class Triple:
    head: str
    relation: str
    tail: str

    def __post_init__(self) -> None:
        if not self.head.strip() or not self.relation.strip():
            raise ValueError(f"head and relation must be non-empty: {self!r}")
        if not self.tail:
            raise ValueError(f"tail must be non-empty: {self!r}")


def _sort_key(t: Triple) -> tuple[str, str]:
    return (t.relation, t.tail)


class _NameIndex:
    """Candidate lookup over one vocabulary (entity names or relation names).

    Postings map each character bigram to the names containing it, so the
    "name contains mention" rule only verifies names that share every bigram
    of the mention.  Base names (qualifier stripped) are kept for the
    "mention contains base name" rule and for edit similarity.
    """

    def __init__(self, names: Iterable[str]):
        self.names: tuple[str, ...] = tuple(sorted(set(names)))
        self._name_set = frozenset(self.names)
        self._bases = {n: base_name(n) or n for n in self.names}
        by_base: dict[str, list[str]] = defaultdict(list)
        for n, b in self._bases.items():
            by_base[b].append(n)
        self._by_base = {b: tuple(ns) for b, ns in by_base.items()}
        postings: dict[str, set[str]] = defaultdict(set)
        for n in self.names:
            for bg in char_bigrams(n):
                postings[bg].add(n)
        self._postings = {k: frozenset(v) for k, v in postings.items()}

    def __contains__(self, name: str) -> bool:
        return name in self._name_set

    def _containing(self, mention: str) -> set[str]:
        grams = list(char_bigrams(mention))
        if not grams:
            return {n for n in self.names if mention in n}
        pools = sorted((self._postings.get(g, frozenset()) for g in grams), key=len)
        pool = set(pools[0]).intersection(*pools[1:])
        return {n for n in pool if mention in n}

    def _contained_bases(self, mention: str) -> set[str]:
        found: set[str] = set()
        size = len(mention)
        for i in range(size):
            for j in range(i + 1, size + 1):
                names = self._by_base.get(mention[i:j])
                if names:
                    found.update(names)
        return found

    def edit_similarity(self, mention: str, name: str) -> float:
        full = Levenshtein.normalized_similarity(mention, name)
        base = self._bases[name]
        if base == name:
            return full
        return max(full, Levenshtein.normalized_similarity(mention, base))

    def find(self, mention: str, limit: int) -> list[str]:
        if limit < 1:
            raise ValueError("limit must be positive")
        if not self.names or not mention:
            return []
        ranked: list[str] = []
        if mention in self._name_set:
            ranked.append(mention)
        lexical = (self._containing(mention) | self._contained_bases(mention)) - {mention}
        ranked.extend(sorted(lexical, key=lambda n: (-bigram_dice(mention, n), n)))
        if len(ranked) >= limit:
            return ranked[:limit]

        scored = []
        for n in self.names:
            s = self.edit_similarity(mention, n)
            if s > 0:
                scored.append((-s, n))
        scored.sort()
        seen = set(ranked)
        for _, n in scored[:limit]:
            if n not in seen:
                ranked.append(n)
        return ranked[:limit]


class KnowledgeGraph:
    """Immutable set of triples with head, relation and tail indices.

    Build with :func:`load_triples` or :meth:`from_triples`.
    """

    def __init__(self, triples: Iterable[Triple]):
        unique = sorted(set(triples))
        self._triples: tuple[Triple, ...] = tuple(unique)
        by_head: dict[str, list[Triple]] = defaultdict(list)
        by_rel: dict[str, list[Triple]] = defaultdict(list)
        by_rel_tail: dict[tuple[str, str], list[Triple]] = defaultdict(list)
        for t in unique:
            by_head[t.head].append(t)
            by_rel[t.relation].append(t)
            by_rel_tail[(t.relation, t.tail)].append(t)
        self._by_head = {h: tuple(sorted(ts, key=_sort_key)) for h, ts in by_head.items()}
        self._by_rel = {r: tuple(ts) for r, ts in by_rel.items()}
        self._by_rel_tail = {k: tuple(ts) for k, ts in by_rel_tail.items()}
        self._entities = _NameIndex(self._by_head)
        self._relations = _NameIndex(self._by_rel)
        forms: dict[str, list[str]] = defaultdict(list)
        for name in self._entities.names:
            forms[name].append(name)
        for base, names in self._entities._by_base.items():
            forms[base].extend(n for n in names if n != base)
        self._surface_forms = {k: tuple(dict.fromkeys(v)) for k, v in forms.items()}

    @classmethod
    def from_triples(cls, triples: Iterable[tuple[str, str, str] | Triple]) -> "KnowledgeGraph":
        return cls(t if isinstance(t, Triple) else Triple(*t) for t in triples)

    @property
    def triples(self) -> tuple[Triple, ...]:
        return self._triples

    @property
    def entity_names(self) -> frozenset[str]:
        return frozenset(self._by_head)

    @property
    def relation_names(self) -> frozenset[str]:
        return frozenset(self._by_rel)

    def __len__(self) -> int:
        return len(self._triples)

    def __repr__(self) -> str:
        return (
            f"KnowledgeGraph(triples={len(self._triples)}, "
            f"entities={len(self._by_head)}, relations={len(self._by_rel)})"
        )

    def has_entity(self, name: str) -> bool:
        return name in self._by_head

    def outgoing(self, head: str, relation: str | None = None) -> tuple[Triple, ...]:
        ts = self._by_head.get(head, ())
        if relation is None:
            return ts
        return tuple(t for t in ts if t.relation == relation)

    def incoming(self, tail: str, relation: str) -> tuple[Triple, ...]:
        return self._by_rel_tail.get((relation, tail), ())

    @property
    def surface_forms(self) -> dict[str, tuple[str, ...]]:
        """Entity names and their qualifier-stripped base names -> entity names."""
        return self._surface_forms

    def with_relation(self, relation: str) -> tuple[Triple, ...]:
        return self._by_rel.get(relation, ())

    def find_relative_entities(self, mention: str, limit: int = 10) -> list[str]:
        return self._entities.find(mention, limit)

    def find_relative_relations(self, mention: str, limit: int = 10) -> list[str]:
        return self._relations.find(mention, limit)

    def one_hop_subgraph(self, entity: str) -> list[Triple]:
        return list(self._by_head.get(entity, ()))

    def stats(self) -> dict[str, int]:
        return {
            "triples": len(self._triples),
            "entities": len(self._by_head),
            "relations": len(self._by_rel),
        }


def iter_triple_records(lines: Iterable[str]) -> Iterator[Triple]:
    """Parse CSV triple lines, skipping blanks and ``#`` comments."""
    for line_no, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        try:
            fields = next(csv.reader([line], skipinitialspace=True, strict=True))
        except csv.Error as exc:
            raise TripleFormatError(line_no, line, str(exc)) from None
        if len(fields) != 3:
            raise TripleFormatError(line_no, line, f"expected 3 fields, got {len(fields)}")
        head, relation, tail = (f.strip() for f in fields)
        if not head or not relation or not tail:
            raise TripleFormatError(line_no, line, "empty field")
        yield Triple(head, relation, tail)


def load_triples(source: TextIO | Iterable[str] | str | os.PathLike) -> KnowledgeGraph:
    """Build a graph from a triple file, an open stream, or an iterable of lines."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8", newline="") as fh:
            return KnowledgeGraph(iter_triple_records(fh))
    return KnowledgeGraph(iter_triple_records(source))


def find_relative_entities(mention: str, graph: KnowledgeGraph, limit: int = 10) -> list[str]:
    return graph.find_relative_entities(mention, limit)


def find_relative_relations(mention: str, graph: KnowledgeGraph, limit: int = 10) -> list[str]:
    return graph.find_relative_relations(mention, limit)


def one_hop_subgraph(entity: str, graph: KnowledgeGraph) -> list[Triple]:
    return graph.one_hop_subgraph(entity)
