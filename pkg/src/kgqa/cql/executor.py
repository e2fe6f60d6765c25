"""Evaluate a parsed query against a :class:`~kgqa.graph.KnowledgeGraph`."""

from __future__ import annotations

import re
from typing import Iterator, Union

from kgqa.cql.ast import CountStar, CqlAst, CqlError, Hop, PropertyRef
from kgqa.cql.parser import parse_cql
from kgqa.graph import KnowledgeGraph, Triple

AnswerSet = frozenset  # frozenset[str]; order never matters

_NUMBER = re.compile(r"-?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?")


class ExecutionError(CqlError):
    """A query referenced something the executor cannot resolve."""


Binding = tuple[tuple[str, ...], tuple[Triple, ...]]


def as_number(value: str) -> float | None:
    if _NUMBER.fullmatch(value.strip()):
        return float(value)
    return None


def sort_key(value: str) -> tuple[int, float, str]:
    """Numbers sort numerically and before text; text sorts lexicographically."""
    n = as_number(value)
    return (0, n, "") if n is not None else (1, 0.0, value)


def compare(value: str, op: str, literal: str | int | float) -> bool:
    if op == "CONTAINS":
        return (literal if isinstance(literal, str) else repr(literal)) in value
    if op in ("=", "<>"):
        if isinstance(literal, str):
            equal = value == literal
        else:
            n = as_number(value)
            equal = n is not None and n == literal
        return equal if op == "=" else not equal
    if isinstance(literal, str):
        a: float | str = value
        b: float | str = literal
    else:
        n = as_number(value)
        if n is None:
            return False
        a, b = n, float(literal)
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    raise ExecutionError(f"unknown operator {op!r}")


def _step(graph: KnowledgeGraph, source: str, hop: Hop) -> Iterator[tuple[str, Triple]]:
    if hop.direction == "forward":
        for t in graph.outgoing(source, hop.relation):
            yield t.tail, t
    else:
        for t in graph.incoming(source, hop.relation):
            yield t.head, t


def _first_hop(graph: KnowledgeGraph, ast: CqlAst) -> Iterator[tuple[str, str, Triple]]:
    hop = ast.hops[0]
    anchor = ast.start.name
    if anchor is not None:
        for value, t in _step(graph, anchor, hop):
            yield anchor, value, t
        return
    for t in graph.with_relation(hop.relation):
        if hop.direction == "forward":
            yield t.head, t.tail, t
        else:
            yield t.tail, t.head, t


def _consistent(ast: CqlAst, values: tuple[str, ...]) -> bool:
    seen: dict[str, str] = {}
    for node, value in zip(ast.nodes, values):
        if node.name is not None and node.name != value:
            return False
        if node.var is not None:
            if seen.setdefault(node.var, value) != value:
                return False
    return True


def enumerate_bindings(ast: CqlAst, graph: KnowledgeGraph) -> list[Binding]:
    """All (node values, matched triples) paths for the MATCH pattern.

    A triple is used at most once per path.
    """
    partial: list[Binding] = [((a, b), (t,)) for a, b, t in _first_hop(graph, ast)]
    for hop in ast.hops[1:]:
        grown: list[Binding] = []
        for values, used in partial:
            for value, t in _step(graph, values[-1], hop):
                if t not in used:
                    grown.append((values + (value,), used + (t,)))
        partial = grown
    return [b for b in partial if _consistent(ast, b[0])]


def _resolver(ast: CqlAst, ref: PropertyRef):
    if ref.prop not in (None, "name"):
        raise ExecutionError(f"property {ref} is not available; nodes only carry 'name'")
    for i, node in enumerate(ast.nodes):
        if node.var == ref.var:
            return lambda values, i=i: values[i]
    raise ExecutionError(f"variable {ref.var!r} is not bound")


def execute_rows(ast: CqlAst, graph: KnowledgeGraph) -> list[tuple[str, ...]]:
    """Ordered result rows, after WHERE, ORDER BY, DISTINCT and LIMIT."""
    conditions = [(_resolver(ast, c.ref), c) for c in ast.where]
    projections = [None if isinstance(p, CountStar) else _resolver(ast, p) for p in ast.projections]
    order = _resolver(ast, ast.order_by.ref) if ast.order_by is not None else None

    kept = []
    for values, _ in enumerate_bindings(ast, graph):
        if all(compare(get(values), c.op, c.value) for get, c in conditions):
            kept.append(values)

    if ast.is_count:
        return [(str(len(kept)),)]

    kept.sort()
    if order is not None:
        kept.sort(key=lambda v: sort_key(order(v)), reverse=ast.order_by.descending)
    rows = [tuple(get(v) for get in projections) for v in kept]
    if ast.distinct:
        rows = list(dict.fromkeys(rows))
    if ast.limit is not None:
        rows = rows[: ast.limit]
    return rows


def execute_cql(query: Union[CqlAst, str], graph: KnowledgeGraph) -> frozenset[str]:
    """Run a query and return its answers as a set of strings.

    Every projected value of every kept row becomes one answer; ``count(*)``
    yields the decimal count.  A missing anchor entity gives an empty set.
    """
    ast = parse_cql(query) if isinstance(query, str) else query
    return frozenset(v for row in execute_rows(ast, graph) for v in row)

