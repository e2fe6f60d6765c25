"""AST for the supported CQL subset.

A query is one linear MATCH path of 1-2 hops, an optional WHERE conjunction,
a RETURN clause, and optional ORDER BY / LIMIT.  Nodes are bound to plain
string values: the head or tail text of the matched triples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Union

Direction = Literal["forward", "backward"]
OPERATORS: tuple[str, ...] = ("=", "<>", "<", "<=", ">", ">=", "CONTAINS")
Scalar = Union[str, int, float]

MAX_HOPS = 2


class CqlError(Exception):
    """Base class for CQL errors."""


class CqlValidationError(CqlError, ValueError):
    """An AST violates a structural invariant."""


@dataclass(frozen=True)
class Node:
    var: str | None = None
    name: str | None = None  # entity anchor: (:ENTITY{name:"..."})


@dataclass(frozen=True)
class Hop:
    relation: str
    direction: Direction
    target: Node


@dataclass(frozen=True)
class PropertyRef:
    var: str
    prop: str | None = "name"  # None -> bare variable

    def __str__(self) -> str:
        return self.var if self.prop is None else f"{self.var}.{self.prop}"


@dataclass(frozen=True)
class CountStar:
    def __str__(self) -> str:
        return "count(*)"


Projection = Union[PropertyRef, CountStar]


@dataclass(frozen=True)
class Comparison:
    ref: PropertyRef
    op: str
    value: Scalar


@dataclass(frozen=True)
class OrderBy:
    ref: PropertyRef
    descending: bool = False


@dataclass(frozen=True)
class CqlAst:
    start: Node
    hops: tuple[Hop, ...]
    projections: tuple[Projection, ...]
    distinct: bool = False
    where: tuple[Comparison, ...] = ()
    order_by: OrderBy | None = None
    limit: int | None = None

    def __post_init__(self) -> None:
        if not 1 <= len(self.hops) <= MAX_HOPS:
            raise CqlValidationError(f"pattern must have 1-{MAX_HOPS} hops, got {len(self.hops)}")
        if not self.projections:
            raise CqlValidationError("return clause is empty")
        counts = sum(isinstance(p, CountStar) for p in self.projections)
        if counts and len(self.projections) > 1:
            raise CqlValidationError("count(*) must be the only projection")
        for node in self.nodes:
            if node.name is not None and not node.name:
                raise CqlValidationError("entity anchor name is empty")
        for hop in self.hops:
            if not hop.relation:
                raise CqlValidationError("relation name is empty")
            if hop.direction not in ("forward", "backward"):
                raise CqlValidationError(f"bad direction {hop.direction!r}")
        bound = self.variables
        refs = [p for p in self.projections if isinstance(p, PropertyRef)]
        refs += [c.ref for c in self.where]
        if self.order_by is not None:
            refs.append(self.order_by.ref)
        for ref in refs:
            if ref.var not in bound:
                raise CqlValidationError(f"variable {ref.var!r} is not bound in the pattern")
        for c in self.where:
            if c.op not in OPERATORS:
                raise CqlValidationError(f"unknown operator {c.op!r}")
            if isinstance(c.value, bool):
                raise CqlValidationError("boolean literals are not supported")
            if isinstance(c.value, float) and not math.isfinite(c.value):
                raise CqlValidationError("non-finite numeric literal")
        if self.limit is not None and (isinstance(self.limit, bool) or self.limit < 1):
            raise CqlValidationError("limit must be a positive integer")

    @property
    def nodes(self) -> tuple[Node, ...]:
        return (self.start,) + tuple(h.target for h in self.hops)

    @property
    def variables(self) -> frozenset[str]:
        return frozenset(n.var for n in self.nodes if n.var is not None)

    @property
    def entity_anchors(self) -> list[str]:
        return [n.name for n in self.nodes if n.name is not None]

    @property
    def relations(self) -> list[str]:
        return [h.relation for h in self.hops]

    @property
    def is_count(self) -> bool:
        return isinstance(self.projections[0], CountStar)
