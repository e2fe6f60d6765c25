"""The CQL subset: parse, render, mention extraction/substitution, execution."""

from kgqa.cql.ast import (
    Comparison,
    CountStar,
    CqlAst,
    CqlError,
    CqlValidationError,
    Hop,
    Node,
    OrderBy,
    PropertyRef,
)
from kgqa.cql.executor import AnswerSet, ExecutionError, execute_cql, execute_rows
from kgqa.cql.mentions import (
    SubstitutionError,
    extract_entities,
    extract_relations,
    replace_mentions,
    substitute,
)
from kgqa.cql.parser import CqlSyntaxError, UnsupportedFeatureError, parse_cql, render_cql

__all__ = [
    "AnswerSet",
    "Comparison",
    "CountStar",
    "CqlAst",
    "CqlError",
    "CqlSyntaxError",
    "CqlValidationError",
    "ExecutionError",
    "Hop",
    "Node",
    "OrderBy",
    "PropertyRef",
    "SubstitutionError",
    "UnsupportedFeatureError",
    "execute_cql",
    "execute_rows",
    "extract_entities",
    "extract_relations",
    "parse_cql",
    "render_cql",
    "replace_mentions",
    "substitute",
]
