"""Tokenizer, recursive-descent parser and canonical renderer for CQL."""

from __future__ import annotations

import re
from dataclasses import dataclass

from kgqa.cql.ast import (
    MAX_HOPS,
    Comparison,
    CountStar,
    CqlAst,
    CqlError,
    CqlValidationError,
    Hop,
    Node,
    OrderBy,
    Projection,
    PropertyRef,
    Scalar,
)


class CqlSyntaxError(CqlError):
    def __init__(self, message: str, position: int, expected: str | None = None):
        hint = f" (expected {expected})" if expected else ""
        super().__init__(f"{message} at position {position}{hint}")
        self.position = position
        self.expected = expected


class UnsupportedFeatureError(CqlError):
    def __init__(self, construct: str, position: int | None = None):
        where = f" at position {position}" if position is not None else ""
        super().__init__(f"unsupported feature: {construct}{where}")
        self.construct = construct
        self.position = position


ENTITY_LABEL = "ENTITY"
RELATION_TYPE = "Relationship"

_UNSUPPORTED_CLAUSES = {
    "OPTIONAL": "OPTIONAL MATCH",
    "WITH": "WITH clause",
    "UNWIND": "UNWIND clause",
    "CREATE": "write clause CREATE",
    "MERGE": "write clause MERGE",
    "SET": "write clause SET",
    "DELETE": "write clause DELETE",
    "DETACH": "write clause DETACH DELETE",
    "REMOVE": "write clause REMOVE",
    "UNION": "UNION",
    "CALL": "procedure CALL",
    "SKIP": "SKIP",
    "MATCH": "multiple MATCH clauses",
}
_UNSUPPORTED_PREDICATES = {
    "OR": "OR in WHERE",
    "XOR": "XOR in WHERE",
    "NOT": "NOT in WHERE",
    "IN": "IN predicate",
    "STARTS": "STARTS WITH predicate",
    "ENDS": "ENDS WITH predicate",
    "IS": "IS NULL predicate",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<string>"(?:[^"\\]|\\.)*"|'(?:[^'\\]|\\.)*')
  | (?P<number>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
  | (?P<ident>[^\W\d]\w*|`[^`]+`)
  | (?P<op><>|<=|>=|[()\[\]{}:,.\-<>=*;])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # string | number | ident | op | eof
    value: str
    pos: int

    def is_kw(self, *words: str) -> bool:
        return self.kind == "ident" and self.value.upper() in words

    def is_op(self, *ops: str) -> bool:
        return self.kind == "op" and self.value in ops


def _unescape(body: str) -> str:
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\" and i + 1 < len(body):
            nxt = body[i + 1]
            out.append({"n": "\n", "t": "\t"}.get(nxt, nxt))
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            if text[pos] in "\"'":
                raise CqlSyntaxError("unterminated string literal", pos)
            raise CqlSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind == "string":
            tokens.append(Token("string", _unescape(m.group()[1:-1]), pos))
        elif kind == "ident" and m.group().startswith("`"):
            raise UnsupportedFeatureError("backtick-quoted identifier", pos)
        elif kind != "ws":
            tokens.append(Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(Token("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def fail(self, expected: str) -> CqlSyntaxError:
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.value)
        return CqlSyntaxError(f"unexpected {found}", t.pos, expected)

    def expect_op(self, op: str) -> Token:
        if not self.tok.is_op(op):
            raise self.fail(repr(op))
        return self.advance()

    def expect_kw(self, word: str) -> Token:
        if not self.tok.is_kw(word):
            raise self.fail(word)
        return self.advance()

    def expect_ident(self, what: str) -> Token:
        if self.tok.kind != "ident":
            raise self.fail(what)
        return self.advance()

    def check_unsupported_clause(self) -> None:
        t = self.tok
        if t.kind == "ident" and t.value.upper() in _UNSUPPORTED_CLAUSES:
            raise UnsupportedFeatureError(_UNSUPPORTED_CLAUSES[t.value.upper()], t.pos)

    # query := MATCH path [WHERE cond] RETURN [DISTINCT] proj {, proj}
    #          [ORDER BY ref [ASC|DESC]] [LIMIT n] [;]
    def parse(self) -> CqlAst:
        if not self.tok.is_kw("MATCH"):
            self.check_unsupported_clause()
        self.expect_kw("MATCH")
        start, hops = self.parse_path()
        where: list[Comparison] = []
        if self.tok.is_kw("WHERE"):
            self.advance()
            where = self.parse_conditions()
        self.check_unsupported_clause()
        self.expect_kw("RETURN")
        distinct = False
        if self.tok.is_kw("DISTINCT"):
            self.advance()
            distinct = True
        projections = self.parse_projections()
        order_by = None
        if self.tok.is_kw("ORDER"):
            self.advance()
            self.expect_kw("BY")
            order_by = self.parse_order()
        self.check_unsupported_clause()
        limit = None
        if self.tok.is_kw("LIMIT"):
            self.advance()
            t = self.tok
            if t.kind != "number" or not t.value.isdigit():
                raise self.fail("positive integer")
            self.advance()
            limit = int(t.value)
            if limit < 1:
                raise CqlSyntaxError("limit must be positive", t.pos)
        if self.tok.is_op(";"):
            self.advance()
        self.check_unsupported_clause()
        if self.tok.kind != "eof":
            raise self.fail("end of query")
        try:
            return CqlAst(
                start=start,
                hops=tuple(hops),
                projections=tuple(projections),
                distinct=distinct,
                where=tuple(where),
                order_by=order_by,
                limit=limit,
            )
        except CqlValidationError as exc:
            raise CqlSyntaxError(str(exc), 0) from None

    def parse_path(self) -> tuple[Node, list[Hop]]:
        start = self.parse_node()
        hops: list[Hop] = []
        while self.tok.is_op("-", "<"):
            pos = self.tok.pos
            relation, direction = self.parse_relationship()
            if len(hops) == MAX_HOPS:
                raise UnsupportedFeatureError(f"path longer than {MAX_HOPS} hops", pos)
            hops.append(Hop(relation, direction, self.parse_node()))
        if self.tok.is_op(","):
            raise UnsupportedFeatureError("multiple comma-separated patterns", self.tok.pos)
        if not hops:
            raise self.fail("relationship pattern")
        return start, hops

    def parse_node(self) -> Node:
        self.expect_op("(")
        var = None
        name = None
        if self.tok.kind == "ident":
            var = self.advance().value
        if self.tok.is_op(":"):
            self.advance()
            label = self.expect_ident("node label")
            if label.value.upper() != ENTITY_LABEL:
                raise UnsupportedFeatureError(f"node label {label.value!r}", label.pos)
            if self.tok.is_op(":"):
                raise UnsupportedFeatureError("multiple node labels", self.tok.pos)
        if self.tok.is_op("{"):
            name = self.parse_name_map("node")
        self.expect_op(")")
        return Node(var, name)

    def parse_name_map(self, what: str) -> str:
        self.expect_op("{")
        key = self.expect_ident("property key")
        if key.value != "name":
            raise UnsupportedFeatureError(f"{what} property {key.value!r}", key.pos)
        self.expect_op(":")
        if self.tok.kind != "string":
            raise self.fail("string literal")
        value = self.advance().value
        if self.tok.is_op(","):
            raise UnsupportedFeatureError(f"multiple {what} properties", self.tok.pos)
        self.expect_op("}")
        if not value:
            raise CqlSyntaxError("empty name", self.tokens[self.i - 2].pos)
        return value

    def parse_relationship(self) -> tuple[str, str]:
        backward = False
        if self.tok.is_op("<"):
            self.advance()
            backward = True
        self.expect_op("-")
        if not self.tok.is_op("["):
            raise UnsupportedFeatureError("relationship without type and name", self.tok.pos)
        self.advance()
        if self.tok.kind == "ident":
            raise UnsupportedFeatureError("relationship variable", self.tok.pos)
        if not self.tok.is_op(":"):
            raise UnsupportedFeatureError("relationship without type and name", self.tok.pos)
        self.advance()
        rtype = self.expect_ident("relationship type")
        if rtype.value.upper() != RELATION_TYPE.upper():
            raise UnsupportedFeatureError(f"relationship type {rtype.value!r}", rtype.pos)
        if self.tok.is_op("*"):
            raise UnsupportedFeatureError("variable-length relationship", self.tok.pos)
        if not self.tok.is_op("{"):
            raise UnsupportedFeatureError("relationship without name", self.tok.pos)
        relation = self.parse_name_map("relationship")
        if self.tok.is_op("*"):
            raise UnsupportedFeatureError("variable-length relationship", self.tok.pos)
        self.expect_op("]")
        self.expect_op("-")
        forward = False
        if self.tok.is_op(">"):
            self.advance()
            forward = True
        if forward and backward:
            raise UnsupportedFeatureError("bidirectional relationship", self.tok.pos)
        if not (forward or backward):
            raise UnsupportedFeatureError("undirected relationship", self.tok.pos)
        return relation, "forward" if forward else "backward"

    def parse_ref(self) -> PropertyRef:
        var = self.expect_ident("variable")
        if self.tok.is_op("("):
            raise UnsupportedFeatureError(f"function {var.value}()", var.pos)
        if self.tok.is_op("."):
            self.advance()
            prop = self.expect_ident("property name")
            return PropertyRef(var.value, prop.value)
        return PropertyRef(var.value, None)

    def parse_conditions(self) -> list[Comparison]:
        conds = [self.parse_comparison()]
        while True:
            t = self.tok
            if t.is_kw("AND"):
                self.advance()
                conds.append(self.parse_comparison())
            elif t.kind == "ident" and t.value.upper() in _UNSUPPORTED_PREDICATES:
                raise UnsupportedFeatureError(_UNSUPPORTED_PREDICATES[t.value.upper()], t.pos)
            else:
                return conds

    def parse_comparison(self) -> Comparison:
        t = self.tok
        if t.kind == "ident" and t.value.upper() in _UNSUPPORTED_PREDICATES:
            raise UnsupportedFeatureError(_UNSUPPORTED_PREDICATES[t.value.upper()], t.pos)
        if t.is_op("("):
            raise UnsupportedFeatureError("parenthesised condition", t.pos)
        ref = self.parse_ref()
        t = self.tok
        if t.is_op("=", "<>", "<", "<=", ">", ">="):
            op = self.advance().value
        elif t.is_kw("CONTAINS"):
            self.advance()
            op = "CONTAINS"
        elif t.kind == "ident" and t.value.upper() in _UNSUPPORTED_PREDICATES:
            raise UnsupportedFeatureError(_UNSUPPORTED_PREDICATES[t.value.upper()], t.pos)
        else:
            raise self.fail("comparison operator")
        return Comparison(ref, op, self.parse_literal())

    def parse_literal(self) -> Scalar:
        negative = False
        if self.tok.is_op("-"):
            self.advance()
            negative = True
        t = self.tok
        if t.kind == "string" and not negative:
            self.advance()
            return t.value
        if t.kind == "number":
            self.advance()
            if re.fullmatch(r"\d+", t.value):
                n: int | float = int(t.value)
            else:
                n = float(t.value)
            return -n if negative else n
        if t.kind == "ident":
            raise UnsupportedFeatureError("non-literal comparison operand", t.pos)
        raise self.fail("literal")

    def parse_projections(self) -> list[Projection]:
        projections = [self.parse_projection()]
        while self.tok.is_op(","):
            self.advance()
            projections.append(self.parse_projection())
        if any(isinstance(p, CountStar) for p in projections) and len(projections) > 1:
            raise UnsupportedFeatureError("count(*) combined with other projections")
        return projections

    def parse_projection(self) -> Projection:
        t = self.tok
        if t.is_op("*"):
            raise UnsupportedFeatureError("RETURN *", t.pos)
        if t.is_kw("COUNT") and self.peek().is_op("("):
            self.advance()
            self.advance()
            if not self.tok.is_op("*"):
                raise UnsupportedFeatureError("count(expression); only count(*) is supported", t.pos)
            self.advance()
            self.expect_op(")")
            return CountStar()
        ref = self.parse_ref()
        if self.tok.is_kw("AS"):
            raise UnsupportedFeatureError("projection alias", self.tok.pos)
        return ref

    def parse_order(self) -> OrderBy:
        t = self.tok
        if t.is_kw("COUNT"):
            raise UnsupportedFeatureError("ORDER BY aggregate", t.pos)
        ref = self.parse_ref()
        descending = False
        if self.tok.is_kw("ASC", "ASCENDING"):
            self.advance()
        elif self.tok.is_kw("DESC", "DESCENDING"):
            self.advance()
            descending = True
        if self.tok.is_op(","):
            raise UnsupportedFeatureError("multiple ORDER BY keys", self.tok.pos)
        return OrderBy(ref, descending)


def parse_cql(text: str) -> CqlAst:
    """Parse a query; keywords are case-insensitive, names keep their case.

    Raises:
        CqlSyntaxError: malformed text, with position and expected-token hint.
        UnsupportedFeatureError: valid Cypher outside the supported subset.
    """
    if not text or not text.strip():
        raise CqlSyntaxError("empty query", 0, "MATCH")
    return _Parser(text).parse()


def quote(value: str) -> str:
    return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _render_node(node: Node) -> str:
    inner = node.var or ""
    if node.name is not None:
        inner += f":{ENTITY_LABEL}{{name:{quote(node.name)}}}"
    return f"({inner})"


def _render_literal(value: Scalar) -> str:
    if isinstance(value, str):
        return quote(value)
    return repr(value)


def render_cql(ast: CqlAst) -> str:
    """Canonical text: lowercase keywords, single spaces, double-quoted names."""
    parts = [_render_node(ast.start)]
    for hop in ast.hops:
        rel = f"[:{RELATION_TYPE}{{name:{quote(hop.relation)}}}]"
        parts.append(f"-{rel}->" if hop.direction == "forward" else f"<-{rel}-")
        parts.append(_render_node(hop.target))
    out = ["match " + "".join(parts)]
    if ast.where:
        conds = []
        for c in ast.where:
            op = "contains" if c.op == "CONTAINS" else c.op
            conds.append(f"{c.ref} {op} {_render_literal(c.value)}")
        out.append("where " + " and ".join(conds))
    out.append("return " + ("distinct " if ast.distinct else "") + ", ".join(map(str, ast.projections)))
    if ast.order_by is not None:
        out.append(f"order by {ast.order_by.ref}" + (" desc" if ast.order_by.descending else ""))
    if ast.limit is not None:
        out.append(f"limit {ast.limit}")
    return " ".join(out)
