"""Regex-level access to entity/relation names inside raw CQL text.

These work on text that does not need to parse, so a generated query with
a broken tail still yields its names and can still be repaired.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Literal

from kgqa.cql.ast import CqlError

Kind = Literal["entity", "relation"]

_STRING = r"""("(?:[^"\\]|\\.)*"|'(?:[^'\\]|\\.)*')"""
_PATTERNS: dict[str, re.Pattern[str]] = {
    "entity": re.compile(r":\s*(?i:ENTITY)\s*\{\s*name\s*:\s*" + _STRING),
    "relation": re.compile(r"\[\s*\w*\s*:\s*(?i:Relationship)\s*\{\s*name\s*:\s*" + _STRING),
}


class SubstitutionError(CqlError):
    def __init__(self, kind: str, mention: str, occurrence: int):
        super().__init__(f"no occurrence {occurrence} of {kind} mention {mention!r}")
        self.kind = kind
        self.mention = mention
        self.occurrence = occurrence


@dataclass(frozen=True)
class Mention:
    value: str
    start: int  # span of the quoted literal, quotes included
    end: int
    quote: str


def _unescape(body: str) -> str:
    return re.sub(r"\\(.)", lambda m: {"n": "\n", "t": "\t"}.get(m.group(1), m.group(1)), body, flags=re.S)


def _escape(value: str, quote: str) -> str:
    return quote + value.replace("\\", "\\\\").replace(quote, "\\" + quote) + quote


def find_mentions(text: str, kind: Kind) -> list[Mention]:
    if kind not in _PATTERNS:
        raise ValueError(f"kind must be 'entity' or 'relation', got {kind!r}")
    out = []
    for m in _PATTERNS[kind].finditer(text):
        lit = m.group(1)
        out.append(Mention(_unescape(lit[1:-1]), m.start(1), m.end(1), lit[0]))
    return out


def extract_entities(text: str) -> list[str]:
    return [m.value for m in find_mentions(text, "entity")]


def extract_relations(text: str) -> list[str]:
    return [m.value for m in find_mentions(text, "relation")]


def _splice(text: str, edits: list[tuple[Mention, str]]) -> str:
    for mention, new in sorted(edits, key=lambda e: e[0].start, reverse=True):
        if new == mention.value:
            continue
        text = text[: mention.start] + _escape(new, mention.quote) + text[mention.end :]
    return text


def substitute(text: str, old: str, new: str, kind: Kind, occurrence: int = 0) -> str:
    """Replace the ``occurrence``-th ``kind`` mention whose value is ``old``.

    Everything outside that one literal is left byte-identical.
    """
    matches = [m for m in find_mentions(text, kind) if m.value == old]
    if occurrence < 0 or occurrence >= len(matches):
        raise SubstitutionError(kind, old, occurrence)
    return _splice(text, [(matches[occurrence], new)])


def replace_mentions(text: str, kind: Kind, replacements: list[str]) -> str:
    """Replace every ``kind`` mention, positionally, with ``replacements``."""
    mentions = find_mentions(text, kind)
    if len(mentions) != len(replacements):
        raise ValueError(f"{len(mentions)} {kind} mentions but {len(replacements)} replacements")
    return _splice(text, list(zip(mentions, replacements)))
