"""Deterministic offline backends for the three model roles.

Each stub is a pure function of the request: it reads the structured
``meta`` the engine attaches to every request and ignores the prompt text.
"""

from __future__ import annotations

import json
import os
from typing import Mapping

from kgqa.err import stub_select
from kgqa.graph import Triple
from kgqa.llm import ModelRequest
from kgqa.searcher import format_answer_labels, grounded_tails


class TranslatorStub:
    """Looks the question up in a question -> CQL table; unknown questions get ""."""

    backend_id = "stub:translator"

    def __init__(self, table: Mapping[str, str]):
        if not isinstance(table, Mapping) or not all(
            isinstance(k, str) and isinstance(v, str) for k, v in table.items()
        ):
            raise ValueError("translator table must map question strings to CQL strings")
        self.table = dict(table)

    @classmethod
    def from_file(cls, path: str | os.PathLike) -> "TranslatorStub":
        with open(path, encoding="utf-8") as fh:
            return cls(json.load(fh))

    def complete(self, request: ModelRequest) -> str:
        return self.table.get(request.meta.get("question", ""), "")


class SelectorStub:
    backend_id = "stub:selector"

    def complete(self, request: ModelRequest) -> str:
        return stub_select(request.meta["mention"], request.meta["candidates"])


class ReaderStub:
    backend_id = "stub:reader"

    def complete(self, request: ModelRequest) -> str:
        triples = [Triple(*t) for t in request.meta.get("triples", [])]
        return format_answer_labels(grounded_tails(request.meta["question"], triples))
