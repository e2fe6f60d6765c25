"""Answer-set scores and corpus aggregation.

Per question: precision, recall and F1 of the predicted answer set against
the gold set, plus logical-form and execution match flags.  Corpus scores
are plain means over questions.
"""

from __future__ import annotations

import math
import re
from dataclasses import asdict, dataclass, field
from typing import Any, Iterable, Sequence

from kgqa.cql import CqlError, parse_cql, render_cql

_KEYWORDS = frozenset(
    "match optional where and or xor not return distinct order by asc ascending desc descending "
    "limit skip count contains starts ends with in is null as union unwind create merge set delete".split()
)
_FALLBACK = re.compile(r"""("(?:[^"\\]|\\.)*")|'((?:[^'\\]|\\.)*)'|(\s+)|(\w+)""")


def prf1(pred: Iterable[str], gold: Iterable[str]) -> tuple[float, float, float]:
    """Precision, recall and F1 of ``pred`` against ``gold``.

    Both empty scores (1, 1, 1); exactly one empty scores (0, 0, 0).
    """
    pred, gold = set(pred), set(gold)
    if not pred and not gold:
        return 1.0, 1.0, 1.0
    if not pred or not gold:
        return 0.0, 0.0, 0.0
    hit = len(pred & gold)
    p = hit / len(pred)
    r = hit / len(gold)
    f1 = 0.0 if p + r == 0 else 2 * p * r / (p + r)
    return p, r, f1


def f1_score(pred: Iterable[str], gold: Iterable[str]) -> float:
    return prf1(pred, gold)[2]


def _fallback_token(m: re.Match[str]) -> str:
    dq, sq, ws, word = m.groups()
    if dq is not None:
        return dq
    if sq is not None:
        body = re.sub(r"\\'", "'", sq)
        return '"' + re.sub(r'(?<!\\)"', r'\\"', body) + '"'
    if ws is not None:
        return " "
    return word.lower() if word.lower() in _KEYWORDS else word


def normalize_cql(text: str) -> str:
    """Canonical text for logical-form comparison.

    Parseable queries are re-rendered.  Anything else gets keyword
    lowercasing, whitespace collapsing and double quotes only.  Condition
    order is deliberately kept, so reordered WHERE clauses do not match.
    """
    try:
        return render_cql(parse_cql(text))
    except CqlError:
        return _FALLBACK.sub(_fallback_token, text).strip()


def logical_match(pred_cql: str | None, gold_cql: str | None) -> bool:
    if not pred_cql or not gold_cql:
        return False
    return normalize_cql(pred_cql) == normalize_cql(gold_cql)


def logical_accuracy(pairs: Sequence[tuple[str | None, str | None]]) -> float:
    if not pairs:
        raise ValueError("logical accuracy of an empty corpus is undefined")
    return sum(logical_match(p, g) for p, g in pairs) / len(pairs)


@dataclass
class EvaluationRecord:
    question: str
    gold_answers: frozenset[str]
    pred_answers: frozenset[str]
    gold_cql: str | None = None
    pred_cql: str | None = None
    p: float = 0.0
    r: float = 0.0
    f1: float = 0.0
    logical_match: bool = False
    execution_match: bool = False
    difficulty: str | None = None
    translator_answers: frozenset[str] | None = None
    searcher_answers: frozenset[str] | None = None
    errors: list[str] = field(default_factory=list)

    @classmethod
    def score(
        cls,
        question: str,
        gold_answers: Iterable[str],
        pred_answers: Iterable[str],
        gold_cql: str | None = None,
        pred_cql: str | None = None,
        **extra: Any,
    ) -> "EvaluationRecord":
        gold, pred = frozenset(gold_answers), frozenset(pred_answers)
        p, r, f1 = prf1(pred, gold)
        return cls(
            question=question,
            gold_answers=gold,
            pred_answers=pred,
            gold_cql=gold_cql,
            pred_cql=pred_cql,
            p=p,
            r=r,
            f1=f1,
            logical_match=logical_match(pred_cql, gold_cql),
            execution_match=pred == gold,
            **extra,
        )

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        for key in ("gold_answers", "pred_answers", "translator_answers", "searcher_answers"):
            if d[key] is not None:
                d[key] = sorted(d[key])
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "EvaluationRecord":
        d = dict(d)
        for key in ("gold_answers", "pred_answers", "translator_answers", "searcher_answers"):
            if d.get(key) is not None:
                d[key] = frozenset(d[key])
        return cls(**d)


def execution_accuracy(records: Sequence[EvaluationRecord]) -> float:
    if not records:
        raise ValueError("execution accuracy of an empty corpus is undefined")
    return sum(r.pred_answers == r.gold_answers for r in records) / len(records)


def _means(records: Sequence[EvaluationRecord]) -> dict[str, float]:
    # fsum is exactly rounded, so the means do not depend on record order
    n = len(records)
    return {
        "acc_lx": sum(r.logical_match for r in records) / n,
        "acc_ex": sum(r.execution_match for r in records) / n,
        "precision": math.fsum(r.p for r in records) / n,
        "recall": math.fsum(r.r for r in records) / n,
        "f1": math.fsum(r.f1 for r in records) / n,
    }


@dataclass
class Report:
    acc_lx: float
    acc_ex: float
    macro_p: float
    macro_r: float
    macro_f1: float
    records: list[EvaluationRecord]
    config: dict[str, Any] = field(default_factory=dict)
    by_difficulty: dict[str, dict[str, float]] = field(default_factory=dict)

    def aggregates(self) -> dict[str, float]:
        return {
            "acc_lx": self.acc_lx,
            "acc_ex": self.acc_ex,
            "precision": self.macro_p,
            "recall": self.macro_r,
            "f1": self.macro_f1,
        }

    def to_dict(self) -> dict[str, Any]:
        return {
            "aggregates": self.aggregates(),
            "by_difficulty": self.by_difficulty,
            "config": self.config,
            "records": [r.to_dict() for r in self.records],
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Report":
        a = d["aggregates"]
        return cls(
            acc_lx=a["acc_lx"],
            acc_ex=a["acc_ex"],
            macro_p=a["precision"],
            macro_r=a["recall"],
            macro_f1=a["f1"],
            records=[EvaluationRecord.from_dict(r) for r in d["records"]],
            config=d.get("config", {}),
            by_difficulty=d.get("by_difficulty", {}),
        )


def aggregate(records: Sequence[EvaluationRecord], config: dict[str, Any] | None = None) -> Report:
    """Macro-average per-question scores, overall and per difficulty tag."""
    if not records:
        raise ValueError("cannot aggregate an empty corpus")
    m = _means(records)
    groups: dict[str, list[EvaluationRecord]] = {}
    for r in records:
        if r.difficulty is not None:
            groups.setdefault(r.difficulty, []).append(r)
    by_difficulty = {k: dict(_means(v), count=len(v)) for k, v in sorted(groups.items())}
    return Report(
        acc_lx=m["acc_lx"],
        acc_ex=m["acc_ex"],
        macro_p=m["precision"],
        macro_r=m["recall"],
        macro_f1=m["f1"],
        records=list(records),
        config=dict(config or {}),
        by_difficulty=by_difficulty,
    )
