"""Combining translator answers ``s`` with searcher answers ``i``.

``dda`` is the dynamic decision rule: keep the translator answer when its F1
clears the threshold ``sigma``, otherwise take whichever answer scores
higher.  It needs gold answers, so it is an evaluation-time procedure.
``bna`` is the gold-free baseline: fall back to retrieval only when
execution returned nothing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import AbstractSet, Literal

from kgqa.metrics import f1_score

Rule = Literal["dda", "bna"]
Answers = AbstractSet[str]


@dataclass(frozen=True)
class FusionConfig:
    sigma: float = 1.0
    rule: Rule = "dda"

    def __post_init__(self) -> None:
        if not 0.0 <= self.sigma <= 1.0:
            raise ValueError(f"sigma must lie in [0, 1], got {self.sigma}")
        if self.rule not in ("dda", "bna"):
            raise ValueError(f"unknown fusion rule {self.rule!r}")


def better(a: Answers, b: Answers, gold: Answers) -> Answers:
    """The answer with the higher F1; ``a`` wins ties."""
    return a if f1_score(a, gold) >= f1_score(b, gold) else b


def dda(s: Answers, i: Answers, gold: Answers, sigma: float = 1.0) -> Answers:
    if not 0.0 <= sigma <= 1.0:
        raise ValueError(f"sigma must lie in [0, 1], got {sigma}")
    if s:
        return s if f1_score(s, gold) >= sigma else better(s, i, gold)
    # An empty translator answer never passes the threshold test itself.
    # The searcher answer is accepted when it clears sigma (always at
    # sigma = 0, which is exactly bna); otherwise the better one wins.
    return i if f1_score(i, gold) >= sigma else better(s, i, gold)


def bna(s: Answers, i: Answers) -> Answers:
    return s if s else i


def fuse(s: Answers, i: Answers, gold: Answers | None, config: FusionConfig) -> Answers:
    if config.rule == "bna":
        return bna(s, i)
    if gold is None:
        raise ValueError("dda needs gold answers; use rule='bna' for gold-free fusion")
    return dda(s, i, gold, config.sigma)
