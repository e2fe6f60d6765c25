"""Small string helpers shared by the graph index, ERR and the searcher."""

from __future__ import annotations

import re
from collections import Counter

_QUALIFIER = re.compile(r"\s*\[[^\[\]]*\]\s*$")


def base_name(name: str) -> str:
    """Strip a trailing bracketed qualifier: ``"Jackie Chan [actor]"`` -> ``"Jackie Chan"``."""
    return _QUALIFIER.sub("", name).strip()


def char_bigrams(text: str) -> Counter[str]:
    return Counter(text[i : i + 2] for i in range(len(text) - 1))


def bigram_dice(a: str, b: str) -> float:
    """Dice coefficient over character-bigram multisets.

    ``2 * |A & B| / (|A| + |B|)``.  Identical strings score 1 even when they
    are too short to have bigrams.
    """
    if a == b:
        return 1.0
    ba, bb = char_bigrams(a), char_bigrams(b)
    total = sum(ba.values()) + sum(bb.values())
    if total == 0:
        return 0.0
    return 2.0 * sum((ba & bb).values()) / total
