"""Pick detection queries whose branch scores agree.

Each query carries a localization score and a classification score, both in
[0, 1]. Disagreement |p_loc - c_cls| is the uncertainty; selection keeps the
k most consistent queries, breaking ties by original index so the result is
deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import ConfigError, ValidationError


@dataclass(frozen=True)
class QueryScore:
    p_loc: float
    c_cls: float

    def __post_init__(self):
        if not (0.0 <= self.p_loc <= 1.0 and 0.0 <= self.c_cls <= 1.0):
            raise ValidationError("scores must lie in [0, 1]")


def uncertainty(q: QueryScore) -> float:
    return abs(q.p_loc - q.c_cls)


def select_queries(scores: Sequence[QueryScore], k: int) -> list[int]:
    """Indices of the k lowest-uncertainty queries, ascending by (U, index)."""
    if k < 0 or k > len(scores):
        raise ConfigError(f"k must be in [0, {len(scores)}], got {k}")
    order = sorted(range(len(scores)), key=lambda i: (uncertainty(scores[i]), i))
    return order[:k]
