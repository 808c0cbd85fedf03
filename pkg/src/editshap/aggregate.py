"""Corpus-level pooling of normalized attribution scores by error type.

Normalized scores are scale-free, so pooling across sentences and metrics
is meaningful. Aggregation is a fold over per-edit statistics; partial
aggregates merge deterministically, which also makes parallel map-reduce
style pooling safe.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .core import AttributionResult, EditSet

UNTYPED = "UNK"

#: Types rarer than this are flagged low-support in the mean table.
DEFAULT_MIN_COUNT = 30


@dataclass
class TypeStats:
    """Pooled per-type sums over normalized scores."""

    count: int = 0
    total: float = 0.0
    positive: float = 0.0  # sum of positive scores
    negative_abs: float = 0.0  # |sum of negative scores|

    def add(self, value: float) -> None:
        self.count += 1
        self.total += value
        if value > 0:
            self.positive += value
        elif value < 0:
            self.negative_abs += -value

    def merge(self, other: "TypeStats") -> "TypeStats":
        return TypeStats(
            count=self.count + other.count,
            total=self.total + other.total,
            positive=self.positive + other.positive,
            negative_abs=self.negative_abs + other.negative_abs,
        )


def collect_type_stats(
    results: Iterable[tuple[EditSet, AttributionResult]]
) -> dict[str, TypeStats]:
    """Fold normalized per-edit scores into per-type statistics.

    Requires ungrouped results (one player per edit) so that scores align
    with the typed edits; untyped edits pool under ``UNK``.
    """
    stats: dict[str, TypeStats] = {}
    for es, res in results:
        if res.n != es.n_edits or any(len(g) != 1 for g in es.groups):
            raise ValueError("aggregation requires ungrouped, per-edit attribution results")
        for edit, value in zip(es.edits, res.normalized):
            key = edit.error_type or UNTYPED
            stats.setdefault(key, TypeStats()).add(value)
    return stats


def merge_type_stats(
    a: Mapping[str, TypeStats], b: Mapping[str, TypeStats]
) -> dict[str, TypeStats]:
    out = {k: TypeStats(v.count, v.total, v.positive, v.negative_abs) for k, v in a.items()}
    for key, value in b.items():
        out[key] = out[key].merge(value) if key in out else value
    return out


@dataclass(frozen=True)
class TypeMean:
    mean: float
    count: int
    low_support: bool


def means_from_stats(
    stats: Mapping[str, TypeStats], min_count: int = DEFAULT_MIN_COUNT
) -> dict[str, TypeMean]:
    return {
        key: TypeMean(s.total / s.count, s.count, s.count < min_count)
        for key, s in sorted(stats.items())
    }


def precision_from_stats(stats: Mapping[str, TypeStats]) -> dict[str, float]:
    out: dict[str, float] = {}
    for key, s in sorted(stats.items()):
        denom = s.positive + s.negative_abs
        if denom > 0:
            out[key] = s.positive / denom
    return out


def error_type_means(
    results: Iterable[tuple[EditSet, AttributionResult]],
    min_count: int = DEFAULT_MIN_COUNT,
) -> dict[str, TypeMean]:
    """Mean normalized score per error type, averaged over edits.

    Types with fewer than ``min_count`` edits are still reported but
    flagged low-support.
    """
    return means_from_stats(collect_type_stats(results), min_count)


def precision_by_type(
    results: Iterable[tuple[EditSet, AttributionResult]]
) -> dict[str, float]:
    """Per-type precision, treating positive attributions as true positives.

    ``positive_sum / (positive_sum + |negative_sum|)`` over pooled
    normalized scores; zero-scored edits contribute to neither sum, and
    types whose both sums are zero are omitted (undefined precision).
    """
    return precision_from_stats(collect_type_stats(results))
