"""Meta-evaluation protocols for attribution methods.

* consistency: do same-sign groups attribute to the sum of their members?
* reference agreement: do attribution signs match reference-based labels,
  and does agreement improve with attribution magnitude?
* sampling error and timing: how close are sampled Shapley values to the
  exact ones, and how does exact attribution scale with the edit count?
"""

from __future__ import annotations

import math
import statistics
import time
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import stats as _scipy_stats

from .attribution import (
    DEFAULT_EXACT_CAP,
    SamplingConfig,
    attribute,
    shapley_exact,
    shapley_sampling,
)
from .core import Edit, EditSet, EditShapError, Sentence, parse_sentence, validate_edit_set
from .edits import group_edits
from .scorer import Scorer

#: A fixed scorer, or a factory building one scorer per edit set (needed by
#: oracle scorers, which are bound to a single sentence).
ScorerLike = Scorer | Callable[[EditSet], Scorer]


class MissingReferenceError(EditShapError):
    """A sentence has no reference corrections."""


def _scorer_for(scorer: ScorerLike, es: EditSet) -> Scorer:
    if isinstance(scorer, Scorer):
        return scorer
    return scorer(es)


def _sign(x: float) -> int:
    return (x > 0) - (x < 0)


def safe_pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson correlation; NaN when either side has zero variance."""
    xa, ya = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if len(xa) < 2 or np.std(xa) == 0 or np.std(ya) == 0:
        return float("nan")
    return float(_scipy_stats.pearsonr(xa, ya).statistic)


def safe_spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Spearman correlation with average ranks for ties; NaN when degenerate."""
    xa, ya = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if len(xa) < 2 or np.std(xa) == 0 or np.std(ya) == 0:
        return float("nan")
    return float(_scipy_stats.spearmanr(xa, ya).statistic)


def _json_float(x: float) -> float | None:
    return None if math.isnan(x) else x


# ---------------------------------------------------------------------------
# Consistency (faithfulness)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GroupComparison:
    """One sentence's grouped re-attribution versus the member-sum prediction."""

    sentence_index: int
    group_masks: tuple[int, ...]  # edit-index bitmask per compared group
    predicted: tuple[float, ...]  # sum of member raw scores
    observed: tuple[float, ...]  # raw score of the grouped player
    signs_agree: tuple[bool, ...]


@dataclass(frozen=True)
class ConsistencyReport:
    records: tuple[GroupComparison, ...]
    sign_agreement_ratio: float
    pearson: float
    spearman: float
    n_sentences: int
    n_groups: int
    n_skipped: int

    def to_json(self) -> dict:
        return {
            "sign_agreement_ratio": _json_float(self.sign_agreement_ratio),
            "pearson": _json_float(self.pearson),
            "spearman": _json_float(self.spearman),
            "n_sentences": self.n_sentences,
            "n_groups": self.n_groups,
            "n_skipped": self.n_skipped,
            "records": [
                {
                    "sentence_index": r.sentence_index,
                    "group_masks": list(r.group_masks),
                    "predicted": list(r.predicted),
                    "observed": list(r.observed),
                    "signs_agree": list(r.signs_agree),
                }
                for r in self.records
            ],
        }


def consistency_csv_rows(report: ConsistencyReport) -> list[list]:
    rows: list[list] = [["sentence_index", "group_mask", "predicted", "observed", "signs_agree"]]
    for r in report.records:
        for mask, pred, obs, ok in zip(r.group_masks, r.predicted, r.observed, r.signs_agree):
            rows.append([r.sentence_index, mask, pred, obs, int(ok)])
    return rows


def evaluate_consistency(
    scorer: ScorerLike,
    method: str,
    dataset: Sequence[EditSet],
    sampling: SamplingConfig | None = None,
) -> ConsistencyReport:
    """Group same-sign edits, re-attribute, and compare against member sums.

    Sentences are skipped (and counted) when they have fewer than two
    players, when every score is zero, or when all nonzero scores share one
    sign, since the lone group would trivially receive the whole delta-M.
    Zero-scored edits stay out of both groups but remain their own players.
    """
    records: list[GroupComparison] = []
    predicted_all: list[float] = []
    observed_all: list[float] = []
    agree_count = 0
    n_skipped = 0
    for idx, es in enumerate(dataset):
        if es.n_players < 2:
            n_skipped += 1
            continue
        bound = _scorer_for(scorer, es)
        res = attribute(bound, es, method, sampling)
        pos = [p for p, phi in enumerate(res.raw) if phi > 0]
        neg = [p for p, phi in enumerate(res.raw) if phi < 0]
        if not pos or not neg:
            n_skipped += 1
            continue
        pos_edits = tuple(sorted(i for p in pos for i in es.groups[p]))
        neg_edits = tuple(sorted(i for p in neg for i in es.groups[p]))
        zero_groups = [es.groups[p] for p, phi in enumerate(res.raw) if phi == 0]
        grouped = group_edits(es, [pos_edits, neg_edits, *zero_groups])
        res_grouped = attribute(bound, grouped, method, sampling)
        masks: list[int] = []
        predicted: list[float] = []
        observed: list[float] = []
        agree: list[bool] = []
        for members, player_indices in ((pos_edits, pos), (neg_edits, neg)):
            g = grouped.groups.index(members)
            pred = math.fsum(res.raw[p] for p in player_indices)
            obs = res_grouped.raw[g]
            masks.append(sum(1 << i for i in members))
            predicted.append(pred)
            observed.append(obs)
            agree.append(_sign(pred) == _sign(obs))
        records.append(
            GroupComparison(idx, tuple(masks), tuple(predicted), tuple(observed), tuple(agree))
        )
        predicted_all.extend(predicted)
        observed_all.extend(observed)
        agree_count += sum(agree)
    n_groups = len(predicted_all)
    return ConsistencyReport(
        records=tuple(records),
        sign_agreement_ratio=agree_count / n_groups if n_groups else float("nan"),
        pearson=safe_pearson(predicted_all, observed_all),
        spearman=safe_spearman(predicted_all, observed_all),
        n_sentences=len(records),
        n_groups=n_groups,
        n_skipped=n_skipped,
    )


# ---------------------------------------------------------------------------
# Reference agreement (explainability)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EditAgreementRecord:
    sentence_index: int
    edit_index: int
    sign: int  # +1 or -1; zero-scored edits carry no label
    reference_correct: bool
    weight: float  # |normalized score|


@dataclass(frozen=True)
class ThresholdPoint:
    threshold: float
    accuracy: float
    n_edits: int


@dataclass(frozen=True)
class AgreementReport:
    records: tuple[EditAgreementRecord, ...]
    curve: tuple[ThresholdPoint, ...]
    accuracy: float  # at the all-inclusive threshold
    threshold_mode: str
    n_sentences: int
    n_skipped: int

    def to_json(self) -> dict:
        return {
            "accuracy": _json_float(self.accuracy),
            "threshold_mode": self.threshold_mode,
            "n_sentences": self.n_sentences,
            "n_skipped": self.n_skipped,
            "curve": [
                {"threshold": p.threshold, "accuracy": _json_float(p.accuracy), "n_edits": p.n_edits}
                for p in self.curve
            ],
            "records": [
                {
                    "sentence_index": r.sentence_index,
                    "edit_index": r.edit_index,
                    "sign": r.sign,
                    "reference_correct": r.reference_correct,
                    "weight": r.weight,
                }
                for r in self.records
            ],
        }


def agreement_csv_rows(report: AgreementReport) -> list[list]:
    rows: list[list] = [["threshold", "accuracy", "n_edits"]]
    for p in report.curve:
        rows.append([p.threshold, "" if math.isnan(p.accuracy) else p.accuracy, p.n_edits])
    return rows


THRESHOLDS = tuple(round(k / 10, 1) for k in range(1, 11))
_EPS = 1e-9


def _as_sentence(x: str | Sentence) -> Sentence:
    return x if isinstance(x, Sentence) else parse_sentence(x)


def reference_edit_labels(es: EditSet, reference: Sentence) -> list[bool]:
    """Label each edit correct iff it appears, span and replacement exact,
    in the edit set extracted between the source and the reference."""
    from .edits import extract_edits

    ref_edits = {(e.start, e.end, e.replacement) for e in extract_edits(es.source, reference).edits}
    return [(e.start, e.end, e.replacement) in ref_edits for e in es.edits]


def _threshold_curve(
    records: Sequence[EditAgreementRecord], mode: str
) -> tuple[ThresholdPoint, ...]:
    points = []
    for thr in THRESHOLDS:
        if mode == "below":
            admitted = [r for r in records if r.weight <= thr + _EPS]
        elif mode == "above":
            admitted = [r for r in records if r.weight >= (1.0 - thr) - _EPS]
        else:
            raise ValueError(f"unknown threshold mode {mode!r}")
        if admitted:
            acc = sum((r.sign > 0) == r.reference_correct for r in admitted) / len(admitted)
        else:
            acc = float("nan")
        points.append(ThresholdPoint(thr, acc, len(admitted)))
    return tuple(points)


def evaluate_agreement(
    scorer: ScorerLike,
    method: str,
    dataset: Sequence[EditSet],
    references: Sequence[Sequence[str | Sentence]],
    sampling: SamplingConfig | None = None,
    threshold_mode: str = "below",
) -> AgreementReport:
    """Corpus-level matching ratio between attribution signs and
    reference-derived correctness labels.

    Only sentences with at least two edits participate. With several
    references, the one agreeing best with the attribution signs is kept
    per sentence. Zero-scored edits carry no sign and are excluded. The
    default threshold rule admits edits whose |normalized score| is at or
    below the threshold; mode ``above`` admits those at or above
    ``1 - threshold``.
    """
    if len(references) != len(dataset):
        raise MissingReferenceError(
            f"{len(dataset)} sentences but {len(references)} reference lists"
        )
    records: list[EditAgreementRecord] = []
    n_sentences = 0
    n_skipped = 0
    for idx, es in enumerate(dataset):
        refs = [_as_sentence(r) for r in references[idx]]
        if not refs:
            raise MissingReferenceError(f"sentence {idx} has no references")
        if es.n_edits < 2:
            n_skipped += 1
            continue
        if any(len(g) != 1 for g in es.groups):
            raise ValueError("agreement evaluation requires ungrouped edit sets")
        bound = _scorer_for(scorer, es)
        res = attribute(bound, es, method, sampling)
        signed = [(i, _sign(res.raw[i])) for i in range(es.n_edits) if res.raw[i] != 0]
        if not signed:
            n_skipped += 1
            continue
        best: list[EditAgreementRecord] | None = None
        best_agreement = -1.0
        for ref in refs:
            labels = reference_edit_labels(es, ref)
            ref_records = [
                EditAgreementRecord(idx, i, sign, labels[i], abs(res.normalized[i]))
                for i, sign in signed
            ]
            agreement = sum((r.sign > 0) == r.reference_correct for r in ref_records) / len(
                ref_records
            )
            if agreement > best_agreement:
                best_agreement = agreement
                best = ref_records
        assert best is not None
        records.extend(best)
        n_sentences += 1
    curve = _threshold_curve(records, threshold_mode)
    return AgreementReport(
        records=tuple(records),
        curve=curve,
        accuracy=curve[-1].accuracy if curve else float("nan"),
        threshold_mode=threshold_mode,
        n_sentences=n_sentences,
        n_skipped=n_skipped,
    )


# ---------------------------------------------------------------------------
# Sampling error and timing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SamplingErrorReport:
    mean_abs_error: float
    mean_time_exact_s: float
    mean_time_sampling_s: float
    phi_abs_mean: float
    phi_abs_std: float
    t: int
    seed: int
    n_sentences: int
    n_edits: int

    def to_json(self) -> dict:
        return {
            "mean_abs_error": self.mean_abs_error,
            "mean_time_exact_s": self.mean_time_exact_s,
            "mean_time_sampling_s": self.mean_time_sampling_s,
            "phi_abs_mean": self.phi_abs_mean,
            "phi_abs_std": self.phi_abs_std,
            "t": self.t,
            "seed": self.seed,
            "n_sentences": self.n_sentences,
            "n_edits": self.n_edits,
        }


def evaluate_sampling_error(
    scorer: ScorerLike,
    dataset: Sequence[EditSet],
    cfg: SamplingConfig,
    cap: int = DEFAULT_EXACT_CAP,
) -> SamplingErrorReport:
    """Mean |sampled - exact| per edit, with per-method timing and the
    distribution of the exact absolute values.

    Each sentence samples with seed ``cfg.seed + sentence index`` so
    permutations are independent across the corpus yet reproducible.
    """
    errors: list[float] = []
    abs_phi: list[float] = []
    exact_times: list[float] = []
    sampling_times: list[float] = []
    for idx, es in enumerate(dataset):
        bound = _scorer_for(scorer, es)
        exact = shapley_exact(bound, es, cap=cap)
        sentence_cfg = SamplingConfig(cfg.t, cfg.seed + idx, cfg.without_replacement)
        sampled = shapley_sampling(bound, es, sentence_cfg)
        errors.extend(abs(a - b) for a, b in zip(sampled.raw, exact.raw))
        abs_phi.extend(abs(x) for x in exact.raw)
        exact_times.append(exact.wall_time_s)
        sampling_times.append(sampled.wall_time_s)
    n = len(dataset)
    return SamplingErrorReport(
        mean_abs_error=statistics.fmean(errors) if errors else float("nan"),
        mean_time_exact_s=statistics.fmean(exact_times) if exact_times else float("nan"),
        mean_time_sampling_s=statistics.fmean(sampling_times) if sampling_times else float("nan"),
        phi_abs_mean=statistics.fmean(abs_phi) if abs_phi else float("nan"),
        phi_abs_std=statistics.pstdev(abs_phi) if len(abs_phi) > 1 else 0.0,
        t=cfg.t,
        seed=cfg.seed,
        n_sentences=n,
        n_edits=len(abs_phi),
    )


@dataclass(frozen=True)
class TimingPoint:
    n: int
    mean_s: float
    std_s: float
    min_s: float
    scorer_calls: int


def timing_csv_rows(points: Sequence[TimingPoint]) -> list[list]:
    rows: list[list] = [["n", "mean_s", "std_s", "min_s", "scorer_calls"]]
    rows.extend([p.n, p.mean_s, p.std_s, p.min_s, p.scorer_calls] for p in points)
    return rows


def synthetic_edit_set(n: int, pad: int = 2) -> EditSet:
    """Deterministic sentence with ``n`` single-token replacement edits."""
    source = Sentence(tuple(f"tok{i}" for i in range(n + pad)))
    edits = [Edit(i, i + 1, (f"fix{i}",)) for i in range(n)]
    return validate_edit_set(source, edits)


def _default_repeats(n: int) -> int:
    if n <= 8:
        return 25
    if n <= 11:
        return 10
    return 5


def benchmark_timing(
    scorer: ScorerLike,
    n_values: Sequence[int],
    repeats: int | None = None,
    warmup: bool = True,
) -> list[TimingPoint]:
    """Wall time of exact Shapley over synthetic sentences with N edits.

    ``min_s`` (fastest of the repeats) is the noise-robust statistic;
    means and standard deviations are reported alongside. A warmup run per
    N keeps JIT compilation out of the numbers.
    """
    points: list[TimingPoint] = []
    for n in n_values:
        es = synthetic_edit_set(n)
        bound = _scorer_for(scorer, es)
        reps = repeats if repeats is not None else _default_repeats(n)
        if warmup:
            shapley_exact(bound, es)
        times: list[float] = []
        calls = 0
        for _ in range(reps):
            start = time.perf_counter()
            res = shapley_exact(bound, es)
            times.append(time.perf_counter() - start)
            calls = res.scorer_calls
        points.append(
            TimingPoint(
                n=n,
                mean_s=statistics.fmean(times),
                std_s=statistics.pstdev(times) if len(times) > 1 else 0.0,
                min_s=min(times),
                scorer_calls=calls,
            )
        )
    return points
