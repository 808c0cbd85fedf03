"""Attribution methods distributing delta-M over the edits of one sentence.

Four methods share one memoized subset cache per sentence:

* exact Shapley values over all ``2^N`` subsets,
* Shapley sampling values over ``T`` uniformly sampled edit permutations,
* the Add baseline (each edit applied alone to the source), and
* the Sub baseline (each edit removed alone from the hypothesis),

plus the sign-preserving L1 normalization applied to every result.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .core import (
    FLAG_NON_EFFECTIVE,
    FLAG_T_CAPPED,
    METHOD_ADD,
    METHOD_SAMPLING,
    METHOD_SHAPLEY,
    METHOD_SUB,
    AttributionResult,
    EditSet,
    TooManyEditsError,
)
from .scorer import Scorer, SubsetCache

#: Exhaustive enumeration cap; the underlying experiments stayed at N <= 10.
DEFAULT_EXACT_CAP = 20

#: Below this magnitude the Add/Sub raw sum counts as zero and rescaling is skipped.
ZERO_SUM_EPS = 1e-12


@dataclass(frozen=True)
class SamplingConfig:
    """Permutation-sampling parameters.

    With ``without_replacement`` (the default), ``t`` is capped at ``N!``
    and reaching the cap flags the result; at the cap the estimate equals
    exact enumeration.
    """

    t: int
    seed: int = 0
    without_replacement: bool = True

    def __post_init__(self) -> None:
        if self.t < 1:
            raise ValueError("t must be a positive integer")


def normalize(raw: Sequence[float]) -> list[float]:
    """L1-normalize attribution scores, preserving each score's sign.

    All-zero input maps to all zeros.
    """
    total = math.fsum(abs(x) for x in raw)
    if total == 0.0:
        return [0.0] * len(raw)
    return [x / total for x in raw]


def shapley_weights(n: int) -> np.ndarray:
    """Subset weights ``w[s] = s! (n-1-s)! / n!`` for ``s = 0 .. n-1``.

    Exact rational arithmetic below n=16; log-space factorials above, where
    the rationals would be needlessly slow and the products overflow-prone.
    """
    if n == 0:
        return np.zeros(0, dtype=np.float64)
    if n <= 15:
        n_fact = math.factorial(n)
        values = [
            Fraction(math.factorial(s) * math.factorial(n - 1 - s), n_fact)
            for s in range(n)
        ]
        return np.array([float(v) for v in values], dtype=np.float64)
    return np.array(
        [
            math.exp(math.lgamma(s + 1) + math.lgamma(n - s) - math.lgamma(n + 1))
            for s in range(n)
        ],
        dtype=np.float64,
    )


def _result(
    method: str,
    cache: SubsetCache,
    raw: Sequence[float],
    elapsed: float,
    *,
    sampling_t: int | None = None,
    seed: int | None = None,
    flags: Iterable[str] = (),
) -> AttributionResult:
    full = cache.edit_set.full_mask()
    return AttributionResult(
        method=method,
        delta_m=cache.delta_m(full),
        raw=tuple(raw),
        normalized=tuple(normalize(raw)),
        scorer_calls=cache.scorer_calls,
        wall_time_s=elapsed,
        sampling_t=sampling_t,
        seed=seed,
        flags=frozenset(flags),
    )


def shapley_exact(scorer: Scorer, es: EditSet, *, cap: int = DEFAULT_EXACT_CAP,
                  cache: SubsetCache | None = None) -> AttributionResult:
    """Exact Shapley values via one pass over all ``2^N`` subsets.

    Every subset's delta-M is evaluated exactly once through the cache, so
    the scorer sees exactly ``2^N`` evaluations on a fresh cache.
    """
    n = es.n_players
    if n > cap:
        raise TooManyEditsError(f"{n} players exceed the exact-Shapley cap of {cap}")
    start = time.perf_counter()
    if cache is None:
        cache = SubsetCache(scorer, es)
    size = 1 << n
    cache.ensure(range(size))
    delta = np.fromiter((cache.delta_m(m) for m in range(size)), dtype=np.float64, count=size)
    phi = _kernels.exact_combine(delta, shapley_weights(n), n)
    return _result(METHOD_SHAPLEY, cache, phi.tolist(), time.perf_counter() - start)


def _sample_permutations(n: int, cfg: SamplingConfig) -> tuple[list[tuple[int, ...]], bool]:
    """Sampled permutations and whether the requested ``t`` was capped."""
    n_fact = math.factorial(n)
    if cfg.without_replacement and cfg.t >= n_fact:
        # Exhausting the permutation set is exact; enumerate instead of sampling.
        return [tuple(p) for p in itertools.permutations(range(n))], cfg.t > n_fact
    rng = np.random.default_rng(cfg.seed)
    perms: list[tuple[int, ...]] = []
    if cfg.without_replacement:
        seen: set[tuple[int, ...]] = set()
        while len(perms) < cfg.t:
            perm = tuple(int(i) for i in rng.permutation(n))
            if perm not in seen:
                seen.add(perm)
                perms.append(perm)
    else:
        for _ in range(cfg.t):
            perms.append(tuple(int(i) for i in rng.permutation(n)))
    return perms, False


def phi_from_permutations(
    scorer: Scorer,
    es: EditSet,
    perms: Sequence[Sequence[int]],
    cache: SubsetCache | None = None,
) -> list[float]:
    """Average marginal contributions along the given permutations.

    Each permutation is walked as an incremental prefix chain, so it costs
    at most N uncached delta-M evaluations.
    """
    if cache is None:
        cache = SubsetCache(scorer, es)
    prefix_masks: set[int] = set()
    for perm in perms:
        mask = 0
        for player in perm:
            mask |= 1 << player
            prefix_masks.add(mask)
    cache.ensure(prefix_masks)
    acc = [0.0] * es.n_players
    for perm in perms:
        mask = 0
        prev = 0.0
        for player in perm:
            mask |= 1 << player
            cur = cache.delta_m(mask)
            acc[player] += cur - prev
            prev = cur
    return [a / len(perms) for a in acc]


def shapley_sampling(scorer: Scorer, es: EditSet, cfg: SamplingConfig,
                     cache: SubsetCache | None = None) -> AttributionResult:
    """Shapley sampling values over ``T`` uniform edit permutations.

    The per-permutation telescoping sum makes the raw scores add up to
    delta-M for any sampled permutation set.
    """
    n = es.n_players
    if n < 1:
        raise ValueError("sampling requires at least one edit")
    start = time.perf_counter()
    if cache is None:
        cache = SubsetCache(scorer, es)
    perms, capped = _sample_permutations(n, cfg)
    phi = phi_from_permutations(scorer, es, perms, cache)
    return _result(
        METHOD_SAMPLING,
        cache,
        phi,
        time.perf_counter() - start,
        sampling_t=len(perms),
        seed=cfg.seed,
        flags={FLAG_T_CAPPED} if capped else (),
    )


def _rescaled_single_subset(
    method: str, singles: list[float], cache: SubsetCache, start: float
) -> AttributionResult:
    """Shared Add/Sub tail: rescale so the raw scores satisfy effectiveness."""
    full_delta = cache.delta_m(cache.edit_set.full_mask())
    total = math.fsum(singles)
    flags: set[str] = set()
    if abs(total) <= ZERO_SUM_EPS:
        flags.add(FLAG_NON_EFFECTIVE)
        raw = singles
    else:
        factor = full_delta / total
        raw = [x * factor for x in singles]
    return _result(method, cache, raw, time.perf_counter() - start, flags=flags)


def attribute_add(scorer: Scorer, es: EditSet,
                  cache: SubsetCache | None = None) -> AttributionResult:
    """Score change when each edit is applied alone to the source."""
    if es.n_players < 1:
        raise ValueError("attribution requires at least one edit")
    start = time.perf_counter()
    if cache is None:
        cache = SubsetCache(scorer, es)
    masks = [1 << i for i in range(es.n_players)]
    cache.ensure(masks + [es.full_mask()])
    singles = [cache.delta_m(m) for m in masks]
    return _rescaled_single_subset(METHOD_ADD, singles, cache, start)


def attribute_sub(scorer: Scorer, es: EditSet,
                  cache: SubsetCache | None = None) -> AttributionResult:
    """Score change when each edit is removed alone from the hypothesis."""
    if es.n_players < 1:
        raise ValueError("attribution requires at least one edit")
    start = time.perf_counter()
    if cache is None:
        cache = SubsetCache(scorer, es)
    full = es.full_mask()
    masks = [full & ~(1 << i) for i in range(es.n_players)]
    cache.ensure(masks + [full])
    full_delta = cache.delta_m(full)
    singles = [full_delta - cache.delta_m(m) for m in masks]
    return _rescaled_single_subset(METHOD_SUB, singles, cache, start)


def attribute(
    scorer: Scorer,
    es: EditSet,
    method: str,
    sampling: SamplingConfig | None = None,
    *,
    cap: int = DEFAULT_EXACT_CAP,
) -> AttributionResult:
    """Dispatch to one of the four attribution methods by name."""
    if method == METHOD_SHAPLEY:
        return shapley_exact(scorer, es, cap=cap)
    if method == METHOD_SAMPLING:
        if sampling is None:
            raise ValueError("shapley_sampling requires a SamplingConfig")
        return shapley_sampling(scorer, es, sampling)
    if method == METHOD_ADD:
        return attribute_add(scorer, es)
    if method == METHOD_SUB:
        return attribute_sub(scorer, es)
    raise ValueError(f"unknown attribution method {method!r}")
