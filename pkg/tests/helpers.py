"""Shared test fixtures: instance generators and independent oracles.

The oracles here deliberately avoid the library's caching and kernel
code paths: brute-force subset enumeration with direct scorer calls,
subsequence-enumeration LCS, and closed-form values for pairwise games.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from editshap.core import Edit, EditSet, Sentence, validate_edit_set
from editshap.edits import apply_subset
from editshap.scorer import AdditiveEditScorer, Scorer, SubsetValueScorer

VOCAB = [
    "the", "a", "cat", "dog", "sat", "on", "mat", "rug", "ran", "big",
    "red", "saw", "and", "then", "fast", "slow", "bird", "tree", "house", "man",
]

TRAIN_CORPUS_SIZE = 60


def train_corpus(seed: int = 12345) -> list[str]:
    rng = np.random.default_rng(seed)
    corpus = []
    for _ in range(TRAIN_CORPUS_SIZE):
        length = int(rng.integers(3, 9))
        corpus.append(" ".join(str(rng.choice(VOCAB)) for _ in range(length)))
    return corpus


def fig1_instance() -> tuple[EditSet, AdditiveEditScorer]:
    """The three-edit overview example with bonuses (0.2, 0.1, -0.35)."""
    source = Sentence(tuple("A job is performed by him .".split()))
    edits = [Edit(0, 1, ("The",)), Edit(1, 2, ("work",)), Edit(2, 3, ("was",))]
    es = validate_edit_set(source, edits)
    return es, AdditiveEditScorer(es, (0.2, 0.1, -0.35))


def _random_spans(rng: np.random.Generator, n_edits: int) -> tuple[list[tuple[int, int]], int]:
    spans = []
    cursor = 0
    for k in range(n_edits):
        min_gap = 0 if k == 0 else 1
        start = cursor + int(rng.integers(min_gap, 3))
        span_len = int(rng.integers(0, 3))
        spans.append((start, start + span_len))
        cursor = start + max(span_len, 1)
    return spans, cursor + int(rng.integers(1, 4))


def random_text_instance(rng: np.random.Generator, n_edits: int) -> EditSet:
    """Edit set over natural-vocabulary tokens, for n-gram-scored games."""
    spans, total = _random_spans(rng, n_edits)
    source = Sentence(tuple(str(rng.choice(VOCAB)) for _ in range(total)))
    edits = []
    for start, end in spans:
        while True:
            rep_len = int(rng.integers(1 if end == start else 0, 3))
            repl = tuple(str(rng.choice(VOCAB)) for _ in range(rep_len))
            if repl != source.tokens[start:end]:
                break
        edits.append(Edit(start, end, repl))
    return validate_edit_set(source, edits)


def random_unique_instance(rng: np.random.Generator, n_edits: int) -> EditSet:
    """Edit set whose every subset yields a distinct sentence.

    Source tokens are unique by position and replacement tokens unique by
    edit, so oracle scorers can always invert the applied subset.
    """
    spans, total = _random_spans(rng, n_edits)
    source = Sentence(tuple(f"s{i}" for i in range(total)))
    edits = []
    for k, (start, end) in enumerate(spans):
        rep_len = int(rng.integers(1 if end == start else 0, 3))
        repl = tuple(f"r{k}.{j}" for j in range(rep_len))
        edits.append(Edit(start, end, repl))
    return validate_edit_set(source, edits)


def pairwise_game(
    rng: np.random.Generator, es: EditSet, base_scale: float = 1.0, synergy_scale: float = 0.5
) -> tuple[SubsetValueScorer, np.ndarray, np.ndarray]:
    """Game with per-edit values plus pairwise interaction terms.

    Closed-form Shapley values are ``b[i] + 0.5 * sum_j c[i, j]``.
    """
    n = es.n_edits
    b = rng.normal(0.0, base_scale, n)
    c = np.triu(rng.normal(0.0, synergy_scale, (n, n)), k=1)
    c = c + c.T

    def value(mask: int) -> float:
        members = [i for i in range(n) if mask >> i & 1]
        total = sum(b[i] for i in members)
        total += sum(c[i, j] for i, j in itertools.combinations(members, 2))
        return float(total)

    return SubsetValueScorer(es, value, name="pairwise-game"), b, c


def pairwise_game_shapley(b: np.ndarray, c: np.ndarray) -> np.ndarray:
    return b + 0.5 * c.sum(axis=1)


# ---------------------------------------------------------------------------
# Independent oracles
# ---------------------------------------------------------------------------

def brute_force_shapley(scorer: Scorer, es: EditSet) -> list[float]:
    """Literal subset-sum Shapley, no caching, direct scorer calls."""
    n = es.n_players
    source = es.source
    base = scorer.score(source, source)

    def dm(mask: int) -> float:
        return scorer.score(source, apply_subset(es, mask)) - base

    n_fact = math.factorial(n)
    phis = []
    for i in range(n):
        others = [j for j in range(n) if j != i]
        total = 0.0
        for r in range(n):
            weight = math.factorial(r) * math.factorial(n - r - 1) / n_fact
            for combo in itertools.combinations(others, r):
                mask = sum(1 << j for j in combo)
                total += weight * (dm(mask | (1 << i)) - dm(mask))
        phis.append(total)
    return phis


def _is_subsequence(needle: tuple, haystack: tuple) -> bool:
    it = iter(haystack)
    return all(tok in it for tok in needle)


def lcs_length_bruteforce(a: tuple, b: tuple) -> int:
    """LCS length by enumerating subsequences of the shorter side."""
    short, long_ = (a, b) if len(a) <= len(b) else (b, a)
    for r in range(len(short), 0, -1):
        for idxs in itertools.combinations(range(len(short)), r):
            if _is_subsequence(tuple(short[i] for i in idxs), long_):
                return r
    return 0
