"""Domain types shared across the package.

A sentence is a whitespace-tokenized token sequence. An edit replaces the
token span ``[start, end)`` of a source sentence with replacement tokens.
An edit set is a sorted, non-overlapping collection of edits over one
source, with an optional grouping that merges several edits into a single
attribution player. Everything here is immutable and hashable, so values
can be shared freely between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


class EditShapError(Exception):
    """Base class for every error raised by this package."""


class TokenError(EditShapError):
    """A token is empty or contains whitespace."""


class OverlapError(EditShapError):
    """Two edits intersect, or two insertions share an index."""


class OutOfBoundsError(EditShapError):
    """An edit span exceeds the source length."""


class IdentityEditError(EditShapError):
    """An edit that would not change the source (no-op)."""


class InvalidPartitionError(EditShapError):
    """A grouping is not a partition of the edit indices."""


class HypothesisMismatchError(EditShapError):
    """Applying all edits does not reproduce the declared hypothesis."""


class TooManyEditsError(EditShapError):
    """Edit count exceeds what a bitmask / exhaustive enumeration supports."""


#: Hard cap on edit-set size: subset masks are kept within 30 bits.
MAX_EDITS = 30

METHOD_SHAPLEY = "shapley"
METHOD_SAMPLING = "shapley_sampling"
METHOD_ADD = "add"
METHOD_SUB = "sub"
METHODS = frozenset({METHOD_SHAPLEY, METHOD_SAMPLING, METHOD_ADD, METHOD_SUB})

#: Relative tolerance used everywhere two attribution values are called equal.
EFFECTIVENESS_RTOL = 1e-9

#: Result flag: Add/Sub rescaling skipped because the raw scores summed to zero.
FLAG_NON_EFFECTIVE = "non_effective"
#: Result flag: requested sample count exceeded N! and was capped.
FLAG_T_CAPPED = "t_capped"


def _check_token(token: str) -> None:
    if not token or any(ch.isspace() for ch in token):
        raise TokenError(f"invalid token {token!r}: must be non-empty and whitespace-free")


@dataclass(frozen=True)
class Sentence:
    """A pre-tokenized sentence; joining with single spaces round-trips."""

    tokens: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "tokens", tuple(self.tokens))
        for tok in self.tokens:
            _check_token(tok)

    def text(self) -> str:
        return " ".join(self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)

    def __str__(self) -> str:
        return self.text()


def parse_sentence(text: str) -> Sentence:
    """Whitespace-split ``text``; empty or blank input yields an empty sentence."""
    return Sentence(tuple(text.split()))


@dataclass(frozen=True)
class Edit:
    """Replace source tokens in ``[start, end)`` with ``replacement``.

    ``start == end`` is a pure insertion and requires a non-empty
    replacement. ``replacement`` may be given as a pre-tokenized string
    for convenience; it is stored as a token tuple.
    """

    start: int
    end: int
    replacement: tuple[str, ...]
    error_type: str | None = None

    def __post_init__(self) -> None:
        repl = self.replacement
        if isinstance(repl, str):
            repl = tuple(repl.split())
        else:
            repl = tuple(repl)
        object.__setattr__(self, "replacement", repl)
        for tok in repl:
            _check_token(tok)
        if self.start < 0 or self.end < self.start:
            raise OutOfBoundsError(f"invalid span [{self.start}, {self.end})")
        if self.start == self.end and not repl:
            raise IdentityEditError(f"empty insertion at index {self.start} is a no-op")

    def sort_key(self) -> tuple:
        # (start, end) ordering; replacement and type only break exact ties.
        return (self.start, self.end, self.replacement, self.error_type or "")

    def span_text(self) -> str:
        return " ".join(self.replacement)


@dataclass(frozen=True)
class EditSet:
    """Validated, sorted, non-overlapping edits over one source sentence.

    ``groups`` partitions the edit indices into attribution players; the
    default is one singleton group per edit. Construct via
    :func:`validate_edit_set` or :func:`editshap.edits.group_edits` rather
    than directly.
    """

    source: Sentence
    edits: tuple[Edit, ...]
    groups: tuple[tuple[int, ...], ...] = field(default=())

    def __post_init__(self) -> None:
        object.__setattr__(self, "edits", tuple(self.edits))
        if not self.groups:
            groups = tuple((i,) for i in range(len(self.edits)))
        else:
            groups = tuple(tuple(g) for g in self.groups)
        object.__setattr__(self, "groups", groups)

    @property
    def n_edits(self) -> int:
        return len(self.edits)

    @property
    def n_players(self) -> int:
        return len(self.groups)

    def full_mask(self) -> int:
        return (1 << self.n_players) - 1


def validate_edit_set(source: Sentence, edits: list[Edit] | tuple[Edit, ...]) -> EditSet:
    """Sort, bound-check and overlap-check ``edits`` against ``source``.

    Raises :class:`OutOfBoundsError`, :class:`IdentityEditError`,
    :class:`OverlapError` or :class:`TooManyEditsError`. Idempotent: feeding
    back the edits of the returned set yields an equal set.
    """
    if len(edits) > MAX_EDITS:
        raise TooManyEditsError(f"{len(edits)} edits exceed the mask width cap of {MAX_EDITS}")
    ordered = sorted(edits, key=Edit.sort_key)
    n_src = len(source)
    for e in ordered:
        if e.end > n_src:
            raise OutOfBoundsError(f"edit span [{e.start}, {e.end}) exceeds source length {n_src}")
        if source.tokens[e.start:e.end] == e.replacement:
            raise IdentityEditError(
                f"edit [{e.start}, {e.end}) -> {e.span_text()!r} leaves the source unchanged"
            )
    for prev, cur in zip(ordered, ordered[1:]):
        if prev.end > cur.start:
            raise OverlapError(
                f"edits [{prev.start}, {prev.end}) and [{cur.start}, {cur.end}) overlap"
            )
        if prev.start == prev.end == cur.start == cur.end:
            raise OverlapError(f"two insertions at index {cur.start}")
    return EditSet(source, tuple(ordered))


def _sign(x: float) -> int:
    if x > 0:
        return 1
    if x < 0:
        return -1
    return 0


@dataclass(frozen=True)
class AttributionResult:
    """Per-player attribution of ``delta_m`` produced by one method.

    Invariants are checked on construction: raw scores sum to ``delta_m``
    (unless flagged non-effective), and the normalized scores are the
    sign-preserving L1 normalization of the raw scores.
    """

    method: str
    delta_m: float
    raw: tuple[float, ...]
    normalized: tuple[float, ...]
    scorer_calls: int
    wall_time_s: float
    sampling_t: int | None = None
    seed: int | None = None
    flags: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "raw", tuple(float(x) for x in self.raw))
        object.__setattr__(self, "normalized", tuple(float(x) for x in self.normalized))
        object.__setattr__(self, "flags", frozenset(self.flags))
        if self.method not in METHODS:
            raise ValueError(f"unknown attribution method {self.method!r}")
        if (self.sampling_t is not None) != (self.method == METHOD_SAMPLING):
            raise ValueError("sampling_t must be set exactly for shapley_sampling results")
        if len(self.raw) != len(self.normalized):
            raise ValueError("raw and normalized score lists differ in length")
        if self.scorer_calls < 0 or self.wall_time_s < 0:
            raise ValueError("scorer_calls and wall_time_s must be non-negative")
        if FLAG_NON_EFFECTIVE not in self.flags:
            bound = EFFECTIVENESS_RTOL * max(1.0, abs(self.delta_m))
            if abs(math.fsum(self.raw) - self.delta_m) > bound:
                raise ValueError(
                    f"effectiveness violated: sum(raw)={math.fsum(self.raw)!r} "
                    f"vs delta_m={self.delta_m!r}"
                )
        total = math.fsum(abs(x) for x in self.raw)
        if total > 0:
            norm_total = math.fsum(abs(x) for x in self.normalized)
            if abs(norm_total - 1.0) > 1e-9:
                raise ValueError(f"normalized scores have L1 mass {norm_total!r}, expected 1")
            for r, n in zip(self.raw, self.normalized):
                if _sign(r) != _sign(n):
                    raise ValueError("normalization changed the sign of a score")
        elif any(n != 0.0 for n in self.normalized):
            raise ValueError("all-zero raw scores must normalize to all zeros")

    @property
    def n(self) -> int:
        return len(self.raw)
