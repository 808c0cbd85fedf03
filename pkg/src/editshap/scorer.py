"""Sentence-level scorers.

A scorer assigns a real-valued quality score to ``(source, hypothesis)``
pairs, higher meaning better. Attribution is generic over this interface.
Built-ins: an add-alpha smoothed n-gram language model (negative
perplexity, quality-only), exact table/oracle scorers for controlled
experiments, and a JSON-lines client that talks to an external scorer
process over stdio or TCP.
"""

from __future__ import annotations

import json
import math
import shlex
import socket
import subprocess
import time
from abc import ABC, abstractmethod
from collections import Counter
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from .core import EditSet, EditShapError, Sentence
from .edits import apply_edit_indices, apply_subset

BOS = "<s>"
EOS = "</s>"

#: Finite stand-in for the -inf score of an empty hypothesis.
EMPTY_HYPOTHESIS_SCORE = -1e9


class ScorerError(EditShapError):
    """A scorer failed to produce a score."""


class UntrainedModelError(ScorerError):
    """The n-gram model has no counts; call fit() or load() first."""


class UnrecognizedEditError(ScorerError):
    """Oracle scorer saw a hypothesis not reachable from its edit set."""


class BridgeUnavailableError(ScorerError):
    """External scorer process unreachable, including after one retry."""


class ProtocolError(ScorerError):
    """External scorer sent a malformed or mismatched response."""


class ScoreLengthMismatchError(ProtocolError):
    """External scorer returned the wrong number of scores."""


class Scorer(ABC):
    """Deterministic sentence-level metric M(H|S); higher is better.

    ``batch_score`` must equal element-wise ``score`` in input order;
    the default implementation guarantees that.
    """

    name: str = "scorer"
    higher_is_better: bool = True

    @abstractmethod
    def score(self, source: Sentence, hypothesis: Sentence) -> float:
        ...

    def batch_score(self, pairs: Sequence[tuple[Sentence, Sentence]]) -> list[float]:
        return [self.score(src, hyp) for src, hyp in pairs]


# ---------------------------------------------------------------------------
# N-gram language model scorer
# ---------------------------------------------------------------------------

class NGramLM:
    """Add-alpha smoothed n-gram model over whitespace tokens.

    Sentences are padded with ``order - 1`` BOS markers and one EOS. The
    event vocabulary is the training vocabulary plus EOS, so an untrained
    context scores every event uniformly at ``1 / vocab_size``.
    """

    FORMAT = "editshap-ngram"
    VERSION = 1

    def __init__(self, order: int = 2, alpha: float = 0.1) -> None:
        if order not in (2, 3):
            raise ValueError(f"order must be 2 or 3, got {order}")
        if alpha <= 0:
            raise ValueError("alpha must be positive")
        self.order = order
        self.alpha = alpha
        self._context_counts: Counter[tuple[str, ...]] = Counter()
        self._ngram_counts: dict[tuple[str, ...], Counter[str]] = {}
        self._vocab: set[str] = set()
        self._fitted = False

    @property
    def vocab_size(self) -> int:
        return len(self._vocab) + 1  # event vocabulary includes EOS, never BOS

    def fit(self, corpus: Iterable[str | Sentence], vocab: Iterable[str] = ()) -> "NGramLM":
        """Count n-grams over ``corpus``; ``vocab`` adds count-free types.

        Fitting with an empty corpus and an explicit vocabulary yields the
        uniform model: every event scores ``1 / vocab_size``.
        """
        self._vocab.update(vocab)
        for item in corpus:
            tokens = item.tokens if isinstance(item, Sentence) else tuple(item.split())
            self._vocab.update(tokens)
            padded = (BOS,) * (self.order - 1) + tokens + (EOS,)
            for i in range(self.order - 1, len(padded)):
                ctx = padded[i - self.order + 1 : i]
                self._context_counts[ctx] += 1
                self._ngram_counts.setdefault(ctx, Counter())[padded[i]] += 1
        self._fitted = True
        return self

    def log_prob(self, context: tuple[str, ...], event: str) -> float:
        v = self.vocab_size
        ctx_count = self._context_counts.get(context, 0)
        ngram_count = self._ngram_counts.get(context, {}).get(event, 0)
        return math.log((ngram_count + self.alpha) / (ctx_count + self.alpha * v))

    def perplexity(self, tokens: Sequence[str]) -> float:
        if not self._fitted:
            raise UntrainedModelError("model has not been fitted")
        padded = (BOS,) * (self.order - 1) + tuple(tokens) + (EOS,)
        n_events = len(tokens) + 1
        total = 0.0
        for i in range(self.order - 1, len(padded)):
            total += self.log_prob(padded[i - self.order + 1 : i], padded[i])
        return math.exp(-total / n_events)

    def save(self, path: str | Path) -> None:
        counts = {
            " ".join(ctx): dict(sorted(counter.items()))
            for ctx, counter in sorted(self._ngram_counts.items())
        }
        payload = {
            "format": self.FORMAT,
            "version": self.VERSION,
            "order": self.order,
            "alpha": self.alpha,
            "vocab": sorted(self._vocab),
            "counts": counts,
        }
        Path(path).write_text(json.dumps(payload, ensure_ascii=False, indent=1))

    @classmethod
    def load(cls, path: str | Path) -> "NGramLM":
        payload = json.loads(Path(path).read_text())
        if payload.get("format") != cls.FORMAT:
            raise EditShapError(f"not an n-gram model file: {path}")
        if payload.get("version") != cls.VERSION:
            raise EditShapError(f"unsupported model version {payload.get('version')}")
        model = cls(order=payload["order"], alpha=payload["alpha"])
        model._vocab = set(payload["vocab"])
        for ctx_key, counter in payload["counts"].items():
            ctx = tuple(ctx_key.split())
            model._ngram_counts[ctx] = Counter(counter)
            model._context_counts[ctx] = sum(counter.values())
        model._fitted = True
        return model


class NGramScorer(Scorer):
    """Negative n-gram perplexity of the hypothesis; the source is ignored."""

    def __init__(self, model: NGramLM) -> None:
        self.model = model
        self.name = f"ngram{model.order}"

    def score(self, source: Sentence, hypothesis: Sentence) -> float:
        if not hypothesis.tokens:
            if not self.model._fitted:
                raise UntrainedModelError("model has not been fitted")
            return EMPTY_HYPOTHESIS_SCORE
        return -self.model.perplexity(hypothesis.tokens)


# ---------------------------------------------------------------------------
# Oracle scorers over a fixed edit set
# ---------------------------------------------------------------------------

_ORACLE_MAX_EDITS = 16


class _EditGameScorer(Scorer):
    """Scorer defined by a value per edit subset of one fixed edit set.

    The full subset lattice is tabulated up front so that any reachable
    hypothesis maps back to the subset that produced it.
    """

    def __init__(self, edit_set: EditSet) -> None:
        n = edit_set.n_edits
        if n > _ORACLE_MAX_EDITS:
            raise ValueError(f"oracle scorers support at most {_ORACLE_MAX_EDITS} edits, got {n}")
        self._es = edit_set
        self._by_tokens: dict[tuple[str, ...], int] = {}
        for mask in range(1 << n):
            indices = [i for i in range(n) if mask >> i & 1]
            tokens = apply_edit_indices(edit_set.source, edit_set.edits, indices).tokens
            other = self._by_tokens.get(tokens)
            if other is None:
                self._by_tokens[tokens] = mask
            elif self.subset_value(other) != self.subset_value(mask):
                raise ValueError(
                    f"edit subsets {other:#b} and {mask:#b} produce the same sentence "
                    "but different values; the game is ill-defined"
                )

    def subset_value(self, edit_mask: int) -> float:
        raise NotImplementedError

    def score(self, source: Sentence, hypothesis: Sentence) -> float:
        if source != self._es.source:
            raise UnrecognizedEditError(f"unknown source sentence {source.text()!r}")
        mask = self._by_tokens.get(hypothesis.tokens)
        if mask is None:
            raise UnrecognizedEditError(
                f"hypothesis {hypothesis.text()!r} is not reachable from the registered edits"
            )
        return self.subset_value(mask)


class AdditiveEditScorer(_EditGameScorer):
    """Each applied edit contributes a fixed bonus; the base score is 0."""

    name = "additive-oracle"

    def __init__(self, edit_set: EditSet, bonuses: Sequence[float]) -> None:
        if len(bonuses) != edit_set.n_edits:
            raise ValueError("one bonus per edit required")
        self.bonuses = tuple(float(b) for b in bonuses)
        super().__init__(edit_set)

    def subset_value(self, edit_mask: int) -> float:
        return math.fsum(b for i, b in enumerate(self.bonuses) if edit_mask >> i & 1)


class SubsetValueScorer(_EditGameScorer):
    """Arbitrary game: the score of a hypothesis is ``value(edit subset)``."""

    name = "subset-value"

    def __init__(
        self,
        edit_set: EditSet,
        value: Mapping[int, float] | Callable[[int], float],
        name: str = "subset-value",
    ) -> None:
        self._value = value.__getitem__ if isinstance(value, Mapping) else value
        self.name = name
        super().__init__(edit_set)

    def subset_value(self, edit_mask: int) -> float:
        return float(self._value(edit_mask))


# ---------------------------------------------------------------------------
# Simple deterministic scorers
# ---------------------------------------------------------------------------

class TokenCountScorer(Scorer):
    """Hypothesis token count; a fast stub for benchmarks and plumbing tests."""

    name = "token-count"

    def score(self, source: Sentence, hypothesis: Sentence) -> float:
        return float(len(hypothesis))


class AffineLengthScorer(Scorer):
    """``scale * len(hypothesis) + offset``; mirrors the bridge stub scorer."""

    def __init__(self, scale: float = 0.25, offset: float = 0.125) -> None:
        self.scale = scale
        self.offset = offset
        self.name = f"affine-length[{scale},{offset}]"

    def score(self, source: Sentence, hypothesis: Sentence) -> float:
        return self.scale * len(hypothesis) + self.offset


class LinearCombinationScorer(Scorer):
    """Weighted sum of other scorers, for linearity checks and blending."""

    def __init__(self, terms: Sequence[tuple[float, Scorer]], name: str = "linear") -> None:
        self.terms = tuple((float(w), s) for w, s in terms)
        self.name = name

    def score(self, source: Sentence, hypothesis: Sentence) -> float:
        return math.fsum(w * s.score(source, hypothesis) for w, s in self.terms)


# ---------------------------------------------------------------------------
# Subset cache and delta-M
# ---------------------------------------------------------------------------

class SubsetCache:
    """Memoized ``delta_m`` per player mask for one (scorer, edit set) pair.

    The empty-mask entry is 0 by definition and costs no scorer call; the
    source's own score is evaluated lazily exactly once. ``scorer_calls``
    counts individual (source, hypothesis) evaluations, batched or not.
    """

    def __init__(self, scorer: Scorer, edit_set: EditSet) -> None:
        self.scorer = scorer
        self.edit_set = edit_set
        self._values: dict[int, float] = {0: 0.0}
        self._source_score: float | None = None
        self.hits = 0
        self.misses = 0
        self.scorer_calls = 0

    def source_score(self) -> float:
        if self._source_score is None:
            src = self.edit_set.source
            self._source_score = self.scorer.score(src, src)
            self.scorer_calls += 1
        return self._source_score

    def delta_m(self, mask: int) -> float:
        value = self._values.get(mask)
        if value is not None:
            self.hits += 1
            return value
        base = self.source_score()
        hyp = apply_subset(self.edit_set, mask)
        value = self.scorer.score(self.edit_set.source, hyp) - base
        self._values[mask] = value
        self.misses += 1
        self.scorer_calls += 1
        return value

    def ensure(self, masks: Iterable[int]) -> None:
        """Batch-evaluate any masks not yet cached (one scorer batch call)."""
        missing = sorted({m for m in masks if m not in self._values})
        if not missing:
            return
        src = self.edit_set.source
        pairs: list[tuple[Sentence, Sentence]] = []
        if self._source_score is None:
            pairs.append((src, src))
        pairs.extend((src, apply_subset(self.edit_set, m)) for m in missing)
        scores = self.scorer.batch_score(pairs)
        if len(scores) != len(pairs):
            raise ScoreLengthMismatchError(
                f"batch_score returned {len(scores)} scores for {len(pairs)} pairs"
            )
        self.scorer_calls += len(pairs)
        if self._source_score is None:
            self._source_score = scores[0]
            scores = scores[1:]
        base = self._source_score
        for mask, value in zip(missing, scores):
            self._values[mask] = value - base
        self.misses += len(missing)


def delta_m(scorer: Scorer, es: EditSet, mask: int, cache: SubsetCache | None = None) -> float:
    """Score difference between the subset-edited sentence and the source.

    ``delta_m(scorer, es, 0)`` is 0 by definition. When ``cache`` is given
    it must belong to the same scorer and edit set.
    """
    if cache is None:
        cache = SubsetCache(scorer, es)
    elif cache.scorer is not scorer or cache.edit_set is not es:
        raise ValueError("cache was built for a different scorer or edit set")
    return cache.delta_m(mask)


# ---------------------------------------------------------------------------
# External scorer client (JSON-lines over stdio or TCP)
# ---------------------------------------------------------------------------

class _StdioTransport:
    def __init__(self, cmd: list[str]) -> None:
        self.cmd = cmd
        self.proc: subprocess.Popen | None = None

    def start(self) -> None:
        try:
            self.proc = subprocess.Popen(
                self.cmd,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise ConnectionError(str(exc)) from exc

    def send_line(self, line: str) -> None:
        if self.proc is None or self.proc.poll() is not None or self.proc.stdin is None:
            raise ConnectionError("bridge process is not running")
        self.proc.stdin.write(line + "\n")
        self.proc.stdin.flush()

    def recv_line(self) -> str:
        if self.proc is None or self.proc.stdout is None:
            raise ConnectionError("bridge process is not running")
        line = self.proc.stdout.readline()
        if not line:
            raise ConnectionError("bridge closed its output stream")
        return line.rstrip("\n")

    def close(self) -> None:
        if self.proc is not None:
            for stream in (self.proc.stdin, self.proc.stdout):
                if stream is not None:
                    try:
                        stream.close()
                    except OSError:
                        pass
            self.proc.terminate()
            try:
                self.proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self.proc.kill()
                self.proc.wait()
            self.proc = None

    def describe(self) -> str:
        return " ".join(self.cmd)


class _TcpTransport:
    def __init__(self, host: str, port: int) -> None:
        self.host = host
        self.port = port
        self.sock: socket.socket | None = None
        self._reader = None
        self._writer = None

    def start(self) -> None:
        try:
            self.sock = socket.create_connection((self.host, self.port), timeout=30)
        except OSError as exc:
            raise ConnectionError(str(exc)) from exc
        self._reader = self.sock.makefile("r", encoding="utf-8", newline="\n")
        self._writer = self.sock.makefile("w", encoding="utf-8", newline="\n")

    def send_line(self, line: str) -> None:
        if self._writer is None:
            raise ConnectionError("not connected")
        self._writer.write(line + "\n")
        self._writer.flush()

    def recv_line(self) -> str:
        if self._reader is None:
            raise ConnectionError("not connected")
        line = self._reader.readline()
        if not line:
            raise ConnectionError("bridge closed the connection")
        return line.rstrip("\n")

    def close(self) -> None:
        for stream in (self._reader, self._writer):
            if stream is not None:
                try:
                    stream.close()
                except OSError:
                    pass
        if self.sock is not None:
            try:
                self.sock.close()
            except OSError:
                pass
        self.sock = self._reader = self._writer = None

    def describe(self) -> str:
        return f"{self.host}:{self.port}"


class ExternalScorerClient(Scorer):
    """Client side of the JSON-lines scorer protocol.

    Requests are ``{"id": int, "pairs": [{"src": str, "hyp": str}, ...]}``
    and responses ``{"id": int, "scores": [float, ...]}``, one JSON object
    per line. Batches are capped at ``max_batch`` pairs, order is
    preserved, and a failed transport is restarted and retried exactly
    once. One request is in flight at a time; use one client per worker
    for parallelism.
    """

    def __init__(self, transport, name: str = "external", max_batch: int = 32) -> None:
        if max_batch < 1:
            raise ValueError("max_batch must be positive")
        self._transport = transport
        self._started = False
        self._next_id = 0
        self.name = name
        self.max_batch = max_batch

    @classmethod
    def spawn(cls, cmd: str | Sequence[str], name: str = "external", max_batch: int = 32) -> "ExternalScorerClient":
        argv = shlex.split(cmd) if isinstance(cmd, str) else list(cmd)
        if not argv:
            raise ValueError("empty bridge command")
        return cls(_StdioTransport(argv), name=name, max_batch=max_batch)

    @classmethod
    def connect(cls, host: str, port: int, name: str = "external", max_batch: int = 32) -> "ExternalScorerClient":
        return cls(_TcpTransport(host, port), name=name, max_batch=max_batch)

    def _start(self) -> None:
        self._transport.start()
        self._started = True

    def _restart(self) -> None:
        self._transport.close()
        self._started = False
        time.sleep(0.05)
        self._start()

    def _roundtrip(self, request_line: str) -> str:
        if not self._started:
            try:
                self._start()
            except ConnectionError as exc:
                raise BridgeUnavailableError(
                    f"cannot reach bridge {self._transport.describe()}: {exc}"
                ) from exc
        try:
            self._transport.send_line(request_line)
            return self._transport.recv_line()
        except ConnectionError:
            pass  # retry once on a fresh transport
        try:
            self._restart()
            self._transport.send_line(request_line)
            return self._transport.recv_line()
        except ConnectionError as exc:
            raise BridgeUnavailableError(
                f"bridge {self._transport.describe()} unavailable after retry: {exc}"
            ) from exc

    def _request(self, pairs: Sequence[tuple[Sentence, Sentence]]) -> list[float]:
        request_id = self._next_id
        self._next_id += 1
        payload = {
            "id": request_id,
            "pairs": [{"src": src.text(), "hyp": hyp.text()} for src, hyp in pairs],
        }
        line = self._roundtrip(json.dumps(payload, ensure_ascii=False, separators=(",", ":")))
        try:
            response = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"invalid JSON from bridge: {exc}") from None
        if not isinstance(response, dict):
            raise ProtocolError(f"expected a JSON object, got {type(response).__name__}")
        if "error" in response:
            raise ScorerError(f"bridge error: {response['error']}")
        if response.get("id") != request_id:
            raise ProtocolError(f"response id {response.get('id')!r} != request id {request_id}")
        scores = response.get("scores")
        if not isinstance(scores, list) or not all(isinstance(s, (int, float)) for s in scores):
            raise ProtocolError("response is missing a numeric 'scores' list")
        if len(scores) != len(pairs):
            raise ScoreLengthMismatchError(
                f"bridge returned {len(scores)} scores for {len(pairs)} pairs"
            )
        return [float(s) for s in scores]

    def score(self, source: Sentence, hypothesis: Sentence) -> float:
        return self._request([(source, hypothesis)])[0]

    def batch_score(self, pairs: Sequence[tuple[Sentence, Sentence]]) -> list[float]:
        out: list[float] = []
        for i in range(0, len(pairs), self.max_batch):
            out.extend(self._request(pairs[i : i + self.max_batch]))
        return out

    def close(self) -> None:
        self._transport.close()
        self._started = False

    def __enter__(self) -> "ExternalScorerClient":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()
