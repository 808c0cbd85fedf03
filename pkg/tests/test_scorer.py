import math
import socket
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from editshap.core import Edit, parse_sentence, validate_edit_set
from editshap.edits import apply_all, apply_subset
from editshap.scorer import (
    AdditiveEditScorer,
    AffineLengthScorer,
    BridgeUnavailableError,
    EMPTY_HYPOTHESIS_SCORE,
    ExternalScorerClient,
    LinearCombinationScorer,
    NGramLM,
    NGramScorer,
    ProtocolError,
    ScoreLengthMismatchError,
    ScorerError,
    SubsetCache,
    SubsetValueScorer,
    TokenCountScorer,
    UnrecognizedEditError,
    UntrainedModelError,
    delta_m,
)

from helpers import fig1_instance, train_corpus

STUB = str(Path(__file__).with_name("stub_bridge.py"))


# ---------------------------------------------------------------------------
# n-gram model
# ---------------------------------------------------------------------------

def test_ngram_prefers_seen_sentence_over_permutation(ngram_scorer):
    corpus = train_corpus()
    seen = parse_sentence(corpus[0])
    rng = np.random.default_rng(7)
    shuffled = parse_sentence(" ".join(rng.permutation(list(seen.tokens))))
    assert shuffled.tokens != seen.tokens
    src = parse_sentence("x")
    assert ngram_scorer.score(src, seen) > ngram_scorer.score(src, shuffled)


def test_ngram_uniform_fallback_scores_minus_vocab_size():
    # Zero counts with a seeded vocabulary: every event has probability
    # 1 / V, so the perplexity of any sentence is exactly V.
    lm = NGramLM(order=2, alpha=0.1).fit([], vocab=[f"v{i}" for i in range(9)])
    scorer = NGramScorer(lm)
    v = lm.vocab_size
    assert v == 10
    src = parse_sentence("v0")
    assert scorer.score(src, parse_sentence("q")) == pytest.approx(-v, abs=1e-9)
    assert scorer.score(src, parse_sentence("q r")) == pytest.approx(-v, abs=1e-9)


def test_ngram_hand_computed_bigram():
    lm = NGramLM(order=2, alpha=0.5).fit(["a b", "a c"])
    # V = {a, b, c, EOS} -> 4; P(a|<s>) = (2 + .5) / (2 + 2) = 0.625,
    # P(b|a) = (1 + .5) / (2 + 2) = 0.375, P(EOS|b) = (1 + .5) / (1 + 2) = 0.5
    expected = math.exp(-(math.log(0.625) + math.log(0.375) + math.log(0.5)) / 3)
    assert lm.perplexity(("a", "b")) == pytest.approx(expected, rel=1e-12)


def test_ngram_deterministic(ngram_scorer):
    src = parse_sentence("the cat")
    hyp = parse_sentence("the dog sat on the mat")
    values = {ngram_scorer.score(src, hyp) for _ in range(5)}
    assert len(values) == 1


def test_ngram_empty_hypothesis_sentinel(ngram_scorer):
    assert ngram_scorer.score(parse_sentence("a"), parse_sentence("")) == EMPTY_HYPOTHESIS_SCORE


def test_ngram_untrained_raises():
    with pytest.raises(UntrainedModelError):
        NGramScorer(NGramLM()).score(parse_sentence("a"), parse_sentence("b"))


def test_ngram_order_validation():
    with pytest.raises(ValueError):
        NGramLM(order=1)
    with pytest.raises(ValueError):
        NGramLM(order=4)
    with pytest.raises(ValueError):
        NGramLM(alpha=0.0)


def test_ngram_save_load_round_trip(tmp_path, ngram_scorer):
    path = tmp_path / "model.json"
    ngram_scorer.model.save(path)
    reloaded = NGramLM.load(path)
    src = parse_sentence("x")
    for text in ["the cat sat", "dog dog dog", "unseen tokens here"]:
        hyp = parse_sentence(text)
        assert NGramScorer(reloaded).score(src, hyp) == ngram_scorer.score(src, hyp)
    path2 = tmp_path / "model2.json"
    reloaded.save(path2)
    assert path.read_text() == path2.read_text()


def test_trigram_order():
    lm = NGramLM(order=3, alpha=0.1).fit(["a b c d", "a b d c"])
    assert lm.perplexity(("a", "b", "c")) > 0


def test_batch_score_matches_map(ngram_scorer):
    src = parse_sentence("x")
    pairs = [(src, parse_sentence(t)) for t in ["a", "the cat", "dog ran fast"]]
    assert ngram_scorer.batch_score(pairs) == [ngram_scorer.score(s, h) for s, h in pairs]


# ---------------------------------------------------------------------------
# oracle scorers
# ---------------------------------------------------------------------------

def test_additive_oracle_values():
    es, scorer = fig1_instance()
    src = es.source
    assert scorer.score(src, src) == 0.0
    assert scorer.score(src, apply_subset(es, 0b010)) == pytest.approx(0.1)
    assert scorer.score(src, apply_all(es)) == pytest.approx(0.2 + 0.1 - 0.35)


def test_additive_oracle_subset_sum():
    src = parse_sentence("w0 w1 w2 w3 w4")
    es = validate_edit_set(src, [Edit(i, i + 1, (f"x{i}",)) for i in range(4)])
    scorer = AdditiveEditScorer(es, (0.5, -0.2, 0.1, 0.4))
    hyp = apply_subset(es, 0b1010)  # edits 1 and 3
    assert scorer.score(src, hyp) == pytest.approx(-0.2 + 0.4)


def test_additive_oracle_rejects_unknown_hypothesis():
    es, scorer = fig1_instance()
    with pytest.raises(UnrecognizedEditError):
        scorer.score(es.source, parse_sentence("Something else entirely ."))
    with pytest.raises(UnrecognizedEditError):
        scorer.score(parse_sentence("other source"), apply_all(es))


def test_additive_oracle_bonus_count_checked():
    es, _ = fig1_instance()
    with pytest.raises(ValueError):
        AdditiveEditScorer(es, (0.1, 0.2))


def test_ambiguous_game_rejected():
    # Deleting either duplicated token produces the same sentence.
    src = parse_sentence("w w z")
    es = validate_edit_set(src, [Edit(0, 1, ()), Edit(1, 2, ())])
    with pytest.raises(ValueError, match="same sentence"):
        AdditiveEditScorer(es, (1.0, 2.0))
    # With equal values the game is well defined.
    AdditiveEditScorer(es, (1.0, 1.0))


def test_subset_value_scorer_lookup():
    es, _ = fig1_instance()
    table = {mask: float(mask) for mask in range(8)}
    scorer = SubsetValueScorer(es, table)
    assert scorer.score(es.source, apply_subset(es, 0b101)) == 5.0


# ---------------------------------------------------------------------------
# cache and delta_m
# ---------------------------------------------------------------------------

def test_delta_m_empty_mask_is_exactly_zero():
    es, scorer = fig1_instance()
    assert delta_m(scorer, es, 0) == 0.0


def test_delta_m_full_mask_matches_worked_example():
    es, scorer = fig1_instance()
    assert delta_m(scorer, es, 0b111) == pytest.approx(-0.05)
    assert delta_m(scorer, es, 0b001) == pytest.approx(0.2)


def test_cache_counts_hits_misses_and_calls():
    es, scorer = fig1_instance()
    cache = SubsetCache(scorer, es)
    cache.delta_m(0b011)
    cache.delta_m(0b011)
    cache.delta_m(0)
    assert cache.misses == 1
    assert cache.hits == 2
    assert cache.scorer_calls == 2  # source score + one subset


def test_cache_ensure_batches_without_rescoring():
    es, scorer = fig1_instance()
    cache = SubsetCache(scorer, es)
    cache.ensure(range(8))
    assert cache.scorer_calls == 8  # 2^3: source + 7 non-empty subsets
    cache.ensure(range(8))
    assert cache.scorer_calls == 8
    before = cache.scorer_calls
    values = [cache.delta_m(m) for m in range(8)]
    assert cache.scorer_calls == before
    assert values[0] == 0.0


def test_cached_and_uncached_values_identical():
    es, scorer = fig1_instance()
    cache = SubsetCache(scorer, es)
    cache.ensure(range(8))
    for mask in range(8):
        assert cache.delta_m(mask) == delta_m(scorer, es, mask)


def test_delta_m_rejects_foreign_cache():
    es, scorer = fig1_instance()
    cache = SubsetCache(scorer, es)
    with pytest.raises(ValueError):
        delta_m(TokenCountScorer(), es, 1, cache)


def test_linear_combination_scorer():
    a = TokenCountScorer()
    b = AffineLengthScorer(2.0, 1.0)
    combo = LinearCombinationScorer([(0.5, a), (2.0, b)])
    src, hyp = parse_sentence("x"), parse_sentence("p q r")
    assert combo.score(src, hyp) == pytest.approx(0.5 * 3 + 2.0 * 7.0)


# ---------------------------------------------------------------------------
# external scorer client
# ---------------------------------------------------------------------------

def _stub_cmd(*extra: str) -> list[str]:
    return [sys.executable, STUB, *extra]


def _pairs(*lengths: int):
    src = parse_sentence("s")
    return [(src, parse_sentence(" ".join(f"t{i}" for i in range(n)))) for n in lengths]


def test_client_scores_pairs_in_order():
    with ExternalScorerClient.spawn(_stub_cmd()) as client:
        scores = client.batch_score(_pairs(3, 1, 5))
    assert scores == [0.25 * 3 + 0.125, 0.25 * 1 + 0.125, 0.25 * 5 + 0.125]


def test_client_single_score():
    with ExternalScorerClient.spawn(_stub_cmd()) as client:
        assert client.score(*_pairs(4)[0]) == 0.25 * 4 + 0.125


def test_client_splits_large_batches():
    with ExternalScorerClient.spawn(_stub_cmd(), max_batch=4) as client:
        scores = client.batch_score(_pairs(*range(11)))
    assert scores == [0.25 * n + 0.125 for n in range(11)]


def test_client_wrong_length_raises():
    with ExternalScorerClient.spawn(_stub_cmd("--mode", "short")) as client:
        with pytest.raises(ScoreLengthMismatchError):
            client.batch_score(_pairs(1, 2))


def test_client_bad_json_raises():
    with ExternalScorerClient.spawn(_stub_cmd("--mode", "badjson")) as client:
        with pytest.raises(ProtocolError):
            client.score(*_pairs(1)[0])


def test_client_id_mismatch_raises():
    with ExternalScorerClient.spawn(_stub_cmd("--mode", "wrongid")) as client:
        with pytest.raises(ProtocolError, match="id"):
            client.score(*_pairs(1)[0])


def test_client_error_response_raises():
    with ExternalScorerClient.spawn(_stub_cmd("--mode", "error")) as client:
        with pytest.raises(ScorerError, match="synthetic failure"):
            client.score(*_pairs(1)[0])


def test_client_retries_once_after_bridge_death():
    with ExternalScorerClient.spawn(_stub_cmd("--mode", "die-after-1")) as client:
        assert client.score(*_pairs(2)[0]) == 0.625
        # The stub exited; the next request must transparently respawn it.
        assert client.score(*_pairs(4)[0]) == 1.125


def test_client_unavailable_after_retry():
    with ExternalScorerClient.spawn(["/nonexistent-bridge-binary"]) as client:
        with pytest.raises(BridgeUnavailableError):
            client.score(*_pairs(1)[0])


def test_client_tcp_transport():
    port = _free_port()
    proc = subprocess.Popen(_stub_cmd("--tcp-port", str(port)))
    try:
        _wait_for_port(port)
        with ExternalScorerClient.connect("127.0.0.1", port) as client:
            assert client.batch_score(_pairs(2, 6)) == [0.625, 1.625]
    finally:
        proc.terminate()
        proc.wait()


def test_client_tcp_connection_refused():
    with ExternalScorerClient.connect("127.0.0.1", _free_port()) as client:
        with pytest.raises(BridgeUnavailableError):
            client.score(*_pairs(1)[0])


def _free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def _wait_for_port(port: int, timeout: float = 10.0) -> None:
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        try:
            with socket.create_connection(("127.0.0.1", port), timeout=0.2):
                return
        except OSError:
            time.sleep(0.05)
    raise RuntimeError(f"stub bridge never listened on port {port}")
