import pytest

from editshap.scorer import NGramLM, NGramScorer

from helpers import train_corpus


@pytest.fixture(scope="session")
def ngram_scorer() -> NGramScorer:
    return NGramScorer(NGramLM(order=2, alpha=0.1).fit(train_corpus()))
