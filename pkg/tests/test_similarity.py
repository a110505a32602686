import json

import httpx
import pytest
from hypothesis import given, strategies as st

from bpcheck.similarity import (
    LexicalSimilarity,
    RemoteEmbeddingSimilarity,
    SimilarityServiceError,
    VectorFileSimilarity,
    lexical_similarity,
    match,
)

phrases = st.text(alphabet="abcde ", min_size=1, max_size=12).filter(lambda s: s.strip())


def test_lexical_examples():
    p = LexicalSimilarity()
    assert p.sim("order", "order") == 1.0
    assert p.sim("order", "purchase order") > 0.5
    assert p.sim("order", "banana") < 0.5
    assert match(p, "order", "purchase order", 0.5)
    assert not p.match("order", "purchase order", 1.0)
    with pytest.raises(ValueError):
        p.match("a", "b", 1.5)


@given(phrases, phrases)
def test_lexical_is_symmetric_and_bounded(x, y):
    assert abs(lexical_similarity(x, y) - lexical_similarity(y, x)) < 1e-9
    assert 0.0 <= lexical_similarity(x, y) <= 1.0
    assert lexical_similarity(x, x) == 1.0


@given(phrases, phrases, st.floats(0, 1), st.floats(0, 1))
def test_larger_epsilon_accepts_fewer_pairs(x, y, e1, e2):
    lo, hi = sorted((e1, e2))
    p = LexicalSimilarity()
    assert not p.match(x, y, hi) or p.match(x, y, lo)


def test_vector_file(tmp_path):
    path = tmp_path / "v.tsv"
    path.write_text("order\t1 0\npurchase order\t1 1\nbanana\t0 1\npurchase\t0 1\n")
    p = VectorFileSimilarity(path)
    for phrase in ("order", "purchase order", "banana"):
        assert p.sim(phrase, phrase) == 1.0
    assert p.sim("order", "purchase order") == pytest.approx(2 ** -0.5)
    assert p.sim("order", "banana") == 0.0
    # unknown phrase: mean of the known word vectors
    assert p.sim("purchase banana", "banana") == pytest.approx(1.0)
    # no known word at all: lexical fallback
    assert p.sim("zzz qq", "zzz") == pytest.approx(lexical_similarity("zzz qq", "zzz"))
    assert p.describe() == {"mode": "vector-file", "path": str(path)}


@pytest.mark.parametrize("content", ["order\t1 0\ninvoice\t1\n", "order 1 0\n", "order\t1 x\n"])
def test_vector_file_errors(tmp_path, content):
    path = tmp_path / "v.tsv"
    path.write_text(content)
    with pytest.raises(ValueError, match=r"v.tsv:\d+"):
        VectorFileSimilarity(path)


def test_remote_provider_batches_and_caches():
    vectors = {"order": [1.0, 0.0], "purchase order": [1.0, 1.0], "banana": [0.0, 1.0]}
    calls = []

    def handler(request):
        phrases = json.loads(request.content)["phrases"]
        calls.append(phrases)
        return httpx.Response(200, json={"vectors": [vectors[p] for p in phrases]})

    client = httpx.Client(transport=httpx.MockTransport(handler))
    p = RemoteEmbeddingSimilarity("http://embed.test/v1", client=client)
    p.prefetch(["order", "purchase order", "banana"])
    assert p.sim("order", "purchase order") == pytest.approx(2 ** -0.5)
    assert p.sim("purchase order", "order") == pytest.approx(2 ** -0.5)
    assert p.sim("banana", "order") == 0.0
    assert calls == [["banana", "order", "purchase order"]]


@pytest.mark.parametrize(
    "response",
    [
        httpx.Response(500),
        httpx.Response(200, json={"nope": []}),
        httpx.Response(200, json={"vectors": [[1.0]]}),
    ],
)
def test_remote_failures_are_distinct_errors(response):
    client = httpx.Client(transport=httpx.MockTransport(lambda request: response))
    p = RemoteEmbeddingSimilarity("http://embed.test/v1", client=client)
    with pytest.raises(SimilarityServiceError):
        p.sim("order", "invoice")


def test_remote_timeout_is_a_service_error():
    def handler(request):
        raise httpx.ReadTimeout("slow", request=request)

    p = RemoteEmbeddingSimilarity("http://embed.test/v1", client=httpx.Client(transport=httpx.MockTransport(handler)))
    with pytest.raises(SimilarityServiceError):
        p.sim("order", "invoice")
