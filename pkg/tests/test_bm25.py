from __future__ import annotations

import math
import random
from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from icl_miner.bm25 import (
    Bm25Params,
    CachedIndexBuilder,
    build_index,
    score,
    tokenize,
    top_k,
)
from icl_miner.errors import DataError

# ---------------------------------------------------------------------------
# independent brute-force oracle: implements the documented formula directly
# ---------------------------------------------------------------------------


def oracle_scores(docs: list[str], query: str, k1=1.5, b=0.75) -> list[float]:
    token_docs = [tokenize(d) for d in docs]
    n = len(token_docs)
    avg_len = sum(len(d) for d in token_docs) / n
    out = []
    for toks in token_docs:
        tf = Counter(toks)
        total = 0.0
        for term in tokenize(query):
            f = tf.get(term, 0)
            if f == 0:
                continue
            df = sum(1 for other in token_docs if term in set(other))
            idf = math.log((n - df + 0.5) / (df + 0.5) + 1.0)
            total += idf * f * (k1 + 1.0) / (f + k1 * (1.0 - b + b * len(toks) / avg_len))
        out.append(total)
    return out


def oracle_top_k(docs: list[str], query: str, k: int) -> list[tuple[int, float]]:
    scores = oracle_scores(docs, query)
    order = sorted(range(len(docs)), key=lambda i: (-scores[i], i))
    return [(i, scores[i]) for i in order[:k]]


WORDS = ["cat", "dog", "bird", "fish", "tree", "rock", "moon", "star", "rain", "wind"]


def random_corpus(rng: random.Random, max_docs=200, max_tokens=30) -> list[str]:
    n_docs = rng.randint(1, max_docs)
    return [
        " ".join(rng.choices(WORDS, k=rng.randint(1, max_tokens)))
        for _ in range(n_docs)
    ]


class TestTokenize:
    def test_casefolds_and_drops_punctuation(self):
        assert tokenize("The cat, the CAT.") == ["the", "cat", "the", "cat"]

    def test_empty_string(self):
        assert tokenize("") == []

    def test_hyphen_splits(self):
        assert tokenize("a1-b2") == ["a1", "b2"]


class TestBuildIndex:
    def test_counts(self):
        index = build_index(["a b", "a"])
        assert index.avg_len == 1.5
        assert index.doc_freq == {"a": 2, "b": 1}

    def test_single_doc_avg_len(self):
        index = build_index(["x y z"])
        assert index.avg_len == 3.0

    def test_all_empty_docs_error(self):
        with pytest.raises(DataError):
            build_index(["...", "!!"])

    def test_no_docs_error(self):
        with pytest.raises(DataError):
            build_index([])

    def test_stats_match_naive_recount(self):
        rng = random.Random(11)
        for _ in range(20):
            docs = random_corpus(rng, max_docs=30, max_tokens=10)
            index = build_index(docs)
            token_docs = [tokenize(d) for d in docs]
            assert index.avg_len == sum(map(len, token_docs)) / len(token_docs)
            expected_df = Counter()
            for toks in token_docs:
                expected_df.update(set(toks))
            assert index.doc_freq == dict(expected_df)


class TestScore:
    def test_disjoint_terms_score_zero(self):
        index = build_index(["cat dog", "bird"])
        assert score(index, "fish tree", 0) == 0.0

    def test_hand_computed_case(self):
        # N=2, docs ["a b","c"], query "a", doc 0; value frozen from the
        # formula oracle in this module's header comment
        index = build_index(["a b", "c"])
        assert score(index, "a", 0) == pytest.approx(0.6027366787477785, abs=1e-12)

    def test_additive_over_disjoint_query_terms(self):
        index = build_index(["cat dog bird fish", "cat cat"])
        combined = score(index, "cat bird", 0)
        assert combined == pytest.approx(
            score(index, "cat", 0) + score(index, "bird", 0), abs=1e-12
        )

    def test_doc_id_out_of_range(self):
        index = build_index(["a"])
        with pytest.raises(DataError):
            score(index, "a", 5)

    def test_scores_non_negative_random(self):
        rng = random.Random(5)
        for _ in range(20):
            docs = random_corpus(rng, max_docs=20, max_tokens=8)
            index = build_index(docs)
            query = " ".join(rng.choices(WORDS, k=3))
            assert all(score(index, query, i) >= 0.0 for i in range(len(docs)))


class TestTopK:
    def test_full_ranking_when_k_equals_n(self):
        docs = ["cat cat", "cat dog", "dog dog"]
        index = build_index(docs)
        result = top_k(index, "cat", k=3)
        assert len(result) == 3
        assert [doc_id for doc_id, _ in result][:2] == [0, 1]

    def test_all_zero_scores_keep_id_order(self):
        index = build_index(["a", "b", "c"])
        result = top_k(index, "zzz", k=2)
        assert result == [(0, 0.0), (1, 0.0)]

    def test_matches_bruteforce_oracle(self):
        rng = random.Random(23)
        for _ in range(25):
            docs = random_corpus(rng, max_docs=50, max_tokens=12)
            query = " ".join(rng.choices(WORDS, k=rng.randint(1, 5)))
            k = rng.randint(1, len(docs))
            index = build_index(docs)
            got = top_k(index, query, k)
            expected = oracle_top_k(docs, query, k)
            assert [doc_id for doc_id, _ in got] == [d for d, _ in expected]
            for (_, got_score), (_, want_score) in zip(got, expected):
                assert got_score == pytest.approx(want_score, abs=1e-9)

    def test_prefix_property(self):
        rng = random.Random(31)
        docs = random_corpus(rng, max_docs=30, max_tokens=10)
        index = build_index(docs)
        shorter = top_k(index, "cat dog", k=5)
        longer = top_k(index, "cat dog", k=6)
        assert longer[:5] == shorter


@given(
    st.lists(
        st.lists(st.sampled_from(WORDS), min_size=1, max_size=8).map(" ".join),
        min_size=1,
        max_size=15,
    ),
    st.lists(st.sampled_from(WORDS), min_size=1, max_size=4).map(" ".join),
)
def test_adding_a_document_keeps_other_term_freqs(docs, query):
    # only N, df, avg_len may change; per-doc frequencies are intrinsic
    index_before = build_index(docs)
    index_after = build_index(docs + ["cat moon"])
    for i in range(len(docs)):
        assert index_before._term_freqs[i] == index_after._term_freqs[i]


def test_params_validation():
    with pytest.raises(DataError):
        Bm25Params(k1=-0.1)
    with pytest.raises(DataError):
        Bm25Params(b=1.5)


def test_cached_builder_matches_plain_build():
    builder = CachedIndexBuilder()
    docs = ["cat dog", "dog bird", "cat dog"]
    via_builder = builder(docs)
    plain = build_index(docs)
    assert via_builder.doc_freq == plain.doc_freq
    assert via_builder.avg_len == plain.avg_len
    assert score(via_builder, "cat", 0) == score(plain, "cat", 0)
