"""Okapi BM25 ranking over small candidate sets.

Indexes are built per query over a filtered candidate pool (hundreds of
documents at most), so construction favors simplicity over incremental
updates. The idf uses the non-negative Lucene variant,

    idf(t) = ln((N - df(t) + 0.5) / (df(t) + 0.5) + 1)

which keeps scores >= 0 even on tiny candidate sets, and

    score(q, d) = sum_t idf(t) * f(t,d) * (k1 + 1)
                  / (f(t,d) + k1 * (1 - b + b * |d| / avg_len))

summed over query term occurrences t (query term multiplicity counts).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

from .errors import DataError
from .tokens import word_tokens


def tokenize(text: str) -> list[str]:
    """Casefolded Unicode word tokens; punctuation dropped."""
    return word_tokens(text, casefold=True)


@dataclass(frozen=True)
class Bm25Params:
    k1: float = 1.5
    b: float = 0.75

    def __post_init__(self) -> None:
        if self.k1 < 0:
            raise DataError(f"BM25 k1 must be non-negative (got {self.k1})")
        if not 0.0 <= self.b <= 1.0:
            raise DataError(f"BM25 b must be in [0, 1] (got {self.b})")


@dataclass(frozen=True)
class Bm25Index:
    documents: tuple[tuple[str, ...], ...]
    doc_freq: dict[str, int]
    avg_len: float
    params: Bm25Params
    _term_freqs: tuple[Counter, ...] = field(repr=False, compare=False, default=())
    _idf: dict[str, float] = field(repr=False, compare=False, default_factory=dict)

    def __len__(self) -> int:
        return len(self.documents)


def build_index(
    docs: "list[str] | tuple[str, ...]",
    params: Bm25Params = Bm25Params(),
    pretokenized: "list[list[str]] | None" = None,
) -> Bm25Index:
    """Compute document statistics for BM25 scoring.

    `pretokenized` lets callers reuse token lists across many per-query
    indexes over the same pool; when given it must align with `docs`.
    """
    if not docs:
        raise DataError("BM25 index needs at least one document")
    if pretokenized is None:
        token_lists = [tokenize(d) for d in docs]
    else:
        if len(pretokenized) != len(docs):
            raise DataError("pretokenized list does not align with docs")
        token_lists = pretokenized
    total_len = sum(len(toks) for toks in token_lists)
    if total_len == 0:
        raise DataError("all documents tokenized to empty; avg_len would be 0")
    avg_len = total_len / len(token_lists)
    term_freqs = tuple(Counter(toks) for toks in token_lists)
    doc_freq: Counter = Counter()
    for tf in term_freqs:
        doc_freq.update(tf.keys())
    n = len(token_lists)
    idf = {
        t: math.log((n - df + 0.5) / (df + 0.5) + 1.0) for t, df in doc_freq.items()
    }
    return Bm25Index(
        documents=tuple(tuple(toks) for toks in token_lists),
        doc_freq=dict(doc_freq),
        avg_len=avg_len,
        params=params,
        _term_freqs=term_freqs,
        _idf=idf,
    )


def _score_tokens(index: Bm25Index, query_tokens: "list[str]", doc_id: int) -> float:
    tf = index._term_freqs[doc_id]
    doc_len = len(index.documents[doc_id])
    k1, b = index.params.k1, index.params.b
    norm = k1 * (1.0 - b + b * doc_len / index.avg_len)
    total = 0.0
    for term in query_tokens:
        f = tf.get(term, 0)
        if f == 0:
            continue
        total += index._idf[term] * f * (k1 + 1.0) / (f + norm)
    return total


def score(index: Bm25Index, query: str, doc_id: int) -> float:
    """BM25 score of one document against the query; absent terms add 0."""
    if not 0 <= doc_id < len(index.documents):
        raise DataError(f"doc_id {doc_id} out of range (N={len(index.documents)})")
    return _score_tokens(index, tokenize(query), doc_id)


def score_all(index: Bm25Index, query: str) -> list[float]:
    """Score every document against the query, tokenizing the query once."""
    query_tokens = tokenize(query)
    return [
        _score_tokens(index, query_tokens, doc_id) for doc_id in range(len(index))
    ]


def top_k(index: Bm25Index, query: str, k: int) -> list[tuple[int, float]]:
    """The min(k, N) highest-scoring documents, ties broken by ascending doc_id."""
    if k < 1:
        raise DataError(f"k must be positive (got {k})")
    scored = list(enumerate(score_all(index, query)))
    scored.sort(key=lambda item: -item[1])  # stable: equal scores keep id order
    return scored[:k]


class CachedIndexBuilder:
    """Index factory that memoizes work shared across per-query builds.

    Candidate sets over one pool repeat (the threshold path often selects
    the same documents for every query), so whole indexes are memoized by
    their document tuple, and token lists are reused across differing sets.
    """

    def __init__(self, params: Bm25Params = Bm25Params()):
        self.params = params
        self._tokens: dict[str, list[str]] = {}
        self._indexes: dict[tuple[str, ...], Bm25Index] = {}

    def __call__(self, docs: "list[str] | tuple[str, ...]") -> Bm25Index:
        key = tuple(docs)
        index = self._indexes.get(key)
        if index is not None:
            return index
        pretokenized = []
        for doc in docs:
            toks = self._tokens.get(doc)
            if toks is None:
                toks = tokenize(doc)
                self._tokens[doc] = toks
            pretokenized.append(toks)
        index = build_index(docs, self.params, pretokenized=pretokenized)
        self._indexes[key] = index
        return index
