"""tf-idf baseline: stopword removal + Porter stems + smoothed idf weights."""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Sequence

import numpy as np

from .corpus import CleanSentence
from .errors import DataError
from .porter import porter_stem
from .ranking import Aggregation, DEGENERATE_SCORE, QuerySet, RankedList, order_by_score

__all__ = [
    "SparseVector",
    "TfidfModel",
    "stopwords",
    "remove_stopwords",
    "fit",
    "transform",
    "sparse_cosine",
    "rank_tfidf",
]

_STOPWORDS: frozenset[str] | None = None


def stopwords() -> frozenset[str]:
    """The bundled English stopword list (lowercase alphabetic words)."""
    global _STOPWORDS
    if _STOPWORDS is None:
        text = resources.files("textsift.data").joinpath("stopwords_en.txt").read_text("utf-8")
        _STOPWORDS = frozenset(text.split())
    return _STOPWORDS


def remove_stopwords(tokens: Sequence[str]) -> list[str]:
    stop = stopwords()
    return [t for t in tokens if t not in stop]


def _analyze(tokens: Sequence[str]) -> list[str]:
    # stopwords are surface forms, so filter before stemming
    return [porter_stem(t) for t in remove_stopwords(tokens)]


@dataclass(frozen=True)
class SparseVector:
    """Strictly increasing indices; weights L2-normalized unless empty."""

    indices: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        if self.indices.shape != self.weights.shape:
            raise ValueError("indices and weights must be the same length")


_EMPTY = SparseVector(indices=np.empty(0, dtype=np.intp), weights=np.empty(0))


class TfidfModel:
    """Term -> index map plus idf weights, fit once over a corpus."""

    def __init__(self, terms: Sequence[str], idf: np.ndarray, n_docs: int) -> None:
        self.terms = list(terms)
        self.index = {t: i for i, t in enumerate(self.terms)}
        self.idf = np.asarray(idf, dtype=np.float64)
        self.n_docs = n_docs


def fit(corpus: Iterable[CleanSentence]) -> TfidfModel:
    """Collect document frequencies over stemmed non-stopword terms.

    idf_t = ln((1 + N) / (1 + df_t)) + 1, which stays positive even for terms
    present in every document.
    """
    df: dict[str, int] = {}
    n_docs = 0
    for sentence in corpus:
        n_docs += 1
        for term in set(_analyze(sentence.tokens)):
            df[term] = df.get(term, 0) + 1
    if not df:
        raise DataError("tf-idf fit: corpus has no usable terms")
    terms = sorted(df)
    idf = np.array([math.log((1 + n_docs) / (1 + df[t])) + 1.0 for t in terms])
    return TfidfModel(terms=terms, idf=idf, n_docs=n_docs)


def transform(tokens: Sequence[str], model: TfidfModel) -> SparseVector:
    """Raw term counts weighted by idf, then L2-normalized.

    Tokens whose stem is not in the vocabulary are dropped; a document with no
    known terms transforms to the empty vector.
    """
    counts: dict[int, int] = {}
    for term in _analyze(tokens):
        idx = model.index.get(term)
        if idx is not None:
            counts[idx] = counts.get(idx, 0) + 1
    if not counts:
        return _EMPTY
    indices = np.array(sorted(counts), dtype=np.intp)
    weights = np.array([counts[i] for i in indices], dtype=np.float64) * model.idf[indices]
    norm = float(np.linalg.norm(weights))
    return SparseVector(indices=indices, weights=weights / norm)


def sparse_cosine(a: SparseVector, b: SparseVector) -> float:
    """Dot product of two L2-normalized sparse vectors (0 if either is empty)."""
    if len(a.indices) == 0 or len(b.indices) == 0:
        return 0.0
    # intersect the sorted index lists
    common_a = np.isin(a.indices, b.indices)
    if not common_a.any():
        return 0.0
    common_b = np.isin(b.indices, a.indices)
    value = float(a.weights[common_a] @ b.weights[common_b])
    return max(-1.0, min(1.0, value))


def rank_tfidf(
    tweets: Sequence[CleanSentence],
    query: QuerySet,
    model: TfidfModel,
    aggregation: Aggregation = Aggregation.MAX,
) -> RankedList:
    """Rank tweets against the query set with sparse tf-idf cosine.

    Same ordering contract as the embedding ranker: descending score, ties by
    input position, empty-vector tweets pinned to the degenerate score.
    """
    if not query.sentences:
        raise DataError("empty query set")
    query_vecs = [transform(s.tokens, model) for s in query.sentences]
    ids = [t.origin_id if t.origin_id else str(i) for i, t in enumerate(tweets)]
    scores: list[float] = []
    for tweet in tweets:
        tv = transform(tweet.tokens, model)
        if len(tv.indices) == 0:
            scores.append(DEGENERATE_SCORE)
            continue
        sims = [sparse_cosine(tv, qv) for qv in query_vecs]
        if aggregation is Aggregation.MAX:
            scores.append(max(sims))
        else:
            scores.append(sum(sims) / len(sims))
    return RankedList(entries=tuple(order_by_score(ids, scores)), aggregation=aggregation)
