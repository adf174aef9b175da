"""Rank tweets by similarity to a sampled set of reference sentences."""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import CleanSentence
from .embedding import EmbeddingModel
from .errors import DataError
from .vectorize import OovPolicy, SentenceVector, cosine, vectorize

__all__ = [
    "Aggregation",
    "QuerySet",
    "RankedList",
    "select_instances",
    "vectorize_queries",
    "score",
    "rank",
    "order_by_score",
    "write_ranked_tsv",
    "DEGENERATE_SCORE",
]

DEGENERATE_SCORE = -1.0


class Aggregation(Enum):
    MAX = "max"
    MEAN = "mean"


@dataclass(frozen=True)
class QuerySet:
    """Reference sentences sampled from the corpus (each <= max_chars chars).

    `vectors` stays None until a ranker attaches sentence vectors; when set,
    vectors[i] corresponds to sentences[i].
    """

    sentences: tuple[CleanSentence, ...]
    max_chars: int
    sample_size: int
    seed: int
    vectors: tuple[SentenceVector, ...] | None = None


@dataclass(frozen=True)
class RankedList:
    """entries[i] = (tweet_id, score), scores non-increasing; degenerate tweets
    carry DEGENERATE_SCORE and therefore sink to the bottom."""

    entries: tuple[tuple[str, float], ...]
    aggregation: Aggregation


def select_instances(
    sentences: Iterable[CleanSentence],
    max_chars: int = 140,
    sample_size: int = 1000,
    seed: int = 0,
) -> QuerySet:
    """Uniform sample of eligible sentences via single-pass reservoir sampling.

    Deterministic for a fixed seed and input order; errors when no sentence
    fits the length bound.
    """
    if max_chars < 1:
        raise ValueError("max_chars must be >= 1")
    if sample_size < 1:
        raise ValueError("sample_size must be >= 1")
    rng = np.random.default_rng(seed)
    reservoir: list[CleanSentence] = []
    eligible_seen = 0
    for sentence in sentences:
        if sentence.char_len > max_chars:
            continue
        if len(reservoir) < sample_size:
            reservoir.append(sentence)
        else:
            j = int(rng.integers(0, eligible_seen + 1))
            if j < sample_size:
                reservoir[j] = sentence
        eligible_seen += 1
    if not reservoir:
        raise DataError(f"no eligible sentences (none within {max_chars} chars)")
    return QuerySet(
        sentences=tuple(reservoir),
        max_chars=max_chars,
        sample_size=sample_size,
        seed=seed,
    )


def vectorize_queries(
    query: QuerySet, model: EmbeddingModel, policy: OovPolicy = OovPolicy.IGNORE
) -> QuerySet:
    """Return a copy of `query` with sentence vectors attached."""
    vectors = tuple(vectorize(s.tokens, model, policy) for s in query.sentences)
    return replace(query, vectors=vectors)


def score(
    tweet_vec: SentenceVector,
    query: QuerySet,
    aggregation: Aggregation = Aggregation.MAX,
) -> float:
    """Aggregate cosine similarity of one tweet against every query sentence."""
    if query.vectors is None:
        raise ValueError("query set has no vectors; call vectorize_queries first")
    if not query.vectors:
        raise DataError("empty query set")
    if tweet_vec.degenerate:
        return DEGENERATE_SCORE
    sims = [cosine(tweet_vec, qv) for qv in query.vectors]
    if aggregation is Aggregation.MAX:
        return max(sims)
    return sum(sims) / len(sims)


def order_by_score(ids: Sequence[str], scores: Sequence[float]) -> list[tuple[str, float]]:
    """Sort by score descending; equal scores keep ascending input order."""
    order = sorted(range(len(ids)), key=lambda i: (-scores[i], i))
    return [(ids[i], scores[i]) for i in order]


def rank(
    tweets: Sequence[CleanSentence],
    query: QuerySet,
    model: EmbeddingModel,
    policy: OovPolicy = OovPolicy.IGNORE,
    aggregation: Aggregation = Aggregation.MAX,
) -> RankedList:
    """Score every tweet against the query set and sort (desc, stable ties)."""
    if query.vectors is None:
        query = vectorize_queries(query, model, policy)
    ids = [t.origin_id if t.origin_id else str(i) for i, t in enumerate(tweets)]
    scores = [score(vectorize(t.tokens, model, policy), query, aggregation) for t in tweets]
    return RankedList(entries=tuple(order_by_score(ids, scores)), aggregation=aggregation)


def write_ranked_tsv(
    ranked: RankedList, original_texts: Mapping[str, str], path: str | Path
) -> None:
    """rank<TAB>tweet_id<TAB>score<TAB>original_text, scores to 6 decimals."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for position, (tweet_id, value) in enumerate(ranked.entries, start=1):
            text = original_texts.get(tweet_id, "")
            fh.write(f"{position}\t{tweet_id}\t{value:.6f}\t{text}\n")
