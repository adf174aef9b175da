"""Sentence vectors: average the word vectors, with a choice of OOV handling."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .embedding import EmbeddingModel

__all__ = ["OovPolicy", "SentenceVector", "vectorize", "cosine", "low_freq_mean"]


class OovPolicy(Enum):
    """What an out-of-vocabulary token contributes to the average."""

    IGNORE = "ignore"  # nothing (the default)
    ZERO_VECTOR = "zero"  # a zero vector (still counts in the denominator)
    LOW_FREQ_AVERAGE = "lowfreq"  # the mean of the rarest decile of the vocabulary


@dataclass(frozen=True)
class SentenceVector:
    values: np.ndarray
    n_in_vocab: int
    degenerate: bool  # True when nothing contributed (e.g. all tokens OOV)


def low_freq_mean(model: EmbeddingModel) -> np.ndarray:
    """Mean input vector of the lowest-frequency decile (>= 1 word).

    Vocabulary order is count-descending, so the decile is the final
    max(1, V // 10) rows; that also covers models loaded from disk, where
    explicit counts are unavailable but the conventional order is the same.
    """
    size = len(model.vocab)
    n_low = max(1, size // 10)
    return model.input_vectors[size - n_low :].mean(axis=0)


def vectorize(
    tokens: Sequence[str],
    model: EmbeddingModel,
    policy: OovPolicy = OovPolicy.IGNORE,
) -> SentenceVector:
    """Average the token vectors under the given OOV policy.

    Contributions are summed in ascending vocabulary-index order, so any
    permutation of the same tokens produces a bitwise-identical vector.
    """
    index = model.vocab.index
    in_vocab = sorted(index[t] for t in tokens if t in index)
    n_in_vocab = len(in_vocab)
    n_oov = len(tokens) - n_in_vocab
    dim = model.dim

    total = np.zeros(dim)
    if in_vocab:
        total = model.input_vectors[np.asarray(in_vocab, dtype=np.intp)].sum(axis=0)

    if policy is OovPolicy.IGNORE:
        denom = n_in_vocab
    elif policy is OovPolicy.ZERO_VECTOR:
        denom = len(tokens)
    elif policy is OovPolicy.LOW_FREQ_AVERAGE:
        if n_oov:
            total = total + n_oov * low_freq_mean(model)
        denom = len(tokens)
    else:  # pragma: no cover - exhaustive enum
        raise ValueError(f"unknown policy {policy!r}")

    if denom == 0:
        return SentenceVector(values=np.zeros(dim), n_in_vocab=0, degenerate=True)
    return SentenceVector(values=total / denom, n_in_vocab=n_in_vocab, degenerate=False)


def cosine(a: SentenceVector, b: SentenceVector) -> float:
    """Cosine similarity in [-1, 1]; either vector near zero norm gives 0."""
    va, vb = a.values, b.values
    if va.shape != vb.shape:
        raise ValueError(f"dimension mismatch: {va.shape} vs {vb.shape}")
    norm_a = float(np.linalg.norm(va))
    norm_b = float(np.linalg.norm(vb))
    if norm_a < 1e-12 or norm_b < 1e-12:
        return 0.0
    value = float(va @ vb) / (norm_a * norm_b)
    return max(-1.0, min(1.0, value))
