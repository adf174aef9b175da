"""Shared test utilities: tiny corpora generators and hand-rolled oracles."""

from __future__ import annotations

import numpy as np

from textsift.corpus import CleanSentence, normalize


def sentences_from(texts: list[str]) -> list[CleanSentence]:
    return [normalize(t, origin_id=str(i)) for i, t in enumerate(texts)]


def topic_sentences(
    rng: np.random.Generator,
    core_words: list[str],
    filler_words: list[str],
    n_sentences: int,
    length: int = 6,
    core_frac: float = 0.7,
) -> list[str]:
    """Sentences whose tokens mostly come from one topic's core vocabulary."""
    out = []
    for _ in range(n_sentences):
        tokens = []
        for _ in range(length):
            if not filler_words or rng.random() < core_frac:
                tokens.append(core_words[int(rng.integers(0, len(core_words)))])
            else:
                tokens.append(filler_words[int(rng.integers(0, len(filler_words)))])
        out.append(" ".join(tokens))
    return out


TOPIC_A_CORE = [f"alpha{i:02d}" for i in range(40)]
TOPIC_B_CORE = [f"beta{i:02d}" for i in range(40)]
SHARED_FILLER = [f"fill{i:02d}" for i in range(15)]
