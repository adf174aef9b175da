"""Skip-gram word embeddings trained with negative sampling.

Plain-numpy SGD: for every (center, context) pair inside the window, pull the
context's output vector toward the center's input vector and push a handful of
noise words (drawn proportional to count^0.75) away.  Gradients are exact, so
finite differences can audit every update, and a single-worker run is
bit-reproducible for a fixed seed.
"""

from __future__ import annotations

import threading
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import CleanSentence
from .errors import DataError

__all__ = [
    "TrainingConfig",
    "Vocabulary",
    "NegativeSamplingTable",
    "EmbeddingModel",
    "build_vocabulary",
    "sgns_pair_loss",
    "sgns_step",
    "train",
    "save_model",
    "load_model",
    "nearest_neighbors",
]


@dataclass
class TrainingConfig:
    """Hyperparameters; the defaults are the ones used for full Q&A corpora."""

    window: int = 5
    dim: int = 300
    negatives: int = 10
    min_count: int = 5
    epochs: int = 5
    chunk_size: int = 50
    initial_lr: float = 0.025
    seed: int = 0
    workers: int = 1
    subsample: float = 0.0  # frequent-word downsampling threshold; 0 = off

    def validate(self) -> None:
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.negatives < 1:
            raise ValueError("negatives must be >= 1")
        if self.min_count < 1:
            raise ValueError("min_count must be >= 1")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.chunk_size < 1:
            raise ValueError("chunk_size must be >= 1")
        if not (self.initial_lr > 0):
            raise ValueError("initial_lr must be > 0")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.subsample < 0:
            raise ValueError("subsample must be >= 0")


class Vocabulary:
    """Token inventory with dense indices, ordered by count desc then word asc.

    `counts` is None for vocabularies reconstructed from a saved model file
    (the text format does not carry frequencies).
    """

    __slots__ = ("words", "index", "counts", "total_tokens")

    def __init__(
        self,
        words: Sequence[str],
        counts: Sequence[int] | None,
        total_tokens: int | None = None,
    ) -> None:
        self.words = list(words)
        self.index = {w: i for i, w in enumerate(self.words)}
        if len(self.index) != len(self.words):
            raise ValueError("duplicate words in vocabulary")
        self.counts = None if counts is None else np.asarray(counts, dtype=np.int64)
        self.total_tokens = total_tokens

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self.index


def build_vocabulary(sentences: Iterable[CleanSentence], min_count: int = 5) -> Vocabulary:
    """Count tokens and keep those with count >= min_count."""
    counter: Counter[str] = Counter()
    for sentence in sentences:
        counter.update(sentence.tokens)
    kept = [(word, count) for word, count in counter.items() if count >= min_count]
    if not kept:
        raise DataError(f"corpus too small for min_count={min_count}: no word reaches it")
    kept.sort(key=lambda wc: (-wc[1], wc[0]))
    words = [w for w, _ in kept]
    counts = [c for _, c in kept]
    return Vocabulary(words, counts, total_tokens=sum(counts))


class NegativeSamplingTable:
    """Draws vocabulary indices with probability proportional to count**power."""

    def __init__(self, counts: Sequence[int], power: float = 0.75) -> None:
        weights = np.asarray(counts, dtype=np.float64)
        if weights.ndim != 1 or weights.size == 0:
            raise ValueError("counts must be a non-empty 1-d sequence")
        if np.any(weights <= 0):
            raise ValueError("counts must be positive")
        weights = weights**power
        self.probabilities = weights / weights.sum()
        self.cumulative = np.cumsum(self.probabilities)
        self.cumulative[-1] = 1.0

    def sample(self, rng: np.random.Generator, n: int = 1) -> np.ndarray:
        """n independent draws (vocabulary indices)."""
        return np.searchsorted(self.cumulative, rng.random(n), side="right")


@dataclass
class EmbeddingModel:
    """`input_vectors` are the published word vectors; `output_vectors` is the
    context matrix, present only on freshly trained models (not persisted)."""

    vocab: Vocabulary
    input_vectors: np.ndarray
    output_vectors: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return int(self.input_vectors.shape[1])

    def vector(self, word: str) -> np.ndarray:
        idx = self.vocab.index.get(word)
        if idx is None:
            raise KeyError(f"word {word!r} not in vocabulary")
        return self.input_vectors[idx]


def _sigmoid(x: np.ndarray) -> np.ndarray:
    # clip keeps exp() in range; the result is still correctly rounded at
    # double precision for any |x| >= 500 (sigma saturates far earlier)
    return 1.0 / (1.0 + np.exp(-np.clip(x, -500.0, 500.0)))


def _check_index(idx: int, size: int, name: str) -> None:
    if not 0 <= idx < size:
        raise IndexError(f"{name} index {idx} out of range for vocabulary of {size}")


def sgns_pair_loss(
    center: int, context: int, negatives: Sequence[int], model: EmbeddingModel
) -> float:
    """-log sigma(u_ctx . v) - sum_k log sigma(-u_k . v), computed stably."""
    if model.output_vectors is None:
        raise ValueError("model has no output vectors (was it loaded from disk?)")
    size = len(model.vocab)
    _check_index(center, size, "center")
    _check_index(context, size, "context")
    for n in negatives:
        _check_index(n, size, "negative")
    v = model.input_vectors[center]
    pos_score = float(model.output_vectors[context] @ v)
    loss = float(np.logaddexp(0.0, -pos_score))
    if len(negatives) > 0:
        neg_scores = model.output_vectors[np.asarray(negatives, dtype=np.intp)] @ v
        loss += float(np.logaddexp(0.0, neg_scores).sum())
    return loss


def _apply_step(
    inp: np.ndarray,
    out: np.ndarray,
    center: int,
    context: int,
    negatives: list[int],
    lr: float,
) -> None:
    """One exact-gradient SGD update; gradients evaluated at pre-update values."""
    idx = np.array([context, *negatives], dtype=np.intp)
    v = inp[center]
    u = out[idx]  # fancy indexing copies the original rows
    coeff = _sigmoid(u @ v)
    coeff[0] -= 1.0
    delta_out = (-lr * coeff)[:, None] * v
    if len(set(negatives)) == len(negatives):
        out[idx] += delta_out
    else:
        np.add.at(out, idx, delta_out)  # duplicate negatives accumulate
    inp[center] -= lr * (coeff @ u)


def sgns_step(
    center: int,
    context: int,
    negatives: Sequence[int],
    model: EmbeddingModel,
    lr: float,
) -> None:
    """Apply one (center, context) update in place.

    Only the center's input row and the context/negative output rows change.
    The caller guarantees the negatives exclude the context word.
    """
    if model.output_vectors is None:
        raise ValueError("model has no output vectors (was it loaded from disk?)")
    if not (lr > 0):
        raise ValueError("lr must be > 0")
    size = len(model.vocab)
    _check_index(center, size, "center")
    _check_index(context, size, "context")
    for n in negatives:
        _check_index(n, size, "negative")
    _apply_step(model.input_vectors, model.output_vectors, center, context, list(negatives), lr)


class _BlockSampler:
    """Buffers negative-table draws in blocks; order matches one-by-one draws."""

    def __init__(self, table: NegativeSamplingTable, rng: np.random.Generator, block: int = 8192):
        self._table = table
        self._rng = rng
        self._block = block
        self._buf: list[int] = []

    def draw(self) -> int:
        if not self._buf:
            buf = self._table.sample(self._rng, self._block).tolist()
            buf.reverse()
            self._buf = buf
        return self._buf.pop()

    def draw_excluding(self, banned: int, k: int) -> list[int]:
        """k draws, redrawing on collision with `banned` (8 tries, then skip)."""
        out = []
        for _ in range(k):
            for _ in range(8):
                cand = self.draw()
                if cand != banned:
                    out.append(cand)
                    break
        return out


def _encode_corpus(
    sentences: Sequence[CleanSentence],
    vocab: Vocabulary,
    subsample: float,
    rng: np.random.Generator,
) -> list[list[int]]:
    """Map sentences to in-vocabulary index lists; drop those shorter than 2.

    With subsampling enabled, frequent words are dropped once here (keep
    probability (sqrt(f/t) + 1) * t/f for corpus frequency f), so the update
    schedule stays exact.
    """
    index = vocab.index
    keep_prob = None
    if subsample > 0:
        freq = vocab.counts / max(int(vocab.total_tokens or 0), 1)
        with np.errstate(divide="ignore"):
            keep_prob = np.minimum((np.sqrt(freq / subsample) + 1.0) * subsample / freq, 1.0)
    encoded = []
    for sentence in sentences:
        ids = [index[t] for t in sentence.tokens if t in index]
        if keep_prob is not None and ids:
            draws = rng.random(len(ids))
            ids = [i for i, u in zip(ids, draws) if u < keep_prob[i]]
        if len(ids) >= 2:
            encoded.append(ids)
    return encoded


def _pair_count(length: int, window: int) -> int:
    total = 0
    for pos in range(length):
        total += min(pos, window) + min(length - 1 - pos, window)
    return total


def _train_chunk(
    chunk: list[list[int]],
    inp: np.ndarray,
    out: np.ndarray,
    sampler: _BlockSampler,
    config: TrainingConfig,
    lr_of_step: "_LrSchedule",
) -> None:
    window = config.window
    k = config.negatives
    for sent in chunk:
        length = len(sent)
        for pos in range(length):
            center = sent[pos]
            lo = pos - window
            if lo < 0:
                lo = 0
            hi = pos + window + 1
            if hi > length:
                hi = length
            for cpos in range(lo, hi):
                if cpos == pos:
                    continue
                context = sent[cpos]
                negatives = sampler.draw_excluding(context, k)
                _apply_step(inp, out, center, context, negatives, lr_of_step.next())


class _LrSchedule:
    """Linear decay from initial_lr to initial_lr * 1e-4 over total updates."""

    def __init__(self, initial_lr: float, total_updates: int) -> None:
        self._initial = initial_lr
        self._final = initial_lr * 1e-4
        self._denom = max(total_updates - 1, 1)
        self._step = 0
        self._lock = threading.Lock()

    def next(self) -> float:
        step = self._step
        self._step = step + 1
        return self._initial + (self._final - self._initial) * (step / self._denom)

    def next_locked(self) -> float:
        with self._lock:
            return self.next()


def train(sentences: Iterable[CleanSentence], config: TrainingConfig | None = None) -> EmbeddingModel:
    """Train skip-gram vectors over the corpus.

    Every in-window (center, context) pair triggers exactly one update per
    epoch, with fresh negatives each time.  workers=1 (the default) is
    bit-reproducible for a fixed seed; workers>1 trades that determinism for
    wall-clock speed via lock-free shared updates.
    """
    config = config or TrainingConfig()
    config.validate()
    sents = list(sentences)
    vocab = build_vocabulary(sents, config.min_count)
    rng = np.random.default_rng(config.seed)

    size, dim = len(vocab), config.dim
    inp = (rng.random((size, dim)) - 0.5) / dim
    out = np.zeros((size, dim))
    table = NegativeSamplingTable(vocab.counts)
    encoded = _encode_corpus(sents, vocab, config.subsample, rng)

    pairs_per_epoch = sum(_pair_count(len(s), config.window) for s in encoded)
    if pairs_per_epoch == 0:
        raise DataError("corpus produced no training pairs (all sentences too short)")
    schedule = _LrSchedule(config.initial_lr, config.epochs * pairs_per_epoch)

    if config.workers == 1:
        sampler = _BlockSampler(table, rng)
        for _ in range(config.epochs):
            _train_chunk(encoded, inp, out, sampler, config, schedule)
    else:
        _train_parallel(encoded, inp, out, table, config, schedule)
    return EmbeddingModel(vocab=vocab, input_vectors=inp, output_vectors=out)


def _train_parallel(
    encoded: list[list[int]],
    inp: np.ndarray,
    out: np.ndarray,
    table: NegativeSamplingTable,
    config: TrainingConfig,
    schedule: _LrSchedule,
) -> None:
    """Relaxed-consistency mode: threads share the matrices without locking
    (besides the LR counter), so races may drop updates; results vary run to run."""
    chunks = [
        encoded[i : i + config.chunk_size] for i in range(0, len(encoded), config.chunk_size)
    ]

    class _LockedLr:
        def __init__(self, inner: _LrSchedule) -> None:
            self._inner = inner

        def next(self) -> float:
            return self._inner.next_locked()

    lr = _LockedLr(schedule)
    for _ in range(config.epochs):
        claim = iter(chunks)
        claim_lock = threading.Lock()

        def worker(worker_id: int) -> None:
            sampler = _BlockSampler(table, np.random.default_rng(config.seed + 1 + worker_id))
            while True:
                with claim_lock:
                    chunk = next(claim, None)
                if chunk is None:
                    return
                _train_chunk(chunk, inp, out, sampler, config, lr)

        threads = [
            threading.Thread(target=worker, args=(i,)) for i in range(config.workers)
        ]
        for t in threads:
            t.start()
        for t in threads:
            t.join()


def save_model(model: EmbeddingModel, path: str | Path) -> None:
    """Write the classic text format: `V dim` header, then `word f1 .. fdim`.

    Components use shortest round-trip formatting, so loading reconstructs the
    exact float64 values and saving again is byte-identical.
    """
    inp = model.input_vectors
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"{len(model.vocab)} {model.dim}\n")
        for word, row in zip(model.vocab.words, inp):
            fh.write(word)
            for x in row:
                fh.write(" ")
                fh.write(repr(float(x)))
            fh.write("\n")


def load_model(path: str | Path) -> EmbeddingModel:
    """Streaming loader for the text format; errors name the offending line."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        parts = header.split()
        if len(parts) != 2 or not all(p.isdigit() for p in parts):
            raise DataError("line 1: expected header 'vocab_size dim'")
        size, dim = int(parts[0]), int(parts[1])
        if size < 1 or dim < 1:
            raise DataError("line 1: vocab_size and dim must be positive")
        words: list[str] = []
        seen: set[str] = set()
        vectors = np.empty((size, dim), dtype=np.float64)
        for i in range(size):
            lineno = i + 2
            line = fh.readline()
            if not line:
                raise DataError(f"line {lineno}: expected {size} vector rows, file ends after {i}")
            fields = line.rstrip("\n").split(" ")
            if len(fields) != dim + 1:
                raise DataError(
                    f"line {lineno}: expected word + {dim} components, got {len(fields)} fields"
                )
            word = fields[0]
            if not word:
                raise DataError(f"line {lineno}: empty word")
            if word in seen:
                raise DataError(f"line {lineno}: duplicate word {word!r}")
            try:
                row = np.array(fields[1:], dtype=np.float64)
            except ValueError as exc:
                raise DataError(f"line {lineno}: non-numeric vector component") from exc
            if not np.all(np.isfinite(row)):
                raise DataError(f"line {lineno}: non-finite vector component")
            words.append(word)
            seen.add(word)
            vectors[i] = row
        trailing = fh.readline()
        if trailing.strip():
            raise DataError(f"line {size + 2}: trailing content after {size} rows")
    vocab = Vocabulary(words, counts=None, total_tokens=None)
    return EmbeddingModel(vocab=vocab, input_vectors=vectors, output_vectors=None)


def nearest_neighbors(model: EmbeddingModel, word: str, k: int = 10) -> list[tuple[str, float]]:
    """Top-k words by cosine against `word`'s vector, excluding the word itself.

    Ties break toward the lower vocabulary index; zero-norm rows score 0.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    query_idx = model.vocab.index.get(word)
    if query_idx is None:
        raise KeyError(f"word {word!r} not in vocabulary")
    matrix = model.input_vectors
    size = matrix.shape[0]
    v = matrix[query_idx]
    v_norm = float(np.linalg.norm(v))
    norms = np.linalg.norm(matrix, axis=1)
    sims = np.zeros(size)
    if v_norm >= 1e-12:
        ok = norms >= 1e-12
        sims[ok] = (matrix[ok] @ v) / (norms[ok] * v_norm)
    sims[query_idx] = -np.inf
    order = np.lexsort((np.arange(size), -sims))
    top = order[: min(k, size - 1)]
    return [(model.vocab.words[i], float(sims[i])) for i in top]
