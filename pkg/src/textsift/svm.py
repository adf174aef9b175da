"""Binary SVM trained with sequential minimal optimization.

The default kernel is the Pearson-VII "universal" function

    K(x, y) = 1 / (1 + 4 * (2**(1/omega) - 1) * ||x - y||**2 / sigma**2) ** omega

which at omega=1, sigma=1 sits between an RBF and a rational-quadratic kernel.
The solver is the classic two-at-a-time working-set method: pick a multiplier
violating the KKT conditions, pair it with the one whose error differs most,
solve the 2-variable subproblem analytically, repeat until no violations
remain within tolerance.  Seeded shuffling makes runs reproducible.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DataError
from .metrics import ConfusionCounts, MetricReport, prf

__all__ = [
    "KernelSpec",
    "SvmModel",
    "kernel_eval",
    "gram",
    "train_smo",
    "decision_function",
    "predict",
    "ntf_vocabulary",
    "normalized_tf_features",
    "CrossValidationResult",
    "cross_validate",
    "save_svm_model",
    "load_svm_model",
]


@dataclass(frozen=True)
class KernelSpec:
    kind: str  # "linear" | "rbf" | "puk"
    gamma: float = 1.0  # rbf only
    omega: float = 1.0  # puk only
    sigma: float = 1.0  # puk only

    def __post_init__(self) -> None:
        if self.kind not in ("linear", "rbf", "puk"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "rbf" and not self.gamma > 0:
            raise ValueError("rbf gamma must be > 0")
        if self.kind == "puk" and (not self.omega > 0 or not self.sigma > 0):
            raise ValueError("puk omega and sigma must be > 0")

    @classmethod
    def linear(cls) -> "KernelSpec":
        return cls("linear")

    @classmethod
    def rbf(cls, gamma: float = 1.0) -> "KernelSpec":
        return cls("rbf", gamma=gamma)

    @classmethod
    def puk(cls, omega: float = 1.0, sigma: float = 1.0) -> "KernelSpec":
        return cls("puk", omega=omega, sigma=sigma)


def gram(spec: KernelSpec, X: np.ndarray, Y: np.ndarray | None = None) -> np.ndarray:
    """Kernel matrix K[i, j] = k(X[i], Y[j]); Y defaults to X."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    Y = X if Y is None else np.atleast_2d(np.asarray(Y, dtype=np.float64))
    if X.shape[1] != Y.shape[1]:
        raise ValueError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    if spec.kind == "linear":
        return X @ Y.T
    sq = (X * X).sum(axis=1)[:, None] + (Y * Y).sum(axis=1)[None, :] - 2.0 * (X @ Y.T)
    np.maximum(sq, 0.0, out=sq)
    if spec.kind == "rbf":
        return np.exp(-spec.gamma * sq)
    scale = 4.0 * (2.0 ** (1.0 / spec.omega) - 1.0) / (spec.sigma**2)
    return (1.0 + scale * sq) ** (-spec.omega)


def kernel_eval(spec: KernelSpec, x: np.ndarray, y: np.ndarray) -> float:
    return float(gram(spec, np.asarray(x)[None, :], np.asarray(y)[None, :])[0, 0])


@dataclass
class SvmModel:
    support_vectors: np.ndarray  # (m, d)
    dual_coefs: np.ndarray  # (m,) alpha_i * y_i
    bias: float
    kernel: KernelSpec
    C: float


def decision_function(model: SvmModel, X: np.ndarray) -> np.ndarray:
    """f(x) = sum_i dual_coefs_i * k(sv_i, x) + bias for each row of X."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.support_vectors.shape[1]:
        raise ValueError(
            f"feature dimension {X.shape[1]} does not match model ({model.support_vectors.shape[1]})"
        )
    return gram(model.kernel, model.support_vectors, X).T @ model.dual_coefs + model.bias


def predict(model: SvmModel, x: np.ndarray) -> tuple[int, float]:
    """(label, decision value); the decision boundary itself maps to -1."""
    value = float(decision_function(model, np.asarray(x, dtype=np.float64)[None, :])[0])
    return (1 if value > 0 else -1), value


_STEP_EPS = 1e-12


def train_smo(
    features: np.ndarray,
    labels: Sequence[int],
    C: float = 1.0,
    kernel: KernelSpec | None = None,
    tol: float = 1e-3,
    max_passes: int = 10_000,
    seed: int = 0,
) -> SvmModel:
    """Solve the soft-margin dual; returns the support-vector expansion.

    On exit every training point satisfies the KKT conditions within `tol`:
    y*f >= 1-tol where alpha=0, y*f <= 1+tol where alpha=C, y*f = 1 +/- tol in
    between.  `max_passes` caps full sweeps as a divergence guard.
    """
    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError("features must be (n, d) with one label per row")
    if not set(np.unique(y)) <= {-1.0, 1.0}:
        raise ValueError("labels must be +1 or -1")
    if len(set(y.tolist())) < 2:
        raise DataError("training data contains a single class")
    if not C > 0:
        raise ValueError("C must be > 0")
    kernel = kernel or KernelSpec.puk()

    n = X.shape[0]
    K = gram(kernel, X)
    alpha = np.zeros(n)
    state = {"b": 0.0}
    errors = -y.copy()  # f == 0 initially, so E_i = f(x_i) - y_i = -y_i
    rng = np.random.default_rng(seed)

    def take_step(i1: int, i2: int) -> bool:
        nonlocal errors
        if i1 == i2:
            return False
        a1, a2 = alpha[i1], alpha[i2]
        y1, y2 = y[i1], y[i2]
        e1, e2 = errors[i1], errors[i2]
        s = y1 * y2
        if s > 0:
            low, high = max(0.0, a1 + a2 - C), min(C, a1 + a2)
        else:
            low, high = max(0.0, a2 - a1), min(C, C + a2 - a1)
        if low >= high:
            return False
        k11, k12, k22 = K[i1, i1], K[i1, i2], K[i2, i2]
        eta = k11 + k22 - 2.0 * k12
        if eta > 0:
            a2_new = a2 + y2 * (e1 - e2) / eta
            a2_new = min(max(a2_new, low), high)
        else:
            # flat direction: evaluate the objective at both clip ends
            b = state["b"]
            f1 = y1 * (e1 + b) - a1 * k11 - s * a2 * k12
            f2 = y2 * (e2 + b) - s * a1 * k12 - a2 * k22
            l1 = a1 + s * (a2 - low)
            h1 = a1 + s * (a2 - high)
            obj_low = l1 * f1 + low * f2 + 0.5 * l1**2 * k11 + 0.5 * low**2 * k22 + s * low * l1 * k12
            obj_high = h1 * f1 + high * f2 + 0.5 * h1**2 * k11 + 0.5 * high**2 * k22 + s * high * h1 * k12
            if obj_low < obj_high - _STEP_EPS:
                a2_new = low
            elif obj_low > obj_high + _STEP_EPS:
                a2_new = high
            else:
                a2_new = a2
        if abs(a2_new - a2) < _STEP_EPS * (a2_new + a2 + _STEP_EPS):
            return False
        a1_new = a1 + s * (a2 - a2_new)
        if a1_new < 0.0:
            a1_new = 0.0
        elif a1_new > C:
            a1_new = C
        d1 = y1 * (a1_new - a1)
        d2 = y2 * (a2_new - a2)
        b = state["b"]
        b1 = b - e1 - d1 * k11 - d2 * k12
        b2 = b - e2 - d1 * k12 - d2 * k22
        if 0.0 < a1_new < C:
            b_new = b1
        elif 0.0 < a2_new < C:
            b_new = b2
        else:
            b_new = 0.5 * (b1 + b2)
        alpha[i1], alpha[i2] = a1_new, a2_new
        errors += d1 * K[i1] + d2 * K[i2] + (b_new - b)
        state["b"] = b_new
        return True

    def examine(i2: int) -> int:
        y2, a2, e2 = y[i2], alpha[i2], errors[i2]
        r2 = e2 * y2
        if not ((r2 < -tol and a2 < C) or (r2 > tol and a2 > 0)):
            return 0
        non_bound = np.flatnonzero((alpha > 0) & (alpha < C))
        if len(non_bound) > 1:
            i1 = int(non_bound[np.argmax(np.abs(errors[non_bound] - e2))])
            if take_step(i1, i2):
                return 1
        if len(non_bound):
            start = int(rng.integers(0, len(non_bound)))
            for offset in range(len(non_bound)):
                if take_step(int(non_bound[(start + offset) % len(non_bound)]), i2):
                    return 1
        start = int(rng.integers(0, n))
        for offset in range(n):
            if take_step((start + offset) % n, i2):
                return 1
        return 0

    num_changed = 0
    examine_all = True
    passes = 0
    while num_changed > 0 or examine_all:
        passes += 1
        if passes > max_passes:
            raise RuntimeError(f"SMO did not converge within {max_passes} sweeps")
        num_changed = 0
        if examine_all:
            for i2 in range(n):
                num_changed += examine(i2)
        else:
            for i2 in np.flatnonzero((alpha > 0) & (alpha < C)):
                num_changed += examine(int(i2))
        if examine_all:
            examine_all = False
        elif num_changed == 0:
            examine_all = True

    sv_mask = alpha > 1e-10
    return SvmModel(
        support_vectors=X[sv_mask].copy(),
        dual_coefs=(alpha * y)[sv_mask],
        bias=float(state["b"]),
        kernel=kernel,
        C=float(C),
    )


def ntf_vocabulary(token_lists: Iterable[Sequence[str]]) -> list[str]:
    """Terms occurring in at least two comments, sorted; no stemming/stopwords."""
    df: Counter[str] = Counter()
    for tokens in token_lists:
        df.update(set(tokens))
    return sorted(t for t, c in df.items() if c >= 2)


def normalized_tf_features(tokens: Sequence[str], vocab: Sequence[str]) -> np.ndarray:
    """Per-comment term counts divided by the comment's token count."""
    index = {t: i for i, t in enumerate(vocab)}
    vec = np.zeros(len(vocab))
    if not tokens:
        return vec
    for t in tokens:
        i = index.get(t)
        if i is not None:
            vec[i] += 1.0
    return vec / len(tokens)


@dataclass
class CrossValidationResult:
    fold_indices: list[np.ndarray]
    fold_confusions: list[ConfusionCounts]
    fold_reports: list[MetricReport]
    pooled_confusion: ConfusionCounts
    pooled_report: MetricReport


def cross_validate(
    features: np.ndarray,
    labels: Sequence[int],
    k: int = 10,
    C: float = 1.0,
    kernel: KernelSpec | None = None,
    tol: float = 1e-3,
    max_passes: int = 10_000,
    seed: int = 0,
) -> CrossValidationResult:
    """Stratification-free k-fold CV; metrics come from the pooled confusion.

    Each example is validated exactly once.  If a random partition leaves some
    training split single-class, the partition is re-seeded (up to 10 tries)
    before giving up.
    """
    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    n = X.shape[0]
    if k < 2:
        raise ValueError("k must be >= 2")
    if k > n:
        raise DataError(f"k={k} exceeds dataset size {n}")

    folds: list[np.ndarray] | None = None
    for attempt in range(10):
        rng = np.random.default_rng(seed + attempt)
        perm = rng.permutation(n)
        candidate = [perm[i::k] for i in range(k)]
        ok = True
        for i in range(k):
            train_idx = np.concatenate([candidate[j] for j in range(k) if j != i])
            if len(np.unique(y[train_idx])) < 2:
                ok = False
                break
        if ok:
            folds = candidate
            break
    if folds is None:
        raise DataError("could not build k folds with two-class training splits (10 attempts)")

    fold_confusions: list[ConfusionCounts] = []
    fold_reports: list[MetricReport] = []
    pooled = ConfusionCounts()
    for i, val_idx in enumerate(folds):
        train_idx = np.concatenate([folds[j] for j in range(k) if j != i])
        model = train_smo(
            X[train_idx],
            y[train_idx],
            C=C,
            kernel=kernel,
            tol=tol,
            max_passes=max_passes,
            seed=seed + 1000 * (i + 1),
        )
        values = decision_function(model, X[val_idx])
        predicted = np.where(values > 0, 1, -1)
        actual = y[val_idx]
        counts = ConfusionCounts(
            tp=int(np.sum((predicted == 1) & (actual == 1))),
            fp=int(np.sum((predicted == 1) & (actual == -1))),
            fn=int(np.sum((predicted == -1) & (actual == 1))),
            tn=int(np.sum((predicted == -1) & (actual == -1))),
        )
        fold_confusions.append(counts)
        fold_reports.append(prf(counts))
        pooled = pooled + counts
    return CrossValidationResult(
        fold_indices=folds,
        fold_confusions=fold_confusions,
        fold_reports=fold_reports,
        pooled_confusion=pooled,
        pooled_report=prf(pooled),
    )


def save_svm_model(model: SvmModel, path: str | Path) -> None:
    """Self-describing text format; floats use exact round-trip formatting."""
    kernel = model.kernel
    if kernel.kind == "linear":
        kernel_line = "kernel linear"
    elif kernel.kind == "rbf":
        kernel_line = f"kernel rbf {float(kernel.gamma)!r}"
    else:
        kernel_line = f"kernel puk {float(kernel.omega)!r} {float(kernel.sigma)!r}"
    m, d = model.support_vectors.shape
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(kernel_line + "\n")
        fh.write(f"C {float(model.C)!r}\n")
        fh.write(f"bias {float(model.bias)!r}\n")
        fh.write(f"dim {d}\n")
        fh.write(f"n_sv {m}\n")
        for coef, row in zip(model.dual_coefs, model.support_vectors):
            fh.write(repr(float(coef)))
            for x in row:
                fh.write(" ")
                fh.write(repr(float(x)))
            fh.write("\n")


def load_svm_model(path: str | Path) -> SvmModel:
    """Inverse of save_svm_model, with line-numbered errors."""

    def bad(lineno: int, why: str) -> DataError:
        return DataError(f"line {lineno}: {why}")

    with open(path, encoding="utf-8") as fh:
        kernel_fields = fh.readline().split()
        if not kernel_fields or kernel_fields[0] != "kernel":
            raise bad(1, "expected 'kernel <kind> [params]'")
        try:
            if kernel_fields[1] == "linear" and len(kernel_fields) == 2:
                kernel = KernelSpec.linear()
            elif kernel_fields[1] == "rbf" and len(kernel_fields) == 3:
                kernel = KernelSpec.rbf(float(kernel_fields[2]))
            elif kernel_fields[1] == "puk" and len(kernel_fields) == 4:
                kernel = KernelSpec.puk(float(kernel_fields[2]), float(kernel_fields[3]))
            else:
                raise bad(1, f"bad kernel spec {' '.join(kernel_fields[1:])!r}")
        except (ValueError, IndexError) as exc:
            raise bad(1, "bad kernel spec") from exc

        def scalar(lineno: int, name: str, caster):
            fields = fh.readline().split()
            if len(fields) != 2 or fields[0] != name:
                raise bad(lineno, f"expected '{name} <value>'")
            try:
                return caster(fields[1])
            except ValueError as exc:
                raise bad(lineno, f"bad {name} value") from exc

        C = scalar(2, "C", float)
        bias = scalar(3, "bias", float)
        d = scalar(4, "dim", int)
        m = scalar(5, "n_sv", int)
        if d < 1 or m < 0:
            raise bad(4, "dim must be >= 1 and n_sv >= 0")
        coefs = np.empty(m)
        vectors = np.empty((m, d))
        for i in range(m):
            lineno = 6 + i
            line = fh.readline()
            if not line:
                raise bad(lineno, f"expected {m} support vectors, file ends after {i}")
            fields = line.split()
            if len(fields) != d + 1:
                raise bad(lineno, f"expected coef + {d} features, got {len(fields)} fields")
            try:
                coefs[i] = float(fields[0])
                vectors[i] = [float(x) for x in fields[1:]]
            except ValueError as exc:
                raise bad(lineno, "non-numeric value") from exc
        trailing = fh.readline()
        if trailing.strip():
            raise bad(6 + m, f"trailing content after {m} support vectors")
    return SvmModel(support_vectors=vectors, dual_coefs=coefs, bias=bias, kernel=kernel, C=C)
