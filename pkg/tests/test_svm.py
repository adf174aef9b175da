"""Kernels, the SMO solver, NTF features, cross-validation, persistence."""

from __future__ import annotations

import numpy as np
import pytest

from textsift.errors import DataError
from textsift.svm import (
    CrossValidationResult,
    KernelSpec,
    cross_validate,
    decision_function,
    gram,
    kernel_eval,
    load_svm_model,
    normalized_tf_features,
    ntf_vocabulary,
    predict,
    save_svm_model,
    train_smo,
    SvmModel,
)

XOR_X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
XOR_Y = [-1, 1, 1, -1]


def _blobs(n_per_class: int, spread: float, gap: float, seed: int = 0):
    rng = np.random.default_rng(seed)
    pos = rng.normal(loc=gap, scale=spread, size=(n_per_class, 2))
    neg = rng.normal(loc=-gap, scale=spread, size=(n_per_class, 2))
    X = np.vstack([pos, neg])
    y = [1] * n_per_class + [-1] * n_per_class
    return X, y


class TestKernelSpec:
    def test_constructors(self):
        assert KernelSpec.linear().kind == "linear"
        assert KernelSpec.rbf(0.5).gamma == 0.5
        puk = KernelSpec.puk(2.0, 3.0)
        assert (puk.omega, puk.sigma) == (2.0, 3.0)

    def test_validation(self):
        with pytest.raises(ValueError):
            KernelSpec("poly")
        with pytest.raises(ValueError):
            KernelSpec.rbf(0.0)
        with pytest.raises(ValueError):
            KernelSpec.puk(omega=-1.0)
        with pytest.raises(ValueError):
            KernelSpec.puk(sigma=0.0)


class TestGram:
    def test_puk_half_distance_scores_half(self):
        # omega=sigma=1: K = 1 / (1 + 4 * d^2); d=0.5 gives exactly 0.5
        got = kernel_eval(KernelSpec.puk(), np.array([0.0]), np.array([0.5]))
        assert got == pytest.approx(0.5, abs=1e-15)

    def test_puk_self_similarity_is_one(self):
        rng = np.random.default_rng(2)
        X = rng.normal(size=(20, 5))
        K = gram(KernelSpec.puk(), X)
        np.testing.assert_allclose(np.diag(K), 1.0, atol=1e-12)

    def test_puk_values_in_unit_interval(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(30, 4)) * 5
        K = gram(KernelSpec.puk(), X)
        assert np.all(K > 0.0)
        assert np.all(K <= 1.0)

    def test_gram_is_exactly_symmetric(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(40, 7))
        for spec in (KernelSpec.puk(), KernelSpec.rbf(0.7), KernelSpec.linear()):
            K = gram(spec, X)
            assert np.array_equal(K, K.T)

    def test_puk_gram_is_positive_semidefinite(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(50, 6))
        K = gram(KernelSpec.puk(), X)
        eigvals = np.linalg.eigvalsh(K)
        assert eigvals.min() > -1e-8

    def test_rbf_known_value(self):
        got = kernel_eval(KernelSpec.rbf(0.5), np.array([0.0]), np.array([1.0]))
        assert got == pytest.approx(np.exp(-0.5), rel=1e-15)

    def test_linear_is_plain_dot_product(self):
        rng = np.random.default_rng(6)
        X = rng.normal(size=(5, 3))
        Y = rng.normal(size=(4, 3))
        np.testing.assert_array_equal(gram(KernelSpec.linear(), X, Y), X @ Y.T)

    def test_puk_wider_sigma_is_flatter(self):
        x, y = np.array([0.0]), np.array([1.0])
        narrow = kernel_eval(KernelSpec.puk(sigma=1.0), x, y)
        wide = kernel_eval(KernelSpec.puk(sigma=4.0), x, y)
        assert wide > narrow

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            gram(KernelSpec.linear(), np.ones((2, 3)), np.ones((2, 4)))

    def test_duplicate_rows_score_one(self):
        row = np.array([0.3, -1.7, 2.2])
        X = np.vstack([row, row])
        for spec in (KernelSpec.puk(), KernelSpec.rbf(1.0)):
            K = gram(spec, X)
            assert K[0, 1] == pytest.approx(1.0, abs=1e-12)


def _full_alpha(model: SvmModel, X: np.ndarray) -> np.ndarray:
    """Map the model's dual coefficients back onto the training rows."""
    alpha = np.zeros(X.shape[0])
    used = np.zeros(model.support_vectors.shape[0], dtype=bool)
    for i, row in enumerate(X):
        for j in range(model.support_vectors.shape[0]):
            if not used[j] and np.array_equal(model.support_vectors[j], row):
                alpha[i] = abs(model.dual_coefs[j])
                used[j] = True
                break
    assert used.all(), "support vector not found among training rows"
    return alpha


def _assert_kkt(model: SvmModel, X: np.ndarray, y, C: float, tol: float) -> None:
    yv = np.asarray(y, dtype=np.float64)
    alpha = _full_alpha(model, X)
    margins = yv * decision_function(model, X)
    at_zero = alpha <= 1e-10
    at_c = alpha >= C - 1e-10
    between = ~at_zero & ~at_c
    assert np.all(margins[at_zero] >= 1.0 - tol - 1e-9)
    assert np.all(margins[at_c] <= 1.0 + tol + 1e-9)
    assert np.all(np.abs(margins[between] - 1.0) <= tol + 1e-9)


class TestTrainSmo:
    def test_separable_problem_classifies_training_set(self):
        X, y = _blobs(20, spread=0.4, gap=3.0, seed=1)
        model = train_smo(X, y, C=1.0)
        values = decision_function(model, X)
        assert np.all(np.sign(values) == np.asarray(y, dtype=float))

    def test_kkt_conditions_hold_at_exit(self):
        tol = 1e-3
        for seed in range(4):
            X, y = _blobs(12, spread=1.0, gap=1.2, seed=seed)
            model = train_smo(X, y, C=2.0, tol=tol, seed=seed)
            _assert_kkt(model, X, y, C=2.0, tol=tol)

    def test_dual_constraints_hold(self):
        X, y = _blobs(15, spread=0.8, gap=1.0, seed=9)
        C = 1.5
        model = train_smo(X, y, C=C)
        assert abs(model.dual_coefs.sum()) < 1e-8  # sum alpha_i y_i == 0
        alpha = np.abs(model.dual_coefs)
        assert np.all(alpha > 1e-10)  # only genuine support vectors kept
        assert np.all(alpha <= C + 1e-9)

    def test_xor_with_puk_kernel(self):
        model = train_smo(XOR_X, XOR_Y, C=1.0, kernel=KernelSpec.puk())
        predictions = [predict(model, x)[0] for x in XOR_X]
        assert predictions == XOR_Y

    def test_xor_with_linear_kernel_cannot_separate(self):
        model = train_smo(XOR_X, XOR_Y, C=1.0, kernel=KernelSpec.linear())
        predictions = [predict(model, x)[0] for x in XOR_X]
        assert predictions != XOR_Y

    def test_deterministic_for_seed(self):
        X, y = _blobs(10, spread=1.0, gap=1.0, seed=3)
        a = train_smo(X, y, C=1.0, seed=7)
        b = train_smo(X, y, C=1.0, seed=7)
        assert np.array_equal(a.support_vectors, b.support_vectors)
        assert np.array_equal(a.dual_coefs, b.dual_coefs)
        assert a.bias == b.bias

    def test_single_class_rejected(self):
        with pytest.raises(DataError, match="single class"):
            train_smo(np.ones((3, 2)), [1, 1, 1])

    def test_bad_labels_rejected(self):
        with pytest.raises(ValueError, match="labels"):
            train_smo(np.ones((2, 2)), [0, 1])

    def test_bad_shapes_rejected(self):
        with pytest.raises(ValueError):
            train_smo(np.ones(3), [1, -1, 1])
        with pytest.raises(ValueError):
            train_smo(np.ones((3, 2)), [1, -1])

    def test_c_must_be_positive(self):
        with pytest.raises(ValueError, match="C"):
            train_smo(np.eye(2), [1, -1], C=0.0)


class TestAgainstQpSolver:
    """The SMO dual objective should match a generic QP solver's optimum."""

    @staticmethod
    def _qp_objective(X, y, C, kernel):
        cvxopt = pytest.importorskip("cvxopt")
        import cvxopt.solvers

        yv = np.asarray(y, dtype=np.float64)
        n = len(yv)
        K = gram(kernel, X)
        Q = np.outer(yv, yv) * K
        P = cvxopt.matrix(Q)
        q = cvxopt.matrix(-np.ones(n))
        G = cvxopt.matrix(np.vstack([-np.eye(n), np.eye(n)]))
        h = cvxopt.matrix(np.concatenate([np.zeros(n), C * np.ones(n)]))
        A = cvxopt.matrix(yv[None, :])
        b = cvxopt.matrix(np.zeros(1))
        cvxopt.solvers.options["show_progress"] = False
        solution = cvxopt.solvers.qp(P, q, G, h, A, b)
        alpha = np.asarray(solution["x"]).ravel()
        return alpha.sum() - 0.5 * alpha @ Q @ alpha

    @staticmethod
    def _smo_objective(model, X, y, kernel):
        alpha = _full_alpha(model, X)
        yv = np.asarray(y, dtype=np.float64)
        Q = np.outer(yv, yv) * gram(kernel, X)
        return alpha.sum() - 0.5 * alpha @ Q @ alpha

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_dual_objective_matches(self, seed):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(6, 2))
        y = [1, 1, 1, -1, -1, -1]
        for kernel in (KernelSpec.puk(), KernelSpec.linear(), KernelSpec.rbf(0.8)):
            C = 1.0
            model = train_smo(X, y, C=C, kernel=kernel, tol=1e-4, seed=seed)
            got = self._smo_objective(model, X, y, kernel)
            want = self._qp_objective(X, y, C, kernel)
            assert got == pytest.approx(want, abs=1e-3)


class TestDecisionFunction:
    def test_dimension_mismatch(self):
        X, y = _blobs(5, spread=0.3, gap=2.0)
        model = train_smo(X, y, C=1.0)
        with pytest.raises(ValueError, match="dimension"):
            decision_function(model, np.ones((2, 5)))

    def test_boundary_maps_to_negative(self):
        model = SvmModel(
            support_vectors=np.array([[0.0, 0.0]]),
            dual_coefs=np.array([0.0]),
            bias=0.0,
            kernel=KernelSpec.linear(),
            C=1.0,
        )
        label, value = predict(model, np.array([1.0, 1.0]))
        assert value == 0.0
        assert label == -1


class TestNtfFeatures:
    def test_vocabulary_needs_two_documents(self):
        lists = [["a", "b"], ["b", "c"], ["c", "d"]]
        assert ntf_vocabulary(lists) == ["b", "c"]

    def test_vocabulary_repeats_inside_one_document_count_once(self):
        lists = [["a", "a", "a"], ["b"]]
        assert ntf_vocabulary(lists) == []

    def test_vocabulary_sorted(self):
        lists = [["z", "m"], ["z", "m"], ["a"]]
        assert ntf_vocabulary(lists) == ["m", "z"]

    def test_normalized_counts(self):
        got = normalized_tf_features(["a", "b", "a"], ["a", "b"])
        np.testing.assert_allclose(got, [2 / 3, 1 / 3])

    def test_unknown_tokens_dilute(self):
        got = normalized_tf_features(["a", "zzz"], ["a", "b"])
        np.testing.assert_allclose(got, [0.5, 0.0])

    def test_empty_tokens(self):
        got = normalized_tf_features([], ["a", "b"])
        np.testing.assert_array_equal(got, [0.0, 0.0])


class TestCrossValidate:
    def test_every_example_validated_once(self):
        X, y = _blobs(15, spread=1.0, gap=1.0, seed=2)
        result = cross_validate(X, y, k=5, seed=0)
        seen = np.concatenate(result.fold_indices)
        assert sorted(seen.tolist()) == list(range(30))
        assert result.pooled_confusion.total == 30

    def test_deterministic_for_seed(self):
        X, y = _blobs(12, spread=1.0, gap=1.0, seed=2)
        a = cross_validate(X, y, k=4, seed=5)
        b = cross_validate(X, y, k=4, seed=5)
        for fa, fb in zip(a.fold_indices, b.fold_indices):
            assert np.array_equal(fa, fb)
        assert a.pooled_confusion == b.pooled_confusion

    def test_separable_data_scores_perfectly(self):
        X, y = _blobs(20, spread=0.3, gap=4.0, seed=4)
        result = cross_validate(X, y, k=5, seed=0)
        assert result.pooled_report.f_measure == pytest.approx(1.0)

    def test_fold_reports_align_with_confusions(self):
        X, y = _blobs(10, spread=1.2, gap=0.8, seed=6)
        result = cross_validate(X, y, k=4, seed=0)
        assert len(result.fold_reports) == 4
        assert sum(c.total for c in result.fold_confusions) == 20

    def test_k_bounds(self):
        X, y = _blobs(3, spread=0.5, gap=2.0)
        with pytest.raises(ValueError):
            cross_validate(X, y, k=1)
        with pytest.raises(DataError, match="exceeds"):
            cross_validate(X, y, k=7)

    def test_unbuildable_folds_rejected(self):
        # a lone negative example: the fold holding it always leaves a
        # single-class training split, whatever the permutation
        X = np.arange(10, dtype=np.float64).reshape(5, 2)
        y = [1, 1, 1, 1, -1]
        with pytest.raises(DataError, match="two-class"):
            cross_validate(X, y, k=5, seed=0)


class TestPersistence:
    def _model(self, kernel=None):
        X, y = _blobs(8, spread=0.6, gap=1.5, seed=11)
        return train_smo(X, y, C=1.5, kernel=kernel, seed=1)

    @pytest.mark.parametrize(
        "kernel",
        [KernelSpec.puk(1.0, 1.0), KernelSpec.puk(2.5, 0.5), KernelSpec.rbf(0.3), KernelSpec.linear()],
    )
    def test_round_trip_exact(self, tmp_path, kernel):
        model = self._model(kernel)
        path = tmp_path / "svm.txt"
        save_svm_model(model, path)
        loaded = load_svm_model(path)
        assert loaded.kernel == model.kernel
        assert loaded.C == model.C
        assert loaded.bias == model.bias
        assert np.array_equal(loaded.support_vectors, model.support_vectors)
        assert np.array_equal(loaded.dual_coefs, model.dual_coefs)

    def test_second_generation_file_is_byte_identical(self, tmp_path):
        model = self._model()
        first = tmp_path / "gen1.txt"
        second = tmp_path / "gen2.txt"
        save_svm_model(model, first)
        save_svm_model(load_svm_model(first), second)
        assert first.read_bytes() == second.read_bytes()

    def test_loaded_model_predicts_identically(self, tmp_path):
        model = self._model()
        path = tmp_path / "svm.txt"
        save_svm_model(model, path)
        loaded = load_svm_model(path)
        rng = np.random.default_rng(0)
        probes = rng.normal(size=(20, 2))
        np.testing.assert_array_equal(
            decision_function(model, probes), decision_function(loaded, probes)
        )

    @pytest.mark.parametrize(
        ("content", "message"),
        [
            ("nonsense\n", "line 1"),
            ("kernel poly 2\n", "line 1"),
            ("kernel rbf\n", "line 1"),
            ("kernel puk 1.0\n", "line 1"),
            ("kernel linear\nC\n", "line 2"),
            ("kernel linear\nC 1.0\nbias x\n", "line 3"),
            ("kernel linear\nC 1.0\nbias 0.0\ndim 0\nn_sv 1\n", "line 4"),
            ("kernel linear\nC 1.0\nbias 0.0\ndim 2\nn_sv 2\n1.0 0 0\n", "line 7"),
            ("kernel linear\nC 1.0\nbias 0.0\ndim 2\nn_sv 1\n1.0 0\n", "line 6"),
            ("kernel linear\nC 1.0\nbias 0.0\ndim 2\nn_sv 1\n1.0 a b\n", "line 6"),
            ("kernel linear\nC 1.0\nbias 0.0\ndim 2\nn_sv 1\n1.0 0 0\njunk\n", "line 7"),
        ],
    )
    def test_malformed_files_name_the_line(self, tmp_path, content, message):
        path = tmp_path / "bad.txt"
        path.write_text(content, encoding="utf-8")
        with pytest.raises(DataError, match=message):
            load_svm_model(path)
