"""Tests for ridge regression, ridge classification and scoring."""

import numpy as np
import pytest

from persistence_templates.core.learn import (
    DEFAULT_LAMBDA_GRID,
    accuracy,
    coefficient_grid,
    cross_validation_errors,
    decision_labels,
    flatten_coefficient_grid,
    fold_indices,
    one_vs_rest_targets,
    r2_score,
    ridge_classifier_fit,
    ridge_cv,
    ridge_fit,
)
from persistence_templates.exceptions import LearningError, ScoringError
from persistence_templates.models.featurizer_config import ColumnKey, FeatureMatrix, TentGrid
from persistence_templates.models.learning import (
    CLASSIFICATION,
    REGRESSION,
    LabeledDataset,
    RidgeModel,
    split_indices,
)

from .oracles import normal_equations_solution


def linear_data(rng: np.random.Generator, rows: int, cols: int, noise: float = 0.0):
    X = rng.normal(size=(rows, cols))
    w = rng.normal(size=cols)
    y = X @ w + 0.5 + noise * rng.normal(size=rows)
    return X, y


def three_clusters(rng: np.random.Generator, per_class: int = 15):
    centers = np.array([[0.0, 0.0], [6.0, 0.0], [0.0, 6.0]])
    X = np.vstack([c + 0.3 * rng.normal(size=(per_class, 2)) for c in centers])
    classes = np.repeat(["left", "right", "up"], per_class)
    return X, classes


class TestRidgeFit:
    """Fixed-lambda ridge solutions."""

    @pytest.mark.smoke
    @pytest.mark.unit
    def test_matches_normal_equations(self, rng):
        X, y = linear_data(rng, 12, 3, noise=0.1)
        model = ridge_fit(X, y, 0.3, standardize=False)
        weights, intercept = normal_equations_solution(X, y, 0.3)
        np.testing.assert_allclose(model.weights[0], weights, rtol=1e-9)
        assert model.intercepts[0] == pytest.approx(intercept)

    @pytest.mark.unit
    def test_wide_matrix_uses_same_objective(self, rng):
        X, y = linear_data(rng, 5, 9, noise=0.1)
        model = ridge_fit(X, y, 0.2, standardize=False)
        weights, intercept = normal_equations_solution(X, y, 0.2)
        np.testing.assert_allclose(model.weights[0], weights, rtol=1e-8, atol=1e-10)
        assert model.intercepts[0] == pytest.approx(intercept)

    @pytest.mark.unit
    def test_gradient_vanishes_at_solution(self, rng):
        X, y = linear_data(rng, 20, 4, noise=0.5)
        lam = 0.7
        model = ridge_fit(X, y, lam)
        Xs = model.standardize(X)
        residual = Xs @ model.weights[0] + model.intercepts[0] - y
        grad_w = 2.0 / len(y) * Xs.T @ residual + 2.0 * lam * model.weights[0]
        np.testing.assert_allclose(grad_w, np.zeros(4), atol=1e-10)
        assert residual.mean() == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.unit
    def test_standardized_weights_undo_scaling(self, rng):
        X, y = linear_data(rng, 30, 3)
        scaled = X * np.array([1.0, 100.0, 0.01])
        first = ridge_fit(X, y, 0.1)
        second = ridge_fit(scaled, y, 0.1)
        np.testing.assert_allclose(first.weights, second.weights, rtol=1e-8)
        np.testing.assert_allclose(first.predict(X), second.predict(scaled), rtol=1e-8)

    @pytest.mark.unit
    def test_constant_column_gets_zero_weight(self, rng):
        X, y = linear_data(rng, 15, 2)
        X = np.column_stack([X, np.full(15, 4.0)])
        model = ridge_fit(X, y, 0.1)
        assert model.feature_scale[2] == 1.0
        assert model.weights[0, 2] == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.unit
    def test_accepts_feature_matrix(self, rng):
        X, y = linear_data(rng, 10, 2)
        matrix = FeatureMatrix(X, (ColumnKey(0, 0, 1), ColumnKey(0, 0, 2)))
        np.testing.assert_allclose(ridge_fit(matrix, y, 1.0).weights, ridge_fit(X, y, 1.0).weights)

    @pytest.mark.unit
    def test_rejects_bad_inputs(self, rng):
        X, y = linear_data(rng, 10, 2)
        with pytest.raises(LearningError):
            ridge_fit(X, y, 0.0)
        with pytest.raises(LearningError):
            ridge_fit(X, y[:5], 1.0)
        bad = X.copy()
        bad[0, 0] = np.nan
        with pytest.raises(LearningError):
            ridge_fit(bad, y, 1.0)

    @pytest.mark.unit
    def test_weight_norm_shrinks_with_lambda(self, rng):
        X, y = linear_data(rng, 25, 6, noise=0.3)
        norms = [np.linalg.norm(ridge_fit(X, y, lam).weights) for lam in np.logspace(-3, 3, 13)]
        assert all(later <= earlier * (1.0 + 1e-12) for earlier, later in zip(norms, norms[1:]))
        assert norms[-1] < 0.01 * norms[0]


class TestCrossValidation:
    """Lambda selection by k-fold cross-validation."""

    @pytest.mark.unit
    def test_folds_partition_rows(self):
        parts = fold_indices(11, 3, seed=4)
        assert len(parts) == 3
        assert sorted(np.concatenate(parts).tolist()) == list(range(11))
        np.testing.assert_array_equal(np.concatenate(parts), np.concatenate(fold_indices(11, 3, 4)))

    @pytest.mark.unit
    def test_leave_one_out(self):
        parts = fold_indices(4, "loo")
        assert [len(p) for p in parts] == [1, 1, 1, 1]

    @pytest.mark.unit
    def test_too_few_rows(self):
        with pytest.raises(LearningError):
            fold_indices(3, 5)
        with pytest.raises(LearningError):
            fold_indices(10, 1)

    @pytest.mark.unit
    def test_noise_free_data_prefers_small_lambda(self, rng):
        X, y = linear_data(rng, 40, 3)
        model = ridge_cv(X, y, [1e3, 1e-3], folds=4)
        assert model.lambda_chosen == 1e-3
        assert set(model.cv_errors) == {1e-3, 1e3}
        assert model.cv_errors[1e-3] < model.cv_errors[1e3]

    @pytest.mark.unit
    def test_single_lambda_skips_cross_validation(self, rng):
        X, y = linear_data(rng, 8, 2, noise=0.2)
        model = ridge_cv(X, y, [0.5])
        assert model.cv_errors is None
        np.testing.assert_allclose(model.weights, ridge_fit(X, y, 0.5).weights)

    @pytest.mark.unit
    def test_errors_are_seeded(self, rng):
        X, y = linear_data(rng, 20, 2, noise=1.0)
        first = cross_validation_errors(X, y[:, None], DEFAULT_LAMBDA_GRID, 4, seed=3)
        second = cross_validation_errors(X, y[:, None], DEFAULT_LAMBDA_GRID, 4, seed=3)
        np.testing.assert_array_equal(first, second)
        assert first.shape == (len(DEFAULT_LAMBDA_GRID),)

    @pytest.mark.unit
    def test_invalid_grid(self, rng):
        X, y = linear_data(rng, 10, 2)
        with pytest.raises(LearningError):
            ridge_cv(X, y, [1.0, -1.0])

    @pytest.mark.unit
    def test_pure_noise_prefers_large_lambda(self, rng):
        X = rng.normal(size=(400, 200))
        y = rng.normal(size=400)
        model = ridge_cv(X, y, DEFAULT_LAMBDA_GRID, folds=5)
        assert model.lambda_chosen >= 10.0
        assert model.cv_errors[max(DEFAULT_LAMBDA_GRID)] < model.cv_errors[min(DEFAULT_LAMBDA_GRID)]


class TestClassifier:
    """One-vs-rest ridge classification."""

    @pytest.mark.smoke
    @pytest.mark.unit
    def test_separable_clusters(self, rng):
        X, classes = three_clusters(rng)
        model = ridge_classifier_fit(X, classes, [0.01, 0.1], folds=3)
        assert model.task == CLASSIFICATION
        assert model.classes == ("left", "right", "up")
        assert model.weights.shape == (3, 2)
        assert accuracy(classes, model.predict(X)) == 1.0

    @pytest.mark.unit
    def test_binary_has_one_decision_function(self, rng):
        X = np.concatenate([rng.normal(-3.0, 0.5, size=10), rng.normal(3.0, 0.5, size=10)])
        classes = np.array([0] * 10 + [1] * 10)
        model = ridge_classifier_fit(X[:, None], classes, [0.01])
        assert model.weights.shape == (1, 1)
        assert model.weights[0, 0] > 0
        assert list(model.predict(np.array([[-3.0], [3.0]]))) == [0, 1]
        assert decision_labels(model) == [1]

    @pytest.mark.unit
    def test_one_vs_rest_targets(self):
        np.testing.assert_array_equal(
            one_vs_rest_targets(np.array(["a", "b", "a"]), ["a", "b"]), [[-1.0], [1.0], [-1.0]]
        )
        targets = one_vs_rest_targets(np.array([2, 0, 1]), [0, 1, 2])
        np.testing.assert_array_equal(targets[0], [-1.0, -1.0, 1.0])

    @pytest.mark.unit
    def test_single_class_is_rejected(self, rng):
        with pytest.raises(LearningError):
            ridge_classifier_fit(rng.normal(size=(6, 2)), ["a"] * 6)

    @pytest.mark.unit
    def test_shifting_scores_keeps_argmax(self, rng):
        X, classes = three_clusters(rng)
        model = ridge_classifier_fit(X, classes, [0.1], folds=3)
        decision = model.decision_function(X)
        expected = model.predict_from_decision(decision)
        for shift in (-4.0, 2.5, 100.0):
            np.testing.assert_array_equal(model.predict_from_decision(decision + shift), expected)
        row_shift = rng.normal(scale=10.0, size=(decision.shape[0], 1))
        np.testing.assert_array_equal(model.predict_from_decision(decision + row_shift), expected)

    @pytest.mark.unit
    @pytest.mark.parametrize("per_class", [10, 15])
    def test_renaming_classes_renames_predictions(self, rng, per_class):
        X, classes = three_clusters(rng, per_class)
        X = X + rng.normal(scale=2.0, size=X.shape)
        renaming = {"left": "up", "right": "left", "up": "right"}
        renamed = np.array([renaming[c] for c in classes])
        original = ridge_classifier_fit(X, classes, [0.01, 1.0, 100.0], folds=3)
        relabeled = ridge_classifier_fit(X, renamed, [0.01, 1.0, 100.0], folds=3)
        assert relabeled.lambda_chosen == original.lambda_chosen
        np.testing.assert_array_equal(
            relabeled.predict(X), [renaming[c] for c in original.predict(X)]
        )

    @pytest.mark.unit
    def test_swapping_binary_labels(self, rng):
        X = np.concatenate([rng.normal(-1.0, 1.0, size=20), rng.normal(1.0, 1.0, size=20)])
        classes = np.array(["a"] * 20 + ["b"] * 20)
        swapped = np.where(classes == "a", "b", "a")
        first = ridge_classifier_fit(X[:, None], classes, [0.1, 10.0], folds=4)
        second = ridge_classifier_fit(X[:, None], swapped, [0.1, 10.0], folds=4)
        np.testing.assert_allclose(second.weights, -first.weights, rtol=1e-12)
        flipped = np.where(first.predict(X[:, None]) == "a", "b", "a")
        np.testing.assert_array_equal(second.predict(X[:, None]), flipped)


class TestScores:
    @pytest.mark.unit
    def test_r2(self):
        assert r2_score([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 1.0
        assert r2_score([1.0, 2.0, 3.0], [2.0, 2.0, 2.0]) == pytest.approx(0.0)
        assert r2_score([1.0, 2.0], [2.0, 1.0]) < 0

    @pytest.mark.unit
    def test_r2_errors(self):
        with pytest.raises(ScoringError):
            r2_score([1.0, 1.0], [1.0, 2.0])
        with pytest.raises(ScoringError):
            r2_score([1.0], [1.0])
        with pytest.raises(ScoringError):
            r2_score([1.0, 2.0], [1.0])

    @pytest.mark.unit
    def test_accuracy(self):
        assert accuracy(["a", "b", "c", "a"], ["a", "b", "a", "a"]) == 0.75
        with pytest.raises(ScoringError):
            accuracy([], [])


class TestCoefficientGrids:
    """Weights laid back out on featurizer grids."""

    @pytest.mark.unit
    def test_round_trip(self, rng):
        columns = [ColumnKey(0, i, j) for i, j in TentGrid(2, 1.0, 0.1).grid_positions()]
        columns += [ColumnKey(1, i, j) for i in range(2) for j in range(2)]
        labels = ["a", "b", "c"]
        model = RidgeModel(
            weights=rng.normal(size=(3, len(columns))),
            intercepts=np.zeros(3),
            lambda_chosen=1.0,
            feature_mean=np.zeros(len(columns)),
            feature_scale=np.ones(len(columns)),
            task=CLASSIFICATION,
            classes=tuple(labels),
        )
        grids = coefficient_grid(model, columns)
        assert set(grids) == {(dim, label) for dim in (0, 1) for label in labels}
        tent_grid = grids[(0, "b")]
        assert tent_grid.values.shape == (3, 2)
        assert tent_grid.i_values == (0, 1, 2) and tent_grid.j_values == (1, 2)
        assert tent_grid.values[2, 0] == model.weights[1, columns.index(ColumnKey(0, 2, 1))]
        np.testing.assert_array_equal(
            flatten_coefficient_grid(grids, columns, labels), model.weights
        )

    @pytest.mark.unit
    def test_column_index_must_cover_weights(self, rng):
        X, y = linear_data(rng, 10, 2)
        model = ridge_fit(X, y, 1.0)
        with pytest.raises(LearningError):
            coefficient_grid(model, [ColumnKey(0, 0, 1)])
        grids = coefficient_grid(model, [ColumnKey(0, 0, 1), ColumnKey(0, 0, 2)])
        assert list(grids) == [(0, "target")]


class TestModels:
    @pytest.mark.unit
    def test_model_dict_round_trip(self, rng):
        X, classes = three_clusters(rng, per_class=6)
        model = ridge_classifier_fit(X, classes, [0.1, 1.0], folds=3)
        restored = RidgeModel.from_dict(model.to_dict())
        assert restored.classes == model.classes
        assert restored.lambda_chosen == model.lambda_chosen
        assert restored.cv_errors == model.cv_errors
        np.testing.assert_array_equal(restored.predict(X), model.predict(X))

    @pytest.mark.unit
    def test_malformed_model(self):
        with pytest.raises(LearningError):
            RidgeModel.from_dict({"weights": [[1.0]]})

    @pytest.mark.unit
    def test_class_count_must_match_rows(self):
        with pytest.raises(LearningError):
            RidgeModel(
                weights=np.zeros((2, 1)),
                intercepts=np.zeros(2),
                lambda_chosen=1.0,
                feature_mean=np.zeros(1),
                feature_scale=np.ones(1),
                task=CLASSIFICATION,
                classes=("a", "b"),
            )

    @pytest.mark.unit
    def test_wrong_feature_count_on_predict(self, rng):
        X, y = linear_data(rng, 10, 2)
        with pytest.raises(LearningError):
            ridge_fit(X, y, 1.0).predict(np.zeros((1, 3)))

    @pytest.mark.unit
    def test_split_indices(self, rng):
        train, test = split_indices(10, 0.33, rng)
        assert len(test) == 4 and len(train) == 6
        assert sorted(np.concatenate([train, test]).tolist()) == list(range(10))
        with pytest.raises(LearningError):
            split_indices(10, 1.0, rng)
        with pytest.raises(LearningError):
            split_indices(1, 0.5, rng)

    @pytest.mark.unit
    def test_labeled_dataset(self, rng):
        matrix = FeatureMatrix(rng.normal(size=(5, 1)), (ColumnKey(0, 0, 1),), list("abcde"))
        dataset = LabeledDataset(matrix, [1, 2, 3, 4, 5], REGRESSION)
        subset = dataset.subset([4, 0])
        assert subset.features.row_ids == ("e", "a")
        np.testing.assert_array_equal(subset.labels, [5.0, 1.0])
        with pytest.raises(LearningError):
            LabeledDataset(matrix, [1, 2], REGRESSION)
