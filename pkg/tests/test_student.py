"""Gradient-trained first-order student."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fuzzykd.rules import RuleBase, build_rule_base
from fuzzykd.student import (StudentModel, TrainConfig, TrainingDiverged,
                             cross_entropy, design_matrix, init_student,
                             onehot_encode, predict_student, softmax,
                             student_logits, train_student)


def toy_separable():
    """Four 1-d points, two classes, rules anchored at the class regions."""
    rb = RuleBase(np.array([[0.0], [1.0]]), np.full((2, 1), 0.5))
    X = np.array([[0.0], [0.1], [0.9], [1.0]])
    y = np.array([0, 0, 1, 1])
    return rb, X, y


def fd_gradient(loss, Q, h=1e-5):
    """Central finite differences of a scalar loss over every Q entry."""
    g = np.zeros_like(Q)
    for i in range(Q.shape[0]):
        for j in range(Q.shape[1]):
            Qp, Qm = Q.copy(), Q.copy()
            Qp[i, j] += h
            Qm[i, j] -= h
            g[i, j] = (loss(Qp) - loss(Qm)) / (2 * h)
    return g


class TestLogitsAndSoftmax:
    def test_zero_coeffs_zero_logits(self):
        sm = init_student(build_rule_base(3, 2, seed=0), 3)
        X = np.random.default_rng(0).uniform(0, 1, (5, 2))
        np.testing.assert_array_equal(student_logits(sm, X), np.zeros((5, 3)))

    def test_hand_dot_product(self):
        rb = RuleBase(np.array([[0.5]]), np.array([[0.5]]))
        Q = np.array([[1.0, 0.0], [0.0, 0.0]])
        sm = StudentModel(rb, Q, 2)
        logits = student_logits(sm, np.array([[0.5]]))
        np.testing.assert_allclose(logits, [[1.0, 0.0]], atol=1e-12)

    def test_identical_columns_give_uniform_softmax(self):
        rb = build_rule_base(2, 2, seed=1)
        col = np.random.default_rng(1).normal(size=(6, 1))
        sm = StudentModel(rb, np.repeat(col, 3, axis=1), 3)
        X = np.random.default_rng(2).uniform(0, 1, (4, 2))
        p = softmax(student_logits(sm, X))
        np.testing.assert_allclose(p, 1.0 / 3.0, atol=1e-12)

    def test_softmax_rows_sum_to_one(self):
        z = np.random.default_rng(3).normal(scale=50, size=(20, 4))
        np.testing.assert_allclose(softmax(z).sum(axis=1), 1.0, atol=1e-9)

    def test_softmax_temperature_must_be_positive(self):
        with pytest.raises(ValueError):
            softmax(np.zeros((1, 2)), temperature=0.0)


class TestCrossEntropy:
    def test_perfect_prediction_near_zero(self):
        Y = onehot_encode([0, 1, 2], 3)
        assert cross_entropy(Y, Y) <= 3 * 1e-11

    def test_uniform_binary(self):
        h = cross_entropy(np.array([[0.5, 0.5]]), np.array([[1.0, 0.0]]))
        assert h == pytest.approx(0.693147, abs=1e-6)

    def test_sums_over_samples(self):
        p = np.array([[0.5, 0.5], [0.5, 0.5]])
        Y = np.array([[1.0, 0.0], [0.0, 1.0]])
        assert cross_entropy(p, Y) == pytest.approx(1.386294, abs=1e-6)

    def test_rejects_unnormalized_rows(self):
        with pytest.raises(ValueError, match="sum to 1"):
            cross_entropy(np.array([[0.9, 0.3]]), np.array([[1.0, 0.0]]))

    def test_rejects_invalid_onehot(self):
        with pytest.raises(ValueError, match="one-hot"):
            cross_entropy(np.array([[0.5, 0.5]]), np.array([[0.5, 0.5]]))


class TestTrainConfig:
    @pytest.mark.parametrize("kwargs", [dict(lr=0.0), dict(max_epochs=0),
                                        dict(tol=-1.0)])
    def test_invalid_values_rejected(self, kwargs):
        with pytest.raises(ValueError):
            TrainConfig(**kwargs)


class TestInitStudent:
    def test_zero_default(self):
        sm = init_student(build_rule_base(2, 3, seed=0), 4)
        assert sm.coeffs.shape == (2 * 4, 4)
        assert (sm.coeffs == 0).all()

    def test_seeded_uniform(self):
        rb = build_rule_base(2, 3, seed=0)
        a = init_student(rb, 2, init_scale=0.01, seed=5)
        b = init_student(rb, 2, init_scale=0.01, seed=5)
        np.testing.assert_array_equal(a.coeffs, b.coeffs)
        assert (np.abs(a.coeffs) <= 0.01).all()
        assert a.coeffs.any()


class TestTrainStudent:
    def test_separable_toy_set_reaches_full_accuracy(self):
        rb, X, y = toy_separable()
        sm = init_student(rb, 2)
        sm, trace = train_student(sm, X, onehot_encode(y, 2),
                                  TrainConfig(lr=0.01, max_epochs=30))
        assert (predict_student(sm, X) == y).all()
        assert all(np.isfinite(row["total"]) for row in trace)

    def test_single_epoch_step_matches_finite_differences(self):
        rb, X, y = toy_separable()
        sm = init_student(rb, 2)
        Y = onehot_encode(y, 2)
        trained, trace = train_student(sm, X, Y,
                                       TrainConfig(lr=0.01, max_epochs=1))
        assert len(trace) == 1
        Xh = design_matrix(sm, X)

        def loss(Q):
            return cross_entropy(softmax(Xh @ Q), Y)

        g = fd_gradient(loss, sm.coeffs)
        np.testing.assert_allclose(trained.coeffs, sm.coeffs - 0.01 * g,
                                   atol=1e-9)

    def test_huge_tolerance_stops_after_two_epochs(self):
        rb, X, y = toy_separable()
        sm = init_student(rb, 2)
        _, trace = train_student(sm, X, onehot_encode(y, 2),
                                 TrainConfig(lr=0.01, max_epochs=30, tol=1e9))
        assert len(trace) == 2

    def test_divergence_raises_with_epoch(self):
        rb, X, y = toy_separable()
        sm = init_student(rb, 2)
        with pytest.raises(TrainingDiverged) as err:
            train_student(sm, X, onehot_encode(y, 2),
                          TrainConfig(lr=float("inf"), max_epochs=30))
        assert err.value.epoch >= 1

    def test_trace_totals_decrease_on_toy_set(self):
        rb, X, y = toy_separable()
        sm = init_student(rb, 2)
        _, trace = train_student(sm, X, onehot_encode(y, 2),
                                 TrainConfig(lr=0.01, max_epochs=30, tol=0.0))
        totals = [row["total"] for row in trace]
        assert all(a >= b for a, b in zip(totals, totals[1:]))

    @settings(max_examples=25, deadline=None)
    @given(st.integers(2, 10), st.integers(1, 3), st.integers(1, 2),
           st.integers(2, 3), st.integers(0, 10_000))
    def test_gradient_matches_finite_differences(self, n, m, k, c, seed):
        rng = np.random.default_rng(seed)
        rb = build_rule_base(k, m, seed=seed)
        X = rng.uniform(0, 1, (n, m))
        Y = onehot_encode(rng.integers(0, c, n), c)
        sm = init_student(rb, c)
        Q0 = rng.normal(scale=0.5, size=sm.coeffs.shape)
        Xh = design_matrix(sm, X)

        def loss(Q):
            return cross_entropy(softmax(Xh @ Q), Y)

        analytic = Xh.T @ (softmax(Xh @ Q0) - Y)
        fd = fd_gradient(loss, Q0)
        denom = np.maximum(np.abs(fd), 1.0)
        assert (np.abs(analytic - fd) / denom).max() < 1e-4


class TestStudentModelValidation:
    def test_coeff_shape_checked(self):
        rb = build_rule_base(2, 3, seed=0)
        with pytest.raises(ValueError, match="shape"):
            StudentModel(rb, np.zeros((5, 2)), 2)

    def test_needs_two_classes(self):
        rb = build_rule_base(1, 1, seed=0)
        with pytest.raises(ValueError, match="classes"):
            StudentModel(rb, np.zeros((2, 1)), 1)
