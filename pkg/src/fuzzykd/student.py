"""Low-order TSK student: linear consequents trained by gradient descent.

The student maps the order-1 firing-weighted stacked design row x_h to C
logits z = Q^T x_h and is trained full-batch on the softmax cross-entropy
summed over samples. The per-epoch trace additionally records the
per-sample mean of each loss component for scale-free monitoring.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import basis_dim, stack_design_matrix
from .rules import RuleBase, firing_strengths

EPS = 1e-12
STUDENT_ORDER = 1


class TrainingDiverged(RuntimeError):
    """Raised when the training loss becomes non-finite."""

    def __init__(self, epoch: int):
        super().__init__(f"training loss became non-finite at epoch {epoch}")
        self.epoch = epoch


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 0.01
    max_epochs: int = 30
    tol: float = 1e-5

    def __post_init__(self):
        if not self.lr > 0:
            raise ValueError("learning rate must be positive")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be at least 1")
        if self.tol < 0:
            raise ValueError("stopping threshold must be non-negative")


@dataclass(frozen=True)
class StudentModel:
    rule_base: RuleBase
    coeffs: np.ndarray  # (K * D(order, m)) x C
    n_classes: int
    order: int = STUDENT_ORDER

    def __post_init__(self):
        if self.n_classes < 2:
            raise ValueError("need at least 2 classes")
        d = self.rule_base.n_rules * basis_dim(self.order,
                                               self.rule_base.n_features)
        coeffs = np.asarray(self.coeffs, dtype=float)
        if coeffs.shape != (d, self.n_classes):
            raise ValueError(f"coeffs has shape {coeffs.shape}, expected "
                             f"({d}, {self.n_classes})")
        object.__setattr__(self, "coeffs", coeffs)


def init_student(rb: RuleBase, n_classes: int, order: int = STUDENT_ORDER,
                 init_scale: float = 0.0,
                 seed: int | None = None) -> StudentModel:
    """Zero-initialized student; init_scale > 0 draws uniform(-s, s) instead."""
    d = rb.n_rules * basis_dim(order, rb.n_features)
    if init_scale > 0:
        rng = np.random.default_rng(seed)
        coeffs = rng.uniform(-init_scale, init_scale, size=(d, n_classes))
    else:
        coeffs = np.zeros((d, n_classes))
    return StudentModel(rb, coeffs, n_classes, order)


def design_matrix(sm: StudentModel, X: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return stack_design_matrix(firing_strengths(sm.rule_base, X), X, sm.order)


def student_logits(sm: StudentModel, X: np.ndarray) -> np.ndarray:
    """N x C logit matrix z = Q^T x_h for each row of X."""
    return design_matrix(sm, X) @ sm.coeffs


def softmax(z: np.ndarray, temperature: float = 1.0) -> np.ndarray:
    """Row-wise temperature softmax with max-shift stabilization."""
    if not temperature > 0:
        raise ValueError("temperature must be positive")
    z = np.atleast_2d(np.asarray(z, dtype=float)) / temperature
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def cross_entropy(probs: np.ndarray, onehot: np.ndarray) -> float:
    """Total cross-entropy -sum_n sum_t onehot * log(max(prob, eps))."""
    probs = np.atleast_2d(np.asarray(probs, dtype=float))
    onehot = np.atleast_2d(np.asarray(onehot, dtype=float))
    if probs.shape != onehot.shape:
        raise ValueError("probs and onehot must have the same shape")
    if not np.allclose(probs.sum(axis=1), 1.0, atol=1e-6):
        raise ValueError("probability rows must sum to 1")
    bad = (onehot.sum(axis=1) != 1.0) | ~np.isin(onehot, (0.0, 1.0)).all(axis=1)
    if bad.any():
        raise ValueError("onehot rows must be valid one-hot vectors")
    return float(-(onehot * np.log(np.maximum(probs, EPS))).sum())


def onehot_encode(y: np.ndarray, n_classes: int) -> np.ndarray:
    y = np.asarray(y, dtype=int).ravel()
    out = np.zeros((y.size, n_classes))
    out[np.arange(y.size), y] = 1.0
    return out


def gradient_descent(Q0, loss_grad, cfg: TrainConfig):
    """Shared full-batch loop: step, record loss, stop on small improvement.

    loss_grad(Q) returns (total, grad, components-dict); the trace holds one
    dict per completed epoch. Stops when the improvement between consecutive
    epochs drops to cfg.tol or below, or after cfg.max_epochs epochs.
    """
    Q = np.array(Q0, dtype=float)
    trace: list[dict] = []
    for epoch in range(1, cfg.max_epochs + 1):
        _, grad, _ = loss_grad(Q)
        Q -= cfg.lr * grad
        if not np.isfinite(Q).all():
            raise TrainingDiverged(epoch)
        try:
            total, _, parts = loss_grad(Q)
        except ValueError as exc:
            # overflowing logits surface as invalid softmax rows downstream
            raise TrainingDiverged(epoch) from exc
        if not np.isfinite(total):
            raise TrainingDiverged(epoch)
        trace.append({"epoch": epoch, "total": total, **parts})
        if epoch >= 2 and trace[-2]["total"] - trace[-1]["total"] <= cfg.tol:
            break
    return Q, trace


def train_student(sm: StudentModel, X: np.ndarray, y_onehot: np.ndarray,
                  cfg: TrainConfig) -> tuple[StudentModel, list[dict]]:
    """Gradient-descent training on the total softmax cross-entropy.

    Returns the trained model and the per-epoch loss trace; each entry has
    the epoch index, the optimized total and the per-sample mean
    cross-entropy "h".
    """
    Xh = design_matrix(sm, X)
    Y = np.atleast_2d(np.asarray(y_onehot, dtype=float))
    if Y.shape[0] != Xh.shape[0]:
        raise ValueError("X and y_onehot disagree on the sample count")
    n = Xh.shape[0]

    def loss_grad(Q):
        p = softmax(Xh @ Q)
        h = cross_entropy(p, Y)
        grad = Xh.T @ (p - Y)
        return h, grad, {"h": h / n}

    Q, trace = gradient_descent(sm.coeffs, loss_grad, cfg)
    return StudentModel(sm.rule_base, Q, sm.n_classes, sm.order), trace


def predict_student(sm: StudentModel, X: np.ndarray) -> np.ndarray:
    """Predicted class indices: argmax of the logits."""
    return student_logits(sm, X).argmax(axis=1)
