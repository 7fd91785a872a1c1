"""High-order TSK teacher: closed-form ridge solve of the consequents.

The teacher is a scalar-output regressor fit against encoded class labels
(class t encoded as t-1). Its consequent coefficients solve

    q = ((1/L) I + Xg^T Xg)^{-1} Xg^T y

with Xg the order-3 firing-weighted stacked design matrix. The identity is
D x D (primal form); when N < D the equivalent N x N dual form is solved
instead.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .basis import basis_dim, stack_design_matrix
from .rules import RuleBase, firing_strengths

TEACHER_ORDER = 3


@dataclass(frozen=True)
class TeacherModel:
    rule_base: RuleBase
    coeffs: np.ndarray
    reg: float
    class_labels: np.ndarray
    order: int = TEACHER_ORDER

    def __post_init__(self):
        labels = np.asarray(self.class_labels, dtype=float)
        if labels.size == 0 or not (np.diff(labels) > 0).all():
            raise ValueError("class_labels must be non-empty and strictly "
                             "increasing")
        if not self.reg > 0:
            raise ValueError("regularization parameter must be positive")
        d = self.rule_base.n_rules * basis_dim(self.order,
                                               self.rule_base.n_features)
        coeffs = np.asarray(self.coeffs, dtype=float).ravel()
        if coeffs.size != d:
            raise ValueError(f"coeffs has length {coeffs.size}, expected {d}")
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "class_labels", labels)


def ridge_solve(A: np.ndarray, y: np.ndarray, ridge: float) -> np.ndarray:
    """Solve min ridge*||q||^2 + ||A q - y||^2 via normal equations.

    Uses a Cholesky factorization of the SPD system, the dual (N x N) form
    when N < D, and a pivoted fallback if the factorization fails.
    """
    n, d = A.shape
    if n < d:
        G = A @ A.T
        G[np.diag_indices_from(G)] += ridge
        return A.T @ _spd_solve(G, y)
    G = A.T @ A
    G[np.diag_indices_from(G)] += ridge
    return _spd_solve(G, A.T @ y)


def _spd_solve(G: np.ndarray, b: np.ndarray) -> np.ndarray:
    try:
        c, low = scipy.linalg.cho_factor(G)
        return scipy.linalg.cho_solve((c, low), b)
    except scipy.linalg.LinAlgError:
        return scipy.linalg.solve(G, b)


def fit_teacher(rb: RuleBase, X: np.ndarray, y_enc: np.ndarray, reg: float,
                class_labels: np.ndarray | None = None,
                order: int = TEACHER_ORDER) -> TeacherModel:
    """Fit the consequent coefficients in closed form.

    `reg` is the parameter L of the ridge system; the ridge coefficient
    added to the Gram matrix diagonal is 1/L.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y_enc = np.asarray(y_enc, dtype=float).ravel()
    if X.shape[0] == 0:
        raise ValueError("cannot fit a teacher on an empty dataset")
    if y_enc.size != X.shape[0]:
        raise ValueError("X and y_enc disagree on the sample count")
    if not reg > 0:
        raise ValueError("regularization parameter must be positive")
    if class_labels is None:
        class_labels = np.unique(y_enc)
    Xg = stack_design_matrix(firing_strengths(rb, X), X, order)
    q = ridge_solve(Xg, y_enc, 1.0 / reg)
    return TeacherModel(rb, q, float(reg), class_labels, order)


def predict_teacher(tm: TeacherModel, X: np.ndarray) -> np.ndarray:
    """Scalar teacher outputs, one per row of X."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Xg = stack_design_matrix(firing_strengths(tm.rule_base, X), X, tm.order)
    return Xg @ tm.coeffs
