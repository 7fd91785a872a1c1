"""Fuzzy rule bases and normalized firing strengths.

A rule base holds, for each of K rules, a Gaussian center and kernel width
per feature. Centers live on a fixed 5-point partition of [0, 1] so each
antecedent can be read back as a linguistic label.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PARTITION = np.array([0.0, 0.25, 0.5, 0.75, 1.0])
PARTITION_LABELS = ("very low", "low", "medium", "high", "very high")


@dataclass(frozen=True)
class RuleBase:
    """Antecedent parameters of a TSK model: K x m centers and widths."""

    centers: np.ndarray
    widths: np.ndarray

    def __post_init__(self):
        centers = np.asarray(self.centers, dtype=float)
        widths = np.asarray(self.widths, dtype=float)
        if centers.ndim != 2 or centers.shape != widths.shape:
            raise ValueError("centers and widths must be matching K x m arrays")
        if centers.shape[0] < 1 or centers.shape[1] < 1:
            raise ValueError("rule base needs K >= 1 rules and m >= 1 features")
        if not np.isin(centers, PARTITION).all():
            raise ValueError("every center must lie on the 5-point partition")
        if not (widths > 0).all():
            raise ValueError("every width must be strictly positive")
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "widths", widths)

    @property
    def n_rules(self) -> int:
        return self.centers.shape[0]

    @property
    def n_features(self) -> int:
        return self.centers.shape[1]


def build_rule_base(n_rules: int, n_features: int, width: float = 0.5,
                    seed: int | None = None) -> RuleBase:
    """Sample a rule base: centers uniform on the partition, one shared width.

    Deterministic for a fixed seed. Centers are drawn independently per
    (rule, feature) cell; duplicate rules are allowed.
    """
    if n_rules < 1 or n_features < 1:
        raise ValueError(f"need n_rules >= 1 and n_features >= 1, "
                         f"got ({n_rules}, {n_features})")
    if not width > 0:
        raise ValueError(f"width must be positive, got {width}")
    rng = np.random.default_rng(seed)
    centers = rng.choice(PARTITION, size=(n_rules, n_features))
    widths = np.full((n_rules, n_features), float(width))
    return RuleBase(centers, widths)


def log_memberships(rb: RuleBase, X: np.ndarray) -> np.ndarray:
    """Unnormalized log rule memberships, N x K.

    log mu^k(x) = sum_i -(x_i - v_i^k)^2 / (2 * delta_i^k).
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != rb.n_features:
        raise ValueError(f"X has {X.shape[1]} features, rule base expects "
                         f"{rb.n_features}")
    diff = X[:, None, :] - rb.centers[None, :, :]
    return -(diff * diff / (2.0 * rb.widths[None, :, :])).sum(axis=2)


def firing_strengths(rb: RuleBase, X: np.ndarray) -> np.ndarray:
    """Normalized firing strengths, N x K, rows summing to 1.

    Normalization happens in log space (log-sum-exp), so the product of many
    per-feature Gaussians cannot underflow to an all-zero row.
    """
    log_mu = log_memberships(rb, X)
    shifted = log_mu - log_mu.max(axis=1, keepdims=True)
    w = np.exp(shifted)
    return w / w.sum(axis=1, keepdims=True)
