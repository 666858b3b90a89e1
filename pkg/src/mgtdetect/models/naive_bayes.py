"""Multinomial Naive Bayes over nonnegative (count or TF-IDF) features."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from mgtdetect.models.base import as_matrix, check_dim, check_labels


@dataclass
class NaiveBayesModel:
    class_log_prior: np.ndarray
    feature_log_prob: np.ndarray
    alpha: float = 1.0

    kind = "nb"
    supports_proba = True

    @property
    def n_classes(self) -> int:
        return len(self.class_log_prior)

    @property
    def n_features(self) -> int:
        return self.feature_log_prob.shape[1]

    def joint_log_likelihood(self, X) -> np.ndarray:
        X = as_matrix(X)
        check_dim(X, self.n_features)
        jll = X @ self.feature_log_prob.T
        return np.asarray(jll) + self.class_log_prior

    def decision(self, X) -> np.ndarray:
        return self.joint_log_likelihood(X)

    def predict_proba(self, X) -> np.ndarray:
        jll = self.joint_log_likelihood(X)
        finite_max = np.max(jll, axis=1, keepdims=True)
        p = np.exp(jll - finite_max)
        return p / p.sum(axis=1, keepdims=True)

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.joint_log_likelihood(X), axis=1)

    def get_state(self) -> dict:
        return {
            "alpha": float(self.alpha),
            "class_log_prior": self.class_log_prior,
            "feature_log_prob": self.feature_log_prob,
        }

    @classmethod
    def from_state(cls, state: dict) -> "NaiveBayesModel":
        return cls(
            np.asarray(state["class_log_prior"], dtype=np.float64),
            np.asarray(state["feature_log_prob"], dtype=np.float64),
            float(state["alpha"]),
        )


def nb_fit(X, y, alpha: float = 1.0, n_classes=None) -> NaiveBayesModel:
    """Closed-form fit with additive (Laplace/Lidstone) smoothing.

    Classes with no training samples get a log prior of ``-inf`` and are
    never predicted.
    """
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    X = as_matrix(X)
    y, n_classes = check_labels(y, n_classes)
    if X.shape[0] == 0:
        raise ValueError("cannot fit Naive Bayes on an empty dataset")
    if X.shape[0] != len(y):
        raise ValueError(f"{X.shape[0]} samples but {len(y)} labels")
    values = X.data if sp.issparse(X) else X
    if np.any(values < 0):
        raise ValueError("Naive Bayes needs nonnegative feature values")

    onehot = sp.csr_matrix(
        (np.ones(len(y)), (y, np.arange(len(y)))), shape=(n_classes, len(y))
    )
    feature_sums = onehot @ X
    feature_sums = feature_sums.toarray() if sp.issparse(feature_sums) else np.asarray(feature_sums, dtype=np.float64)
    class_counts = np.bincount(y, minlength=n_classes).astype(np.float64)
    with np.errstate(divide="ignore"):
        class_log_prior = np.log(class_counts / class_counts.sum())
    n_feat = X.shape[1]
    smoothed = feature_sums + alpha
    totals = feature_sums.sum(axis=1, keepdims=True) + alpha * n_feat
    feature_log_prob = np.log(smoothed) - np.log(totals)
    return NaiveBayesModel(class_log_prior, feature_log_prob, float(alpha))


def nb_log_posterior(model: NaiveBayesModel, x) -> np.ndarray:
    """Unnormalized log posterior per class for a single sample."""
    return model.joint_log_likelihood(x)[0]
