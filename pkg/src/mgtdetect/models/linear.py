"""Linear classifiers trained by per-sample SGD (logistic or hinge loss).

Binary problems keep a single weight row; multiclass problems are reduced
one-vs-rest, one row per class.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from mgtdetect.models.base import (
    TrainConfig,
    as_matrix,
    binary_proba,
    check_dim,
    check_labels,
    ovr_normalize,
    sigmoid,
)

LOSSES = ("logistic", "hinge")

# below this the weight-scale trick folds the scale back into the weights
_MIN_SCALE = 1e-9


def loss_value(z, y_sign, loss: str):
    z = np.asarray(z, dtype=np.float64)
    m = y_sign * z
    if loss == "logistic":
        return np.logaddexp(0.0, -m)
    return np.maximum(0.0, 1.0 - m)


def loss_dz(z, y_sign, loss: str):
    """Derivative of the per-sample loss with respect to the margin ``z``."""
    z = np.asarray(z, dtype=np.float64)
    m = y_sign * z
    if loss == "logistic":
        return -y_sign * sigmoid(-m)
    return np.where(m < 1.0, -y_sign, 0.0) * np.ones_like(z)


def _check_loss(loss: str) -> str:
    loss = str(loss).lower()
    if loss not in LOSSES:
        raise ValueError(f"unknown loss {loss!r}; expected one of {LOSSES}")
    return loss


@dataclass
class LinearModel:
    weights: np.ndarray  # (1, D) for binary, (C, D) otherwise
    bias: np.ndarray
    loss: str
    n_classes: int
    config: TrainConfig = TrainConfig()

    kind = "linear"

    @property
    def supports_proba(self) -> bool:
        return self.loss == "logistic"

    @property
    def n_features(self) -> int:
        return self.weights.shape[1]

    def raw_margins(self, X) -> np.ndarray:
        X = as_matrix(X)
        check_dim(X, self.n_features)
        return np.asarray(X @ self.weights.T) + self.bias

    def decision(self, X) -> np.ndarray:
        """Per-class margins; a binary margin ``z`` is reported as ``(-z, z)``."""
        z = self.raw_margins(X)
        if self.n_classes == 2:
            return np.column_stack([-z[:, 0], z[:, 0]])
        return z

    def predict_proba(self, X) -> np.ndarray:
        if not self.supports_proba:
            raise ValueError("no probability model: hinge-loss linear models only produce margins")
        z = self.raw_margins(X)
        if self.n_classes == 2:
            return binary_proba(sigmoid(z[:, 0]))
        return ovr_normalize(sigmoid(z))

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.decision(X), axis=1)

    def get_state(self) -> dict:
        return {
            "loss": self.loss,
            "n_classes": self.n_classes,
            "config": self.config.to_dict(),
            "weights": self.weights,
            "bias": self.bias,
        }

    @classmethod
    def from_state(cls, state: dict) -> "LinearModel":
        return cls(
            np.asarray(state["weights"], dtype=np.float64),
            np.asarray(state["bias"], dtype=np.float64),
            state["loss"],
            int(state["n_classes"]),
            TrainConfig(**state["config"]),
        )


def _targets(y: np.ndarray, n_classes: int) -> np.ndarray:
    """Signed +/-1 targets, one column per weight row."""
    if n_classes == 2:
        return np.where(y == 1, 1.0, -1.0)[:, None]
    return np.where(y[:, None] == np.arange(n_classes)[None, :], 1.0, -1.0)


def linear_objective(weights, bias, X, y, loss: str = "logistic", l2_alpha: float = 1e-4, n_classes=None):
    """Mean loss plus ``l2_alpha/2 * ||W||^2`` and its gradient.

    Returns ``(value, grad_weights, grad_bias)``. The bias is not penalized.
    """
    loss = _check_loss(loss)
    X = as_matrix(X)
    y, n_classes = check_labels(y, n_classes)
    weights = np.atleast_2d(np.asarray(weights, dtype=np.float64))
    bias = np.asarray(bias, dtype=np.float64).ravel()
    signs = _targets(y, n_classes)
    n = X.shape[0]
    z = np.asarray(X @ weights.T) + bias
    value = loss_value(z, signs, loss).sum() / n + 0.5 * l2_alpha * np.sum(weights * weights)
    dz = loss_dz(z, signs, loss) / n
    grad_w = np.asarray((X.T @ dz).T) + l2_alpha * weights
    grad_b = dz.sum(axis=0)
    return float(value), grad_w, grad_b


def _sgd_binary(indptr, indices, data, signs, order_per_epoch, n_features, loss, cfg):
    v = np.zeros(n_features)
    scale = 1.0
    b = 0.0
    lr0, alpha = cfg.learning_rate, cfg.l2_alpha
    t = 0
    for order in order_per_epoch:
        for i in order:
            lo, hi = indptr[i], indptr[i + 1]
            idx = indices[lo:hi]
            vals = data[lo:hi]
            eta = lr0 / (1.0 + lr0 * alpha * t)
            z = scale * float(v[idx] @ vals) + b
            m = signs[i] * z
            if loss == "logistic":
                if m >= 0:
                    g = -signs[i] * np.exp(-m) / (1.0 + np.exp(-m))
                else:
                    g = -signs[i] / (1.0 + np.exp(m))
            else:
                g = -signs[i] if m < 1.0 else 0.0
            scale *= 1.0 - eta * alpha
            if g != 0.0:
                v[idx] -= (eta * g / scale) * vals
                b -= eta * g
            if scale < _MIN_SCALE:
                v *= scale
                scale = 1.0
            t += 1
    return v * scale, b


def sgd_fit_linear(X, y, loss: str = "logistic", cfg: TrainConfig = None, n_classes=None) -> LinearModel:
    """Minimize mean loss + L2 penalty with per-sample SGD.

    The step size decays as ``lr0 / (1 + lr0 * l2_alpha * t)`` where ``t``
    counts updates across epochs. Sample order is reshuffled every epoch
    from ``cfg.seed``; the same permutations are used for every OvR row.
    """
    loss = _check_loss(loss)
    cfg = cfg if cfg is not None else TrainConfig.defaults("linear")
    X = sp.csr_matrix(as_matrix(X), dtype=np.float64)
    y, n_classes = check_labels(y, n_classes)
    if X.shape[0] != len(y):
        raise ValueError(f"{X.shape[0]} samples but {len(y)} labels")
    if cfg.learning_rate * cfg.l2_alpha >= 1.0:
        raise ValueError("learning_rate * l2_alpha must be < 1")
    X.sort_indices()
    n, d = X.shape
    rng = np.random.default_rng(cfg.seed)
    orders = [rng.permutation(n) for _ in range(cfg.epochs)]
    signs = _targets(y, n_classes)
    n_rows = signs.shape[1]
    weights = np.zeros((n_rows, d))
    bias = np.zeros(n_rows)
    for r in range(n_rows):
        weights[r], bias[r] = _sgd_binary(X.indptr, X.indices, X.data, signs[:, r], orders, d, loss, cfg)
    return LinearModel(weights, bias, loss, n_classes, cfg)


def linear_decision(model: LinearModel, x) -> np.ndarray:
    return model.decision(x)[0]


def linear_proba(model: LinearModel, x) -> np.ndarray:
    return model.predict_proba(x)[0]
