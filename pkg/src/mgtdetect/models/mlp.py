"""One-hidden-layer perceptron: ReLU hidden units, softmax output, cross-entropy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from mgtdetect.models.base import TrainConfig, as_matrix, check_dim, check_labels


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


@dataclass
class MLPModel:
    W1: np.ndarray  # (H, D)
    b1: np.ndarray
    W2: np.ndarray  # (C, H)
    b2: np.ndarray
    config: TrainConfig = TrainConfig.defaults("mlp")

    kind = "mlp"
    supports_proba = True

    @property
    def n_classes(self) -> int:
        return self.W2.shape[0]

    @property
    def n_features(self) -> int:
        return self.W1.shape[1]

    @property
    def hidden_size(self) -> int:
        return self.W1.shape[0]

    def params(self) -> list:
        return [self.W1, self.b1, self.W2, self.b2]

    def logits(self, X) -> np.ndarray:
        X = as_matrix(X)
        check_dim(X, self.n_features)
        hidden = np.maximum(np.asarray(X @ self.W1.T) + self.b1, 0.0)
        return hidden @ self.W2.T + self.b2

    def decision(self, X) -> np.ndarray:
        return self.logits(X)

    def predict_proba(self, X) -> np.ndarray:
        return softmax(self.logits(X))

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.logits(X), axis=1)

    def get_state(self) -> dict:
        return {"config": self.config.to_dict(), "W1": self.W1, "b1": self.b1, "W2": self.W2, "b2": self.b2}

    @classmethod
    def from_state(cls, state: dict) -> "MLPModel":
        arrays = [np.asarray(state[k], dtype=np.float64) for k in ("W1", "b1", "W2", "b2")]
        return cls(*arrays, config=TrainConfig(**state["config"]))


def mlp_loss_and_grad(params, X, y, n_classes: int, l2_alpha: float = 0.0):
    """Mean cross-entropy (+ L2 on weight matrices) and gradients for ``params``.

    ``params`` is ``[W1, b1, W2, b2]``; the gradient list has the same layout.
    """
    W1, b1, W2, b2 = params
    X = as_matrix(X)
    y = np.asarray(y, dtype=np.int64)
    n = X.shape[0]
    pre = np.asarray(X @ W1.T) + b1
    hidden = np.maximum(pre, 0.0)
    logits = hidden @ W2.T + b2
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    log_p = shifted - log_norm[:, None]
    value = -log_p[np.arange(n), y].mean()
    value += 0.5 * l2_alpha * (np.sum(W1 * W1) + np.sum(W2 * W2))

    d_logits = np.exp(log_p)
    d_logits[np.arange(n), y] -= 1.0
    d_logits /= n
    gW2 = d_logits.T @ hidden + l2_alpha * W2
    gb2 = d_logits.sum(axis=0)
    d_hidden = d_logits @ W2
    d_hidden[pre <= 0.0] = 0.0
    gW1 = np.asarray((X.T @ d_hidden).T) + l2_alpha * W1
    gb1 = d_hidden.sum(axis=0)
    return float(value), [gW1, gb1, gW2, gb2]


def init_mlp(n_features: int, n_classes: int, hidden_size: int, rng: np.random.Generator):
    """Uniform fan-in initialization: each weight in ``[-1/sqrt(fan_in), 1/sqrt(fan_in)]``."""
    lim1 = 1.0 / np.sqrt(max(n_features, 1))
    lim2 = 1.0 / np.sqrt(hidden_size)
    W1 = rng.uniform(-lim1, lim1, size=(hidden_size, n_features))
    W2 = rng.uniform(-lim2, lim2, size=(n_classes, hidden_size))
    return [W1, np.zeros(hidden_size), W2, np.zeros(n_classes)]


def mlp_fit(X, y, cfg: TrainConfig = None, n_classes=None) -> MLPModel:
    """Minibatch SGD (with optional classical momentum) on mean cross-entropy."""
    cfg = cfg if cfg is not None else TrainConfig.defaults("mlp")
    X = as_matrix(X)
    if sp.issparse(X):
        X = sp.csr_matrix(X)
    y, n_classes = check_labels(y, n_classes)
    if X.shape[0] != len(y):
        raise ValueError(f"{X.shape[0]} samples but {len(y)} labels")
    rng = np.random.default_rng(cfg.seed)
    params = init_mlp(X.shape[1], n_classes, cfg.hidden_size, rng)
    velocity = [np.zeros_like(p) for p in params]
    n = X.shape[0]
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            _, grads = mlp_loss_and_grad(params, X[batch], y[batch], n_classes, cfg.l2_alpha)
            for p, v, g in zip(params, velocity, grads):
                v *= cfg.momentum
                v -= cfg.learning_rate * g
                p += v
    return MLPModel(*params, config=cfg)


def mlp_forward(model: MLPModel, x) -> np.ndarray:
    return model.predict_proba(x)[0]
