"""Shared pieces for the classifiers: training config, input coercion, argmax."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from mgtdetect.features import SparseVector

MODEL_DEFAULTS = {
    "linear": dict(epochs=20, learning_rate=0.1, l2_alpha=1e-4),
    "mlp": dict(epochs=50, learning_rate=0.01, l2_alpha=1e-4, hidden_size=100, batch_size=32, momentum=0.9),
    "gbdt": dict(n_rounds=100, max_depth=6, n_bins=64, min_leaf=20, learning_rate=0.1),
}


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 20
    learning_rate: float = 0.1
    l2_alpha: float = 1e-4
    seed: int = 42
    hidden_size: int = 100
    batch_size: int = 32
    momentum: float = 0.0
    n_rounds: int = 100
    max_depth: int = 6
    n_bins: int = 64
    min_leaf: int = 20

    def __post_init__(self):
        for name in ("epochs", "n_rounds", "seed"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        for name in ("hidden_size", "batch_size", "max_depth", "min_leaf"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.n_bins < 2:
            raise ValueError("n_bins must be >= 2")
        if self.learning_rate <= 0 or self.l2_alpha < 0:
            raise ValueError("learning_rate must be > 0 and l2_alpha >= 0")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError("momentum must be in [0, 1)")

    @classmethod
    def defaults(cls, model: str, **overrides) -> "TrainConfig":
        """Config with the per-model defaults applied, then ``overrides``."""
        values = dict(MODEL_DEFAULTS.get(model, {}))
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, model: str, d: Optional[dict]) -> "TrainConfig":
        d = dict(d or {})
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown training options: {sorted(unknown)}")
        return cls.defaults(model, **d)


def as_matrix(x):
    """Coerce a SparseVector, 1-D vector, dense or sparse matrix into 2-D form."""
    if isinstance(x, SparseVector):
        return x.to_csr()
    if sp.issparse(x):
        return sp.csr_matrix(x, dtype=np.float64)
    if isinstance(x, (list, tuple)) and x and isinstance(x[0], SparseVector):
        return sp.vstack([v.to_csr() for v in x], format="csr")
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    return arr


def n_features(X) -> int:
    return X.shape[1]


def check_dim(X, expected: int) -> None:
    if X.shape[1] != expected:
        raise ValueError(f"feature dimension mismatch: model expects {expected}, got {X.shape[1]}")


def check_labels(y, n_classes: Optional[int]):
    """Validate labels and resolve the class count."""
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValueError("labels must be a 1-D sequence")
    if y.size and not np.issubdtype(y.dtype, np.integer):
        raise ValueError(f"labels must be integer class ids, got dtype {y.dtype}")
    y = y.astype(np.int64)
    if n_classes is None:
        n_classes = int(y.max()) + 1 if y.size else 0
        n_classes = max(n_classes, 2)
    bad = (y < 0) | (y >= n_classes)
    if bad.any():
        raise ValueError(f"unknown class {int(y[bad][0])} in labels (n_classes={n_classes})")
    return y, n_classes


def predict(scores) -> int:
    """Argmax with ties going to the lowest class id."""
    scores = np.asarray(scores, dtype=np.float64)
    return int(np.argmax(scores))


def predict_rows(scores: np.ndarray) -> np.ndarray:
    return np.argmax(np.asarray(scores), axis=1)


def sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def ovr_normalize(p: np.ndarray) -> np.ndarray:
    """Renormalize per-class one-vs-rest probabilities so rows sum to 1."""
    totals = p.sum(axis=1, keepdims=True)
    n_classes = p.shape[1]
    safe = totals > 0
    out = np.where(safe, p / np.where(safe, totals, 1.0), 1.0 / n_classes)
    return out


def binary_proba(p1: np.ndarray) -> np.ndarray:
    p1 = np.asarray(p1, dtype=np.float64)
    return np.column_stack([1.0 - p1, p1])
