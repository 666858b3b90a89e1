"""Hard and soft voting over fitted classifiers."""

from __future__ import annotations

import enum
from typing import Optional, Sequence

import numpy as np


class VoteMode(enum.Enum):
    HARD = "hard"
    SOFT = "soft"

    @classmethod
    def parse(cls, value) -> "VoteMode":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown voting mode {value!r} (expected hard or soft)") from None


class VotingEnsemble:
    """Combine member predictions by (weighted) majority or averaged probabilities.

    Members only need ``predict``, ``n_classes``, ``supports_proba`` and, for
    soft voting, ``predict_proba``. Ties go to the lowest class id.
    """

    kind = "ensemble"

    def __init__(self, members: Sequence, mode="hard", weights: Optional[Sequence[float]] = None):
        members = list(members)
        if not members:
            raise ValueError("a voting ensemble needs at least one member")
        n_classes = {m.n_classes for m in members}
        if len(n_classes) != 1:
            raise ValueError(f"ensemble members disagree on class count: {sorted(n_classes)}")
        self.mode = VoteMode.parse(mode)
        if self.mode is VoteMode.SOFT:
            for i, m in enumerate(members):
                if not m.supports_proba:
                    raise ValueError(
                        f"soft voting needs probabilities; member {i} ({getattr(m, 'kind', type(m).__name__)}) has none"
                    )
        if weights is None:
            weights = np.ones(len(members))
        weights = np.asarray(weights, dtype=np.float64)
        if weights.shape != (len(members),):
            raise ValueError(f"expected {len(members)} weights, got {weights.size}")
        if np.any(weights < 0) or not np.all(np.isfinite(weights)) or weights.sum() <= 0:
            raise ValueError("ensemble weights must be finite, nonnegative and not all zero")
        self.members = members
        self.weights = weights
        self.n_classes = n_classes.pop()

    @property
    def supports_proba(self) -> bool:
        return self.mode is VoteMode.SOFT

    def _views(self, X, views):
        if views is not None:
            views = list(views)
            if len(views) != len(self.members):
                raise ValueError(f"expected {len(self.members)} feature views, got {len(views)}")
            return views
        return [X] * len(self.members)

    def vote_counts(self, X=None, views=None) -> np.ndarray:
        counts = None
        for m, view, w in zip(self.members, self._views(X, views), self.weights):
            preds = np.asarray(m.predict(view), dtype=np.int64)
            if counts is None:
                counts = np.zeros((len(preds), self.n_classes))
            counts[np.arange(len(preds)), preds] += w
        return counts

    def predict_proba(self, X=None, views=None) -> np.ndarray:
        if self.mode is not VoteMode.SOFT:
            raise ValueError("no probability output: hard-voting ensembles only produce labels")
        total = None
        for m, view, w in zip(self.members, self._views(X, views), self.weights):
            p = np.asarray(m.predict_proba(view), dtype=np.float64) * w
            total = p if total is None else total + p
        return total / self.weights.sum()

    def decision(self, X=None, views=None) -> np.ndarray:
        if self.mode is VoteMode.SOFT:
            return self.predict_proba(X, views)
        return self.vote_counts(X, views)

    def predict(self, X=None, views=None) -> np.ndarray:
        """Class ids; pass ``views`` (one matrix per member) when members use different features."""
        return np.argmax(self.decision(X, views), axis=1)


def ensemble_predict(ens: VotingEnsemble, x) -> int:
    return int(ens.predict(x)[0])


def ensemble_predict_proba(ens: VotingEnsemble, x) -> np.ndarray:
    return ens.predict_proba(x)[0]
