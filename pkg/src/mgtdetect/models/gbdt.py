"""Histogram-based gradient-boosted regression trees for classification.

Binary problems boost a single logistic series. Multiclass problems boost
one independent logistic series per class (one-vs-rest); their sigmoid
outputs are renormalized to sum to one.

Split search works on quantized features. Each feature gets up to
``n_bins - 1`` equal-frequency edges (zeros included in the quantiles), and
a node's histogram is built only from the stored nonzeros of the rows it
holds; the implicit-zero mass is recovered by subtraction from the node
totals. Features whose nonzero count is below ``min_leaf`` can never yield a
legal split and are dropped before binning.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List

import numpy as np
import scipy.sparse as sp
from numba import njit

from mgtdetect.models.base import (
    TrainConfig,
    as_matrix,
    binary_proba,
    check_dim,
    check_labels,
    ovr_normalize,
    sigmoid,
)

LEAF_L2 = 1.0
_MIN_GAIN = 1e-12
_PROB_CLIP = 1e-6


@dataclass
class Tree:
    """Flat binary tree; ``feature == -1`` marks a leaf. Samples go left when ``x <= threshold``."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def depth(self) -> int:
        depths = np.zeros(self.n_nodes, dtype=np.int64)
        for i in range(self.n_nodes):
            if self.feature[i] >= 0:
                depths[self.left[i]] = depths[i] + 1
                depths[self.right[i]] = depths[i] + 1
        return int(depths.max()) if self.n_nodes else 0

    def apply(self, columns: np.ndarray, used: np.ndarray) -> np.ndarray:
        """Leaf index for every row of ``columns``.

        ``columns`` is dense with one column per entry of the sorted feature
        id array ``used``.
        """
        n = columns.shape[0]
        node = np.zeros(n, dtype=np.int64)
        rows = np.arange(n)
        while True:
            feat = self.feature[node]
            active = feat >= 0
            if not active.any():
                return node
            idx = rows[active]
            cur = node[active]
            col = np.searchsorted(used, feat[active])
            go_left = columns[idx, col] <= self.threshold[cur]
            node[active] = np.where(go_left, self.left[cur], self.right[cur])


@dataclass
class GBDTModel:
    trees: List[List[Tree]]  # trees[series][round]
    base_score: np.ndarray  # one per series
    learning_rate: float
    n_classes: int
    n_features: int
    config: TrainConfig = field(default_factory=lambda: TrainConfig.defaults("gbdt"))

    kind = "gbdt"
    supports_proba = True

    def raw_scores(self, X) -> np.ndarray:
        X = as_matrix(X)
        check_dim(X, self.n_features)
        n = X.shape[0]
        scores = np.tile(self.base_score, (n, 1))
        used = sorted({int(f) for series in self.trees for t in series for f in t.feature if f >= 0})
        if not used:
            return scores
        cols = X[:, used]
        cols = cols.toarray() if sp.issparse(cols) else np.asarray(cols)
        used = np.asarray(used, dtype=np.int64)
        for s, series in enumerate(self.trees):
            for tree in series:
                scores[:, s] += tree.value[tree.apply(cols, used)]
        return scores

    def predict_proba(self, X) -> np.ndarray:
        scores = self.raw_scores(X)
        if self.n_classes == 2:
            return binary_proba(sigmoid(scores[:, 0]))
        return ovr_normalize(sigmoid(scores))

    def decision(self, X) -> np.ndarray:
        return self.predict_proba(X)

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)

    def get_state(self) -> dict:
        flat = [t for series in self.trees for t in series]
        sizes = [t.n_nodes for t in flat]
        offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)

        def cat(attr, dtype):
            if not flat:
                return np.zeros(0, dtype=dtype)
            return np.concatenate([getattr(t, attr) for t in flat]).astype(dtype)

        return {
            "n_classes": self.n_classes,
            "n_features": self.n_features,
            "learning_rate": float(self.learning_rate),
            "config": self.config.to_dict(),
            "series_lengths": [len(s) for s in self.trees],
            "base_score": self.base_score,
            "offsets": offsets,
            "feature": cat("feature", np.int64),
            "threshold": cat("threshold", np.float64),
            "left": cat("left", np.int64),
            "right": cat("right", np.int64),
            "value": cat("value", np.float64),
        }

    @classmethod
    def from_state(cls, state: dict) -> "GBDTModel":
        offsets = np.asarray(state["offsets"], dtype=np.int64)
        arrays = {k: np.asarray(state[k]) for k in ("feature", "threshold", "left", "right", "value")}
        flat = [
            Tree(**{k: a[offsets[i] : offsets[i + 1]] for k, a in arrays.items()})
            for i in range(len(offsets) - 1)
        ]
        trees, pos = [], 0
        for length in state["series_lengths"]:
            trees.append(flat[pos : pos + length])
            pos += length
        return cls(
            trees,
            np.asarray(state["base_score"], dtype=np.float64),
            float(state["learning_rate"]),
            int(state["n_classes"]),
            int(state["n_features"]),
            TrainConfig(**state["config"]),
        )


class BinnedMatrix:
    """Quantized copy of the candidate columns of a CSR matrix."""

    def __init__(self, X: sp.csr_matrix, n_bins: int, min_nonzero: int):
        n, d = X.shape
        X = sp.csr_matrix(X, dtype=np.float64)
        X.sum_duplicates()
        X.eliminate_zeros()
        nnz_per_col = np.bincount(X.indices, minlength=d)
        self.features = np.flatnonzero(nnz_per_col >= max(min_nonzero, 1))
        n_cand = len(self.features)
        self.n_rows = n
        self.n_bins = n_bins
        self.edges = np.full((n_cand, n_bins - 1), np.inf)
        self.n_edges = np.zeros(n_cand, dtype=np.int64)
        self.zero_bin = np.zeros(n_cand, dtype=np.int64)

        sub = X[:, self.features].tocsc()
        sub.sort_indices()
        # tag each nonzero with its CSC position so the CSR view can find its bin
        tags = sp.csc_matrix(
            (np.arange(1, sub.nnz + 1, dtype=np.float64), sub.indices, sub.indptr), shape=sub.shape
        )
        csc_bins = np.zeros(sub.nnz, dtype=np.int64)
        levels = np.arange(1, n_bins) / n_bins
        positions = np.floor(levels * (n - 1)).astype(np.int64)
        for j in range(n_cand):
            lo, hi = sub.indptr[j], sub.indptr[j + 1]
            vals = np.sort(sub.data[lo:hi])
            n_neg = int(np.searchsorted(vals, 0.0))
            full = np.concatenate([vals[:n_neg], np.zeros(n - (hi - lo)), vals[n_neg:]])
            edges = np.unique(full[positions])
            self.edges[j, : len(edges)] = edges
            self.n_edges[j] = len(edges)
            self.zero_bin[j] = np.searchsorted(edges, 0.0, side="left")
            csc_bins[lo:hi] = np.searchsorted(edges, sub.data[lo:hi], side="left")

        csr_tags = tags.tocsr()
        csr_tags.sort_indices()
        self.indptr = csr_tags.indptr.astype(np.int64)
        self.col = csr_tags.indices.astype(np.int64)
        self.bins = csc_bins[csr_tags.data.astype(np.int64) - 1]

    @property
    def n_candidates(self) -> int:
        return len(self.features)


@njit(cache=True)
def _build_histogram(rows, indptr, col, bins, residual, n_cand, n_bins):
    """Residual sums and counts per (feature, bin) over the stored nonzeros of ``rows``."""
    hist_r = np.zeros((n_cand, n_bins))
    hist_n = np.zeros((n_cand, n_bins))
    for r in rows:
        w = residual[r]
        for p in range(indptr[r], indptr[r + 1]):
            hist_r[col[p], bins[p]] += w
            hist_n[col[p], bins[p]] += 1.0
    return hist_r, hist_n


@njit(cache=True)
def _find_split(hist_r, hist_n, zero_bin, n_edges, total_r, n_node, min_leaf):
    """Best variance-reduction split; ties keep the lowest (feature, bin).

    The histograms hold nonzero entries only; the rows' implicit zeros are
    added back into each feature's zero bin from the node totals.
    """
    best, best_f, best_b = -np.inf, -1, -1
    parent = total_r * total_r / n_node
    for f in range(hist_r.shape[0]):
        n_e = n_edges[f]
        if n_e == 0:
            continue
        zero_r = total_r
        zero_n = float(n_node)
        for b in range(hist_r.shape[1]):
            zero_r -= hist_r[f, b]
            zero_n -= hist_n[f, b]
        left_r = 0.0
        left_n = 0.0
        for b in range(n_e):
            left_r += hist_r[f, b]
            left_n += hist_n[f, b]
            if b == zero_bin[f]:
                left_r += zero_r
                left_n += zero_n
            right_n = n_node - left_n
            if left_n >= min_leaf and right_n >= min_leaf:
                right_r = total_r - left_r
                gain = left_r * left_r / left_n + right_r * right_r / right_n - parent
                if gain > best:
                    best, best_f, best_b = gain, f, b
    return best, best_f, best_b


def _node_histogram(binned: BinnedMatrix, rows, residual):
    return _build_histogram(
        rows, binned.indptr, binned.col, binned.bins, residual, binned.n_candidates, binned.n_bins
    )


@njit(cache=True)
def _goes_left(rows, indptr, col, bins, cand, zero_bin, split_bin):
    """Whether each row's bin for candidate ``cand`` is <= ``split_bin`` (columns sorted per row)."""
    out = np.empty(len(rows), dtype=np.bool_)
    for i in range(len(rows)):
        r = rows[i]
        lo, hi = indptr[r], indptr[r + 1]
        while lo < hi:
            mid = (lo + hi) // 2
            if col[mid] < cand:
                lo = mid + 1
            else:
                hi = mid
        code = zero_bin
        if lo < indptr[r + 1] and col[lo] == cand:
            code = bins[lo]
        out[i] = code <= split_bin
    return out


def _grow_tree(binned: BinnedMatrix, residual, hessian, cfg: TrainConfig):
    """Depth-first growth with histogram subtraction.

    Only the smaller child's histogram is built from data; the larger one is
    the parent's minus it. Returns the tree and every training row's leaf.
    """
    feature, threshold, left, right, value = [], [], [], [], []
    assignment = np.zeros(binned.n_rows, dtype=np.int64)
    min_leaf = cfg.min_leaf

    def new_node():
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(0.0)
        return len(feature) - 1

    def splittable(rows, depth):
        return depth < cfg.max_depth and len(rows) >= 2 * min_leaf and binned.n_candidates > 0

    root_rows = np.arange(binned.n_rows)
    root_hist = _node_histogram(binned, root_rows, residual) if splittable(root_rows, 0) else None
    stack = [(new_node(), root_rows, 0, root_hist)]
    while stack:
        node, rows, depth, hist = stack.pop()
        split = None
        if hist is not None:
            gain, cand, b = _find_split(
                hist[0], hist[1], binned.zero_bin, binned.n_edges,
                float(residual[rows].sum()), len(rows), min_leaf,
            )
            if cand >= 0 and gain > _MIN_GAIN:
                split = (cand, b)
        if split is None:
            value[node] = cfg.learning_rate * residual[rows].sum() / (hessian[rows].sum() + LEAF_L2)
            assignment[rows] = node
            continue
        cand, b = split
        go_left = _goes_left(
            rows, binned.indptr, binned.col, binned.bins, cand, binned.zero_bin[cand], b
        )
        feature[node] = int(binned.features[cand])
        threshold[node] = float(binned.edges[cand, b])
        lnode, rnode = new_node(), new_node()
        left[node], right[node] = lnode, rnode
        children = [(lnode, rows[go_left]), (rnode, rows[~go_left])]
        need = [splittable(r, depth + 1) for _, r in children]
        hists = [None, None]
        small = 0 if len(children[0][1]) <= len(children[1][1]) else 1
        if need[small] or need[1 - small]:
            h_small = _node_histogram(binned, children[small][1], residual)
            hists[small] = h_small
            if need[1 - small]:
                np.subtract(hist[0], h_small[0], out=hist[0])
                np.subtract(hist[1], h_small[1], out=hist[1])
                hists[1 - small] = hist
        # right pushed first so the left subtree is expanded first
        for i in (1, 0):
            stack.append((children[i][0], children[i][1], depth + 1, hists[i] if need[i] else None))

    tree = Tree(
        np.array(feature, dtype=np.int64),
        np.array(threshold, dtype=np.float64),
        np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64),
        np.array(value, dtype=np.float64),
    )
    return tree, assignment


def _boost_series(binned: BinnedMatrix, target: np.ndarray, cfg: TrainConfig):
    rate = float(target.mean()) if len(target) else 0.5
    p0 = min(max(rate, _PROB_CLIP), 1.0 - _PROB_CLIP)
    base = float(np.log(p0 / (1.0 - p0)))
    if len(target) == 0 or np.all(target == target[0]):
        return base, []
    scores = np.full(len(target), base)
    trees = []
    for _ in range(cfg.n_rounds):
        p = sigmoid(scores)
        residual = target - p
        hessian = p * (1.0 - p)
        tree, leaves = _grow_tree(binned, residual, hessian, cfg)
        scores += tree.value[leaves]
        trees.append(tree)
    return base, trees


def gbdt_fit(X, y, cfg: TrainConfig = None, n_classes=None) -> GBDTModel:
    """Fit boosted trees on logistic loss.

    Each round fits a regression tree to the negative gradient ``y - p``;
    splits maximize the reduction in squared error of that target, and each
    leaf takes a shrunk Newton step ``lr * sum(y - p) / (sum p(1-p) + 1)``.
    """
    cfg = cfg if cfg is not None else TrainConfig.defaults("gbdt")
    X = as_matrix(X)
    X = sp.csr_matrix(X, dtype=np.float64)
    y, n_classes = check_labels(y, n_classes)
    if X.shape[0] != len(y):
        raise ValueError(f"{X.shape[0]} samples but {len(y)} labels")
    if X.shape[0] == 0:
        raise ValueError("cannot fit boosted trees on an empty dataset")
    binned = BinnedMatrix(X, cfg.n_bins, cfg.min_leaf)
    if n_classes == 2:
        targets = [(y == 1).astype(np.float64)]
    else:
        targets = [(y == c).astype(np.float64) for c in range(n_classes)]
    bases, trees = [], []
    for target in targets:
        base, series = _boost_series(binned, target, cfg)
        bases.append(base)
        trees.append(series)
    return GBDTModel(trees, np.array(bases), cfg.learning_rate, n_classes, X.shape[1], cfg)


def gbdt_predict_proba(model: GBDTModel, x) -> np.ndarray:
    return model.predict_proba(x)[0]
