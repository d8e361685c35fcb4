"""Boosted ensembles: gradient boosting with logistic loss, SAMME.R adaptive
boosting over stumps, and a second-order regularized booster.
"""

from __future__ import annotations

import numpy as np

from ..errors import ArgumentError
from .tree import ClassificationTree, RegressionTree

_EPS = np.finfo(np.float64).eps


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _log_loss(y, raw):
    # mean logistic deviance at raw (log-odds) predictions
    return float(np.mean(np.logaddexp(0.0, -(2.0 * y - 1.0) * raw)))


class GradientBoostingModel:
    """Stage-wise logistic-loss boosting with depth-limited regression trees.

    Each stage fits the residual y - sigmoid(F) using Friedman's MSE
    improvement to pick splits, then replaces each leaf value with the
    one-step Newton estimate sum(residual) / sum(p (1 - p)).  train_losses_
    records the training deviance after every stage.
    """

    def __init__(self, n_stages=1000, learning_rate=0.01, max_depth=3):
        self.n_stages = n_stages
        self.learning_rate = learning_rate
        self.max_depth = max_depth
        self.f0 = 0.0
        self.trees: list[RegressionTree] = []
        self.train_losses_: list[float] = []

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        p = np.clip(y.mean(), 1e-12, 1 - 1e-12)
        self.f0 = float(np.log(p / (1.0 - p)))
        F = np.full(X.shape[0], self.f0)
        self.trees = []
        self.train_losses_ = [_log_loss(y, F)]
        for _ in range(self.n_stages):
            prob = _sigmoid(F)
            residual = y - prob
            tree = RegressionTree(self.max_depth, mode="friedman").fit(X, residual)
            leaves = tree.apply(X)
            updates = {}
            for leaf in np.unique(leaves):
                sel = leaves == leaf
                denominator = np.sum(prob[sel] * (1.0 - prob[sel]))
                numerator = np.sum(residual[sel])
                updates[int(leaf)] = (numerator / denominator
                                      if denominator > 1e-150 else 0.0)
            tree.set_leaf_values(updates)
            F += self.learning_rate * tree.predict(X)
            self.trees.append(tree)
            self.train_losses_.append(_log_loss(y, F))
        return self

    def decision_function(self, X) -> np.ndarray:
        F = np.full(np.asarray(X).shape[0], self.f0)
        for tree in self.trees:
            F += self.learning_rate * tree.predict(X)
        return F

    def predict_proba1(self, X) -> np.ndarray:
        return _sigmoid(self.decision_function(X))

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba1(X) >= 0.5).astype(np.int64)

    def feature_importances(self) -> np.ndarray:
        return np.mean([t.importances_ for t in self.trees], axis=0)

    def to_dict(self):
        return {"n_stages": self.n_stages, "learning_rate": self.learning_rate,
                "max_depth": self.max_depth, "f0": self.f0,
                "trees": [t.to_dict() for t in self.trees]}

    @staticmethod
    def from_dict(d):
        model = GradientBoostingModel(d["n_stages"], d["learning_rate"], d["max_depth"])
        model.f0 = d["f0"]
        model.trees = [RegressionTree.from_dict(t) for t in d["trees"]]
        return model


class AdaBoostSammeR:
    """SAMME.R over depth-1 trees: each round reweights samples by the stump's
    log-probability of their true class; the decision value accumulates
    0.5 * log(p1 / p0) across rounds."""

    def __init__(self, n_rounds=50, learning_rate=1.0):
        self.n_rounds = n_rounds
        self.learning_rate = learning_rate
        self.stumps: list[ClassificationTree] = []

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        n = X.shape[0]
        w = np.full(n, 1.0 / n)
        ypm = 2.0 * y - 1.0
        self.stumps = []
        for _ in range(self.n_rounds):
            stump = ClassificationTree("gini", max_depth=1).fit(X, y, sample_weight=w)
            self.stumps.append(stump)
            p1 = np.clip(stump.predict_proba1(X), _EPS, 1.0 - _EPS)
            weighted_error = float(np.sum(w * ((p1 >= 0.5).astype(np.int64) != y)))
            if weighted_error <= 0.0:
                # perfect stump: nothing left to reweight
                break
            half_log_ratio = 0.5 * (np.log(p1) - np.log(1.0 - p1))
            w *= np.exp(-self.learning_rate * ypm * half_log_ratio)
            total = w.sum()
            if total <= 0 or not np.isfinite(total):
                break
            w /= total
        return self

    def decision_function(self, X) -> np.ndarray:
        df = np.zeros(np.asarray(X).shape[0])
        for stump in self.stumps:
            p1 = np.clip(stump.predict_proba1(X), _EPS, 1.0 - _EPS)
            df += 0.5 * (np.log(p1) - np.log(1.0 - p1))
        return df

    def predict(self, X) -> np.ndarray:
        return (self.decision_function(X) >= 0.0).astype(np.int64)

    def to_dict(self):
        return {"n_rounds": self.n_rounds, "learning_rate": self.learning_rate,
                "stumps": [s.to_dict() for s in self.stumps]}

    @staticmethod
    def from_dict(d):
        model = AdaBoostSammeR(d["n_rounds"], d["learning_rate"])
        model.stumps = [ClassificationTree.from_dict(s) for s in d["stumps"]]
        return model


class SecondOrderBoostModel:
    """Gradient+hessian boosting with logistic loss: splits maximize the
    regularized gain and leaves take -sum(g) / (sum(h) + lam)."""

    def __init__(self, n_rounds=1000, learning_rate=0.3, lam=1.0, max_depth=3):
        self.n_rounds = n_rounds
        self.learning_rate = learning_rate
        self.lam = lam
        self.max_depth = max_depth
        self.trees: list[RegressionTree] = []

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        F = np.zeros(X.shape[0])  # base score 0.5 in probability space
        self.trees = []
        for _ in range(self.n_rounds):
            p = _sigmoid(F)
            g = p - y
            h = np.maximum(p * (1.0 - p), 1e-16)
            tree = RegressionTree(self.max_depth, mode="second_order", lam=self.lam)
            tree.fit(X, g, h=h)
            F += self.learning_rate * tree.predict(X)
            self.trees.append(tree)
        return self

    def decision_function(self, X) -> np.ndarray:
        F = np.zeros(np.asarray(X).shape[0])
        for tree in self.trees:
            F += self.learning_rate * tree.predict(X)
        return F

    def predict_proba1(self, X) -> np.ndarray:
        return _sigmoid(self.decision_function(X))

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba1(X) >= 0.5).astype(np.int64)

    def feature_importances(self) -> np.ndarray:
        return np.mean([t.importances_ for t in self.trees], axis=0)

    def to_dict(self):
        return {"n_rounds": self.n_rounds, "learning_rate": self.learning_rate,
                "lam": self.lam, "max_depth": self.max_depth,
                "trees": [t.to_dict() for t in self.trees]}

    @staticmethod
    def from_dict(d):
        model = SecondOrderBoostModel(d["n_rounds"], d["learning_rate"],
                                      d["lam"], d["max_depth"])
        model.trees = [RegressionTree.from_dict(t) for t in d["trees"]]
        return model


def second_order_leaf_check(X, y, max_depth=3, lam=0.0):
    """Internal consistency probe: with hessians forced to 1 and lam shared,
    second-order leaves must equal mean-residual leaves on the same tree."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    p = np.full(X.shape[0], 0.5)
    g = p - y
    ones = np.ones_like(g)
    so_tree = RegressionTree(max_depth, mode="second_order", lam=lam).fit(X, g, h=ones)
    leaves = so_tree.apply(X)
    residual = -g
    diffs = []
    for leaf in np.unique(leaves):
        sel = leaves == leaf
        plain = residual[sel].sum() / (sel.sum() + lam)
        so_value = so_tree.predict(X[sel][:1])[0]
        diffs.append(abs(plain - so_value))
    return max(diffs)
