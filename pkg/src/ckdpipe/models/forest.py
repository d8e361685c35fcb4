"""Random forest: bootstrapped gini trees with sqrt(m) feature subsampling."""

from __future__ import annotations

import numpy as np

from ..seeding import child_rng
from .tree import ClassificationTree


class RandomForestModel:
    """Majority vote over n_trees; the score is the fraction of trees voting
    for class 1.  Tree t draws its bootstrap and per-node feature subsets from
    a stream derived from (seed, t), so results do not depend on build order."""

    def __init__(self, n_trees=1000, seed=0, max_depth=None):
        self.n_trees = n_trees
        self.seed = seed
        self.max_depth = max_depth
        self.trees: list[ClassificationTree] = []

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        n, m = X.shape
        k = max(1, int(np.sqrt(m)))
        self.trees = []
        for t in range(self.n_trees):
            rng = child_rng(self.seed, "rforest", t)
            boot = rng.integers(0, n, size=n)
            tree = ClassificationTree("gini", self.max_depth, max_features=k, rng=rng)
            tree.fit(X[boot], y[boot])
            self.trees.append(tree)
        return self

    def predict_proba1(self, X) -> np.ndarray:
        votes = np.zeros(np.asarray(X).shape[0])
        for tree in self.trees:
            votes += tree.predict(X)
        return votes / len(self.trees)

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba1(X) >= 0.5).astype(np.int64)

    def feature_importances(self) -> np.ndarray:
        return np.mean([t.importances_ for t in self.trees], axis=0)

    def to_dict(self):
        return {"n_trees": self.n_trees, "seed": self.seed, "max_depth": self.max_depth,
                "trees": [t.to_dict() for t in self.trees]}

    @staticmethod
    def from_dict(d):
        model = RandomForestModel(d["n_trees"], d["seed"], d["max_depth"])
        model.trees = [ClassificationTree.from_dict(t) for t in d["trees"]]
        return model
