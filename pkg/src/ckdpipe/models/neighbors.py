"""k-nearest-neighbor classifier (uniform vote, Euclidean metric)."""

from __future__ import annotations

import numpy as np

from ..errors import ArgumentError


class KnnModel:
    """Instance memorizer: uniform vote of the k nearest rows (Minkowski p=2);
    distance ties break by training-row index."""

    def __init__(self, k=25, p=2):
        if p != 2:
            raise ArgumentError("only Minkowski p=2 is supported")
        self.k = k
        self.p = p
        self.X = None
        self.y = None

    def fit(self, X, y):
        self.X = np.asarray(X, dtype=np.float64).copy()
        self.y = np.asarray(y, dtype=np.int64).copy()
        if self.k < 1:
            raise ArgumentError("k must be >= 1")
        if self.k > self.X.shape[0]:
            raise ArgumentError(f"k={self.k} exceeds training size {self.X.shape[0]}")
        return self

    def predict_proba1(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        d2 = (np.sum(X ** 2, axis=1)[:, None] + np.sum(self.X ** 2, axis=1)[None, :]
              - 2.0 * X @ self.X.T)
        n_train = self.X.shape[0]
        out = np.empty(X.shape[0])
        for i in range(X.shape[0]):
            order = np.lexsort((np.arange(n_train), d2[i]))
            out[i] = self.y[order[:self.k]].mean()
        return out

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba1(X) >= 0.5).astype(np.int64)

    def to_dict(self):
        return {"k": self.k, "p": self.p, "X": self.X.tolist(), "y": self.y.tolist()}

    @staticmethod
    def from_dict(d):
        model = KnnModel(d["k"], d["p"])
        model.X = np.asarray(d["X"], dtype=np.float64)
        model.y = np.asarray(d["y"], dtype=np.int64)
        return model
