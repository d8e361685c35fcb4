"""Gaussian naive Bayes with variance smoothing."""

from __future__ import annotations

import numpy as np


class GaussianNbModel:
    """Per-class, per-feature Gaussian likelihoods with variance smoothing
    epsilon = var_smoothing * max feature variance."""

    def __init__(self, var_smoothing=1e-9):
        self.var_smoothing = var_smoothing
        self.priors = None
        self.means = None
        self.variances = None

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        eps = self.var_smoothing * float(X.var(axis=0).max())
        self.priors = np.array([np.mean(y == c) for c in (0, 1)])
        self.means = np.vstack([X[y == c].mean(axis=0) for c in (0, 1)])
        self.variances = np.vstack([X[y == c].var(axis=0) for c in (0, 1)]) + eps
        return self

    def _joint_log_likelihood(self, X):
        X = np.asarray(X, dtype=np.float64)
        jll = np.empty((X.shape[0], 2))
        for c in (0, 1):
            diff = X - self.means[c]
            jll[:, c] = (np.log(self.priors[c])
                         - 0.5 * np.sum(np.log(2.0 * np.pi * self.variances[c]))
                         - 0.5 * np.sum(diff ** 2 / self.variances[c], axis=1))
        return jll

    def predict_proba(self, X) -> np.ndarray:
        jll = self._joint_log_likelihood(X)
        shifted = jll - jll.max(axis=1, keepdims=True)
        p = np.exp(shifted)
        return p / p.sum(axis=1, keepdims=True)

    def predict_proba1(self, X) -> np.ndarray:
        return self.predict_proba(X)[:, 1]

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba1(X) >= 0.5).astype(np.int64)

    def to_dict(self):
        return {"var_smoothing": self.var_smoothing, "priors": self.priors.tolist(),
                "means": self.means.tolist(), "variances": self.variances.tolist()}

    @staticmethod
    def from_dict(d):
        model = GaussianNbModel(d["var_smoothing"])
        model.priors = np.asarray(d["priors"], dtype=np.float64)
        model.means = np.asarray(d["means"], dtype=np.float64)
        model.variances = np.asarray(d["variances"], dtype=np.float64)
        return model
