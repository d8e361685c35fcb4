"""Soft-margin RBF-kernel SVM trained by sequential minimal optimization.

Dual problem: minimize 1/2 a'Qa - e'a subject to 0 <= a <= C, y'a = 0 with
Q_ij = y_i y_j K(x_i, x_j).  Working pairs are the maximal-KKT-violation pair;
optimization stops when the violation gap falls below tol.
"""

from __future__ import annotations

import numpy as np

from ..errors import ArgumentError

TAU = 1e-12


def rbf_gamma(n_features: int, variance: float) -> float:
    """Kernel width 1 / (n_features * variance); variance is the element
    variance of the training matrix."""
    if n_features < 1:
        raise ArgumentError("n_features must be >= 1")
    if variance <= 0:
        raise ArgumentError("variance must be positive")
    return 1.0 / (n_features * variance)


def rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    sq = (np.sum(A ** 2, axis=1)[:, None] + np.sum(B ** 2, axis=1)[None, :]
          - 2.0 * A @ B.T)
    return np.exp(-gamma * np.maximum(sq, 0.0))


class SmoSvm:
    def __init__(self, C=1.0, gamma=None, tol=1e-3, max_iter=200_000):
        self.C = C
        self.gamma = gamma  # None -> 1 / (m * element variance) at fit time
        self.tol = tol
        self.max_iter = max_iter
        self.alpha = None
        self.bias = 0.0
        self.support_X = None
        self.support_ay = None
        self.converged = True
        self.gamma_ = None

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        ypm = np.where(np.asarray(y) > 0, 1.0, -1.0)
        n = X.shape[0]
        self.gamma_ = self.gamma if self.gamma is not None else rbf_gamma(
            X.shape[1], float(X.var()))
        K = rbf_kernel(X, X, self.gamma_)
        Q = (ypm[:, None] * ypm[None, :]) * K
        alpha = np.zeros(n)
        grad = -np.ones(n)  # gradient of the dual objective at alpha = 0
        C = self.C

        self.converged = False
        for _ in range(self.max_iter):
            up = ((ypm > 0) & (alpha < C)) | ((ypm < 0) & (alpha > 0))
            low = ((ypm > 0) & (alpha > 0)) | ((ypm < 0) & (alpha < C))
            minus_yg = -ypm * grad
            i = int(np.flatnonzero(up)[np.argmax(minus_yg[up])])
            j = int(np.flatnonzero(low)[np.argmin(minus_yg[low])])
            if minus_yg[i] - minus_yg[j] <= self.tol:
                self.converged = True
                break
            quad = max(Q[i, i] + Q[j, j] - 2.0 * ypm[i] * ypm[j] * Q[i, j], TAU)
            old_i, old_j = alpha[i], alpha[j]
            if ypm[i] != ypm[j]:
                delta = (-grad[i] - grad[j]) / quad
                diff = old_i - old_j
                ai, aj = old_i + delta, old_j + delta
                if diff > 0 and aj < 0:
                    aj, ai = 0.0, diff
                elif diff <= 0 and ai < 0:
                    ai, aj = 0.0, -diff
                if diff > 0 and ai > C:
                    ai, aj = C, C - diff
                elif diff <= 0 and aj > C:
                    aj, ai = C, C + diff
            else:
                delta = (grad[i] - grad[j]) / quad
                total = old_i + old_j
                ai, aj = old_i - delta, old_j + delta
                if total > C:
                    if ai > C:
                        ai, aj = C, total - C
                    if aj > C:
                        aj, ai = C, total - C
                else:
                    if aj < 0:
                        aj, ai = 0.0, total
                    if ai < 0:
                        ai, aj = 0.0, total
            alpha[i], alpha[j] = ai, aj
            grad += Q[:, i] * (ai - old_i) + Q[:, j] * (aj - old_j)

        self.alpha = alpha
        # bias from free support vectors; fall back to the violation midpoint
        decision_wo_b = (alpha * ypm) @ K
        free = (alpha > 1e-8) & (alpha < C - 1e-8)
        if free.any():
            self.bias = float(np.mean(ypm[free] - decision_wo_b[free]))
        else:
            minus_yg = -ypm * grad
            up = ((ypm > 0) & (alpha < C)) | ((ypm < 0) & (alpha > 0))
            low = ((ypm > 0) & (alpha > 0)) | ((ypm < 0) & (alpha < C))
            hi = minus_yg[up].max() if up.any() else 0.0
            lo = minus_yg[low].min() if low.any() else 0.0
            self.bias = float((hi + lo) / 2.0)
        sv = alpha > 1e-12
        self.support_X = X[sv].copy()
        self.support_ay = (alpha * ypm)[sv].copy()
        self._train_ypm = ypm  # kept for KKT inspection in tests
        self._train_alpha = alpha
        return self

    def decision_function(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if self.support_X.shape[0] == 0:
            return np.full(X.shape[0], self.bias)
        K = rbf_kernel(X, self.support_X, self.gamma_)
        return K @ self.support_ay + self.bias

    def predict(self, X) -> np.ndarray:
        return (self.decision_function(X) >= 0.0).astype(np.int64)

    def to_dict(self):
        return {"C": self.C, "gamma": self.gamma_, "tol": self.tol,
                "bias": self.bias,
                "support_X": self.support_X.tolist(),
                "support_ay": self.support_ay.tolist(),
                "converged": self.converged}

    @staticmethod
    def from_dict(d):
        svm = SmoSvm(C=d["C"], gamma=d["gamma"], tol=d["tol"])
        svm.gamma_ = d["gamma"]
        svm.bias = d["bias"]
        svm.support_X = np.asarray(d["support_X"], dtype=np.float64)
        if svm.support_X.size == 0:
            svm.support_X = svm.support_X.reshape(0, 0)
        svm.support_ay = np.asarray(d["support_ay"], dtype=np.float64)
        svm.converged = d["converged"]
        return svm
