"""L2-regularized logistic regression fitted by a quasi-Newton method."""

from __future__ import annotations

import numpy as np
from scipy.optimize import minimize

from ..errors import ArgumentError


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class LogisticModel:
    """Minimizes 0.5 w'w + C * sum log(1 + exp(-y (Xw + b))); the intercept is
    unpenalized.  Non-convergence within max_iter sets a warning flag instead
    of raising."""

    def __init__(self, C=1.0, max_iter=100, tol=1e-6):
        self.C = C
        self.max_iter = max_iter
        self.tol = tol
        self.coef = None
        self.intercept = 0.0
        self.converged = True

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        ypm = np.where(np.asarray(y) > 0, 1.0, -1.0)
        n, m = X.shape

        def objective(theta):
            w, b = theta[:m], theta[m]
            z = ypm * (X @ w + b)
            # log(1 + exp(-z)) computed stably
            loss = np.logaddexp(0.0, -z).sum()
            p = _sigmoid(-z)  # d loss / d z = -p
            grad_z = -ypm * p
            grad_w = X.T @ grad_z * self.C + w
            grad_b = grad_z.sum() * self.C
            return 0.5 * w @ w + self.C * loss, np.append(grad_w, grad_b)

        res = minimize(objective, np.zeros(m + 1), jac=True, method="L-BFGS-B",
                       options={"maxiter": self.max_iter, "gtol": self.tol,
                                "ftol": 1e-14})
        self.coef = res.x[:m]
        self.intercept = float(res.x[m])
        self.converged = bool(res.success) or res.nit < self.max_iter
        return self

    def decision_function(self, X) -> np.ndarray:
        return np.asarray(X, dtype=np.float64) @ self.coef + self.intercept

    def predict_proba1(self, X) -> np.ndarray:
        return _sigmoid(self.decision_function(X))

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba1(X) >= 0.5).astype(np.int64)

    def to_dict(self):
        return {"C": self.C, "max_iter": self.max_iter, "tol": self.tol,
                "coef": self.coef.tolist(), "intercept": self.intercept,
                "converged": self.converged}

    @staticmethod
    def from_dict(d):
        model = LogisticModel(d["C"], d["max_iter"], d["tol"])
        model.coef = np.asarray(d["coef"], dtype=np.float64)
        model.intercept = d["intercept"]
        model.converged = d["converged"]
        return model
