"""Nine classifiers behind one train / predict / score contract.

``train`` dispatches a ModelSpec to the in-repo implementation and wraps the
result in a TrainedModel that remembers the feature list it was fitted on.
``score`` is a monotone confidence for class 1: a probability where the
algorithm defines one, a margin (decision value) otherwise.  ``predict``
thresholds the score at 0.5 for probabilistic models and at 0 for margin
models, with ties going to class 1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..errors import ArgumentError, SchemaError
from .boosting import (AdaBoostSammeR, GradientBoostingModel,
                       SecondOrderBoostModel, second_order_leaf_check)
from .forest import RandomForestModel
from .linear import LogisticModel
from .naive_bayes import GaussianNbModel
from .neighbors import KnnModel
from .svm import SmoSvm, rbf_gamma
from .tree import ClassificationTree, RegressionTree, entropy, gini

MODEL_VERSION = "1"

ALGORITHMS = ("svm_rbf", "gaussian_nb", "dtree", "rforest", "logistic",
              "knn", "gboost", "adaboost", "xgb_like")

# published hyperparameters plus this build's choices for everything left open
DEFAULT_HYPERPARAMS = {
    "svm_rbf": {"C": 1.0, "gamma": None, "tol": 1e-3},
    "gaussian_nb": {"var_smoothing": 1e-9},
    "dtree": {"criterion": "gini", "max_depth": None},
    "rforest": {"n_trees": 1000},
    "logistic": {"C": 1.0, "max_iter": 100, "tol": 1e-6},
    "knn": {"k": 25, "p": 2},
    "gboost": {"n_stages": 1000, "learning_rate": 0.01, "max_depth": 3},
    "adaboost": {"n_rounds": 50, "learning_rate": 1.0},
    "xgb_like": {"n_rounds": 1000, "learning_rate": 0.3, "lam": 1.0, "max_depth": 3},
}

# models whose score is a probability (threshold 0.5); the rest are margins
PROBABILISTIC = {"gaussian_nb", "dtree", "rforest", "logistic", "knn",
                 "gboost", "xgb_like"}


@dataclass(frozen=True)
class ModelSpec:
    algorithm: str
    hyperparams: dict = field(default_factory=dict)
    seed: int = 0

    def resolved(self) -> dict:
        if self.algorithm not in ALGORITHMS:
            raise ArgumentError(f"unknown algorithm {self.algorithm!r}")
        params = dict(DEFAULT_HYPERPARAMS[self.algorithm])
        for key, value in self.hyperparams.items():
            if key not in params:
                raise ArgumentError(f"{self.algorithm}: unknown hyperparameter {key!r}")
            params[key] = value
        return params


@dataclass
class TrainedModel:
    algorithm: str
    feature_names: tuple
    inner: object
    hyperparams: dict
    seed: int
    warning: str | None = None

    def _check(self, X, feature_names=None):
        X = np.asarray(X, dtype=np.float64)
        if feature_names is not None and tuple(feature_names) != self.feature_names:
            raise SchemaError(
                f"feature mismatch: trained on {list(self.feature_names)}, "
                f"given {list(feature_names)}")
        if X.shape[1] != len(self.feature_names):
            raise SchemaError(
                f"expected {len(self.feature_names)} features, got {X.shape[1]}")
        return X

    def predict(self, X, feature_names=None) -> np.ndarray:
        X = self._check(X, feature_names)
        return self.inner.predict(X)

    def score(self, X, feature_names=None) -> np.ndarray:
        X = self._check(X, feature_names)
        if self.algorithm in PROBABILISTIC:
            return self.inner.predict_proba1(X)
        return self.inner.decision_function(X)

    def to_json(self) -> str:
        return json.dumps({"version": MODEL_VERSION, "algorithm": self.algorithm,
                           "features": list(self.feature_names),
                           "hyperparams": {k: v for k, v in self.hyperparams.items()},
                           "seed": self.seed, "warning": self.warning,
                           "state": self.inner.to_dict()},
                          sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "TrainedModel":
        doc = json.loads(text)
        if doc.get("version") != MODEL_VERSION:
            raise ArgumentError(f"unsupported model version {doc.get('version')!r}")
        loaders = {
            "svm_rbf": SmoSvm.from_dict,
            "gaussian_nb": GaussianNbModel.from_dict,
            "dtree": ClassificationTree.from_dict,
            "rforest": RandomForestModel.from_dict,
            "logistic": LogisticModel.from_dict,
            "knn": KnnModel.from_dict,
            "gboost": GradientBoostingModel.from_dict,
            "adaboost": AdaBoostSammeR.from_dict,
            "xgb_like": SecondOrderBoostModel.from_dict,
        }
        inner = loaders[doc["algorithm"]](doc["state"])
        return TrainedModel(doc["algorithm"], tuple(doc["features"]), inner,
                            doc["hyperparams"], doc["seed"], doc["warning"])


def train(spec: ModelSpec, X, y, feature_names=None) -> TrainedModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if np.isnan(X).any():
        raise ArgumentError("training matrix contains missing values")
    if set(np.unique(y)) != {0, 1}:
        raise ArgumentError("labels must contain both classes 0 and 1")
    y = y.astype(np.int64)
    params = spec.resolved()
    names = tuple(feature_names) if feature_names is not None \
        else tuple(f"x{i}" for i in range(X.shape[1]))
    warning = None
    algo = spec.algorithm

    if algo == "svm_rbf":
        inner = SmoSvm(C=params["C"], gamma=params["gamma"], tol=params["tol"]).fit(X, y)
        if not inner.converged:
            warning = "smo did not reach tolerance within the iteration cap"
    elif algo == "gaussian_nb":
        inner = GaussianNbModel(params["var_smoothing"]).fit(X, y)
    elif algo == "dtree":
        inner = ClassificationTree(params["criterion"], params["max_depth"]).fit(X, y)
    elif algo == "rforest":
        inner = RandomForestModel(params["n_trees"], seed=spec.seed).fit(X, y)
    elif algo == "logistic":
        inner = LogisticModel(params["C"], params["max_iter"], params["tol"]).fit(X, y)
        if not inner.converged:
            warning = "quasi-Newton did not converge within max_iter"
    elif algo == "knn":
        inner = KnnModel(params["k"], params["p"]).fit(X, y)
    elif algo == "gboost":
        inner = GradientBoostingModel(params["n_stages"], params["learning_rate"],
                                      params["max_depth"]).fit(X, y)
    elif algo == "adaboost":
        inner = AdaBoostSammeR(params["n_rounds"], params["learning_rate"]).fit(X, y)
    elif algo == "xgb_like":
        inner = SecondOrderBoostModel(params["n_rounds"], params["learning_rate"],
                                      params["lam"], params["max_depth"]).fit(X, y)
    else:
        raise ArgumentError(f"unknown algorithm {algo!r}")
    return TrainedModel(algo, names, inner, params, spec.seed, warning)


__all__ = [
    "ALGORITHMS", "DEFAULT_HYPERPARAMS", "PROBABILISTIC", "ModelSpec",
    "TrainedModel", "train", "gini", "entropy", "rbf_gamma",
    "ClassificationTree", "RegressionTree", "RandomForestModel",
    "GradientBoostingModel", "AdaBoostSammeR", "SecondOrderBoostModel",
    "SmoSvm", "LogisticModel", "KnnModel", "GaussianNbModel",
    "second_order_leaf_check",
]
