"""Training-partition row surgery: density-based outlier removal and SMOTE.

Both operations expect a fully imputed frame and are only ever fed the train
member of a split; the test partition never reaches this module.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .dataset import Frame
from .errors import ArgumentError
from .seeding import child_rng

LRD_FLOOR = 1e-12


@dataclass(frozen=True)
class LofConfig:
    k: int = 20
    threshold: float = 1.5  # "auto" decision rule: flag score > threshold
    contamination: float | None = None  # alternative rule: flag top ceil(c*n) scores


@dataclass(frozen=True)
class SmoteConfig:
    k: int = 5
    seed: int = 0


def _pairwise_sq(X: np.ndarray) -> np.ndarray:
    sq = np.sum(X ** 2, axis=1)
    d = sq[:, None] + sq[None, :] - 2.0 * X @ X.T
    np.fill_diagonal(d, np.inf)  # a point is not its own neighbor
    return np.maximum(d, 0.0)


def lof_scores(matrix: np.ndarray, k: int) -> np.ndarray:
    """Local outlier factor per row: ratio of the mean local reachability
    density of the k nearest neighbors to the row's own.  Inliers score
    near 1; ties in neighbor distance break by row index."""
    X = np.asarray(matrix, dtype=np.float64)
    n = X.shape[0]
    if k < 1:
        raise ArgumentError("lof neighbor count must be >= 1")
    if k >= n:
        raise ArgumentError(f"lof requires k < n (k={k}, n={n})")
    if np.isnan(X).any():
        raise ArgumentError("lof input must be fully imputed")

    d2 = _pairwise_sq(X)
    order = np.argsort(d2, axis=1, kind="stable")
    neigh = order[:, :k]
    dist = np.sqrt(np.take_along_axis(d2, neigh, axis=1))
    kdist = dist[:, -1]

    reach = np.maximum(kdist[neigh], dist)
    lrd = 1.0 / np.maximum(reach.mean(axis=1), LRD_FLOOR)
    return lrd[neigh].mean(axis=1) / lrd


def remove_outliers(train: Frame, cfg: LofConfig) -> Frame:
    """Drop rows flagged by the LOF decision rule; survivors keep their order."""
    n = train.n_rows
    if n < cfg.k + 1:
        raise ArgumentError(f"need at least k+1={cfg.k + 1} rows, got {n}")
    X = train.feature_matrix()
    scores = lof_scores(X, cfg.k)
    if cfg.contamination is not None:
        if not (0.0 < cfg.contamination < 1.0):
            raise ArgumentError("contamination must be in (0,1)")
        n_flag = int(np.ceil(cfg.contamination * n))
        flagged = np.zeros(n, dtype=bool)
        flagged[np.lexsort((np.arange(n), -scores))[:n_flag]] = True
    else:
        flagged = scores > cfg.threshold
    keep = np.flatnonzero(~flagged)
    return train.take_rows(keep)


def smote(train: Frame, cfg: SmoteConfig) -> Frame:
    """Append synthetic minority rows x + delta * (neighbor - x) until the two
    classes balance.  Deterministic for equal seeds: the base row sequence and
    each synthetic row's draws come from seed-derived streams."""
    label_col = train.values[:, train.col_index(train.label)].astype(int)
    classes, counts = np.unique(label_col, return_counts=True)
    if len(classes) != 2:
        raise ArgumentError(f"smote requires exactly two classes, got {len(classes)}")
    X = train.feature_matrix()
    if np.isnan(X).any():
        raise ArgumentError("smote input must be fully imputed")

    minority_cls = int(classes[np.argmin(counts)])
    need = int(counts.max() - counts.min())
    if need == 0:
        return train.copy()
    min_idx = np.flatnonzero(label_col == minority_cls)
    n_min = len(min_idx)
    if n_min < 2:
        raise ArgumentError("smote needs at least two minority rows")
    k = cfg.k
    if n_min <= k:
        k = n_min - 1
        warnings.warn(f"smote neighbor count reduced to {k} (minority size {n_min})")

    Xm = X[min_idx]
    d2 = _pairwise_sq(Xm)
    nn = np.argsort(d2, axis=1, kind="stable")[:, :k]

    order = child_rng(cfg.seed, "smote").permutation(n_min)
    label_j = train.col_index(train.label)
    fcols = [train.col_index(c) for c in train.feature_names]
    label_value = train.values[min_idx[0], label_j]

    new_rows = np.empty((need, train.values.shape[1]))
    for j in range(need):
        rng = child_rng(cfg.seed, "smote", j)
        base_local = order[j % n_min]
        pick = nn[base_local, rng.integers(k)]
        delta = rng.uniform()
        synth = Xm[base_local] + delta * (Xm[pick] - Xm[base_local])
        row = np.empty(train.values.shape[1])
        row[fcols] = synth
        row[label_j] = label_value
        new_rows[j] = row

    values = np.vstack([train.values, new_rows])
    missing = np.vstack([train.missing, np.zeros((need, train.missing.shape[1]), dtype=bool)])
    return Frame(train.schema, values, missing, train.label)
