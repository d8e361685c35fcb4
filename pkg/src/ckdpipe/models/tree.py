"""Shared decision-tree engine.

One vectorized threshold scan serves four criteria: gini / entropy for
classification trees, Friedman's MSE improvement for gradient-boosting
regression trees, and the second-order gain for the regularized booster.
Tie rule everywhere: among equal-quality splits, lowest feature index wins,
then lowest threshold.  Thresholds are midpoints between consecutive distinct
values; rows with x <= threshold go left.
"""

from __future__ import annotations

import numpy as np

from ..errors import ArgumentError


def gini(p) -> float:
    """Gini impurity 1 - sum(p^2) of a class-probability vector."""
    p = np.asarray(p, dtype=np.float64)
    if (p < 0).any() or abs(p.sum() - 1.0) > 1e-9:
        raise ArgumentError("probabilities must be non-negative and sum to 1")
    return float(1.0 - np.sum(p ** 2))


def entropy(p) -> float:
    """Shannon entropy in bits, with 0*log(0) taken as 0."""
    p = np.asarray(p, dtype=np.float64)
    if (p < 0).any() or abs(p.sum() - 1.0) > 1e-9:
        raise ArgumentError("probabilities must be non-negative and sum to 1")
    nz = p[p > 0]
    return float(-np.sum(nz * np.log2(nz)))


def _impurity_vec(p1: np.ndarray, criterion: str) -> np.ndarray:
    p0 = 1.0 - p1
    if criterion == "gini":
        return 1.0 - p1 ** 2 - p0 ** 2
    h = np.zeros_like(p1)
    for q in (p1, p0):
        nz = q > 0
        h[nz] -= q[nz] * np.log2(q[nz])
    return h


class Node:
    __slots__ = ("feature", "threshold", "left", "right", "value", "stats", "leaf_id")

    def __init__(self):
        self.feature = -1
        self.threshold = 0.0
        self.left = None
        self.right = None
        self.value = 0.0
        self.stats = None  # classification: (w0, w1); regression: (sum_w, sum_t)
        self.leaf_id = -1

    @property
    def is_leaf(self):
        return self.left is None

    def to_dict(self):
        if self.is_leaf:
            return {"value": self.value,
                    "stats": None if self.stats is None else list(self.stats)}
        return {"feature": int(self.feature), "threshold": self.threshold,
                "left": self.left.to_dict(), "right": self.right.to_dict()}

    @staticmethod
    def from_dict(d):
        node = Node()
        if "feature" in d:
            node.feature = d["feature"]
            node.threshold = d["threshold"]
            node.left = Node.from_dict(d["left"])
            node.right = Node.from_dict(d["right"])
        else:
            node.value = d["value"]
            node.stats = None if d["stats"] is None else tuple(d["stats"])
        return node


def _route(node: Node, X: np.ndarray, idx: np.ndarray, out: np.ndarray, what: str):
    if node.is_leaf:
        out[idx] = node.leaf_id if what == "leaf" else node.value
        return
    go_left = X[idx, node.feature] <= node.threshold
    _route(node.left, X, idx[go_left], out, what)
    _route(node.right, X, idx[~go_left], out, what)


def _scan_classification(x, y, w, criterion):
    order = np.argsort(x, kind="stable")
    xs = x[order]
    cw = np.cumsum(w[order])
    cwy = np.cumsum((w * y)[order])
    cut = np.flatnonzero(xs[1:] > xs[:-1])
    if cut.size == 0:
        return None
    W, WY = cw[-1], cwy[-1]
    wl, wyl = cw[cut], cwy[cut]
    wr, wyr = W - wl, WY - wyl
    score = (wl * _impurity_vec(wyl / wl, criterion)
             + wr * _impurity_vec(wyr / wr, criterion)) / W
    pos = int(np.argmin(score))
    thr = 0.5 * (xs[cut[pos]] + xs[cut[pos] + 1])
    return float(score[pos]), thr


def _scan_friedman(x, t, w):
    order = np.argsort(x, kind="stable")
    xs = x[order]
    cw = np.cumsum(w[order])
    cwt = np.cumsum((w * t)[order])
    cut = np.flatnonzero(xs[1:] > xs[:-1])
    if cut.size == 0:
        return None
    W, T = cw[-1], cwt[-1]
    wl, tl = cw[cut], cwt[cut]
    wr, tr = W - wl, T - tl
    diff = tl / wl - tr / wr
    improvement = wl * wr / (wl + wr) * diff ** 2
    pos = int(np.argmax(improvement))
    if improvement[pos] <= 0.0:
        return None
    thr = 0.5 * (xs[cut[pos]] + xs[cut[pos] + 1])
    return -float(improvement[pos]), thr


def _scan_second_order(x, g, h, lam):
    order = np.argsort(x, kind="stable")
    xs = x[order]
    cg = np.cumsum(g[order])
    ch = np.cumsum(h[order])
    cut = np.flatnonzero(xs[1:] > xs[:-1])
    if cut.size == 0:
        return None
    G, H = cg[-1], ch[-1]
    gl, hl = cg[cut], ch[cut]
    gr, hr = G - gl, H - hl
    gain = 0.5 * (gl ** 2 / (hl + lam) + gr ** 2 / (hr + lam) - G ** 2 / (H + lam))
    pos = int(np.argmax(gain))
    if gain[pos] <= 0.0:
        return None
    thr = 0.5 * (xs[cut[pos]] + xs[cut[pos] + 1])
    return -float(gain[pos]), thr


class ClassificationTree:
    """Binary CART grown to purity unless depth-limited.

    criterion: "gini" or "entropy".  max_features subsamples candidate
    features per node using the supplied generator (random-forest mode);
    if none of the sampled features admits a split, all features are scanned
    before declaring a leaf.
    """

    def __init__(self, criterion="gini", max_depth=None, max_features=None, rng=None):
        self.criterion = criterion
        self.max_depth = max_depth
        self.max_features = max_features
        self.rng = rng
        self.root: Node | None = None
        self.n_features = 0
        self.importances_: np.ndarray | None = None

    def fit(self, X, y, sample_weight=None):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        n, m = X.shape
        w = np.ones(n) if sample_weight is None else np.asarray(sample_weight, dtype=np.float64)
        self.n_features = m
        self._imp = np.zeros(m)
        self._w_root = w.sum()
        self.root = self._build(X, y, w, np.arange(n), 0)
        total = self._imp.sum()
        self.importances_ = self._imp / total if total > 0 else np.zeros(m)
        del self._imp
        return self

    def _candidates(self, m):
        if self.max_features is None or self.max_features >= m:
            return np.arange(m)
        return np.sort(self.rng.choice(m, size=self.max_features, replace=False))

    def _best(self, X, y, w, idx, features):
        best = None
        for j in features:
            res = _scan_classification(X[idx, j], y[idx], w[idx], self.criterion)
            if res is None:
                continue
            score, thr = res
            if best is None or score < best[0] - 1e-15:
                best = (score, int(j), thr)
        return best

    def _build(self, X, y, w, idx, depth):
        node = Node()
        w_node = w[idx]
        W = w_node.sum()
        p1 = float((w_node * y[idx]).sum() / W)
        node.value = p1
        node.stats = (float(W * (1 - p1)), float(W * p1))
        impurity = _impurity_vec(np.array([p1]), self.criterion)[0]
        if impurity <= 0.0 or (self.max_depth is not None and depth >= self.max_depth):
            return node
        best = self._best(X, y, w, idx, self._candidates(X.shape[1]))
        if best is None and self.max_features is not None:
            best = self._best(X, y, w, idx, np.arange(X.shape[1]))
        if best is None:
            return node
        score, j, thr = best
        node.feature, node.threshold = j, thr
        self._imp[j] += W * (impurity - score) / self._w_root
        go_left = X[idx, j] <= thr
        node.left = self._build(X, y, w, idx[go_left], depth + 1)
        node.right = self._build(X, y, w, idx[~go_left], depth + 1)
        return node

    def predict_proba1(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        out = np.empty(X.shape[0])
        _route(self.root, X, np.arange(X.shape[0]), out, "value")
        return out

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba1(X) >= 0.5).astype(np.int64)

    def leaf_stats(self, X) -> np.ndarray:
        """Weighted (w0, w1) counts of the leaf each row lands in."""
        X = np.asarray(X, dtype=np.float64)
        ids = self.apply(X)
        table = {}
        self._collect_leaves(self.root, table)
        return np.array([table[i] for i in ids])

    def apply(self, X) -> np.ndarray:
        self._assign_leaf_ids()
        X = np.asarray(X, dtype=np.float64)
        out = np.empty(X.shape[0])
        _route(self.root, X, np.arange(X.shape[0]), out, "leaf")
        return out.astype(np.int64)

    def _assign_leaf_ids(self):
        counter = [0]

        def walk(node):
            if node.is_leaf:
                node.leaf_id = counter[0]
                counter[0] += 1
            else:
                walk(node.left)
                walk(node.right)

        walk(self.root)

    def _collect_leaves(self, node, table):
        if node.is_leaf:
            table[node.leaf_id] = node.stats
        else:
            self._collect_leaves(node.left, table)
            self._collect_leaves(node.right, table)

    def to_dict(self):
        return {"criterion": self.criterion, "max_depth": self.max_depth,
                "n_features": self.n_features, "root": self.root.to_dict(),
                "importances": list(map(float, self.importances_))}

    @staticmethod
    def from_dict(d):
        tree = ClassificationTree(d["criterion"], d["max_depth"])
        tree.n_features = d["n_features"]
        tree.root = Node.from_dict(d["root"])
        tree.importances_ = np.asarray(d["importances"], dtype=np.float64)
        return tree


class RegressionTree:
    """Depth-limited regression tree for boosting.

    mode "friedman": targets are residuals, splits maximize Friedman's MSE
    improvement, leaves start at the weighted mean residual (the booster then
    overwrites leaf values via set_leaf_values).
    mode "second_order": targets are (gradient, hessian) pairs, splits maximize
    the regularized gain and leaves take -G/(H+lam).
    """

    def __init__(self, max_depth=3, mode="friedman", lam=1.0):
        self.max_depth = max_depth
        self.mode = mode
        self.lam = lam
        self.root: Node | None = None
        self.n_features = 0
        self.importances_: np.ndarray | None = None

    def fit(self, X, t, h=None, sample_weight=None):
        X = np.asarray(X, dtype=np.float64)
        t = np.asarray(t, dtype=np.float64)
        n, m = X.shape
        w = np.ones(n) if sample_weight is None else np.asarray(sample_weight, dtype=np.float64)
        self.n_features = m
        self._imp = np.zeros(m)
        if self.mode == "second_order":
            if h is None:
                raise ArgumentError("second_order mode needs hessians")
            self.root = self._build(X, t, np.asarray(h, dtype=np.float64), w, np.arange(n), 0)
        else:
            self.root = self._build(X, t, None, w, np.arange(n), 0)
        total = self._imp.sum()
        self.importances_ = self._imp / total if total > 0 else np.zeros(m)
        del self._imp
        return self

    def _build(self, X, t, h, w, idx, depth):
        node = Node()
        if self.mode == "second_order":
            G, H = t[idx].sum(), h[idx].sum()
            node.value = float(-G / (H + self.lam))
            node.stats = (float(G), float(H))
        else:
            W = w[idx].sum()
            node.value = float((w[idx] * t[idx]).sum() / W)
            node.stats = (float(W), float((w[idx] * t[idx]).sum()))
        if self.max_depth is not None and depth >= self.max_depth:
            return node
        best = None
        for j in range(X.shape[1]):
            if self.mode == "second_order":
                res = _scan_second_order(X[idx, j], t[idx], h[idx], self.lam)
            else:
                res = _scan_friedman(X[idx, j], t[idx], w[idx])
            if res is None:
                continue
            score, thr = res
            if best is None or score < best[0] - 1e-15:
                best = (score, j, thr)
        if best is None:
            return node
        score, j, thr = best
        node.feature, node.threshold = j, thr
        self._imp[j] += -score  # score is the negated improvement / gain
        go_left = X[idx, j] <= thr
        node.left = self._build(X, t, h, w, idx[go_left], depth + 1)
        node.right = self._build(X, t, h, w, idx[~go_left], depth + 1)
        return node

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        out = np.empty(X.shape[0])
        _route(self.root, X, np.arange(X.shape[0]), out, "value")
        return out

    def apply(self, X) -> np.ndarray:
        self._assign_leaf_ids()
        X = np.asarray(X, dtype=np.float64)
        out = np.empty(X.shape[0])
        _route(self.root, X, np.arange(X.shape[0]), out, "leaf")
        return out.astype(np.int64)

    def _assign_leaf_ids(self):
        counter = [0]

        def walk(node):
            if node.is_leaf:
                node.leaf_id = counter[0]
                counter[0] += 1
            else:
                walk(node.left)
                walk(node.right)

        walk(self.root)

    def set_leaf_values(self, values: dict):
        self._assign_leaf_ids()

        def walk(node):
            if node.is_leaf:
                if node.leaf_id in values:
                    node.value = float(values[node.leaf_id])
            else:
                walk(node.left)
                walk(node.right)

        walk(self.root)

    def to_dict(self):
        return {"max_depth": self.max_depth, "mode": self.mode, "lam": self.lam,
                "n_features": self.n_features, "root": self.root.to_dict(),
                "importances": list(map(float, self.importances_))}

    @staticmethod
    def from_dict(d):
        tree = RegressionTree(d["max_depth"], d["mode"], d["lam"])
        tree.n_features = d["n_features"]
        tree.root = Node.from_dict(d["root"])
        tree.importances_ = np.asarray(d["importances"], dtype=np.float64)
        return tree
