"""Fit-on-train / apply-anywhere pipeline stages.

Every ``*_fit`` consumes the training partition only; the returned parameter
object is immutable after fit and records provenance.  ``apply`` functions are
pure.  Column matching is by name, so a projected frame (fewer features) can
be pushed through parameters fitted on the full feature set.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .dataset import ColumnSpec, Frame
from .errors import ArgumentError, ContractError, SchemaError, StateError

# indicator orientation for the kidney data: token encoded as 1 per column
INDICATOR_POSITIVE = {
    "rbc": "normal",
    "pc": "normal",
    "pcc": "present",
    "ba": "present",
    "htn": "yes",
    "dm": "yes",
    "cad": "yes",
    "pe": "yes",
    "ane": "yes",
    "appet": "poor",
}

PIPELINE_VERSION = "1"


@dataclass(frozen=True)
class EncoderMap:
    """Per categorical column: token -> {0,1}."""

    mapping: dict  # column name -> {token: 0 or 1}
    provenance: str = "train"

    def to_dict(self):
        return {"mapping": self.mapping, "provenance": self.provenance}

    @staticmethod
    def from_dict(d):
        return EncoderMap({c: {t: int(b) for t, b in m.items()}
                           for c, m in d["mapping"].items()}, d["provenance"])


@dataclass(frozen=True)
class MinMaxParams:
    """Per numeric column: training min and max."""

    bounds: dict  # column name -> (x_min, x_max)
    provenance: str = "train"

    def to_dict(self):
        return {"bounds": {c: list(b) for c, b in self.bounds.items()},
                "provenance": self.provenance}

    @staticmethod
    def from_dict(d):
        return MinMaxParams({c: (float(b[0]), float(b[1]))
                             for c, b in d["bounds"].items()}, d["provenance"])


@dataclass(frozen=True)
class ImputerModel:
    """Reference copy of the prepared training matrix plus neighbor count."""

    columns: tuple
    matrix: np.ndarray  # float64 with NaN at masked cells
    k: int
    weighting: str = "uniform"
    provenance: str = "train"

    def to_dict(self):
        grid = [[None if np.isnan(v) else float(v) for v in row] for row in self.matrix]
        return {"columns": list(self.columns), "matrix": grid, "k": self.k,
                "weighting": self.weighting, "provenance": self.provenance}

    @staticmethod
    def from_dict(d):
        grid = np.array([[np.nan if v is None else float(v) for v in row]
                         for row in d["matrix"]], dtype=np.float64)
        if grid.size == 0:
            grid = grid.reshape(0, len(d["columns"]))
        return ImputerModel(tuple(d["columns"]), grid, int(d["k"]),
                            d["weighting"], d["provenance"])


@dataclass(frozen=True)
class StandardParams:
    """Per column: training mean u and population standard deviation s."""

    moments: dict  # column name -> (u, s)
    provenance: str = "train"

    def to_dict(self):
        return {"moments": {c: list(m) for c, m in self.moments.items()},
                "provenance": self.provenance}

    @staticmethod
    def from_dict(d):
        return StandardParams({c: (float(m[0]), float(m[1]))
                               for c, m in d["moments"].items()}, d["provenance"])


# -- one-hot (single indicator per two-category column) ----------------------


def onehot_fit(train: Frame) -> EncoderMap:
    mapping = {}
    for spec in train.schema:
        if spec.name == train.label or spec.kind != "categorical":
            continue
        j = train.col_index(spec.name)
        observed = train.values[~train.missing[:, j], j].astype(int)
        if len(np.unique(observed)) > 2:
            raise SchemaError(f"column {spec.name!r} has more than two observed categories")
        if len(spec.categories) > 2:
            raise SchemaError(f"column {spec.name!r} declares more than two categories")
        if spec.name in INDICATOR_POSITIVE:
            pos = INDICATOR_POSITIVE[spec.name]
            if pos not in spec.categories:
                raise SchemaError(f"column {spec.name!r} lacks expected token {pos!r}")
            mapping[spec.name] = {t: (1 if t == pos else 0) for t in spec.categories}
        else:
            mapping[spec.name] = {t: i for i, t in enumerate(spec.categories)}
    return EncoderMap(mapping)


def onehot_apply(frame: Frame, enc: EncoderMap) -> Frame:
    specs = list(frame.schema)
    values = frame.values.copy()
    for j, spec in enumerate(specs):
        if spec.name == frame.label or spec.kind != "categorical":
            continue
        if spec.name not in enc.mapping:
            raise SchemaError(f"no encoding fitted for column {spec.name!r}")
        table = enc.mapping[spec.name]
        col = np.full(frame.n_rows, np.nan)
        for i in range(frame.n_rows):
            if frame.missing[i, j]:
                continue
            token = spec.categories[int(values[i, j])]
            if token not in table:
                raise SchemaError(f"column {spec.name!r}: unseen category {token!r}")
            col[i] = float(table[token])
        values[:, j] = col
        specs[j] = ColumnSpec(spec.name, "numeric", (), spec.unit)
    return Frame(tuple(specs), values, frame.missing.copy(), frame.label)


# -- min-max rescaling --------------------------------------------------------


def minmax_fit(train: Frame) -> MinMaxParams:
    bounds = {}
    for name in train.feature_names:
        spec = train.column(name)
        if spec.kind != "numeric":
            raise SchemaError(f"minmax_fit on categorical column {name!r}; encode first")
        j = train.col_index(name)
        obs = train.values[~train.missing[:, j], j]
        if obs.size == 0:
            bounds[name] = (0.0, 0.0)
        else:
            bounds[name] = (float(obs.min()), float(obs.max()))
    return MinMaxParams(bounds)


def minmax_apply(frame: Frame, params: MinMaxParams) -> Frame:
    values = frame.values.copy()
    for name in frame.feature_names:
        if name not in params.bounds:
            raise SchemaError(f"column {name!r} absent from min-max parameters")
        lo, hi = params.bounds[name]
        j = frame.col_index(name)
        obs = ~frame.missing[:, j]
        if hi > lo:
            values[obs, j] = (values[obs, j] - lo) / (hi - lo)
        else:
            values[obs, j] = 0.0
    return Frame(frame.schema, values, frame.missing.copy(), frame.label)


# -- KNN imputation -----------------------------------------------------------


def nan_distances(queries: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """Pairwise Euclidean distances over coordinates observed in both rows,
    rescaled by m / (shared observed count).  Pairs with no shared coordinate
    get +inf."""
    m = queries.shape[1]
    qa = np.nan_to_num(queries)
    ra = np.nan_to_num(reference)
    qm = (~np.isnan(queries)).astype(np.float64)
    rm = (~np.isnan(reference)).astype(np.float64)
    shared = qm @ rm.T
    sq = (qa ** 2 * qm) @ rm.T + qm @ (ra ** 2 * rm).T - 2.0 * (qa * qm) @ (ra * rm).T
    sq = np.maximum(sq, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = np.where(shared > 0, m * sq / shared, np.inf)
    return np.sqrt(scaled)


def knn_impute_fit(train: Frame, k: int) -> ImputerModel:
    if k < 1:
        raise ArgumentError("imputer neighbor count must be >= 1")
    if k > train.n_rows:
        raise ArgumentError(f"k={k} exceeds training row count {train.n_rows}")
    return ImputerModel(tuple(train.feature_names), train.feature_matrix(), k)


def knn_impute_apply(frame: Frame, model: ImputerModel) -> Frame:
    """Fill every masked feature cell with the unweighted mean of that column
    over the k nearest training rows (NaN-aware distance); fall back to the
    training column mean when no neighbor carries the value."""
    cols = [c for c in frame.feature_names]
    for c in cols:
        if c not in model.columns:
            raise SchemaError(f"column {c!r} absent from imputer reference")
    ref_idx = [model.columns.index(c) for c in cols]
    ref = model.matrix[:, ref_idx]
    col_means = np.array([
        np.nanmean(ref[:, j]) if np.any(~np.isnan(ref[:, j])) else 0.0
        for j in range(ref.shape[1])
    ])

    values = frame.values.copy()
    missing = frame.missing.copy()
    fcols = [frame.col_index(c) for c in cols]
    need = [i for i in range(frame.n_rows) if missing[i, fcols].any()]
    if not need:
        return Frame(frame.schema, values, np.zeros_like(missing), frame.label)

    sub = frame.values[np.ix_(need, fcols)].copy()
    sub[frame.missing[np.ix_(need, fcols)]] = np.nan
    dist = nan_distances(sub, ref)
    k = min(model.k, ref.shape[0])
    for qi, i in enumerate(need):
        order = np.lexsort((np.arange(ref.shape[0]), dist[qi]))
        neighbors = order[:k]
        usable = neighbors[np.isfinite(dist[qi, neighbors])]
        for jj, j in enumerate(fcols):
            if not missing[i, j]:
                continue
            if usable.size == 0:
                values[i, j] = col_means[jj]
            else:
                donor = ref[usable, jj]
                donor = donor[~np.isnan(donor)]
                values[i, j] = donor.mean() if donor.size else col_means[jj]
            missing[i, j] = False
    return Frame(frame.schema, values, missing, frame.label)


# -- standardization ----------------------------------------------------------


def standard_fit(train: Frame) -> StandardParams:
    moments = {}
    for name in train.feature_names:
        j = train.col_index(name)
        if train.missing[:, j].any():
            raise ContractError(f"column {name!r} still has masked cells; impute first")
        col = train.values[:, j]
        moments[name] = (float(col.mean()), float(col.std()))  # population stddev
    return StandardParams(moments)


def standard_apply(frame: Frame, params: StandardParams) -> Frame:
    values = frame.values.copy()
    for name in frame.feature_names:
        if name not in params.moments:
            raise SchemaError(f"column {name!r} absent from standardization parameters")
        j = frame.col_index(name)
        if frame.missing[:, j].any():
            raise ContractError(f"column {name!r} has masked cells at standardization")
        u, s = params.moments[name]
        values[:, j] = (values[:, j] - u) / s if s > 0 else 0.0
    return Frame(frame.schema, values, frame.missing.copy(), frame.label)


# -- composed pipeline ----------------------------------------------------------

TRAIN_STAGE_ORDER = ("encode", "minmax", "impute", "standardize")
TEST_STAGE_ORDER = ("project", "encode", "minmax", "impute", "standardize")


@dataclass
class FittedPipeline:
    """Ordered fitted stages; application order equals fit order."""

    stages: list = field(default_factory=list)  # (name, params_object_or_dict)
    fitted: bool = False

    def to_json(self) -> str:
        doc = {"version": PIPELINE_VERSION, "stages": []}
        for name, params in self.stages:
            if name == "project":
                doc["stages"].append({"stage": name, "params": {"features": list(params)},
                                      "provenance": "train"})
            else:
                doc["stages"].append({"stage": name, "params": params.to_dict(),
                                      "provenance": "train"})
        return json.dumps(doc, indent=2, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "FittedPipeline":
        doc = json.loads(text)
        if doc.get("version") != PIPELINE_VERSION:
            raise StateError(f"unsupported pipeline version {doc.get('version')!r}")
        loaders = {"encode": EncoderMap.from_dict, "minmax": MinMaxParams.from_dict,
                   "impute": ImputerModel.from_dict, "standardize": StandardParams.from_dict}
        pipe = FittedPipeline()
        for entry in doc["stages"]:
            name = entry["stage"]
            if name == "project":
                pipe.stages.append((name, tuple(entry["params"]["features"])))
            else:
                pipe.stages.append((name, loaders[name](entry["params"])))
        pipe.fitted = True
        return pipe


def pipeline_fit(train: Frame, stages, impute_k: int = 5,
                 project_features=None) -> FittedPipeline:
    """Fit the named stages in order, each on the train frame as transformed by
    the stages before it."""
    pipe = FittedPipeline()
    current = train
    for name in stages:
        if name == "project":
            if project_features is None:
                raise ArgumentError("project stage requires project_features")
            params = tuple(project_features)
            current = current.select_columns(params)
        elif name == "encode":
            params = onehot_fit(current)
            current = onehot_apply(current, params)
        elif name == "minmax":
            params = minmax_fit(current)
            current = minmax_apply(current, params)
        elif name == "impute":
            params = knn_impute_fit(current, impute_k)
            current = knn_impute_apply(current, params)
        elif name == "standardize":
            params = standard_fit(current)
            current = standard_apply(current, params)
        else:
            raise ArgumentError(f"unknown stage {name!r}")
        pipe.stages.append((name, params))
    pipe.fitted = True
    return pipe


def pipeline_apply(frame: Frame, pipe: FittedPipeline) -> Frame:
    if not pipe.fitted:
        raise StateError("pipeline applied before fitting")
    current = frame
    for name, params in pipe.stages:
        if name == "project":
            current = current.select_columns(params)
        elif name == "encode":
            current = onehot_apply(current, params)
        elif name == "minmax":
            current = minmax_apply(current, params)
        elif name == "impute":
            current = knn_impute_apply(current, params)
        elif name == "standardize":
            current = standard_apply(current, params)
    return current
