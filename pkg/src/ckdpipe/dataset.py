"""Tabular frames: parsing (ARFF subset / CSV), typo repair, dedup, splitting.

A :class:`Frame` stores every cell as a float64: numeric columns hold the
value itself, categorical columns hold the index into the column's category
list.  A parallel boolean mask marks missing cells; masked cells are NaN in
the value grid and must be ignored by every consumer.
"""

from __future__ import annotations

import csv as _csv
import io
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ArgumentError, ParseError, SchemaError
from .seeding import child_rng

MISSING_TOKEN = "?"

# columns that are really measurements even when a source file declares them
# nominal (sg/al/su) or fills them with stray tabs (pcv/wc/rc)
NUMERIC_COERCIONS = ("sg", "al", "su", "pcv", "wc", "rc")

# token-level repairs applied after whitespace stripping; overridable per load
DEFAULT_REPAIRS = {
    "ckd.": "ckd",
    "notckd.": "notckd",
    "no.": "no",
    "yes.": "yes",
    "nortmal": "normal",
    "abnornal": "abnormal",
}

LONG_NAMES = {
    "age": "Age",
    "bp": "Blood Pressure",
    "sg": "Specific Gravity",
    "al": "Albumin",
    "su": "Sugar",
    "rbc": "Red Blood Cells",
    "pc": "Pus Cell",
    "pcc": "Pus Cell Clumps",
    "ba": "Bacteria",
    "bgr": "Blood Glucose Random",
    "bu": "Blood Urea",
    "sc": "Serum Creatinine",
    "sod": "Sodium",
    "pot": "Potassium",
    "hemo": "Hemoglobin",
    "pcv": "Packed Cell Volume",
    "wc": "White Blood Cell Count",
    "rc": "Red Blood Cell Count",
    "htn": "Hypertension",
    "dm": "Diabetes Mellitus",
    "cad": "Coronary Artery Disease",
    "appet": "Appetite",
    "pe": "Pedal Edema",
    "ane": "Anemia",
    "class": "Class",
}


@dataclass(frozen=True)
class ColumnSpec:
    """One column: short name, numeric/categorical kind, allowed categories."""

    name: str
    kind: str  # "numeric" | "categorical"
    categories: tuple[str, ...] = ()
    unit: str = ""

    def __post_init__(self):
        if self.kind not in ("numeric", "categorical"):
            raise SchemaError(f"column {self.name}: unknown kind {self.kind!r}")
        if self.kind == "categorical" and not self.categories:
            raise SchemaError(f"column {self.name}: categorical without categories")


def _ckd_schema() -> tuple[ColumnSpec, ...]:
    """Canonical post-clean schema of the 24-feature kidney dataset."""
    num = "age bp sg al su bgr bu sc sod pot hemo pcv wc rc".split()
    cats = {
        "rbc": ("normal", "abnormal"),
        "pc": ("normal", "abnormal"),
        "pcc": ("present", "notpresent"),
        "ba": ("present", "notpresent"),
        "htn": ("yes", "no"),
        "dm": ("yes", "no"),
        "cad": ("yes", "no"),
        "appet": ("good", "poor"),
        "pe": ("yes", "no"),
        "ane": ("yes", "no"),
        "class": ("ckd", "notckd"),
    }
    order = ("age bp sg al su rbc pc pcc ba bgr bu sc sod pot hemo "
             "pcv wc rc htn dm cad appet pe ane class").split()
    specs = []
    for name in order:
        if name in num:
            specs.append(ColumnSpec(name, "numeric"))
        else:
            specs.append(ColumnSpec(name, "categorical", cats[name]))
    return tuple(specs)


CKD_SCHEMA = _ckd_schema()
POSITIVE_LABEL = "ckd"


@dataclass
class Frame:
    """Column-typed table with a missing mask and a designated label column."""

    schema: tuple[ColumnSpec, ...]
    values: np.ndarray  # float64 (n, m); categorical cells hold category indices
    missing: np.ndarray  # bool (n, m)
    label: str

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        self.missing = np.asarray(self.missing, dtype=bool)
        if self.values.shape != self.missing.shape:
            raise SchemaError("values and missing mask shapes differ")
        if self.values.shape[1] != len(self.schema):
            raise SchemaError("column count does not match schema")
        names = [c.name for c in self.schema]
        if len(set(names)) != len(names):
            raise SchemaError("duplicate column names in schema")
        if self.label not in names:
            raise SchemaError(f"label column {self.label!r} not in schema")
        if self.missing[:, self.col_index(self.label)].any():
            raise SchemaError("label column has missing entries")

    # -- structure helpers -------------------------------------------------

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def column_names(self) -> list[str]:
        return [c.name for c in self.schema]

    @property
    def feature_names(self) -> list[str]:
        return [c.name for c in self.schema if c.name != self.label]

    def col_index(self, name: str) -> int:
        for i, c in enumerate(self.schema):
            if c.name == name:
                return i
        raise SchemaError(f"no column named {name!r}")

    def column(self, name: str) -> ColumnSpec:
        return self.schema[self.col_index(name)]

    def copy(self) -> "Frame":
        return Frame(self.schema, self.values.copy(), self.missing.copy(), self.label)

    def take_rows(self, idx) -> "Frame":
        idx = np.asarray(idx, dtype=int)
        return Frame(self.schema, self.values[idx].copy(), self.missing[idx].copy(), self.label)

    def select_columns(self, names) -> "Frame":
        """Project to the given feature columns (label always kept)."""
        keep = list(names)
        if self.label not in keep:
            keep = keep + [self.label]
        cols = [self.col_index(n) for n in keep]
        schema = tuple(self.schema[i] for i in cols)
        return Frame(schema, self.values[:, cols].copy(), self.missing[:, cols].copy(), self.label)

    def feature_matrix(self) -> np.ndarray:
        """Feature cells as float64 with NaN at masked positions."""
        cols = [self.col_index(n) for n in self.feature_names]
        out = self.values[:, cols].copy()
        out[self.missing[:, cols]] = np.nan
        return out

    def labels(self, positive: str | None = None) -> np.ndarray:
        """0/1 vector with 1 for the positive category of the label column."""
        spec = self.column(self.label)
        if spec.kind != "categorical":
            raise SchemaError("label column must be categorical")
        if positive is None:
            positive = POSITIVE_LABEL if POSITIVE_LABEL in spec.categories else spec.categories[0]
        if positive not in spec.categories:
            raise SchemaError(f"positive label {positive!r} not among {spec.categories}")
        pos_idx = spec.categories.index(positive)
        col = self.values[:, self.col_index(self.label)]
        return (col == pos_idx).astype(np.int64)

    def class_counts(self) -> dict[str, int]:
        spec = self.column(self.label)
        col = self.values[:, self.col_index(self.label)].astype(int)
        return {cat: int(np.sum(col == i)) for i, cat in enumerate(spec.categories)}

    def category_tokens(self, name: str) -> list[str | None]:
        """Decoded tokens of a categorical column (None where missing)."""
        spec = self.column(name)
        if spec.kind != "categorical":
            raise SchemaError(f"column {name!r} is not categorical")
        j = self.col_index(name)
        out: list[str | None] = []
        for i in range(self.n_rows):
            out.append(None if self.missing[i, j] else spec.categories[int(self.values[i, j])])
        return out


@dataclass(frozen=True)
class SplitPair:
    train: Frame
    test: Frame
    seed: int
    ratio: float


# -- token handling ---------------------------------------------------------


def repair_token(token: str, repairs: dict[str, str] | None = None) -> str:
    """Normalize one raw cell token: trim whitespace/tabs, then map known typos."""
    t = token.strip()
    table = DEFAULT_REPAIRS if repairs is None else repairs
    if t in table:
        return table[t]
    low = t.lower()
    if low != t and low in table:
        return table[low]
    return t


def _parse_float(token: str) -> float | None:
    try:
        return float(token)
    except ValueError:
        return None


def _resolve_cell(token: str, spec: ColumnSpec, repairs, line: int | None):
    """Return (value, missing) for one raw token under one column spec."""
    t = repair_token(token, repairs)
    if t == MISSING_TOKEN or t == "":
        return np.nan, True
    if spec.kind == "numeric":
        v = _parse_float(t)
        if v is None:
            # junk survives only as a missing cell; clean() documents this rule
            return np.nan, True
        return v, False
    if t in spec.categories:
        return float(spec.categories.index(t)), False
    low = t.lower()
    if low in spec.categories:
        return float(spec.categories.index(low)), False
    raise SchemaError(
        f"column {spec.name!r}: unknown category token {token!r}"
        + (f" (line {line})" if line is not None else "")
    )


# -- ARFF subset ------------------------------------------------------------


def _parse_arff(text: str, repairs) -> tuple[tuple[ColumnSpec, ...], list[list[str]]]:
    specs: list[ColumnSpec] = []
    rows: list[list[str]] = []
    in_data = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if not in_data and line.lower().startswith("@relation"):
            continue
        if not in_data and line.lower().startswith("@attribute"):
            body = line[len("@attribute"):].strip()
            if not body:
                raise ParseError("@attribute without a name", lineno)
            if body.startswith("'"):
                end = body.find("'", 1)
                if end < 0:
                    raise ParseError("unterminated quoted attribute name", lineno)
                name, rest = body[1:end], body[end + 1:].strip()
            else:
                parts = body.split(None, 1)
                if len(parts) != 2:
                    raise ParseError("@attribute needs a name and a type", lineno)
                name, rest = parts[0], parts[1].strip()
            if rest.startswith("{"):
                if not rest.endswith("}"):
                    raise ParseError("unterminated category list", lineno)
                cats = tuple(c.strip().strip("'") for c in rest[1:-1].split(","))
                if any(not c for c in cats):
                    raise ParseError("empty category token", lineno)
                specs.append(ColumnSpec(name, "categorical", cats))
            elif rest.lower() in ("numeric", "real", "integer"):
                specs.append(ColumnSpec(name, "numeric"))
            else:
                raise ParseError(f"unsupported attribute type {rest!r}", lineno)
            continue
        if line.lower().startswith("@data"):
            if not specs:
                raise ParseError("@data before any @attribute", lineno)
            in_data = True
            continue
        if not in_data:
            raise ParseError(f"unexpected directive {line.split()[0]!r}", lineno)
        fields = next(_csv.reader(io.StringIO(line)))
        if len(fields) != len(specs):
            raise ParseError(
                f"row has {len(fields)} fields, expected {len(specs)}", lineno)
        rows.append(fields)
    if not in_data:
        raise ParseError("missing @data section", None)
    return tuple(specs), rows


# -- CSV --------------------------------------------------------------------


def _infer_csv_schema(header: list[str], rows: list[list[str]], repairs) -> tuple[ColumnSpec, ...]:
    if set(header) == {c.name for c in CKD_SCHEMA}:
        by_name = {c.name: c for c in CKD_SCHEMA}
        return tuple(by_name[h] for h in header)
    specs = []
    for j, name in enumerate(header):
        tokens = [repair_token(r[j], repairs) for r in rows]
        tokens = [t for t in tokens if t not in (MISSING_TOKEN, "")]
        if tokens and all(_parse_float(t) is not None for t in tokens):
            specs.append(ColumnSpec(name, "numeric"))
        else:
            seen: list[str] = []
            for t in tokens:
                if t not in seen:
                    seen.append(t)
            specs.append(ColumnSpec(name, "categorical", tuple(seen) or ("<empty>",)))
    return tuple(specs)


# -- public operations -------------------------------------------------------


def load_dataset(path, format: str, label: str | None = None,
                 schema: tuple[ColumnSpec, ...] | None = None,
                 repairs: dict[str, str] | None = None) -> Frame:
    """Parse an ARFF-subset or CSV file into a Frame.

    "?" and empty CSV cells set the missing mask; whitespace around tokens is
    stripped; category typos are repaired via the token repair table.
    """
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    if format == "arff":
        specs, raw_rows = _parse_arff(text, repairs)
        line0 = None
    elif format == "csv":
        reader = _csv.reader(io.StringIO(text))
        table = [row for row in reader if row and any(f.strip() for f in row)]
        if not table:
            raise ParseError("empty CSV file", 1)
        header = [h.strip() for h in table[0]]
        raw_rows = table[1:]
        for i, r in enumerate(raw_rows):
            if len(r) != len(header):
                raise ParseError(f"row has {len(r)} fields, expected {len(header)}", i + 2)
        specs = schema if schema is not None else _infer_csv_schema(header, raw_rows, repairs)
        if [c.name for c in specs] != header:
            raise SchemaError("provided schema does not match CSV header")
        line0 = None
    else:
        raise ArgumentError(f"unknown format {format!r}")
    if schema is not None and format == "arff":
        if len(schema) != len(specs):
            raise SchemaError("provided schema does not match ARFF attribute count")
        specs = schema

    n, m = len(raw_rows), len(specs)
    values = np.full((n, m), np.nan)
    missing = np.zeros((n, m), dtype=bool)
    for i, row in enumerate(raw_rows):
        for j, tok in enumerate(row):
            v, miss = _resolve_cell(tok, specs[j], repairs, line0)
            values[i, j] = v
            missing[i, j] = miss
    label_name = label or ("class" if any(c.name == "class" for c in specs) else specs[-1].name)
    return Frame(specs, values, missing, label_name)


def clean(frame: Frame, repairs: dict[str, str] | None = None) -> Frame:
    """Coerce mistyped nominal columns to numeric and canonicalize categories.

    Columns in NUMERIC_COERCIONS that arrive categorical are re-typed as
    numeric (their tokens re-parsed; unparseable tokens become missing).
    Idempotent: cleaning a clean frame returns an equal frame.
    """
    specs = list(frame.schema)
    values = frame.values.copy()
    missing = frame.missing.copy()
    for j, spec in enumerate(specs):
        if spec.kind != "categorical":
            continue
        if spec.name in NUMERIC_COERCIONS:
            col = np.full(frame.n_rows, np.nan)
            miss = missing[:, j].copy()
            for i in range(frame.n_rows):
                if miss[i]:
                    continue
                tok = repair_token(spec.categories[int(values[i, j])], repairs)
                v = _parse_float(tok)
                if v is None:
                    miss[i] = True
                else:
                    col[i] = v
            values[:, j] = col
            missing[:, j] = miss
            specs[j] = ColumnSpec(spec.name, "numeric", (), spec.unit)
        else:
            canon: list[str] = []
            remap = {}
            for k, cat in enumerate(spec.categories):
                fixed = repair_token(cat, repairs)
                if fixed not in canon:
                    canon.append(fixed)
                remap[k] = canon.index(fixed)
            if canon != list(spec.categories):
                col = values[:, j]
                new = np.array([remap[int(v)] if not missing[i, j] else np.nan
                                for i, v in enumerate(col)])
                values[:, j] = new
                specs[j] = ColumnSpec(spec.name, "categorical", tuple(canon), spec.unit)
    return Frame(tuple(specs), values, missing, frame.label)


def count_missing(frame: Frame) -> int:
    """Total masked cells over the feature columns."""
    cols = [frame.col_index(n) for n in frame.feature_names]
    return int(frame.missing[:, cols].sum())


def find_duplicates(frame: Frame) -> list[tuple[int, int]]:
    """All index pairs (i, j), i<j, of rows equal in every cell and mask bit."""
    vals = frame.values.copy()
    vals[frame.missing] = 0.0
    groups: dict[bytes, list[int]] = {}
    for i in range(frame.n_rows):
        key = vals[i].tobytes() + frame.missing[i].tobytes()
        groups.setdefault(key, []).append(i)
    pairs = []
    for idx in groups.values():
        for a in range(len(idx)):
            for b in range(a + 1, len(idx)):
                pairs.append((idx[a], idx[b]))
    return sorted(pairs)


def split(frame: Frame, ratio: float, seed: int, stratify: bool = False) -> SplitPair:
    """Shuffle rows deterministically and cut the first round(ratio*n) as train."""
    if not (0.0 < ratio < 1.0):
        raise ArgumentError(f"split ratio must be in (0,1), got {ratio}")
    if frame.n_rows == 0:
        raise ArgumentError("cannot split an empty frame")
    rng = child_rng(seed, "split")
    n = frame.n_rows
    n_train = int(np.floor(ratio * n + 0.5))
    if stratify:
        y = frame.labels()
        train_idx: list[int] = []
        test_idx: list[int] = []
        for cls in (0, 1):
            cls_idx = np.flatnonzero(y == cls)
            perm = cls_idx[rng.permutation(len(cls_idx))]
            k = int(np.floor(ratio * len(cls_idx) + 0.5))
            train_idx.extend(perm[:k])
            test_idx.extend(perm[k:])
        train_idx = sorted(train_idx)[:]
        rng2 = child_rng(seed, "split", 1)
        train_idx = list(np.array(train_idx)[rng2.permutation(len(train_idx))])
        test_idx = sorted(test_idx)
    else:
        perm = rng.permutation(n)
        train_idx = list(perm[:n_train])
        test_idx = list(perm[n_train:])
    return SplitPair(frame.take_rows(train_idx), frame.take_rows(test_idx), seed, ratio)


def write_csv(frame: Frame, path) -> None:
    """CSV with a header row; "?" marks missing; categoricals written as tokens."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = _csv.writer(fh)
        writer.writerow(frame.column_names)
        for i in range(frame.n_rows):
            row = []
            for j, spec in enumerate(frame.schema):
                if frame.missing[i, j]:
                    row.append(MISSING_TOKEN)
                elif spec.kind == "categorical":
                    row.append(spec.categories[int(frame.values[i, j])])
                else:
                    row.append(repr(float(frame.values[i, j])))
            writer.writerow(row)
