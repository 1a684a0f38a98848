"""Loading, cleaning, encoding, partitioning and splitting tabular data.

The census pipeline is: parse -> drop rows containing the null token ->
label-encode categorical columns (first-appearance order) -> standardize
numeric columns -> partition rows into disjoint fixed-size subsets ->
stratified train/validation split inside each subset.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateLabelError, InsufficientDataError, ParseError, ValidationError

log = logging.getLogger(__name__)

NUMERIC = "numeric"
CATEGORICAL = "categorical"
FEATURE = "feature"
LABEL = "label"


@dataclass(frozen=True)
class Column:
    name: str
    kind: str
    role: str = FEATURE

    def __post_init__(self):
        if self.kind not in (NUMERIC, CATEGORICAL):
            raise ValidationError(f"column {self.name!r}: unknown kind {self.kind!r}")
        if self.role not in (FEATURE, LABEL):
            raise ValidationError(f"column {self.name!r}: unknown role {self.role!r}")


@dataclass(frozen=True)
class FeatureSchema:
    columns: tuple[Column, ...]

    def __post_init__(self):
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise ValidationError("schema column names must be unique")
        if sum(c.role == LABEL for c in self.columns) > 1:
            raise ValidationError("schema has more than one label column")

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.columns]

    @property
    def features(self) -> list[Column]:
        return [c for c in self.columns if c.role == FEATURE]

    @property
    def label(self) -> Column | None:
        for c in self.columns:
            if c.role == LABEL:
                return c
        return None

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ValidationError(f"column {name!r} not in schema") from None

    def with_label(self, name: str) -> "FeatureSchema":
        """Return a copy with ``name`` as the (categorical) label column."""
        self.index(name)
        cols = []
        for c in self.columns:
            if c.name == name:
                cols.append(Column(c.name, CATEGORICAL, LABEL))
            else:
                cols.append(Column(c.name, c.kind, FEATURE))
        return FeatureSchema(tuple(cols))


# Columns of the census corpus, in file column order (see data/adult.names).
ADULT_COLUMNS = (
    ("age", NUMERIC),
    ("workclass", CATEGORICAL),
    ("fnlwgt", NUMERIC),
    ("education", CATEGORICAL),
    ("education-num", NUMERIC),
    ("marital-status", CATEGORICAL),
    ("occupation", CATEGORICAL),
    ("relationship", CATEGORICAL),
    ("race", CATEGORICAL),
    ("sex", CATEGORICAL),
    ("capital-gain", NUMERIC),
    ("capital-loss", NUMERIC),
    ("hours-per-week", NUMERIC),
    ("native-country", CATEGORICAL),
    ("income", CATEGORICAL),
)
ADULT_SCHEMA = FeatureSchema(tuple(Column(n, k) for n, k in ADULT_COLUMNS))

# label choices for the census experiments: column -> positive token
ADULT_LABELS = {"income": ">50K", "sex": "Male"}


def parse_schema(text: str) -> FeatureSchema:
    """Parse a schema sidecar: one ``name=kind`` pair per line.

    Blank lines and lines starting with ``#`` are ignored.
    """
    cols = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(f"expected name=kind, got {line!r}", line=lineno)
        name, kind = (s.strip() for s in line.split("=", 1))
        if kind not in (NUMERIC, CATEGORICAL):
            raise ParseError(f"kind must be numeric or categorical, got {kind!r}", line=lineno)
        cols.append(Column(name, kind))
    if not cols:
        raise ValidationError("schema is empty")
    return FeatureSchema(tuple(cols))


def format_schema(schema: FeatureSchema) -> str:
    return "".join(f"{c.name}={c.kind}\n" for c in schema.columns)


@dataclass(frozen=True)
class RawTable:
    header: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...]
    null_token: str = "?"

    def __post_init__(self):
        width = len(self.header)
        for i, row in enumerate(self.rows):
            if len(row) != width:
                raise ParseError(f"row {i} has {len(row)} cells, expected {width}")

    def __len__(self):
        return len(self.rows)

    def column(self, name: str) -> list[str]:
        try:
            j = self.header.index(name)
        except ValueError:
            raise ValidationError(f"column {name!r} not found") from None
        return [r[j] for r in self.rows]

    def take(self, indices: Iterable[int]) -> "RawTable":
        return RawTable(self.header, tuple(self.rows[i] for i in indices), self.null_token)


def parse_table(data: bytes | str, null_token: str = "?", header: bool = True) -> RawTable:
    """Parse comma-separated text into a :class:`RawTable`.

    Cells are trimmed of surrounding whitespace. Blank lines are skipped.
    Without ``header`` the columns are named ``col0 .. colN``.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    reader = csv.reader(io.StringIO(data))
    head = None
    rows = []
    for record in reader:
        lineno = reader.line_num
        if not record or all(not c.strip() for c in record):
            continue
        cells = tuple(c.strip() for c in record)
        if head is None:
            if header:
                head = cells
                continue
            head = tuple(f"col{j}" for j in range(len(cells)))
        if len(cells) != len(head):
            raise ParseError(f"ragged row: {len(cells)} cells, expected {len(head)}", line=lineno)
        rows.append(cells)
    if head is None:
        raise ParseError("empty input")
    return RawTable(head, tuple(rows), null_token)


def read_table(path, null_token: str = "?", header: bool = True) -> RawTable:
    with open(path, "rb") as fh:
        return parse_table(fh.read(), null_token=null_token, header=header)


def read_adult(path, null_token: str = "?") -> RawTable:
    """Read a header-less census file and apply its standard column names.

    Trailing ``.`` on income tokens (the test-split spelling ``>50K.``) is
    removed so both splits share one label vocabulary.
    """
    table = read_table(path, null_token=null_token, header=False)
    if len(table.header) != len(ADULT_COLUMNS):
        raise ValidationError(
            f"adult mode expects {len(ADULT_COLUMNS)} columns, found {len(table.header)}"
        )
    table = RawTable(tuple(n for n, _ in ADULT_COLUMNS), table.rows, null_token)
    return strip_token_suffix(table, "income", ".")


def strip_token_suffix(table: RawTable, column: str, suffix: str) -> RawTable:
    j = table.header.index(column)
    rows = tuple(
        r[:j] + (r[j][: -len(suffix)] if r[j].endswith(suffix) else r[j],) + r[j + 1 :]
        for r in table.rows
    )
    return RawTable(table.header, rows, table.null_token)


def drop_incomplete_rows(table: RawTable) -> RawTable:
    """Keep only rows with no null-token or empty cells (order preserved)."""
    bad = {table.null_token, ""}
    kept = tuple(r for r in table.rows if not any(c in bad for c in r))
    log.info("dropped %d of %d rows with null cells", len(table.rows) - len(kept), len(table.rows))
    return RawTable(table.header, kept, table.null_token)


def encode_categorical(column: Sequence[str]) -> tuple[list[int], dict[str, int]]:
    """Label-encode tokens by order of first appearance, starting at 0."""
    mapping: dict[str, int] = {}
    codes = []
    for tok in column:
        code = mapping.get(tok)
        if code is None:
            code = mapping[tok] = len(mapping)
        codes.append(code)
    return codes, mapping


def decode_categorical(codes: Sequence[int], mapping: dict[str, int]) -> list[str]:
    inverse = {v: k for k, v in mapping.items()}
    return [inverse[c] for c in codes]


def standardize_column(values, fit_params: tuple[float, float] | None = None):
    """Z-score ``values`` using population standard deviation.

    Returns ``(z, (mean, sd))``. A constant column (sd == 0) maps to zeros
    and records sd = 0.
    """
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValidationError("cannot standardize an empty column")
    if fit_params is None:
        mean = float(v.mean())
        sd = float(v.std())
    else:
        mean, sd = (float(x) for x in fit_params)
    if sd == 0.0:
        return np.zeros_like(v), (mean, 0.0)
    return (v - mean) / sd, (mean, sd)


@dataclass(frozen=True)
class EncodedMatrix:
    """Numeric feature matrix plus the bookkeeping needed to interpret it.

    ``values`` holds numeric columns (raw or standardized) and categorical
    integer codes side by side, in ``schema`` column order.
    """

    values: np.ndarray
    schema: FeatureSchema
    category_maps: dict[str, dict[str, int]] = field(default_factory=dict)
    standardization_params: dict[str, tuple[float, float]] = field(default_factory=dict)

    @property
    def names(self) -> list[str]:
        return self.schema.names

    @property
    def kinds(self) -> list[str]:
        return [c.kind for c in self.schema.columns]

    @property
    def numeric_mask(self) -> np.ndarray:
        return np.array([k == NUMERIC for k in self.kinds], dtype=bool)

    def __len__(self):
        return self.values.shape[0]

    def take(self, rows) -> "EncodedMatrix":
        return EncodedMatrix(
            self.values[np.asarray(rows, dtype=np.intp)],
            self.schema,
            self.category_maps,
            self.standardization_params,
        )

    def drop_feature(self, j: int) -> "EncodedMatrix":
        name = self.schema.columns[j].name
        cols = tuple(c for i, c in enumerate(self.schema.columns) if i != j)
        return EncodedMatrix(
            np.delete(self.values, j, axis=1),
            FeatureSchema(cols),
            {k: v for k, v in self.category_maps.items() if k != name},
            {k: v for k, v in self.standardization_params.items() if k != name},
        )

    def standardized(self) -> "EncodedMatrix":
        """Standardize every numeric column, fitting on these rows."""
        out = self.values.astype(float, copy=True)
        params = {}
        for j, col in enumerate(self.schema.columns):
            if col.kind == NUMERIC:
                out[:, j], params[col.name] = standardize_column(out[:, j])
        return EncodedMatrix(out, self.schema, self.category_maps, params)


def encode_table(
    table: RawTable,
    schema: FeatureSchema,
    category_maps: dict[str, dict[str, int]] | None = None,
    standardize: bool = False,
) -> EncodedMatrix:
    """Encode the feature columns of ``schema`` into an :class:`EncodedMatrix`.

    Categorical maps are built from ``table`` unless given; tokens missing
    from a supplied map are appended in first-appearance order.
    """
    feats = schema.features
    if not feats:
        raise ValidationError("schema has no feature columns")
    if len(table) == 0:
        raise InsufficientDataError("table has no rows")
    values = np.empty((len(table), len(feats)), dtype=float)
    maps = {}
    for j, col in enumerate(feats):
        cells = table.column(col.name)
        if col.kind == NUMERIC:
            try:
                values[:, j] = [float(c) for c in cells]
            except ValueError as exc:
                raise ValidationError(f"column {col.name!r}: {exc}") from None
            if not np.all(np.isfinite(values[:, j])):
                raise ValidationError(f"column {col.name!r} has non-finite values")
        else:
            mapping = dict((category_maps or {}).get(col.name, {}))
            codes = []
            for tok in cells:
                code = mapping.get(tok)
                if code is None:
                    code = mapping[tok] = len(mapping)
                codes.append(code)
            values[:, j] = codes
            maps[col.name] = mapping
    enc = EncodedMatrix(values, FeatureSchema(tuple(feats)), maps, {})
    return enc.standardized() if standardize else enc


def binarize_label(column: Sequence[str], positive_token: str) -> np.ndarray:
    """1 where the cell equals ``positive_token``, else 0."""
    bits = np.fromiter((c == positive_token for c in column), dtype=np.int8, count=len(column))
    if len(column) and not bits.any():
        log.warning("positive token %r not present in label column", positive_token)
    return bits


@dataclass(frozen=True)
class SubsetPartition:
    subsets: tuple[tuple[int, ...], ...]
    subset_size: int
    seed: int


def partition_subsets(n_rows: int, k: int, m: int, seed: int) -> SubsetPartition:
    """Shuffle row indices with ``seed`` and cut the first k*m into k blocks of m."""
    if k < 1 or m < 1:
        raise ValidationError("k and m must be positive")
    if k * m > n_rows:
        raise InsufficientDataError(f"need {k}*{m}={k * m} rows, only {n_rows} available")
    perm = np.random.default_rng(seed).permutation(n_rows)
    blocks = tuple(tuple(int(i) for i in perm[b * m : (b + 1) * m]) for b in range(k))
    return SubsetPartition(blocks, m, seed)


@dataclass(frozen=True)
class SplitPair:
    train_indices: tuple[int, ...]
    valid_indices: tuple[int, ...]
    fraction: float
    stratified: bool = True


def ceil_count(fraction: float, n: int) -> int:
    # round first so 0.3*400 = 120.00000000000001 does not become 121
    return math.ceil(round(fraction * n, 9))


def stratified_split(indices, labels, fraction: float, seed: int) -> SplitPair:
    """Per-class seeded shuffle; ceil(fraction * class size) of each class trains.

    A class with at least two members always keeps one on each side.
    Singleton classes go to whichever side is below its overall target.
    """
    if not 0.0 < fraction < 1.0:
        raise ValidationError(f"fraction must lie in (0, 1), got {fraction}")
    idx = np.asarray(indices, dtype=np.intp)
    lab = np.asarray(labels)
    if idx.shape != lab.shape:
        raise ValidationError("indices and labels must align")
    classes = (1, 0)
    for c in classes:
        if not np.any(lab == c):
            raise DegenerateLabelError(f"class {c} has no members")
    rng = np.random.default_rng(seed)
    train, valid, singletons = [], [], []
    for c in classes:
        members = idx[lab == c]
        members = members[rng.permutation(members.size)]
        if members.size == 1:
            singletons.append(int(members[0]))
            continue
        t = min(ceil_count(fraction, members.size), members.size - 1)
        train.extend(int(i) for i in members[:t])
        valid.extend(int(i) for i in members[t:])
    target = ceil_count(fraction, idx.size)
    for i in singletons:
        (train if len(train) < target else valid).append(i)
    return SplitPair(tuple(train), tuple(valid), fraction, True)
