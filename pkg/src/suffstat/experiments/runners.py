"""Experiment orchestration: subsets, feature ablation, and learning curves.

Every stochastic step takes its seed from ``derive_seed(master, ...)`` keyed
by what it is (partition, split, experiment/subset/family), so results do
not depend on how work items are scheduled across processes.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ..curves import (
    DEFAULT_FRACTIONS,
    LearningCurve,
    compute_learning_curve,
    fit_gap_slope,
    fit_log_model,
)
from ..effects import DEFAULT_CAP, EffectReport, average_effect_size
from ..errors import DegenerateLabelError, InsufficientDataError, ValidationError
from ..ingest import (
    EncodedMatrix,
    FeatureSchema,
    RawTable,
    binarize_label,
    encode_table,
    partition_subsets,
    stratified_split,
)
from ..learners import FAMILIES, LearnerSpec, default_specs, evaluate, train
from .correlation import CorrelationSummary, correlate
from .seeding import derive_seed

log = logging.getLogger(__name__)

AVERAGED = "averaged"
PER_MODEL = "per-model"
GRANULARITIES = (AVERAGED, PER_MODEL)


@dataclass(frozen=True)
class ExperimentConfig:
    label: str = "income"
    positive: str = ">50K"
    k: int = 66
    m: int = 500
    split_fraction: float = 0.8
    fractions: tuple[float, ...] = DEFAULT_FRACTIONS
    learners: tuple[LearnerSpec, ...] = field(default_factory=default_specs)
    seed: int = 0
    granularity: str = AVERAGED
    effect_cap: float = DEFAULT_CAP

    def __post_init__(self):
        if self.k < 1 or self.m < 2:
            raise ValidationError("k must be >= 1 and m >= 2")
        if not 0.0 < self.split_fraction < 1.0:
            raise ValidationError("split_fraction must lie in (0, 1)")
        if self.granularity not in GRANULARITIES:
            raise ValidationError(f"granularity must be one of {GRANULARITIES}")
        if not self.learners:
            raise ValidationError("at least one learner is required")
        fams = [s.family for s in self.learners]
        if len(set(fams)) != len(fams):
            raise ValidationError("learner families must be distinct")
        fr = list(self.fractions)
        if any(not 0.0 < f <= 1.0 for f in fr) or any(b <= a for a, b in zip(fr, fr[1:])):
            raise ValidationError("fractions must be strictly increasing within (0, 1]")
        if not self.effect_cap > 0:
            raise ValidationError("effect_cap must be positive")


@dataclass(frozen=True)
class LabeledData:
    """Encoded (unstandardized) features plus a 0/1 label vector."""

    matrix: EncodedMatrix
    labels: np.ndarray
    label_name: str = "label"

    def __post_init__(self):
        if self.matrix.values.shape[0] != np.asarray(self.labels).shape[0]:
            raise ValidationError("labels do not align with matrix rows")

    def __len__(self):
        return len(self.labels)

    @classmethod
    def from_table(cls, table: RawTable, schema: FeatureSchema, label: str, positive: str) -> "LabeledData":
        """Encode ``table`` with ``label`` as the target and every other
        schema column as a feature."""
        if label not in table.header:
            raise ValidationError(f"label column {label!r} not found")
        schema = schema.with_label(label)
        matrix = encode_table(table, schema)
        y = binarize_label(table.column(label), positive)
        return cls(matrix, y, label)


@dataclass(frozen=True)
class ScatterRecord:
    id: str
    family: str
    effect_size: float
    outcome: float


@dataclass
class ExperimentResult:
    experiment: str
    records: list[ScatterRecord]
    summary: CorrelationSummary
    all_records: list[ScatterRecord]
    supplementary: dict[str, CorrelationSummary] = field(default_factory=dict)
    diagnostics: list[str] = field(default_factory=list)
    reports: dict[str, EffectReport] = field(default_factory=dict)


@dataclass
class CurveExperimentResult:
    log_slope: ExperimentResult
    gap_slope: ExperimentResult
    curves: list[tuple[str, str, float, LearningCurve]]
    diagnostics: list[str] = field(default_factory=list)


def _family_rank(family: str) -> int:
    return FAMILIES.index(family) if family in FAMILIES else len(FAMILIES)


def _id_key(rid: str):
    return (0, int(rid), "") if rid.isdigit() else (1, 0, rid)


def sort_records(records) -> list[ScatterRecord]:
    return sorted(records, key=lambda r: (_id_key(r.id), _family_rank(r.family)))


def select(records, granularity: str) -> list[ScatterRecord]:
    if granularity == AVERAGED:
        return [r for r in records if r.family == AVERAGED]
    return [r for r in records if r.family != AVERAGED]


def summarize(records) -> CorrelationSummary:
    return correlate([r.effect_size for r in records], [r.outcome for r in records])


# -- process fan-out ------------------------------------------------------

_SHARED = {}


def _install_shared(shared):
    _SHARED.clear()
    _SHARED.update(shared)


def _fan_out(worker, shared: dict, items: list, jobs: int) -> list:
    if jobs <= 1 or len(items) <= 1:
        _install_shared(shared)
        try:
            return [worker(it) for it in items]
        finally:
            _SHARED.clear()
    with ProcessPoolExecutor(max_workers=jobs, initializer=_install_shared, initargs=(shared,)) as pool:
        return list(pool.map(worker, items))


# -- experiment 1.1: disjoint subsets ---------------------------------------


def partition_for(config: ExperimentConfig, n_rows: int):
    """The subset partition shared by every experiment with this master seed."""
    return partition_subsets(n_rows, config.k, config.m, derive_seed(config.seed, "partition"))


def _subset_setup(config, data, sid, rows):
    """Effect report, standardized features, labels and split for one subset."""
    y = np.asarray(data.labels)[rows]
    sub = data.matrix.take(rows)
    report = average_effect_size(sub, y, data.label_name, cap=config.effect_cap)
    split = stratified_split(np.arange(len(rows)), y, config.split_fraction, derive_seed(config.seed, "split", sid))
    X = sub.standardized().values
    return report, X, y, split


def _subset_worker(item):
    sid, rows = item
    config, data = _SHARED["config"], _SHARED["data"]
    try:
        report, X, y, split = _subset_setup(config, data, sid, rows)
    except (DegenerateLabelError, InsufficientDataError) as exc:
        return sid, None, {}, f"subset {sid}: skipped ({exc})"
    tr = np.asarray(split.train_indices)
    va = np.asarray(split.valid_indices)
    accs = {}
    for spec in config.learners:
        model = train(spec, X[tr], y[tr], seed=derive_seed(config.seed, "exp1-subsets", sid, spec.family))
        accs[spec.family] = evaluate(model, X[va], y[va]).accuracy
    return sid, report, accs, None


def _accuracy_records(rid, effect, accs) -> list[ScatterRecord]:
    recs = [ScatterRecord(rid, fam, effect, acc) for fam, acc in accs.items()]
    recs.append(ScatterRecord(rid, AVERAGED, effect, float(np.mean(list(accs.values())))))
    return recs


def _finish(name, config, records, diagnostics, reports) -> ExperimentResult:
    primary = select(records, config.granularity)
    other = PER_MODEL if config.granularity == AVERAGED else AVERAGED
    supplementary = {}
    try:
        supplementary[other] = summarize(select(records, other))
    except InsufficientDataError as exc:
        diagnostics.append(f"{name}: no {other} summary ({exc})")
    return ExperimentResult(name, primary, summarize(primary), records, supplementary, diagnostics, reports)


def run_subset_experiment(config: ExperimentConfig, data: LabeledData, jobs: int = 1) -> ExperimentResult:
    """Effect size vs validation accuracy over ``config.k`` disjoint subsets.

    Emits one record per (subset, family) plus a model-averaged record per
    subset; the summary is computed over ``config.granularity`` records.
    """
    part = partition_for(config, len(data))
    items = [(sid, np.asarray(rows)) for sid, rows in enumerate(part.subsets)]
    out = _fan_out(_subset_worker, {"config": config, "data": data}, items, jobs)
    records, diagnostics, reports = [], [], {}
    for sid, report, accs, diag in out:
        if diag:
            log.warning(diag)
            diagnostics.append(diag)
            continue
        reports[str(sid)] = report
        records.extend(_accuracy_records(str(sid), report.average, accs))
    return _finish("exp1-subsets", config, sort_records(records), diagnostics, reports)


# -- experiment 1.2: feature ablation ----------------------------------------


def working_rows(config: ExperimentConfig, n_rows: int) -> np.ndarray:
    """All rows covered by the subset partition, in partition order."""
    return np.concatenate([np.asarray(s) for s in partition_for(config, n_rows).subsets])


def _ablation_worker(j):
    config, data = _SHARED["config"], _SHARED["data"]
    sub, X, y, split = _SHARED["sub"], _SHARED["X"], _SHARED["y"], _SHARED["split"]
    name = sub.schema.columns[j].name
    reduced = sub.drop_feature(j)
    report = average_effect_size(reduced, y, data.label_name, cap=config.effect_cap)
    Xr = np.delete(X, j, axis=1)
    tr = np.asarray(split.train_indices)
    va = np.asarray(split.valid_indices)
    accs = {}
    for spec in config.learners:
        model = train(spec, Xr[tr], y[tr], seed=derive_seed(config.seed, "exp1-ablation", name, spec.family))
        accs[spec.family] = evaluate(model, Xr[va], y[va]).accuracy
    return name, report, accs


def run_ablation_experiment(config: ExperimentConfig, data: LabeledData, jobs: int = 1) -> ExperimentResult:
    """Drop each feature in turn; effect size of the reduced feature space vs
    accuracy on one fixed split of the working rows."""
    p = data.matrix.values.shape[1]
    if p < 2:
        raise ValidationError("ablation needs at least 2 features")
    rows = working_rows(config, len(data))
    y = np.asarray(data.labels)[rows]
    sub = data.matrix.take(rows)
    split = stratified_split(np.arange(rows.size), y, config.split_fraction, derive_seed(config.seed, "ablation-split"))
    shared = {"config": config, "data": data, "sub": sub, "X": sub.standardized().values, "y": y, "split": split}
    out = _fan_out(_ablation_worker, shared, list(range(p)), jobs)
    records, reports = [], {}
    for name, report, accs in out:
        rid = f"drop:{name}"
        reports[rid] = report
        records.extend(_accuracy_records(rid, report.average, accs))
    # records follow feature order
    order = {f"drop:{c.name}": i for i, c in enumerate(data.matrix.schema.columns)}
    records.sort(key=lambda r: (order[r.id], _family_rank(r.family)))
    return _finish("exp1-ablation", config, records, [], reports)


# -- experiment 2: learning curves -----------------------------------------


def _curve_worker(item):
    sid, rows = item
    config, data = _SHARED["config"], _SHARED["data"]
    try:
        report, X, y, split = _subset_setup(config, data, sid, rows)
    except (DegenerateLabelError, InsufficientDataError) as exc:
        return sid, None, [], [f"subset {sid}: skipped ({exc})"]
    curves, diags = [], []
    for spec in config.learners:
        try:
            curve = compute_learning_curve(
                spec, X, y, split, config.fractions, derive_seed(config.seed, "exp2", sid, spec.family), sid
            )
        except (DegenerateLabelError, InsufficientDataError) as exc:
            diags.append(f"subset {sid}/{spec.family}: curve skipped ({exc})")
            continue
        curves.append((spec.family, curve))
    return sid, report, curves, diags


def summarize_curves(curves, diagnostics=None) -> CurveExperimentResult:
    """Fit both slope statistics per curve and correlate them with effect size.

    ``curves`` holds ``(id, family, effect_size, LearningCurve)`` tuples. The
    primary summaries use one signed slope per (id, family); model-averaged
    and absolute-value variants are reported as supplementary summaries.
    """
    diagnostics = list(diagnostics or [])
    log_recs, gap_recs = [], []
    for rid, fam, effect, curve in curves:
        log_recs.append(ScatterRecord(str(rid), fam, effect, fit_log_model(curve).b))
        gap_recs.append(ScatterRecord(str(rid), fam, effect, fit_gap_slope(curve).slope))

    def build(name, recs):
        recs = sort_records(recs)
        by_id = {}
        for r in recs:
            by_id.setdefault(r.id, []).append(r)
        averaged = [
            ScatterRecord(rid, AVERAGED, rs[0].effect_size, float(np.mean([r.outcome for r in rs])))
            for rid, rs in by_id.items()
        ]
        all_records = sort_records(recs + averaged)
        supplementary = {}
        for key, pts in (
            (AVERAGED, averaged),
            ("per-model-abs", [replace(r, outcome=abs(r.outcome)) for r in recs]),
            ("averaged-abs", [replace(r, outcome=abs(r.outcome)) for r in averaged]),
        ):
            try:
                supplementary[key] = summarize(pts)
            except InsufficientDataError as exc:
                diagnostics.append(f"{name}: no {key} summary ({exc})")
        return ExperimentResult(name, recs, summarize(recs), all_records, supplementary, diagnostics)

    return CurveExperimentResult(build("exp2-log-slope", log_recs), build("exp2-gap-slope", gap_recs), list(curves), diagnostics)


def run_curve_experiment(config: ExperimentConfig, data: LabeledData, jobs: int = 1) -> CurveExperimentResult:
    """Learning-curve slopes per (subset, family) vs subset effect size."""
    part = partition_for(config, len(data))
    items = [(sid, np.asarray(rows)) for sid, rows in enumerate(part.subsets)]
    out = _fan_out(_curve_worker, {"config": config, "data": data}, items, jobs)
    curves, diagnostics, reports = [], [], {}
    for sid, report, fam_curves, diags in out:
        for d in diags:
            log.warning(d)
        diagnostics.extend(diags)
        if report is None:
            continue
        reports[str(sid)] = report
        for fam, curve in fam_curves:
            curves.append((str(sid), fam, report.average, curve))
    result = summarize_curves(curves, diagnostics)
    result.log_slope.reports = reports
    result.gap_slope.reports = reports
    return result
