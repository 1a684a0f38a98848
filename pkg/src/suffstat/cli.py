"""Command-line interface.

    suffstat profile --adult --input adult.csv --label income --positive ">50K"
    suffstat exp1-subsets --adult --input adult.csv --label income --seed 7 --out-dir out/
    suffstat exp1-ablation ...
    suffstat exp2 ...
    suffstat synth --spec spec.json --out synth.csv

Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.
"""

from __future__ import annotations

import argparse
import hashlib
import logging
import os
import sys
import time
from pathlib import Path

from . import __version__, ingest, report
from .effects import DEFAULT_CAP, average_effect_size, effect_report_rows
from .errors import SuffstatError, ValidationError
from .experiments import (
    AVERAGED,
    ExperimentConfig,
    LabeledData,
    run_ablation_experiment,
    run_curve_experiment,
    run_subset_experiment,
)
from .learners import DEFAULT_HYPERPARAMETERS, FAMILIES, LearnerSpec
from .synth import SynthSpec, schema_for, synth_dataset, to_csv

log = logging.getLogger("suffstat")

SEED_ENV = "SUFFSTAT_SEED"
EXPERIMENTS = ("exp1-subsets", "exp1-ablation", "exp2")
RECORD_COLUMNS = ["id", "family", "effect_size", "outcome"]
CURVE_RECORD_COLUMNS = RECORD_COLUMNS + ["abs_outcome"]
EFFECT_COLUMNS = ["feature", "kind", "raw", "magnitude", "flags"]

OUTCOME_LABELS = {
    "exp1-subsets": "validation accuracy",
    "exp1-ablation": "validation accuracy",
    "exp2-log-slope": "log-slope of validation error",
    "exp2-gap-slope": "slope of validation - train error",
}


class UsageError(ValidationError):
    pass


# -- config file -----------------------------------------------------------

_CONFIG_KEYS = {"label", "positive", "k", "m", "split_fraction", "fractions", "seed", "granularity", "effect_cap"}


def _coerce(value: str, like):
    if like is None:
        return None if value.lower() in ("none", "unlimited") else int(value)
    if isinstance(like, bool):
        if value.lower() not in ("true", "false"):
            raise ValueError(f"expected true/false, got {value!r}")
        return value.lower() == "true"
    if isinstance(like, int):
        return int(value)
    if isinstance(like, float):
        return float(value)
    return value


def parse_config(text: str) -> dict:
    """Parse ``key=value`` lines into ExperimentConfig fields.

    Learner hyperparameters use ``family.name=value`` keys.
    """
    out: dict = {}
    hyper: dict = {f: {} for f in FAMILIES}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            if "." in key:
                fam, name = key.split(".", 1)
                if fam not in FAMILIES or name not in DEFAULT_HYPERPARAMETERS[fam]:
                    raise UsageError(f"config line {lineno}: unknown key {key!r}")
                default = DEFAULT_HYPERPARAMETERS[fam][name]
                if name == "max_features":
                    hyper[fam][name] = value if value in ("sqrt", "all") else int(value)
                elif name == "max_depth":
                    hyper[fam][name] = _coerce(value, None)
                else:
                    hyper[fam][name] = _coerce(value, default)
            elif key in ("k", "m", "seed"):
                out[key] = int(value)
            elif key in ("split_fraction", "effect_cap"):
                out[key] = float(value)
            elif key == "fractions":
                out[key] = tuple(float(v) for v in value.split(",") if v.strip())
            elif key in _CONFIG_KEYS:
                out[key] = value
            else:
                raise UsageError(f"config line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            raise UsageError(f"config line {lineno}: bad value for {key!r} ({exc})") from None
    out["learners"] = tuple(LearnerSpec(f, hyper[f]) for f in FAMILIES)
    return out


def config_snapshot(cfg: ExperimentConfig) -> dict:
    return {
        "label": cfg.label,
        "positive": cfg.positive,
        "k": cfg.k,
        "m": cfg.m,
        "split_fraction": cfg.split_fraction,
        "fractions": list(cfg.fractions),
        "seed": cfg.seed,
        "granularity": cfg.granularity,
        "effect_cap": cfg.effect_cap,
        "learners": {s.family: dict(s.hyperparameters) for s in cfg.learners},
    }


# -- shared helpers --------------------------------------------------------


def _resolve_seed(args, file_cfg: dict) -> int:
    if args.seed is not None:
        return args.seed
    if "seed" in file_cfg:
        return file_cfg["seed"]
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return 0


def _load_table(args):
    path = Path(args.input)
    if not path.is_file():
        raise UsageError(f"input file not found: {path}")
    if args.adult:
        table = ingest.read_adult(path, null_token=args.null_token)
        schema = ingest.ADULT_SCHEMA
    else:
        if not args.schema:
            raise UsageError("either --adult or --schema is required")
        schema_path = Path(args.schema)
        if not schema_path.is_file():
            raise UsageError(f"schema file not found: {schema_path}")
        schema = ingest.parse_schema(schema_path.read_text(encoding="utf-8"))
        table = ingest.read_table(path, null_token=args.null_token, header=not args.no_header)
        missing = [n for n in schema.names if n not in table.header]
        if missing:
            raise UsageError(f"schema columns missing from input: {', '.join(missing)}")
    n_raw = len(table)
    table = ingest.drop_incomplete_rows(table)
    log.info("%d of %d rows remain after dropping null cells", len(table), n_raw)
    digest = hashlib.sha256(path.read_bytes()).hexdigest()
    return table, schema, digest


def _positive_for(label, args, file_cfg):
    if args.positive is not None:
        return args.positive
    if "positive" in file_cfg:
        return file_cfg["positive"]
    if args.adult and label in ingest.ADULT_LABELS:
        return ingest.ADULT_LABELS[label]
    raise UsageError("--positive is required for this label")


def _labeled(table, schema, label, positive):
    if label not in schema.names:
        raise UsageError(f"label column {label!r} not found")
    data = LabeledData.from_table(table, schema, label, positive)
    if not data.labels.any() or data.labels.all():
        raise UsageError(f"label column {label!r} has a single class under positive token {positive!r}")
    return data


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise SuffstatError(f"cannot write to output directory {out}: {exc}") from None
    return out


# -- commands --------------------------------------------------------------


def cmd_profile(args) -> int:
    file_cfg = parse_config(Path(args.config).read_text()) if args.config else {}
    table, schema, _ = _load_table(args)
    label = args.label or file_cfg.get("label")
    if not label:
        raise UsageError("--label is required")
    data = _labeled(table, schema, label, _positive_for(label, args, file_cfg))
    rep = average_effect_size(data.matrix, data.labels, label, cap=file_cfg.get("effect_cap", DEFAULT_CAP))
    out = _out_dir(args)
    stem = f"profile-{label}"
    rows = effect_report_rows(rep)
    if args.format in ("json", "both"):
        report.write_json(
            out / f"{stem}.json",
            {"label": label, "n_rows": len(data), "average": rep.average, "features": rows},
        )
    if args.format in ("csv", "both"):
        avg_row = {"feature": "AVERAGE", "kind": "", "raw": None, "magnitude": rep.average, "flags": ""}
        report.write_csv(out / f"{stem}.csv", EFFECT_COLUMNS, rows + [avg_row])
    print(f"{label}: average effect size {report.fmt(rep.average)} over {len(rep.per_feature)} features")
    return 0


def _build_config(args, file_cfg) -> ExperimentConfig:
    fields = dict(file_cfg)
    fields["label"] = args.label or file_cfg.get("label") or "income"
    fields["positive"] = _positive_for(fields["label"], args, file_cfg)
    fields["seed"] = _resolve_seed(args, file_cfg)
    for key in ("k", "m", "granularity"):
        if getattr(args, key, None) is not None:
            fields[key] = getattr(args, key)
    return ExperimentConfig(**fields)


def _write_result(out: Path, stem: str, result, args, written: list, abs_column=False):
    records = [
        {
            "id": r.id,
            "family": r.family,
            "effect_size": r.effect_size,
            "outcome": r.outcome,
            "abs_outcome": abs(r.outcome),
        }
        for r in result.all_records
    ]
    cols = CURVE_RECORD_COLUMNS if abs_column else RECORD_COLUMNS
    if args.format in ("csv", "both"):
        written.append(report.write_csv(out / f"{stem}-records.csv", cols, records))
    if args.format in ("json", "both"):
        written.append(report.write_json(out / f"{stem}-records.json", [{c: r[c] for c in cols} for r in records]))
    summary = {
        "experiment": result.experiment,
        "n_records": len(result.all_records),
        "summary": result.summary.as_dict(),
        "supplementary": {k: v.as_dict() for k, v in sorted(result.supplementary.items())},
        "skipped": len(result.diagnostics),
    }
    written.append(report.write_json(out / f"{stem}-summary.json", summary))
    s = result.summary
    xs = [r.effect_size for r in result.records]
    ys = [r.outcome for r in result.records]
    svg = report.scatter_svg(
        xs, ys, s.slope, s.intercept, s.r_squared,
        f"{result.experiment} ({args.label_used})",
        "average effect size (d scale)",
        OUTCOME_LABELS.get(result.experiment, "outcome"),
    )
    path = out / f"{stem}-scatter.svg"
    path.write_text(svg, encoding="utf-8")
    written.append(path)
    print(f"{result.experiment}: {s.n_points} points, R^2 = {report.fmt(s.r_squared)}")


def cmd_experiment(args) -> int:
    timings = {}
    t_start = time.perf_counter()
    file_cfg = parse_config(Path(args.config).read_text()) if args.config else {}
    cfg = _build_config(args, file_cfg)
    args.label_used = cfg.label
    table, schema, digest = _load_table(args)
    data = _labeled(table, schema, cfg.label, cfg.positive)
    needed = cfg.k * cfg.m
    if needed > len(data):
        raise UsageError(f"k*m = {needed} exceeds the {len(data)} cleaned rows")
    out = _out_dir(args)
    timings["load"] = time.perf_counter() - t_start
    jobs = args.jobs or os.cpu_count() or 1
    written: list[Path] = []
    diagnostics: list[str] = []
    t0 = time.perf_counter()
    if args.command == "exp1-subsets":
        res = run_subset_experiment(cfg, data, jobs=jobs)
        _write_result(out, f"exp1-subsets-{cfg.label}", res, args, written)
        diagnostics += res.diagnostics
    elif args.command == "exp1-ablation":
        res = run_ablation_experiment(cfg, data, jobs=jobs)
        _write_result(out, f"exp1-ablation-{cfg.label}", res, args, written)
        diagnostics += res.diagnostics
    else:
        res = run_curve_experiment(cfg, data, jobs=jobs)
        _write_result(out, f"exp2-log-slope-{cfg.label}", res.log_slope, args, written, abs_column=True)
        _write_result(out, f"exp2-gap-slope-{cfg.label}", res.gap_slope, args, written, abs_column=True)
        diagnostics += res.diagnostics
        rows = []
        curve_dir = out / "curves"
        curve_dir.mkdir(exist_ok=True)
        for sid, fam, effect, curve in res.curves:
            for p in curve.points:
                rows.append({
                    "subset": sid, "family": fam, "effect_size": effect, "n_train": p.n_train,
                    "train_error": p.train_error, "valid_error": p.valid_error,
                })
            path = curve_dir / f"{cfg.label}-subset{int(sid):03d}-{fam}.svg"
            path.write_text(
                report.curve_svg(curve.n_train, curve.train_error, curve.valid_error, f"subset {sid}, {fam}"),
                encoding="utf-8",
            )
            written.append(path)
        written.append(report.write_csv(
            out / f"exp2-curves-{cfg.label}.csv",
            ["subset", "family", "effect_size", "n_train", "train_error", "valid_error"],
            rows,
        ))
    timings["experiment"] = time.perf_counter() - t0
    diag_path = out / "diagnostics.log"
    diag_path.write_text("".join(d + "\n" for d in diagnostics), encoding="utf-8")
    written.append(diag_path)
    manifest = {
        "toolkit_version": __version__,
        "command": args.command,
        "config": config_snapshot(cfg),
        "seed": cfg.seed,
        "input": {
            "file": Path(args.input).name,
            "sha256": digest,
            "adult_mode": bool(args.adult),
            "null_token": args.null_token,
            "cleaned_rows": len(data),
        },
        "outputs": sorted(p.relative_to(out).as_posix() for p in written) + ["manifest.json"],
    }
    report.write_json(out / "manifest.json", manifest)
    # wall-clock timings differ between runs, so they stay out of the manifest
    (out / "timings.txt").write_text("".join(f"{k}\t{v:.3f}s\n" for k, v in timings.items()), encoding="utf-8")
    return 0


def cmd_synth(args) -> int:
    path = Path(args.spec)
    if not path.is_file():
        raise UsageError(f"spec file not found: {path}")
    spec = SynthSpec.from_json(path.read_text(encoding="utf-8"))
    if args.seed is not None:
        spec = SynthSpec(spec.n_rows, spec.balance, spec.features, args.seed)
    matrix, labels = synth_dataset(spec)
    out = Path(args.out)
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(to_csv(matrix, labels), encoding="utf-8")
        schema_path = out.with_suffix(out.suffix + ".schema")
        schema_path.write_text(ingest.format_schema(schema_for(matrix)), encoding="utf-8")
    except OSError as exc:
        raise SuffstatError(f"cannot write {out}: {exc}") from None
    print(f"wrote {spec.n_rows} rows to {out} (schema: {schema_path})")
    return 0


# -- argument parsing ------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--input", required=True, help="comma-separated data file")
    group = data.add_mutually_exclusive_group()
    group.add_argument("--adult", action="store_true", help="header-less census file with the built-in schema")
    group.add_argument("--schema", help="schema sidecar (name=kind per line)")
    data.add_argument("--no-header", action="store_true", help="input has no header line")
    data.add_argument("--null-token", default="?", help="cell value marking a missing entry")
    data.add_argument("--label", help="label column")
    data.add_argument("--positive", help="label token counted as the positive class")
    data.add_argument("--out-dir", default=".", help="directory for report files")
    data.add_argument("--format", choices=("csv", "json", "both"), default="both")
    data.add_argument("--config", help="key=value configuration file")
    data.add_argument("--seed", type=int, help=f"master seed (fallback: ${SEED_ENV}, then 0)")

    parser = argparse.ArgumentParser(prog="suffstat", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", parents=[data], help="per-feature and average effect sizes")
    p.set_defaults(func=cmd_profile)

    for name in EXPERIMENTS:
        p = sub.add_parser(name, parents=[data], help=f"run {name}")
        p.add_argument("--jobs", type=int, default=None, help="worker processes (default: all cores)")
        p.add_argument("--k", type=int, help="number of subsets")
        p.add_argument("--m", type=int, help="rows per subset")
        p.add_argument("--granularity", choices=(AVERAGED, "per-model"), help="scatter points per subset")
        p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--spec", required=True, help="JSON spec: n_rows, balance, seed, features")
    p.add_argument("--out", required=True, help="CSV path to write")
    p.add_argument("--seed", type=int, help="override the spec seed")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"suffstat: error: {exc}", file=sys.stderr)
        return 2
    except (SuffstatError, OSError) as exc:
        print(f"suffstat: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
