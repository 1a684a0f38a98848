import json
import re
from pathlib import Path

import pytest

from suffstat import cli

FAST_CONFIG = """\
# small run for tests
label = label
positive = 1
k = 4
m = 150
fractions = 0.25,0.5,0.75,1.0
logistic.max_iter = 100
tree.max_depth = 4
forest.n_trees = 5
forest.max_depth = 4
mlp.epochs = 5
"""


def _spec(tmp_path, features, n_rows=1000, seed=0):
    p = tmp_path / "spec.json"
    p.write_text(json.dumps({"n_rows": n_rows, "balance": 0.5, "seed": seed, "features": features}))
    return p


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("data")
    spec = _spec(
        tmp,
        [
            {"kind": "numeric", "target": 0.6},
            {"kind": "numeric", "target": 0.1},
            {"kind": "categorical", "target": 2.5},
        ],
        n_rows=800,
        seed=5,
    )
    out = tmp / "synth.csv"
    assert cli.main(["synth", "--spec", str(spec), "--out", str(out)]) == 0
    cfg = tmp / "fast.cfg"
    cfg.write_text(FAST_CONFIG)
    return out, Path(str(out) + ".schema"), cfg


def _common(dataset, out_dir):
    data, schema, cfg = dataset
    return ["--input", str(data), "--schema", str(schema), "--config", str(cfg), "--out-dir", str(out_dir)]


def _tree_bytes(root: Path) -> dict:
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file() and p.name != "timings.txt"}


def test_synth_line_count(tmp_path):
    spec = _spec(tmp_path, [{"kind": "numeric", "target": 0.5}, {"kind": "categorical", "target": 2.0}])
    out = tmp_path / "s.csv"
    assert cli.main(["synth", "--spec", str(spec), "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 1001


def test_synth_rejects_nonpositive_or(tmp_path, capsys):
    spec = _spec(tmp_path, [{"kind": "categorical", "target": 0.0}])
    assert cli.main(["synth", "--spec", str(spec), "--out", str(tmp_path / "x.csv")]) == 2
    assert "features[0]" in capsys.readouterr().err


def test_profile_round_trip_recovers_targets(tmp_path):
    spec = _spec(
        tmp_path,
        [{"kind": "numeric", "target": 0.0}, {"kind": "numeric", "target": 0.0}],
        n_rows=20_000,
    )
    data = tmp_path / "null.csv"
    assert cli.main(["synth", "--spec", str(spec), "--out", str(data)]) == 0
    rc = cli.main([
        "profile", "--input", str(data), "--schema", str(data) + ".schema",
        "--label", "label", "--positive", "1", "--out-dir", str(tmp_path),
    ])
    assert rc == 0
    doc = json.loads((tmp_path / "profile-label.json").read_text())
    assert doc["average"] < 0.05
    assert [f["feature"] for f in doc["features"]] == ["num0", "num1"]
    csv_lines = (tmp_path / "profile-label.csv").read_text().splitlines()
    assert csv_lines[0] == "feature,kind,raw,magnitude,flags"
    assert csv_lines[-1].startswith("AVERAGE,")


def test_profile_missing_label_exit_2(dataset, tmp_path, capsys):
    data, schema, _ = dataset
    rc = cli.main(["profile", "--input", str(data), "--schema", str(schema), "--label", "nosuch", "--positive", "1",
                   "--out-dir", str(tmp_path)])
    assert rc == 2
    assert "nosuch" in capsys.readouterr().err


def test_missing_input_exit_2(tmp_path):
    assert cli.main(["profile", "--adult", "--input", str(tmp_path / "none.csv"), "--label", "income"]) == 2


def test_unwritable_out_dir_exit_1(dataset, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    data, schema, _ = dataset
    rc = cli.main(["profile", "--input", str(data), "--schema", str(schema), "--label", "label", "--positive", "1",
                   "--out-dir", str(blocker / "sub")])
    assert rc == 1


def test_infeasible_partition_exit_2(dataset, tmp_path):
    rc = cli.main(["exp1-subsets", *_common(dataset, tmp_path), "--k", "100", "--m", "500", "--jobs", "1"])
    assert rc == 2


def test_bad_config_exit_2(dataset, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("forest.n_leaves = 3\n")
    data, schema, _ = dataset
    rc = cli.main(["exp1-subsets", "--input", str(data), "--schema", str(schema), "--config", str(cfg),
                   "--label", "label", "--positive", "1", "--out-dir", str(tmp_path)])
    assert rc == 2


@pytest.mark.parametrize("command", ["exp1-subsets", "exp1-ablation", "exp2"])
def test_experiment_byte_identical_across_runs_and_jobs(dataset, tmp_path, command):
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main([command, *_common(dataset, a), "--seed", "7", "--jobs", "1"]) == 0
    assert cli.main([command, *_common(dataset, b), "--seed", "7", "--jobs", "2"]) == 0
    ta, tb = _tree_bytes(a), _tree_bytes(b)
    assert ta.keys() == tb.keys()
    assert ta == tb
    manifest = json.loads((a / "manifest.json").read_text())
    assert manifest["seed"] == 7
    for name in manifest["outputs"]:
        assert (a / name).is_file()


def test_seed_precedence(dataset, tmp_path, monkeypatch):
    monkeypatch.setenv(cli.SEED_ENV, "11")
    assert cli.main(["exp1-subsets", *_common(dataset, tmp_path / "env"), "--jobs", "1"]) == 0
    assert json.loads((tmp_path / "env" / "manifest.json").read_text())["seed"] == 11
    assert cli.main(["exp1-subsets", *_common(dataset, tmp_path / "flag"), "--seed", "3", "--jobs", "1"]) == 0
    assert json.loads((tmp_path / "flag" / "manifest.json").read_text())["seed"] == 3


def test_svg_r_squared_matches_summary(dataset, tmp_path):
    assert cli.main(["exp2", *_common(dataset, tmp_path), "--jobs", "1"]) == 0
    for stem in ("exp2-log-slope-label", "exp2-gap-slope-label"):
        summary = json.loads((tmp_path / f"{stem}-summary.json").read_text())["summary"]
        svg = (tmp_path / f"{stem}-scatter.svg").read_text()
        embedded = float(re.search(r'data-r-squared="([^"]+)"', svg).group(1))
        printed = re.search(r"R² = ([0-9.]+)<", svg).group(1)
        assert embedded == summary["r_squared"]
        assert printed == f"{summary['r_squared']:.4f}"
    assert len(list((tmp_path / "curves").glob("*.svg"))) == 16
    lines = (tmp_path / "exp2-curves-label.csv").read_text().splitlines()
    assert lines[0] == "subset,family,effect_size,n_train,train_error,valid_error"


def test_subset_outputs(dataset, tmp_path):
    assert cli.main(["exp1-subsets", *_common(dataset, tmp_path), "--jobs", "1", "--format", "csv"]) == 0
    lines = (tmp_path / "exp1-subsets-label-records.csv").read_text().splitlines()
    assert lines[0] == "id,family,effect_size,outcome"
    assert len(lines) == 1 + 4 * 5
    summary = json.loads((tmp_path / "exp1-subsets-label-summary.json").read_text())
    assert summary["summary"]["n_points"] == 4
    assert not (tmp_path / "exp1-subsets-label-records.json").exists()
