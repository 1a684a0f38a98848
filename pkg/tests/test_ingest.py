import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from suffstat import ingest
from suffstat.errors import DegenerateLabelError, InsufficientDataError, ParseError


def test_parse_with_header_trims_cells():
    t = ingest.parse_table(b"a, b\n1, x\n2, y", header=True)
    assert t.header == ("a", "b")
    assert t.rows == (("1", "x"), ("2", "y"))


def test_parse_without_header_synthesizes_names():
    t = ingest.parse_table("1,x\n2,y\n", header=False)
    assert t.header == ("col0", "col1")
    assert len(t) == 2


def test_ragged_row_names_line():
    with pytest.raises(ParseError) as err:
        ingest.parse_table("a,b\n1", header=True)
    assert err.value.line == 2
    assert "line 2" in str(err.value)


def test_empty_input():
    with pytest.raises(ParseError):
        ingest.parse_table(b"")


def test_blank_lines_skipped():
    t = ingest.parse_table("a,b\n\n1,2\n\n", header=True)
    assert t.rows == (("1", "2"),)


def test_drop_incomplete_rows():
    t = ingest.RawTable(("n", "c"), (("1", "x"), ("?", "y"), ("2", "z")))
    assert ingest.drop_incomplete_rows(t).rows == (("1", "x"), ("2", "z"))


def test_drop_incomplete_rows_identity_and_empty_cells():
    t = ingest.RawTable(("n", "c"), (("1", "x"), ("2", "z")))
    assert ingest.drop_incomplete_rows(t) == t
    t2 = ingest.RawTable(("n", "c"), (("1", ""), ("2", "z")))
    assert ingest.drop_incomplete_rows(t2).rows == (("2", "z"),)


@pytest.mark.parametrize(
    "column, codes, mapping",
    [
        (["red", "blue", "red"], [0, 1, 0], {"red": 0, "blue": 1}),
        (["x", "x"], [0, 0], {"x": 0}),
        (["b", "a", "b", "c"], [0, 1, 0, 2], {"b": 0, "a": 1, "c": 2}),
    ],
)
def test_encode_categorical(column, codes, mapping):
    got_codes, got_map = ingest.encode_categorical(column)
    assert got_codes == codes
    assert got_map == mapping


@given(st.lists(st.sampled_from(["a", "b", "c", "dd", ">50K"]), min_size=1))
def test_encode_roundtrip(column):
    codes, mapping = ingest.encode_categorical(column)
    assert ingest.decode_categorical(codes, mapping) == column
    assert all(0 <= c < len(mapping) for c in codes)


def test_standardize_examples():
    z, (mean, sd) = ingest.standardize_column([1, 2, 3])
    assert mean == 2.0
    assert sd == pytest.approx(np.sqrt(2 / 3), abs=1e-15)
    np.testing.assert_allclose(z, [-1.224744871391589, 0.0, 1.224744871391589], atol=1e-12)

    z, (_, sd) = ingest.standardize_column([5, 5, 5])
    assert sd == 0.0
    assert list(z) == [0.0, 0.0, 0.0]

    z, _ = ingest.standardize_column([3.5, -1.0], fit_params=(0.0, 1.0))
    assert list(z) == [3.5, -1.0]


@settings(max_examples=200)
@given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=50))
def test_standardize_moments(values):
    v = np.array(values)
    if v.std() < 1e-3:
        return
    z, _ = ingest.standardize_column(v)
    assert abs(z.mean()) < 1e-9
    assert abs(z.std() - 1.0) < 1e-9


def test_partition_examples():
    part = ingest.partition_subsets(33_000, 66, 500, seed=3)
    assert len(part.subsets) == 66
    assert all(len(s) == 500 for s in part.subsets)
    flat = [i for s in part.subsets for i in s]
    assert len(set(flat)) == 33_000

    one = ingest.partition_subsets(10, 1, 10, seed=0)
    assert sorted(one.subsets[0]) == list(range(10))

    assert ingest.partition_subsets(100, 3, 20, 5) == ingest.partition_subsets(100, 3, 20, 5)


def test_partition_insufficient_rows():
    with pytest.raises(InsufficientDataError):
        ingest.partition_subsets(10, 3, 4, 0)


@given(st.integers(1, 300), st.integers(1, 10), st.integers(1, 30), st.integers(0, 2**32))
def test_partition_blocks_disjoint(n, k, m, seed):
    if k * m > n:
        return
    part = ingest.partition_subsets(n, k, m, seed)
    sets = [set(s) for s in part.subsets]
    assert all(len(s) == m for s in sets)
    assert sum(len(s) for s in sets) == len(set().union(*sets))
    assert all(0 <= i < n for s in sets for i in s)


def test_stratified_split_counts():
    # fixed synthetic labels: 120 positives, 380 negatives
    labels = np.array([1] * 120 + [0] * 380)
    sp = ingest.stratified_split(np.arange(500), labels, 0.8, seed=1)
    # ceil(0.8*120) + ceil(0.8*380) = 96 + 304
    assert len(sp.train_indices) == 400
    assert len(sp.valid_indices) == 100
    assert set(sp.train_indices).isdisjoint(sp.valid_indices)
    assert sorted(sp.train_indices + sp.valid_indices) == list(range(500))

    odd = np.array([1] * 121 + [0] * 379)
    sp = ingest.stratified_split(np.arange(500), odd, 0.8, seed=1)
    # ceil(96.8) + ceil(303.2) = 97 + 304, one above the nominal 400
    assert len(sp.train_indices) == 401


def test_stratified_split_degenerate():
    with pytest.raises(DegenerateLabelError):
        ingest.stratified_split(np.arange(5), np.ones(5, dtype=int), 0.8, 0)


def test_stratified_split_minimal():
    sp = ingest.stratified_split([10, 11], [1, 0], 0.5, seed=0)
    assert len(sp.train_indices) == 1 and len(sp.valid_indices) == 1
    assert {sp.train_indices[0], sp.valid_indices[0]} == {10, 11}


@given(
    st.lists(st.integers(0, 1), min_size=4, max_size=80),
    st.floats(0.05, 0.95),
    st.integers(0, 1000),
)
def test_stratified_split_properties(labels, fraction, seed):
    lab = np.array(labels)
    if lab.min() == lab.max():
        return
    idx = np.arange(100, 100 + lab.size)
    sp = ingest.stratified_split(idx, lab, fraction, seed)
    tr, va = set(sp.train_indices), set(sp.valid_indices)
    assert tr.isdisjoint(va)
    assert tr | va == set(idx.tolist())
    for c in (0, 1):
        members = set(idx[lab == c].tolist())
        if len(members) >= 2:
            assert members & tr and members & va
    assert sp == ingest.stratified_split(idx, lab, fraction, seed)


def test_binarize_label():
    assert list(ingest.binarize_label([">50K", "<=50K", ">50K"], ">50K")) == [1, 0, 1]
    assert list(ingest.binarize_label(["a", "a"], "a")) == [1, 1]
    assert list(ingest.binarize_label(["Male", "Female"], "Male")) == [1, 0]


def test_binarize_label_missing_token_warns(caplog):
    bits = ingest.binarize_label(["x", "y"], "z")
    assert list(bits) == [0, 0]
    assert "not present" in caplog.text


def test_schema_sidecar_roundtrip():
    schema = ingest.parse_schema("# comment\nage=numeric\nsex=categorical\n")
    assert schema.names == ["age", "sex"]
    assert ingest.parse_schema(ingest.format_schema(schema)) == schema
    with pytest.raises(ParseError):
        ingest.parse_schema("age=number\n")


def test_schema_unique_names():
    with pytest.raises(ValueError):
        ingest.FeatureSchema((ingest.Column("a", "numeric"), ingest.Column("a", "categorical")))


def test_encode_table_and_standardized():
    t = ingest.parse_table("x,c,y\n1,a,p\n2,b,n\n3,a,p\n", header=True)
    schema = ingest.parse_schema("x=numeric\nc=categorical\ny=categorical\n").with_label("y")
    enc = ingest.encode_table(t, schema)
    assert enc.names == ["x", "c"]
    np.testing.assert_array_equal(enc.values, [[1, 0], [2, 1], [3, 0]])
    std = enc.standardized()
    assert abs(std.values[:, 0].mean()) < 1e-12
    assert abs(std.values[:, 0].std() - 1) < 1e-12
    np.testing.assert_array_equal(std.values[:, 1], [0, 1, 0])
    assert std.standardization_params["x"][0] == 2.0
    dropped = enc.drop_feature(0)
    assert dropped.names == ["c"] and dropped.values.shape == (3, 1)
