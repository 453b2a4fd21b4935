import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sdavs.dataset import (LabeledMatrix, encode_labels, load_tsv, read_table,
                           stratified_folds, write_tsv)
from sdavs.exceptions import DataFormatError, DataValidationError


def _write(path, text):
    path.write_text(text)
    return path


def test_small_class_rejected(tmp_path):
    f = _write(tmp_path / "a.tsv", "label\tx1\tx2\na\t1\t2\na\t3\t4\nb\t5\t6\n")
    with pytest.raises(DataValidationError):
        load_tsv(f)


def test_smallest_valid_input(tmp_path):
    f = _write(tmp_path / "a.tsv", "label\tx1\tx2\na\t1\t2\na\t3\t4\nb\t5\t6\nb\t7\t8\n")
    data = load_tsv(f)
    assert data.n_classes == 2
    assert data.counts.tolist() == [2, 2]
    assert data.feature_names == ["x1", "x2"]
    assert data.X[3].tolist() == [7.0, 8.0]


def test_nan_cell_named(tmp_path):
    f = _write(tmp_path / "a.tsv", "label\tx1\tx2\na\t1\tNaN\na\t3\t4\nb\t5\t6\nb\t7\t8\n")
    with pytest.raises(DataValidationError, match=r"row 2, column 'x2'"):
        load_tsv(f)


def test_parse_error_has_position(tmp_path):
    f = _write(tmp_path / "a.tsv", "label\tx1\na\t1\na\toops\nb\t5\nb\t7\n")
    with pytest.raises(DataFormatError, match=r"row 3, column 'x1'"):
        load_tsv(f)


def test_ragged_row(tmp_path):
    f = _write(tmp_path / "a.tsv", "label\tx1\na\t1\t2\n")
    with pytest.raises(DataFormatError, match="row 2"):
        load_tsv(f)


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError, match="nope.tsv"):
        load_tsv(tmp_path / "nope.tsv")


def test_missing_label_column(tmp_path):
    f = _write(tmp_path / "a.tsv", "cls\tx1\na\t1\n")
    with pytest.raises(DataFormatError, match="label column"):
        load_tsv(f)


def test_labels_lexicographic():
    y, names = encode_labels(["tumor", "normal", "tumor", "10", "9"])
    assert names == ["10", "9", "normal", "tumor"]
    assert y.tolist() == [4, 3, 4, 1, 2]


def test_csv_and_transpose(tmp_path):
    f = _write(tmp_path / "a.csv", "label,x1\na,1\na,2\nb,3\nb,4\n")
    assert load_tsv(f).X.ravel().tolist() == [1, 2, 3, 4]
    g = _write(tmp_path / "t.tsv", "id\ts1\ts2\ts3\ts4\nlabel\ta\ta\tb\tb\ng1\t1\t2\t3\t4\ng2\t5\t6\t7\t8\n")
    data = load_tsv(g, transpose=True, id_column="id")
    assert data.X.shape == (4, 2)
    assert data.feature_names == ["g1", "g2"]
    assert data.X[:, 1].tolist() == [5, 6, 7, 8]


def test_read_table_without_labels(tmp_path):
    f = _write(tmp_path / "a.tsv", "x1\tx2\n1\t2\n3\t4\n")
    table = read_table(f, require_label=False)
    assert table.labels is None
    assert table.X.shape == (2, 2)


def test_roundtrip(tmp_path, rng):
    data = LabeledMatrix(rng.standard_normal((6, 3)), np.array([1, 1, 2, 2, 3, 3]),
                         ["a", "b", "c"], ["x", "y", "z"])
    write_tsv(tmp_path / "r.tsv", data)
    back = load_tsv(tmp_path / "r.tsv")
    np.testing.assert_array_equal(back.X, data.X)
    np.testing.assert_array_equal(back.y, data.y)
    assert back.label_names == ["x", "y", "z"]


def test_matrix_invariants():
    with pytest.raises(DataValidationError):
        LabeledMatrix(np.array([[1.0], [np.inf], [1], [2]]), np.array([1, 1, 2, 2]))
    with pytest.raises(DataValidationError):
        LabeledMatrix(np.zeros((4, 1)), np.array([0, 1, 2, 2]))


def test_folds_exact_balance():
    y = np.repeat([1, 2], 10)
    for train, test in stratified_folds(y, folds=10):
        assert sorted(y[test].tolist()) == [1, 2]
        assert len(train) == 18


def test_folds_prostate_shape():
    y = np.repeat([1, 2], [52, 50])
    parts = stratified_folds(y, folds=10, repetitions=20, seed=3)
    assert len(parts) == 200
    sizes = {int(np.sum(y[test] == 1)) for _, test in parts}
    assert sizes <= {5, 6}


def test_folds_deterministic():
    y = np.repeat([1, 2, 3], [7, 9, 11])
    a = stratified_folds(y, 5, 3, seed=9)
    b = stratified_folds(y, 5, 3, seed=9)
    assert all(np.array_equal(p[1], q[1]) for p, q in zip(a, b))


def test_folds_too_few():
    with pytest.raises(DataValidationError):
        stratified_folds(np.repeat([1, 2], [3, 10]), folds=5)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(2, 15), min_size=2, max_size=4), st.integers(2, 5),
       st.integers(0, 2**16))
def test_folds_partition_property(counts, folds, seed):
    counts = [max(c, folds) for c in counts]
    y = np.repeat(np.arange(1, len(counts) + 1), counts)
    parts = stratified_folds(y, folds, repetitions=2, seed=seed)
    for r in range(2):
        tests = [parts[r * folds + f][1] for f in range(folds)]
        assert np.array_equal(np.sort(np.concatenate(tests)), np.arange(y.size))
        for k in range(1, len(counts) + 1):
            per_fold = [int(np.sum(y[t] == k)) for t in tests]
            assert max(per_fold) - min(per_fold) <= 1
