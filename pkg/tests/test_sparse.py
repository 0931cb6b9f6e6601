import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from lnpsvor.sparse import (DataFormatError, SparseDataset, SparseVector, decompose, load_libsvm,
                            parse_libsvm_lines, stratified_split, write_libsvm)


def _write(tmp_path, text, name="d.svm"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_parse_single_line():
    labels, indptr, indices, values = parse_libsvm_lines(["3 1:0.5 4:2.0"])
    assert labels == [3]
    assert indices == [0, 3] and values == [0.5, 2.0]


def test_load_row_and_label(tmp_path):
    d = load_libsvm(_write(tmp_path, "3 1:0.5 4:2.0\n1 2:1\n"))
    row = d.row(0)
    assert row.indices.tolist() == [0, 3]
    assert row.values.tolist() == [0.5, 2.0]
    assert d.original_labels(d.y).tolist() == [3, 1]


def test_labels_remapped_in_order(tmp_path):
    d = load_libsvm(_write(tmp_path, "5 1:1\n2 1:2\n9 1:3\n5 2:1\n"))
    assert d.y.tolist() == [2, 1, 3, 2]
    assert d.labels.tolist() == [2, 5, 9]
    assert d.p == 3


def test_bias_augmentation(tmp_path):
    d = load_libsvm(_write(tmp_path, "1 1:1 4:2\n2 2:3\n"), bias=1.0)
    assert d.m == 5
    assert d.bias_augmented
    for row in d.rows:
        assert row.indices[-1] == 4 and row.values[-1] == 1.0


@pytest.mark.parametrize("text, where", [
    ("1 1:0.5\nx 1:2\n", "line 2"),
    ("1 1:0.5\n2 3:1 2:1\n", "line 2"),
    ("1 1:0.5\n2 3:1 3:1\n", "line 2"),
    ("1 1:0.5\n2 0:1\n", "line 2"),
    ("1 1:0.5\n2 1:abc\n", "line 2"),
    ("1 1:0.5\n2 1\n", "line 2"),
])
def test_malformed_lines_report_line_number(tmp_path, text, where):
    with pytest.raises(DataFormatError, match=where):
        load_libsvm(_write(tmp_path, text))


def test_single_label_rejected(tmp_path):
    with pytest.raises(DataFormatError, match="2 distinct"):
        load_libsvm(_write(tmp_path, "1 1:1\n1 2:1\n"))


def test_missing_rank_rejected():
    with pytest.raises(ValueError):
        SparseDataset(sp.csr_matrix(np.eye(3)), np.array([1, 3, 3]))


def test_sparse_vector_invariants():
    v = SparseVector(np.array([0, 2]), np.array([3.0, 4.0]))
    assert v.squared_norm == pytest.approx(25.0, rel=1e-12)
    with pytest.raises(ValueError):
        SparseVector(np.array([2, 1]), np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        SparseVector(np.array([0, 1]), np.array([1.0, 0.0]))


def test_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    X = sp.random(40, 12, density=0.3, random_state=4, format="csr")
    X.data = rng.standard_normal(X.nnz) * 10 ** rng.uniform(-5, 5, X.nnz)
    y = np.tile([1, 2, 3, 4], 10)
    d = SparseDataset(X, y, labels=np.array([10, 20, 30, 40]))
    path = tmp_path / "rt.svm"
    write_libsvm(d, path)
    back = load_libsvm(path, n_features=12)
    assert back.n == d.n and back.m == d.m
    assert np.array_equal(back.original_labels(back.y), d.original_labels(d.y))
    assert (back.X != d.X).nnz == 0


def test_round_trip_with_bias(tmp_path):
    path = _write(tmp_path, "1 1:0.25 3:1e-07\n2 2:-3\n")
    d = load_libsvm(path, bias=1.0)
    out = tmp_path / "out.svm"
    write_libsvm(d, out)
    back = load_libsvm(out, bias=1.0)
    assert (back.X != d.X).nnz == 0


def test_squared_norm_cache_after_load_and_bias(tmp_path):
    d = load_libsvm(_write(tmp_path, "1 1:0.5 2:2\n2 3:-1.5\n"), bias=2.0)
    for i, row in enumerate(d.rows):
        assert row.squared_norm == pytest.approx(float(row.values @ row.values), rel=1e-12)
        assert d.squared_norms[i] == pytest.approx(row.squared_norm, rel=1e-12)


def _ranked(counts):
    y = np.concatenate([np.full(c, r + 1) for r, c in enumerate(counts)])
    X = sp.csr_matrix(np.arange(1, y.size + 1, dtype=float)[:, None])
    return SparseDataset(X, y)


def test_split_counts():
    d = _ranked([20] * 5)
    train, test = stratified_split(d, 0.3, seed=0)
    assert np.bincount(test.y)[1:].tolist() == [6] * 5
    assert np.bincount(train.y)[1:].tolist() == [14] * 5


def test_split_half_of_two():
    train, test = stratified_split(_ranked([2, 2, 2]), 0.5, seed=1)
    assert np.bincount(test.y)[1:].tolist() == [1, 1, 1]
    assert np.bincount(train.y)[1:].tolist() == [1, 1, 1]


def test_split_deterministic_and_partitions():
    d = _ranked([7, 9, 11])
    a1, b1 = stratified_split(d, 0.3, seed=5)
    a2, b2 = stratified_split(d, 0.3, seed=5)
    assert (a1.X != a2.X).nnz == 0 and (b1.X != b2.X).nnz == 0
    vals = np.sort(np.concatenate([a1.X.toarray().ravel(), b1.X.toarray().ravel()]))
    assert vals.tolist() == list(range(1, 28))


def test_split_rejects_tiny_rank():
    with pytest.raises(ValueError):
        stratified_split(_ranked([1, 5]), 0.3, seed=0)


def test_decompose_example():
    dec = decompose(np.array([1, 2, 2, 3]), 2)
    assert dec.left.tolist() == [0]
    assert dec.middle.tolist() == [1, 2]
    assert dec.right.tolist() == [3]
    assert dec.signed_label.tolist() == [-1, -1, -1, 1]


def test_decompose_edges():
    y = np.array([1, 2, 3, 3])
    assert decompose(y, 1).left.size == 0
    assert decompose(y, 3).right.size == 0
    with pytest.raises(ValueError):
        decompose(y, 4)
    with pytest.raises(ValueError):
        decompose(y, 0)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(1, 5), min_size=1, max_size=40))
def test_decompose_partition_and_label_recovery(labels):
    y = np.array(labels)
    p = int(y.max())
    seen_right = np.zeros(y.size, dtype=int)
    for k in range(1, p + 1):
        dec = decompose(y, k)
        parts = np.concatenate([dec.left, dec.middle, dec.right])
        assert np.array_equal(np.sort(parts), np.arange(y.size))
        assert np.array_equal(dec.signed_label == 1, y > k)
        seen_right[dec.right] += 1
    assert np.array_equal(y, 1 + seen_right)
