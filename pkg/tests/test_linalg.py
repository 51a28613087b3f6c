import numpy as np
import pytest

from wavegas_lab.linalg import (
    CsrMatrix,
    add_rows,
    matmul,
    matmul_tn,
    relu,
    relu_grad,
    softmax_rows,
    spmm,
    spmm_rows,
    spmm_t,
)


def random_csr(rng, rows, cols, density=0.4):
    dense = rng.uniform(-2.0, 2.0, size=(rows, cols)).astype(np.float32)
    dense[rng.random((rows, cols)) >= density] = 0.0
    return CsrMatrix.from_dense(dense), dense


def test_spmm_identity():
    ident = CsrMatrix.from_dense(np.eye(2, dtype=np.float32))
    b = np.array([[3.0, -1.0], [0.5, 2.0]], dtype=np.float32)
    np.testing.assert_array_equal(spmm(ident, b), b)


def test_spmm_symmetric_half_matrix():
    a = CsrMatrix.from_dense(np.full((2, 2), 0.5, dtype=np.float32))
    out = spmm(a, np.eye(2, dtype=np.float32))
    np.testing.assert_allclose(out, np.full((2, 2), 0.5), atol=0)


def test_spmm_matches_densified_product():
    # independent oracle: densify the sparse operand and multiply in float64
    rng = np.random.default_rng(7)
    for _ in range(100):
        rows = int(rng.integers(1, 33))
        inner = int(rng.integers(1, 33))
        cols = int(rng.integers(1, 33))
        a, dense = random_csr(rng, rows, inner)
        b = rng.uniform(-2.0, 2.0, size=(inner, cols)).astype(np.float32)
        expected = dense.astype(np.float64) @ b.astype(np.float64)
        np.testing.assert_allclose(spmm(a, b), expected, atol=1e-6)


def test_spmm_rows_is_row_selection_of_spmm():
    rng = np.random.default_rng(11)
    for _ in range(50):
        a, _ = random_csr(rng, 12, 9)
        b = rng.uniform(-1.0, 1.0, size=(9, 5)).astype(np.float32)
        full = spmm(a, b)
        k = int(rng.integers(0, 13))
        rows = rng.choice(12, size=k, replace=False)
        np.testing.assert_array_equal(spmm_rows(a, b, rows), full[rows])


def test_spmm_rows_all_rows_identical_to_spmm():
    rng = np.random.default_rng(3)
    a, _ = random_csr(rng, 5, 5)
    b = rng.uniform(-1.0, 1.0, size=(5, 3)).astype(np.float32)
    np.testing.assert_array_equal(spmm_rows(a, b, np.arange(5)), spmm(a, b))


def test_spmm_rows_empty_selection():
    a = CsrMatrix.from_dense(np.eye(4, dtype=np.float32))
    b = np.ones((4, 3), dtype=np.float32)
    out = spmm_rows(a, b, [])
    assert out.shape == (0, 3)


def test_spmm_rows_single_row_matches_densify_oracle():
    rng = np.random.default_rng(21)
    a, dense = random_csr(rng, 5, 5)
    b = rng.uniform(-1.0, 1.0, size=(5, 3)).astype(np.float32)
    expected = dense.astype(np.float64) @ b.astype(np.float64)
    np.testing.assert_allclose(spmm_rows(a, b, [2]), expected[[2]], atol=1e-6)


def test_spmm_rows_out_of_range():
    a = CsrMatrix.from_dense(np.eye(3, dtype=np.float32))
    b = np.ones((3, 2), dtype=np.float32)
    with pytest.raises(ValueError):
        spmm_rows(a, b, [3])


def test_spmm_t_matches_transposed_densify_oracle():
    rng = np.random.default_rng(13)
    for _ in range(50):
        a, dense = random_csr(rng, 8, 6)
        b = rng.uniform(-1.0, 1.0, size=(8, 4)).astype(np.float32)
        expected = dense.astype(np.float64).T @ b.astype(np.float64)
        np.testing.assert_allclose(spmm_t(a, b), expected, atol=1e-6)


def test_spmm_dimension_mismatch():
    a = CsrMatrix.from_dense(np.eye(3, dtype=np.float32))
    with pytest.raises(ValueError):
        spmm(a, np.ones((4, 2), dtype=np.float32))


def test_matmul_hand_values():
    a = np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]], dtype=np.float32)
    b = np.array([[1.0, 0.0, -1.0], [2.0, 1.0, 0.0]], dtype=np.float32)
    # hand multiplication
    expected = np.array([[5.0, 2.0, -1.0], [11.0, 4.0, -3.0], [17.0, 6.0, -5.0]], dtype=np.float32)
    np.testing.assert_array_equal(matmul(a, b), expected)
    np.testing.assert_array_equal(matmul_tn(a.T.copy(), b), expected)


def test_matmul_dimension_mismatch():
    with pytest.raises(ValueError):
        matmul(np.ones((2, 3), dtype=np.float32), np.ones((2, 3), dtype=np.float32))


def test_add_rows():
    a = np.zeros((2, 3), dtype=np.float32)
    out = add_rows(a, np.array([1.0, 2.0, 3.0], dtype=np.float32))
    np.testing.assert_array_equal(out, np.array([[1, 2, 3], [1, 2, 3]], dtype=np.float32))
    with pytest.raises(ValueError):
        add_rows(a, np.ones(2, dtype=np.float32))


def test_relu_and_mask():
    x = np.array([[-1.0, 2.0]], dtype=np.float32)
    np.testing.assert_array_equal(relu(x), np.array([[0.0, 2.0]], dtype=np.float32))
    g = np.array([[5.0, 5.0]], dtype=np.float32)
    np.testing.assert_array_equal(relu_grad(g, x), np.array([[0.0, 5.0]], dtype=np.float32))
    # gradient is zero at exactly zero pre-activation
    np.testing.assert_array_equal(relu_grad(g, np.zeros((1, 2), dtype=np.float32)), np.zeros((1, 2)))


def test_softmax_constant_row():
    out = softmax_rows(np.full((1, 4), 3.25, dtype=np.float32))
    np.testing.assert_allclose(out, np.full((1, 4), 0.25), atol=1e-6)


def test_softmax_rows_sum_to_one_and_shift_invariant():
    rng = np.random.default_rng(5)
    for _ in range(100):
        x = rng.uniform(-30.0, 30.0, size=(int(rng.integers(1, 9)), int(rng.integers(1, 9))))
        x = x.astype(np.float32)
        s = softmax_rows(x)
        np.testing.assert_allclose(s.sum(axis=1), 1.0, atol=1e-6)
        shifted = softmax_rows(x + np.float32(7.5))
        np.testing.assert_allclose(shifted, s, atol=1e-5)


def test_all_kernels_produce_finite_float32():
    rng = np.random.default_rng(17)
    for _ in range(20):
        a, _ = random_csr(rng, 6, 5)
        b = rng.uniform(-50.0, 50.0, size=(5, 4)).astype(np.float32)
        c = rng.uniform(-50.0, 50.0, size=(6, 4)).astype(np.float32)
        for out in (
            spmm(a, b),
            spmm_rows(a, b, [0, 3]),
            spmm_t(a, c),
            matmul(b, rng.uniform(-1, 1, size=(4, 3)).astype(np.float32)),
            add_rows(c, rng.uniform(-1, 1, size=4).astype(np.float32)),
            relu(c),
            softmax_rows(c),
        ):
            assert out.dtype == np.float32
            assert np.all(np.isfinite(out))


def test_outputs_are_fresh_arrays():
    a = CsrMatrix.from_dense(np.eye(2, dtype=np.float32))
    b = np.ones((2, 2), dtype=np.float32)
    out = spmm(a, b)
    out[0, 0] = 99.0
    assert b[0, 0] == 1.0


def test_csr_invariant_validation():
    with pytest.raises(ValueError):
        CsrMatrix(2, 2, np.array([0, 2, 1]), np.array([0, 1]), np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        CsrMatrix(2, 2, np.array([0, 2, 2]), np.array([1, 0]), np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        CsrMatrix(1, 2, np.array([0, 1]), np.array([2]), np.array([1.0]))
    with pytest.raises(ValueError):
        CsrMatrix(1, 2, np.array([0, 1]), np.array([0]), np.array([np.inf]))
