"""Dense and CSR sparse kernels used throughout the engine.

Dense matrices are plain 2-D C-contiguous float32 numpy arrays (row-major).
Sparse matrices use the :class:`CsrMatrix` container below. All kernels are
pure functions: inputs are never aliased into outputs. Products accumulate in
float64 internally and are cast back to float32, which keeps degree-weighted
aggregation sums stable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse

DTYPE = np.float32
INDEX_DTYPE = np.int32


def as_dense(a, name: str = "matrix") -> np.ndarray:
    """Coerce `a` to a 2-D C-contiguous float32 array."""
    out = np.ascontiguousarray(a, dtype=DTYPE)
    if out.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {out.shape}")
    return out


@dataclass(frozen=True)
class CsrMatrix:
    """Compressed-sparse-row matrix with float32 values.

    Invariants (checked at construction): row_ptr is nondecreasing with
    row_ptr[rows] == nnz, column indices lie in [0, cols) and are sorted
    within each row, and all values are finite.
    """

    rows: int
    cols: int
    row_ptr: np.ndarray
    col_idx: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "row_ptr", np.ascontiguousarray(self.row_ptr, dtype=INDEX_DTYPE))
        object.__setattr__(self, "col_idx", np.ascontiguousarray(self.col_idx, dtype=INDEX_DTYPE))
        object.__setattr__(self, "values", np.ascontiguousarray(self.values, dtype=DTYPE))
        if self.row_ptr.shape != (self.rows + 1,):
            raise ValueError(f"row_ptr must have length rows+1={self.rows + 1}, got {self.row_ptr.shape}")
        if self.row_ptr[0] != 0 or np.any(np.diff(self.row_ptr) < 0):
            raise ValueError("row_ptr must start at 0 and be nondecreasing")
        nnz = int(self.row_ptr[-1])
        if self.col_idx.shape != (nnz,) or self.values.shape != (nnz,):
            raise ValueError("col_idx/values length must equal row_ptr[rows]")
        if nnz and (self.col_idx.min() < 0 or self.col_idx.max() >= self.cols):
            raise ValueError("column index out of range")
        # sorted within each row: strictly increasing except at row boundaries
        if nnz > 1:
            boundary = np.zeros(nnz - 1, dtype=bool)
            inner = self.row_ptr[1:-1]
            boundary[inner[(inner > 0) & (inner < nnz)] - 1] = True
            if np.any((np.diff(self.col_idx) <= 0) & ~boundary):
                raise ValueError("column indices must be sorted and unique within each row")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("values must be finite")

    @property
    def nnz(self) -> int:
        return int(self.row_ptr[-1])

    @classmethod
    def from_coo(cls, rows: int, cols: int, coo_rows, coo_cols, values) -> "CsrMatrix":
        """Build from coordinate triples; duplicate entries are summed."""
        m = scipy.sparse.coo_matrix(
            (np.asarray(values, dtype=np.float64), (coo_rows, coo_cols)), shape=(rows, cols)
        ).tocsr()
        m.sum_duplicates()
        m.sort_indices()
        return cls(rows, cols, m.indptr, m.indices, m.data)

    @classmethod
    def from_dense(cls, a) -> "CsrMatrix":
        a = as_dense(a)
        m = scipy.sparse.csr_matrix(a)
        m.sort_indices()
        return cls(a.shape[0], a.shape[1], m.indptr, m.indices, m.data)

    def to_scipy(self, dtype=np.float64) -> scipy.sparse.csr_matrix:
        return scipy.sparse.csr_matrix(
            (self.values.astype(dtype), self.col_idx, self.row_ptr), shape=(self.rows, self.cols)
        )

    def to_dense(self) -> np.ndarray:
        return np.asarray(self.to_scipy().todense(), dtype=DTYPE)


def spmm(a: CsrMatrix, b: np.ndarray) -> np.ndarray:
    """Sparse-dense product a @ b with float64 accumulation."""
    b = as_dense(b, "b")
    if a.cols != b.shape[0]:
        raise ValueError(f"spmm dimension mismatch: a is {a.rows}x{a.cols}, b is {b.shape[0]}x{b.shape[1]}")
    out = a.to_scipy() @ b.astype(np.float64)
    return np.ascontiguousarray(out, dtype=DTYPE)


def spmm_rows(a: CsrMatrix, b: np.ndarray, rows) -> np.ndarray:
    """Rows `rows` of spmm(a, b), in the given order."""
    rows = np.asarray(rows, dtype=np.int64)
    if rows.size and (rows.min() < 0 or rows.max() >= a.rows):
        raise ValueError(f"row index out of range [0, {a.rows})")
    b = as_dense(b, "b")
    if a.cols != b.shape[0]:
        raise ValueError(f"spmm_rows dimension mismatch: a is {a.rows}x{a.cols}, b is {b.shape[0]}x{b.shape[1]}")
    if rows.size == 0:
        return np.zeros((0, b.shape[1]), dtype=DTYPE)
    out = a.to_scipy()[rows] @ b.astype(np.float64)
    return np.ascontiguousarray(out, dtype=DTYPE)


def spmm_t(a: CsrMatrix, b: np.ndarray) -> np.ndarray:
    """Transposed sparse-dense product a.T @ b with float64 accumulation."""
    b = as_dense(b, "b")
    if a.rows != b.shape[0]:
        raise ValueError(f"spmm_t dimension mismatch: a.T is {a.cols}x{a.rows}, b is {b.shape[0]}x{b.shape[1]}")
    out = a.to_scipy().T @ b.astype(np.float64)
    return np.ascontiguousarray(out, dtype=DTYPE)


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Dense product a @ b with float64 accumulation."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"matmul dimension mismatch: {a.shape} @ {b.shape}")
    return (a.astype(np.float64) @ b.astype(np.float64)).astype(DTYPE)


def matmul_tn(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Dense product a.T @ b with float64 accumulation."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"matmul_tn dimension mismatch: {a.shape}.T @ {b.shape}")
    return (a.astype(np.float64).T @ b.astype(np.float64)).astype(DTYPE)


def add_rows(a: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """Add a 1-D bias vector to every row of `a`."""
    a = as_dense(a, "a")
    bias = np.asarray(bias, dtype=DTYPE)
    if bias.shape != (a.shape[1],):
        raise ValueError(f"bias shape {bias.shape} does not match row width {a.shape[1]}")
    return a + bias


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, DTYPE(0))


def relu_grad(grad_out: np.ndarray, pre: np.ndarray) -> np.ndarray:
    """Backward mask for relu: pass gradient where the pre-activation was > 0."""
    if grad_out.shape != pre.shape:
        raise ValueError(f"relu_grad shape mismatch: {grad_out.shape} vs {pre.shape}")
    return np.where(pre > 0, grad_out, DTYPE(0)).astype(DTYPE)


def softmax_rows(x: np.ndarray) -> np.ndarray:
    """Row-wise softmax, shifted by the row max for stability."""
    x = as_dense(x, "x")
    shifted = x - x.max(axis=1, keepdims=True)
    e = np.exp(shifted, dtype=np.float64)
    return (e / e.sum(axis=1, keepdims=True)).astype(DTYPE)
