"""Dense/sparse linear algebra primitives shared by the whole library.

Vectors are 1-D float64 numpy arrays, matrices 2-D float64 numpy arrays.
Everything here is pure: no function mutates its inputs or keeps state, so
concurrent callers are safe.
"""

import numpy as np

__all__ = [
    "PowerIterationError",
    "SparseMatrix",
    "operator_norm",
    "qr_thin",
    "rayleigh_estimates",
    "solve_cubic_scale",
]


class PowerIterationError(RuntimeError):
    """Power iteration failed to converge; carries the last estimate."""

    def __init__(self, message, estimate):
        super().__init__(message)
        self.estimate = estimate


class SparseMatrix:
    """Row-compressed sparse matrix with strictly increasing column indices.

    Stores (indptr, indices, values) in CSR layout.  Construction validates
    that every row's column indices are strictly increasing and in range.
    """

    def __init__(self, n_rows, n_cols, indptr, indices, values):
        indptr = np.asarray(indptr, dtype=np.int64)
        indices = np.asarray(indices, dtype=np.int64)
        values = np.asarray(values, dtype=np.float64)
        if indptr.shape != (n_rows + 1,) or indptr[0] != 0 or indptr[-1] != indices.size:
            raise ValueError("inconsistent indptr")
        if indices.size != values.size:
            raise ValueError("indices and values length mismatch")
        if indices.size and (indices.min() < 0 or indices.max() >= n_cols):
            raise ValueError("column index out of range")
        for i in range(n_rows):
            row = indices[indptr[i]:indptr[i + 1]]
            if row.size > 1 and not np.all(np.diff(row) > 0):
                raise ValueError(f"row {i}: column indices not strictly increasing")
        if not np.all(np.isfinite(values)):
            raise ValueError("non-finite value in sparse matrix")
        self.n_rows = int(n_rows)
        self.n_cols = int(n_cols)
        self.indptr = indptr
        self.indices = indices
        self.values = values
        self._row_ids = np.repeat(np.arange(n_rows, dtype=np.int64), np.diff(indptr))

    @property
    def shape(self):
        return (self.n_rows, self.n_cols)

    @property
    def nnz(self):
        return int(self.values.size)

    @classmethod
    def from_rows(cls, rows, n_cols):
        """Build from a list of per-row [(col, val), ...] lists."""
        indptr = [0]
        indices = []
        values = []
        for row in rows:
            for col, val in row:
                indices.append(col)
                values.append(val)
            indptr.append(len(indices))
        return cls(len(rows), n_cols, indptr, indices, values)

    @classmethod
    def from_dense(cls, array, drop_tol=0.0):
        array = np.asarray(array, dtype=np.float64)
        m, n = array.shape
        rows = []
        for i in range(m):
            keep = np.nonzero(np.abs(array[i]) > drop_tol)[0]
            rows.append(list(zip(keep.tolist(), array[i, keep].tolist())))
        return cls.from_rows(rows, n)

    def row(self, i):
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return self.indices[lo:hi], self.values[lo:hi]

    def matvec(self, x):
        x = np.asarray(x, dtype=np.float64)
        contrib = self.values * x[self.indices]
        return np.bincount(self._row_ids, weights=contrib, minlength=self.n_rows)

    def rmatvec(self, w):
        w = np.asarray(w, dtype=np.float64)
        contrib = self.values * w[self._row_ids]
        return np.bincount(self.indices, weights=contrib, minlength=self.n_cols)

    def to_dense(self):
        out = np.zeros(self.shape)
        out[self._row_ids, self.indices] = self.values
        return out

    def frobenius_norm(self):
        return float(np.sqrt(np.sum(self.values ** 2)))


def qr_thin(mat):
    """Thin QR factorization with a positive-diagonal R sign convention.

    Returns (Q, R) with ``mat = Q @ R``, orthonormal Q columns and R upper
    triangular with strictly positive diagonal, which makes the factorization
    unique and the downstream retraction deterministic.

    Raises ValueError on rank deficiency (|R_ii| < 1e-12 * ||mat||_F).
    """
    mat = np.asarray(mat, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] < mat.shape[1]:
        raise ValueError("qr_thin expects an n x r matrix with n >= r")
    q, r = np.linalg.qr(mat)  # Householder (LAPACK dgeqrf)
    fro = np.linalg.norm(mat)
    diag = np.diag(r)
    if np.any(np.abs(diag) < 1e-12 * fro):
        raise ValueError("qr_thin: matrix is rank deficient")
    signs = np.where(diag > 0, 1.0, -1.0)
    return q * signs, signs[:, None] * r


def rayleigh_estimates(matvec, rmatvec, n, max_iters):
    """Yield successive Rayleigh-quotient estimates of the top eigenvalue of
    the Gram operator, starting the power iteration from the normalized
    all-ones vector (with a deterministic basis-vector fallback if that start
    lies in the null space)."""
    v = np.ones(n) / np.sqrt(n)
    fallback = 0
    for _ in range(max_iters):
        u = rmatvec(matvec(v))
        norm = np.linalg.norm(u)
        if norm == 0.0:
            if fallback >= n:
                return
            v = np.zeros(n)
            v[fallback] = 1.0
            fallback += 1
            continue
        yield float(v @ u)
        v = u / norm


def operator_norm(mat, rel_tol=1e-8, max_iters=10000):
    """Largest singular value via power iteration on the Gram operator.

    Accepts a dense 2-D array or a SparseMatrix.  Deterministic: the start
    vector is the normalized all-ones vector.  Raises PowerIterationError
    (carrying the last estimate) if the relative tolerance is not met within
    ``max_iters`` iterations.
    """
    if isinstance(mat, SparseMatrix):
        matvec, rmatvec, n = mat.matvec, mat.rmatvec, mat.n_cols
        nonzero = mat.nnz > 0
    else:
        arr = np.asarray(mat, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError("operator_norm expects a matrix")
        matvec = lambda x: arr @ x
        rmatvec = lambda w: arr.T @ w
        n = arr.shape[1]
        nonzero = np.any(arr != 0)
    if not nonzero:
        raise ValueError("operator_norm: matrix is zero")
    prev = None
    last = 0.0
    for rho in rayleigh_estimates(matvec, rmatvec, n, max_iters):
        last = rho
        if prev is not None and abs(rho - prev) <= rel_tol * abs(rho):
            return float(np.sqrt(rho))
        prev = rho
    raise PowerIterationError(
        f"operator_norm: no convergence within {max_iters} iterations",
        float(np.sqrt(last)),
    )


def solve_cubic_scale(c, residual_tol=1e-14):
    """Solve t * (c * t^2 + 1) = 1 for the unique root t in (0, 1].

    Safeguarded Newton with a bisection fallback on [0, 1]; the map is
    strictly increasing so the bracket always shrinks.  Cardano's formula is
    avoided because it cancels badly for large c.
    """
    if c < 0:
        raise ValueError("solve_cubic_scale requires c >= 0")
    if c == 0.0:
        return 1.0

    def phi(t):
        return t * (c * t * t + 1.0) - 1.0

    lo, hi = 0.0, 1.0
    t = 1.0
    for _ in range(200):
        val = phi(t)
        if abs(val) <= residual_tol:
            return t
        if val > 0:
            hi = t
        else:
            lo = t
        step = val / (3.0 * c * t * t + 1.0)
        t_new = t - step
        if not (lo < t_new < hi):
            t_new = 0.5 * (lo + hi)
        if t_new == t:
            break
        t = t_new
    if abs(phi(t)) <= residual_tol:
        return t
    raise ArithmeticError(f"solve_cubic_scale: residual {phi(t):.3e} above tolerance")
