"""Dense linear algebra kernels: full SVD, randomized truncated SVD, CSR.

The full decomposition is a one-sided Jacobi SVD. The working matrix is
copied column-major into ``gt`` (one row per original column), rotations
orthogonalize column pairs until a clean sweep, then singular values are the
column norms and the left vectors the normalized columns. Jacobi is slower
than bidiagonalization methods but converges to essentially componentwise
accuracy, which is what the gradient checks downstream rely on.

The truncated path is a randomized range finder: a seeded Gaussian test
matrix, a few power iterations with re-orthonormalization, then a small
Jacobi SVD of the projected matrix.
"""

from dataclasses import dataclass

import numpy as np

from . import backend
from .errors import NumericalError

_JACOBI_TOL = 1e-14
_MAX_SWEEPS = 100


@dataclass(frozen=True)
class SpectralBasis:
    """Rank-k factorization M ~ U @ diag(sigma) @ V.T.

    ``U`` is rows-by-k, ``V`` cols-by-k, both with orthonormal columns;
    ``sigma`` is nonnegative and descending. ``k`` equals the full rank
    min(rows, cols) for an exact decomposition.
    """

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray
    k: int

    def reconstruct(self):
        return (self.u * self.sigma) @ self.v.T

    def truncate(self, k):
        if not 1 <= k <= self.k:
            raise ValueError(f"k={k} out of range 1..{self.k}")
        return SpectralBasis(
            u=self.u[:, :k], sigma=self.sigma[:k], v=self.v[:, :k], k=k
        )


@dataclass(frozen=True)
class CsrMatrix:
    """Minimal immutable CSR container (int64 indices, float64 data)."""

    shape: tuple[int, int]
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray

    @classmethod
    def from_dense(cls, dense):
        dense = np.asarray(dense, dtype=np.float64)
        if dense.ndim != 2:
            raise ValueError("expected a 2-d array")
        rows, cols = np.nonzero(dense)
        indptr = np.zeros(dense.shape[0] + 1, dtype=np.int64)
        np.add.at(indptr, rows + 1, 1)
        indptr = np.cumsum(indptr)
        return cls(
            shape=dense.shape,
            indptr=indptr,
            indices=cols.astype(np.int64),
            data=dense[rows, cols].copy(),
        )

    @classmethod
    def from_coo(cls, shape, rows, cols, values):
        """Build from coordinate triples; duplicates must be pre-merged."""
        order = np.lexsort((cols, rows))
        rows = np.asarray(rows, dtype=np.int64)[order]
        cols = np.asarray(cols, dtype=np.int64)[order]
        values = np.asarray(values, dtype=np.float64)[order]
        indptr = np.zeros(shape[0] + 1, dtype=np.int64)
        np.add.at(indptr, rows + 1, 1)
        return cls(shape=shape, indptr=np.cumsum(indptr), indices=cols, data=values)

    def to_dense(self):
        out = np.zeros(self.shape)
        for i in range(self.shape[0]):
            lo, hi = self.indptr[i], self.indptr[i + 1]
            out[i, self.indices[lo:hi]] = self.data[lo:hi]
        return out

    def transpose(self):
        rows = np.repeat(np.arange(self.shape[0], dtype=np.int64),
                         np.diff(self.indptr))
        return CsrMatrix.from_coo(
            (self.shape[1], self.shape[0]), self.indices, rows, self.data
        )

    @property
    def nnz(self):
        return int(self.data.shape[0])


def matmul(a, b):
    """Dense product a @ b with an explicit conformance check."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError("matmul expects 2-d operands")
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"shape mismatch: {a.shape} @ {b.shape}")
    return a @ b


def spmm(sparse, dense):
    """CSR-times-dense product through the active kernel backend."""
    if not isinstance(sparse, CsrMatrix):
        raise ValueError("spmm expects a CsrMatrix left operand")
    dense = np.ascontiguousarray(dense, dtype=np.float64)
    if dense.ndim != 2 or sparse.shape[1] != dense.shape[0]:
        raise ValueError(f"shape mismatch: {sparse.shape} @ {dense.shape}")
    return backend.csr_matmul(
        np.ascontiguousarray(sparse.indptr, dtype=np.intp),
        np.ascontiguousarray(sparse.indices, dtype=np.intp),
        np.ascontiguousarray(sparse.data),
        dense,
    )


def transpose(a):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError("transpose expects a 2-d array")
    return a.T.copy()


def add(a, b):
    a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} + {b.shape}")
    return a + b


def scale(a, alpha):
    return np.asarray(a, dtype=np.float64) * float(alpha)


def _complete_orthonormal(u, dead):
    """Fill the columns listed in ``dead`` with vectors orthonormal to the rest.

    Deterministic: walks the canonical basis, projecting out the existing
    columns (twice, for stability) until a candidate survives.
    """
    m = u.shape[0]
    candidate = 0
    for j in dead:
        placed = False
        while candidate < m:
            vec = np.zeros(m)
            vec[candidate] = 1.0
            candidate += 1
            for _ in range(2):
                vec -= u @ (u.T @ vec)
            norm = np.linalg.norm(vec)
            if norm > 0.1:
                u[:, j] = vec / norm
                placed = True
                break
        if not placed:  # cannot happen while columns < m, kept as a guard
            raise NumericalError("orthonormal completion failed")
    return u


def _fix_signs(u, v):
    # Orient each singular pair so the largest-magnitude entry of the left
    # vector is positive (first index wins ties); keeps factorizations
    # comparable across backends and runs.
    idx = np.argmax(np.abs(u), axis=0)
    flip = u[idx, np.arange(u.shape[1])] < 0.0
    u[:, flip] *= -1.0
    v[:, flip] *= -1.0
    return u, v


def full_svd(matrix, fix_signs=True):
    """Exact SVD via one-sided Jacobi.

    Returns a SpectralBasis with k = min(rows, cols), sigma descending and
    both factors orthonormal. Raises NumericalError on non-finite input or
    if the sweep cap is hit (with conditioning diagnostics in the message).
    """
    m_in = np.asarray(matrix, dtype=np.float64)
    if m_in.ndim != 2 or m_in.size == 0:
        raise ValueError("full_svd expects a nonempty 2-d array")
    if not np.all(np.isfinite(m_in)):
        raise NumericalError("full_svd: input has non-finite entries")
    if m_in.shape[0] < m_in.shape[1]:
        flipped = full_svd(m_in.T, fix_signs=False)
        u, v = flipped.v, flipped.u
        if fix_signs:
            u, v = _fix_signs(u.copy(), v.copy())
        return SpectralBasis(u=u, sigma=flipped.sigma, v=v, k=flipped.k)

    m, n = m_in.shape
    gt = np.array(m_in.T, dtype=np.float64, order="C")  # owned copy: sweeps mutate it
    vt = np.eye(n)
    sweeps = backend.jacobi_sweeps(gt, vt, _JACOBI_TOL, _MAX_SWEEPS)
    if sweeps < 0:
        norms = np.sqrt(np.einsum("ij,ij->i", gt, gt))
        raise NumericalError(
            "full_svd: Jacobi iteration did not converge within "
            f"{_MAX_SWEEPS} sweeps (frobenius={np.linalg.norm(m_in):.3e}, "
            f"column norms in [{norms.min():.3e}, {norms.max():.3e}])"
        )

    sigma = np.sqrt(np.einsum("ij,ij->i", gt, gt))
    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    u = gt[order].T.copy()
    v = vt[order].T.copy()

    live = sigma > 0.0
    u[:, live] /= sigma[live]
    dead = np.flatnonzero(~live)
    if dead.size:
        u = _complete_orthonormal(u, dead)
    if fix_signs:
        u, v = _fix_signs(u, v)
    return SpectralBasis(u=u, sigma=sigma, v=v, k=n)


def orthonormal_columns(y):
    """Orthonormalize the columns of ``y`` by modified Gram-Schmidt.

    Each column is orthogonalized twice against its predecessors; columns
    that vanish (linearly dependent input) are replaced with deterministic
    canonical completions so the result always has full column rank.
    """
    q = np.array(y, dtype=np.float64)
    if q.ndim != 2:
        raise ValueError("expected a 2-d array")
    m, s = q.shape
    if s > m:
        raise ValueError("more columns than rows cannot be orthonormalized")
    dead = []
    for j in range(s):
        col = q[:, j]
        for _ in range(2):
            if j:
                col -= q[:, :j] @ (q[:, :j].T @ col)
        norm = np.linalg.norm(col)
        if norm > 1e-12 * max(1.0, np.linalg.norm(y[:, j])):
            q[:, j] = col / norm
        else:
            q[:, j] = 0.0
            dead.append(j)
    if dead:
        q = _complete_orthonormal(q, dead)
    return q


def truncated_svd(matrix, k, oversample=8, power_iters=2, seed=0):
    """Rank-k randomized SVD (Gaussian sketch plus subspace iteration).

    ``matrix`` may be a dense array or a CsrMatrix. Deterministic for a
    fixed seed. The leading singular values approximate the true ones; the
    approximation is exact (to roundoff) when the true rank is at most k.
    """
    if isinstance(matrix, CsrMatrix):
        rows, cols = matrix.shape
        mat_t = matrix.transpose()
        mul = lambda x: spmm(matrix, x)
        mul_t = lambda x: spmm(mat_t, x)
    else:
        dense = np.asarray(matrix, dtype=np.float64)
        if dense.ndim != 2 or dense.size == 0:
            raise ValueError("truncated_svd expects a nonempty 2-d array")
        if not np.all(np.isfinite(dense)):
            raise NumericalError("truncated_svd: input has non-finite entries")
        rows, cols = dense.shape
        mul = lambda x: dense @ x
        mul_t = lambda x: dense.T @ x

    if not 1 <= k <= min(rows, cols):
        raise ValueError(f"rank k={k} out of range 1..{min(rows, cols)}")
    width = min(k + max(0, oversample), min(rows, cols))

    rng = np.random.default_rng(seed)
    sketch = rng.standard_normal((cols, width))
    q = orthonormal_columns(mul(sketch))
    for _ in range(power_iters):
        q = orthonormal_columns(mul_t(q))
        q = orthonormal_columns(mul(q))

    projected = mul_t(q).T  # width x cols
    small = full_svd(projected, fix_signs=False)
    u = q @ small.u[:, :k]
    v = small.v[:, :k].copy()
    u, v = _fix_signs(u, v)
    return SpectralBasis(u=u, sigma=small.sigma[:k].copy(), v=v, k=k)
