"""SPD operand types, validation, factorization and random generation."""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sps
from scipy.sparse.linalg import splu

from .errors import (
    DimensionMismatch,
    FactorizationFailure,
    NotPositiveDefinite,
    NotSymmetric,
)

SYMMETRY_TOL = 1e-12
# relative gap below which lam_max and lam_min are treated as equal
DEGENERATE_RTOL = 1e-12


def _freeze(arr):
    arr.flags.writeable = False
    return arr


class DenseSpd:
    """Dense symmetric positive definite matrix.

    The constructor only symmetrizes (``(A + A.T) / 2``) and freezes the
    storage; use :func:`validate_spd` to also check symmetry tolerance and
    positive definiteness.

    Parameters
    ----------
    array : array_like, shape (n, n)
        Square real matrix.
    """

    __slots__ = ("_a",)

    def __init__(self, array):
        a = np.array(array, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
        a = 0.5 * (a + a.T)
        self._a = _freeze(a)

    @property
    def array(self):
        """Read-only ``(n, n)`` ndarray."""
        return self._a

    @property
    def n(self):
        return self._a.shape[0]

    @property
    def shape(self):
        return self._a.shape

    def __array__(self, dtype=None, copy=None):
        if dtype is None and not copy:
            return self._a
        return np.array(self._a, dtype=dtype)

    def to_dense(self):
        return self

    def toarray(self):
        return self._a.copy()

    def __eq__(self, other):
        return isinstance(other, DenseSpd) and np.array_equal(self._a, other._a)

    __hash__ = None

    def __repr__(self):
        return f"DenseSpd(n={self.n})"


class SparseSpd:
    """Sparse symmetric positive definite matrix with an explicit pattern.

    Both triangles are stored in canonical CSR form. Stored entries may be
    explicit zeros; they still belong to the pattern. The pattern must be
    symmetric, values are symmetrized on construction.

    Parameters
    ----------
    matrix : scipy sparse matrix or array_like, shape (n, n)
    """

    __slots__ = ("_m", "_keys")

    def __init__(self, matrix):
        m = sps.csr_matrix(matrix, dtype=float, copy=True)
        if m.shape[0] != m.shape[1]:
            raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
        m.sum_duplicates()
        m.sort_indices()
        n = m.shape[0]
        rows = np.repeat(np.arange(n, dtype=np.int64), np.diff(m.indptr))
        cols = m.indices.astype(np.int64)
        keys = rows * n + cols
        tkeys = cols * n + rows
        order = np.argsort(tkeys, kind="stable")
        if not np.array_equal(tkeys[order], keys):
            raise NotSymmetric("sparsity pattern is not symmetric")
        # order[k] is the position of the transpose of entry k
        m.data = 0.5 * (m.data + m.data[order])
        for a in (m.data, m.indices, m.indptr):
            _freeze(a)
        self._m = m
        self._keys = _freeze(keys)

    @classmethod
    def from_keys(cls, n, keys, data):
        """Build from sorted linear keys ``i * n + j`` without re-checking.

        ``keys`` must describe a symmetric pattern and ``data`` must be
        symmetric; both hold for linear combinations of SparseSpd values on
        a common (union) pattern.
        """
        keys = np.asarray(keys, dtype=np.int64)
        rows = keys // n
        indices = (keys % n).astype(np.int32)
        indptr = np.zeros(n + 1, dtype=np.int32)
        np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
        m = sps.csr_matrix((np.array(data, dtype=float), indices, indptr), shape=(n, n))
        m.has_sorted_indices = True
        obj = cls.__new__(cls)
        for a in (m.data, m.indices, m.indptr):
            _freeze(a)
        obj._m = m
        obj._keys = _freeze(keys.copy())
        return obj

    @property
    def matrix(self):
        """The underlying CSR matrix (read-only buffers)."""
        return self._m

    @property
    def n(self):
        return self._m.shape[0]

    @property
    def shape(self):
        return self._m.shape

    @property
    def nnz(self):
        """Number of stored entries, explicit zeros included."""
        return self._m.nnz

    @property
    def keys(self):
        """Sorted linear indices ``i * n + j`` of the stored pattern."""
        return self._keys

    @property
    def data(self):
        """Stored values aligned with :attr:`keys`."""
        return self._m.data

    @property
    def pattern(self):
        """Stored pattern as a frozenset of ``(row, col)`` pairs."""
        n = self.n
        return frozenset(zip((self._keys // n).tolist(), (self._keys % n).tolist()))

    def matvec(self, v):
        return self._m @ v

    def toarray(self):
        return self._m.toarray()

    def to_dense(self):
        return DenseSpd(self._m.toarray())

    def __eq__(self, other):
        return (
            isinstance(other, SparseSpd)
            and self.n == other.n
            and np.array_equal(self._keys, other._keys)
            and np.array_equal(self.data, other.data)
        )

    __hash__ = None

    def __repr__(self):
        return f"SparseSpd(n={self.n}, nnz={self.nnz})"


@dataclass(frozen=True)
class ExtremePair:
    """Smallest and largest generalized eigenvalue of a pencil ``(Y, X)``."""

    lam_min: float
    lam_max: float

    def __post_init__(self):
        if not 0 < self.lam_min <= self.lam_max:
            raise ValueError(
                f"need 0 < lam_min <= lam_max, got ({self.lam_min}, {self.lam_max})"
            )

    @property
    def degenerate(self):
        return self.lam_max - self.lam_min <= DEGENERATE_RTOL * self.lam_max


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Ascending vector of positive generalized eigenvalues."""

    lams: np.ndarray

    def __post_init__(self):
        lams = np.sort(np.array(self.lams, dtype=float).ravel())
        if lams.size == 0:
            raise ValueError("empty spectrum")
        if not lams[0] > 0:
            raise ValueError("spectrum entries must be positive")
        object.__setattr__(self, "lams", _freeze(lams))

    @property
    def n(self):
        return self.lams.size

    @property
    def lam_min(self):
        return float(self.lams[0])

    @property
    def lam_max(self):
        return float(self.lams[-1])

    def extreme_pair(self):
        return ExtremePair(self.lam_min, self.lam_max)

    def __len__(self):
        return self.lams.size

    def __iter__(self):
        return iter(self.lams)


def as_spectrum(spec):
    return spec if isinstance(spec, Spectrum) else Spectrum(spec)


def check_symmetric(a, tol=SYMMETRY_TOL):
    diff = np.abs(a - a.T)
    scale = np.maximum(1.0, np.abs(a))
    bad = diff > tol * scale
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise NotSymmetric(f"asymmetry {diff[i, j]:.3e} at ({i}, {j}) exceeds tolerance")


def validate_spd(A, tol=SYMMETRY_TOL):
    """Check symmetry and positive definiteness.

    Dense input (ndarray, nested lists, :class:`DenseSpd`) returns a
    :class:`DenseSpd`; scipy sparse input or :class:`SparseSpd` returns a
    :class:`SparseSpd`.

    Raises
    ------
    NotSymmetric
        If ``|A_ij - A_ji| > tol * max(1, |A_ij|)`` for some entry.
    NotPositiveDefinite
        If a Cholesky pivot is not positive.
    """
    if isinstance(A, SparseSpd) or sps.issparse(A):
        return _validate_sparse(A, tol)
    a = np.array(A, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NotPositiveDefinite("matrix has non-finite entries")
    check_symmetric(a, tol)
    spd = DenseSpd(a)
    try:
        sla.cholesky(spd.array, lower=True)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    return spd


def _validate_sparse(A, tol):
    m = A.matrix if isinstance(A, SparseSpd) else sps.csr_matrix(A, dtype=float)
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m.data)):
        raise NotPositiveDefinite("matrix has non-finite entries")
    diff = (m - m.T).tocoo()
    if diff.nnz:
        vals = np.abs(np.asarray(m[diff.row, diff.col]).ravel())
        if np.any(np.abs(diff.data) > tol * np.maximum(1.0, vals)):
            raise NotSymmetric("sparse matrix values are not symmetric")
    spd = A if isinstance(A, SparseSpd) else SparseSpd(m)
    SparseCholesky(spd)
    return spd


def as_operand(A):
    """Coerce to DenseSpd/SparseSpd, validating anything not already typed."""
    if isinstance(A, (DenseSpd, SparseSpd)):
        return A
    return validate_spd(A)


class SparseCholesky:
    """Sparse symmetric factorization ``P A P^T = L D L^T`` of an SPD matrix.

    Backed by SuperLU in symmetric mode with diagonal pivoting only, which
    yields the LDL^T factors of a Cholesky factorization. Positive
    definiteness is decided from the signs of ``D``. If SuperLU had to
    pivot off the diagonal, the smallest eigenvalue is instead estimated
    with Lanczos on ``A`` itself.

    Raises
    ------
    NotPositiveDefinite
        If a pivot is not positive or the matrix is singular.
    """

    def __init__(self, A):
        m = A.matrix if isinstance(A, SparseSpd) else sps.csr_matrix(A, dtype=float)
        self.n = m.shape[0]
        try:
            lu = splu(
                m.tocsc(),
                permc_spec="MMD_AT_PLUS_A",
                diag_pivot_thresh=0.0,
                options={"SymmetricMode": True},
            )
        except RuntimeError as exc:
            raise NotPositiveDefinite(f"sparse factorization failed: {exc}") from None
        pivots = lu.U.diagonal()
        if np.array_equal(lu.perm_r, lu.perm_c):
            if not np.all(pivots > 0):
                raise NotPositiveDefinite("non-positive pivot in sparse factorization")
        else:
            from .geneig import lanczos_smallest

            if lanczos_smallest(m) <= 0:
                raise NotPositiveDefinite("estimated smallest eigenvalue is not positive")
        self._lu = lu
        self._pivots = pivots

    def solve(self, b):
        x = self._lu.solve(np.asarray(b, dtype=float))
        if not np.all(np.isfinite(x)):
            raise FactorizationFailure("non-finite solution from sparse factorization")
        return x

    def logdet(self):
        return float(np.sum(np.log(np.abs(self._pivots))))


def dense_cholesky(X):
    """Lower Cholesky factor of a dense SPD matrix."""
    try:
        return sla.cholesky(np.asarray(X), lower=True)
    except np.linalg.LinAlgError as exc:
        raise FactorizationFailure(str(exc)) from None


def log_det(A):
    """Log-determinant of a dense or sparse SPD operand."""
    if isinstance(A, SparseSpd) or sps.issparse(A):
        return SparseCholesky(A).logdet()
    sign, ld = np.linalg.slogdet(np.asarray(A))
    if sign <= 0:
        raise NotPositiveDefinite("determinant is not positive")
    return float(ld)


def random_spd(n, seed=None, unit_det=False):
    """Random dense SPD matrix ``Q diag(exp(g)) Q^T``.

    ``g`` is standard normal and ``Q`` is the orthogonal QR factor of a
    standard normal matrix. With ``unit_det`` the result is rescaled to
    determinant one.

    Parameters
    ----------
    n : int
        Dimension, at least 1.
    seed : int, Generator or None
        Seed or generator; identical seeds give bit-identical output.
    unit_det : bool

    Returns
    -------
    DenseSpd
    """
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    n = int(n)
    rng = np.random.default_rng(seed)
    g = rng.standard_normal(n)
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    if unit_det:
        g = g - g.mean()
    a = (q * np.exp(g)) @ q.T
    if unit_det:
        # removes the residual rounding in det left by the centred exponents
        sign, ld = np.linalg.slogdet(a)
        a = a * np.exp(-ld / n)
    return DenseSpd(a)


def random_pattern(n, density, rng):
    """Symmetric random pattern with the full diagonal, as sorted linear keys.

    ``density`` is the target fraction of stored entries in the whole
    ``n x n`` matrix, diagonal included.
    """
    n_off = max(0, int(round(density * n * n)) - n) // 2
    iu, ju = np.triu_indices(n, k=1)
    pick = rng.choice(iu.size, size=min(n_off, iu.size), replace=False)
    rows = np.concatenate([np.arange(n), iu[pick], ju[pick]])
    cols = np.concatenate([np.arange(n), ju[pick], iu[pick]])
    return np.unique(rows.astype(np.int64) * n + cols)


def random_sparse_spd(n, density=0.02, seed=None, pattern=None):
    """Random strictly diagonally dominant sparse SPD matrix.

    Off-diagonal values are standard normal; each diagonal entry is the
    absolute row sum of the off-diagonal part plus a uniform draw in
    ``[0.5, 1.5]``.

    Parameters
    ----------
    n : int
    density : float
        Target fill ratio when ``pattern`` is not given.
    seed : int, Generator or None
    pattern : array of int, optional
        Sorted symmetric linear keys (``i * n + j``) containing the diagonal.
    """
    rng = np.random.default_rng(seed)
    keys = random_pattern(n, density, rng) if pattern is None else np.asarray(pattern)
    rows, cols = keys // n, keys % n
    upper = rows < cols
    vals = np.zeros(keys.size)
    vals[upper] = rng.standard_normal(upper.sum())
    m = sps.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    m = m + m.T
    diag = np.asarray(abs(m).sum(axis=1)).ravel() + rng.uniform(0.5, 1.5, n)
    is_diag = rows == cols
    full = np.asarray(m[rows, cols]).ravel()
    full[is_diag] = diag[rows[is_diag]]
    return SparseSpd.from_keys(n, keys, full)


def check_same_dim(*mats):
    dims = {m.shape for m in mats}
    if len(dims) != 1:
        raise DimensionMismatch(f"operands have different shapes: {sorted(dims)}")


def align_patterns(mats):
    """Put sparse operands on the union of their patterns.

    Returns
    -------
    keys : ndarray of int64
        Sorted union of the stored linear keys.
    data : ndarray, shape (len(mats), keys.size)
        Row ``j`` holds the values of ``mats[j]``, zero off its own pattern.
    """
    keys = mats[0].keys
    for m in mats[1:]:
        if not np.array_equal(m.keys, keys):
            keys = np.union1d(keys, m.keys)
    data = np.zeros((len(mats), keys.size))
    for row, m in zip(data, mats):
        row[np.searchsorted(keys, m.keys)] = m.data
    return keys, data
