"""Distances and geodesics on the SPD cone.

Three distances (affine-invariant Riemannian, Hilbert projective and
Thompson) and three interpolation curves (Euclidean, Riemannian and the
Thompson ``*_t`` geodesic). The Thompson quantities only need the extreme
generalized eigenvalues, so they also run on sparse operands through
Lanczos, and the ``*_t`` geodesic keeps the union of the input patterns.
"""

import enum

import numpy as np

from .core import (
    DenseSpd,
    SparseCholesky,
    SparseSpd,
    align_patterns,
    as_operand,
    check_same_dim,
    dense_cholesky,
)
from .errors import DimensionMismatch, FactorizationFailure, NonPositiveResult, NotPositiveDefinite
from .geneig import DEFAULT_TOL, extreme_pair, full_spectrum, whitened


class GeodesicKind(enum.Enum):
    EUCLIDEAN = "euclidean"
    RIEMANNIAN = "riemannian"
    THOMPSON_STAR = "star"


def _operands(X, Y):
    X, Y = as_operand(X), as_operand(Y)
    check_same_dim(X, Y)
    return X, Y


def _identical(X, Y):
    if X is Y:
        return True
    if isinstance(X, SparseSpd) and isinstance(Y, SparseSpd):
        return X == Y
    if isinstance(X, DenseSpd) and isinstance(Y, DenseSpd):
        return np.array_equal(X.array, Y.array)
    return False


def _dense(A):
    return A.to_dense() if isinstance(A, SparseSpd) else A


def dist_riemannian(X, Y):
    """Affine-invariant Riemannian distance ``sqrt(sum log^2 lambda_i)``.

    Sparse operands are densified.
    """
    X, Y = _operands(X, Y)
    if _identical(X, Y):
        return 0.0
    lams = full_spectrum(_dense(X), _dense(Y)).lams
    return float(np.sqrt(np.sum(np.log(lams) ** 2)))


def dist_hilbert(X, Y, tol=DEFAULT_TOL):
    """Hilbert projective distance ``log(lam_max / lam_min)``."""
    X, Y = _operands(X, Y)
    if _identical(X, Y):
        return 0.0
    pair = extreme_pair(X, Y, tol=tol)
    return float(np.log(pair.lam_max) - np.log(pair.lam_min))


def dist_thompson(X, Y, tol=DEFAULT_TOL, max_iter=None):
    """Thompson distance ``log max(lam_max, 1 / lam_min)``.

    Dense pairs use the full spectrum; sparse pairs use Lanczos with
    relative residual ``tol``.
    """
    X, Y = _operands(X, Y)
    if _identical(X, Y):
        return 0.0
    pair = extreme_pair(X, Y, tol=tol, max_iter=max_iter)
    return float(max(np.log(pair.lam_max), -np.log(pair.lam_min), 0.0))


def riemannian_path(X, Y):
    """Return ``t -> X #_t Y`` sharing one whitening and eigendecomposition."""
    X, Y = _operands(X, Y)
    L, C = whitened(_dense(X).array, _dense(Y).array)
    w, V = np.linalg.eigh(C)
    if not w[0] > 0:
        raise FactorizationFailure("pencil has a non-positive eigenvalue")
    LV = L @ V

    def point(t):
        return DenseSpd((LV * w**t) @ LV.T)

    return point


def geodesic_riemannian(X, Y, t):
    """Point ``X^{1/2} (X^{-1/2} Y X^{-1/2})^t X^{1/2}`` of the Riemannian geodesic.

    Computed as ``L (L^{-1} Y L^{-T})^t L^T`` with the Cholesky factor
    ``X = L L^T``, which is the same matrix. Any real ``t`` is accepted.
    Sparse operands are densified; the result is dense.
    """
    return riemannian_path(X, Y)(t)


def star_coefficients(pair, t):
    """Coefficients ``(a, b)`` with ``X *_t Y = a Y + b X``.

    Written in terms of ``rho = lam_max / lam_min`` with ``expm1`` so that
    nearly degenerate pairs lose no accuracy; in the degenerate branch
    ``a = 0`` and ``b = lam_min**t``.
    """
    m, M = pair.lam_min, pair.lam_max
    if pair.degenerate:
        return 0.0, m**t
    L = np.log(M) - np.log(m)
    e1 = np.expm1(L)
    et = np.expm1(t * L)
    a = m ** (t - 1.0) * et / e1
    b = m**t * (e1 - et) / e1
    return float(a), float(b)


def _check_result(R, t):
    if 0.0 <= t <= 1.0:
        try:
            if isinstance(R, SparseSpd):
                SparseCholesky(R)
            else:
                dense_cholesky(R.array)
        except (NotPositiveDefinite, FactorizationFailure) as exc:
            raise NonPositiveResult(f"geodesic point at t={t} is not SPD: {exc}") from None
    return R


def combine(coeffs, mats):
    """Linear combination ``sum c_j M_j`` keeping the operand kind.

    Sparse results live on the union of the input patterns, with explicit
    zeros kept where a pattern entry cancels.
    """
    if all(isinstance(m, SparseSpd) for m in mats):
        keys, data = align_patterns(mats)
        return SparseSpd.from_keys(mats[0].n, keys, np.asarray(coeffs) @ data)
    if any(isinstance(m, SparseSpd) for m in mats):
        raise DimensionMismatch("cannot mix sparse and dense operands")
    out = np.zeros(mats[0].shape)
    for c, m in zip(coeffs, mats):
        out += c * m.array
    return DenseSpd(out)


def geodesic_star(X, Y, t, pair=None, tol=DEFAULT_TOL, check=True):
    """Point ``X *_t Y`` of the distinguished Thompson geodesic.

    ``X *_t Y = a(t) Y + b(t) X`` with coefficients from the extreme
    eigenvalues of ``Y X^{-1}`` (see :func:`star_coefficients`). The curve
    stays in the span of ``X`` and ``Y``; for sparse operands the output
    pattern is the union of the input patterns.

    Parameters
    ----------
    X, Y : DenseSpd, SparseSpd or array_like
    t : float
        Any real; ``t`` in ``[0, 1]`` traces the geodesic path from X to Y.
    pair : ExtremePair, optional
        Precomputed extreme pair of ``Y X^{-1}``.
    tol : float
        Lanczos tolerance for sparse operands.
    check : bool
        Verify that the result is SPD when ``t`` is in ``[0, 1]``.

    Raises
    ------
    NonPositiveResult
        If ``check`` is set and the result fails validation.
    """
    X, Y = _operands(X, Y)
    if pair is None:
        pair = extreme_pair(X, Y, tol=tol)
    a, b = star_coefficients(pair, t)
    R = combine([a, b], [Y, X])
    return _check_result(R, t) if check else R


def geodesic_euclidean(X, Y, t):
    """Straight-line interpolation ``(1 - t) X + t Y`` for ``t`` in ``[0, 1]``."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"Euclidean interpolation needs t in [0, 1], got {t}")
    X, Y = _operands(X, Y)
    return combine([1.0 - t, t], [X, Y])


def geodesic(kind, X, Y, t):
    kind = GeodesicKind(kind)
    if kind is GeodesicKind.EUCLIDEAN:
        return geodesic_euclidean(X, Y, t)
    if kind is GeodesicKind.RIEMANNIAN:
        return geodesic_riemannian(X, Y, t)
    return geodesic_star(X, Y, t)
