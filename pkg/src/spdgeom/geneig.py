"""Generalized eigenvalues of SPD pencils ``(Y, X)``, i.e. of ``Y X^{-1}``.

Dense pencils are whitened with the Cholesky factor of ``X`` and handed to
a symmetric eigensolver. Large or sparse pencils only need matrix-vector
products and an ``X`` solve; their extreme eigenvalues come from Lanczos
with full reorthogonalization.
"""

import numpy as np
import scipy.linalg as sla

from .core import (
    ExtremePair,
    SparseCholesky,
    SparseSpd,
    Spectrum,
    check_same_dim,
    dense_cholesky,
)
from .errors import FactorizationFailure, NoConvergence, SolveFailure

DEFAULT_TOL = 1e-10


def whitened(X, Y):
    """Return ``(L, C)`` with ``X = L L^T`` and ``C = L^{-1} Y L^{-T}``."""
    check_same_dim(X, Y)
    L = dense_cholesky(X)
    C = sla.solve_triangular(L, np.asarray(Y), lower=True)
    C = sla.solve_triangular(L, C.T, lower=True)
    return L, 0.5 * (C + C.T)


def full_spectrum(X, Y):
    """Ascending eigenvalues of ``Y X^{-1}`` for dense SPD ``X`` and ``Y``.

    Raises
    ------
    DimensionMismatch
    FactorizationFailure
        If ``X`` has no Cholesky factor or an eigenvalue is not positive.
    """
    _, C = whitened(np.asarray(X), np.asarray(Y))
    lams = sla.eigvalsh(C)
    if not lams[0] > 0:
        raise FactorizationFailure("pencil has a non-positive eigenvalue")
    return Spectrum(lams)


def extreme_pair_dense(X, Y):
    spec = full_spectrum(X, Y)
    return ExtremePair(spec.lam_min, spec.lam_max)


def _ritz_end(alphas, betas, which):
    k = alphas.size
    idx = k - 1 if which == "max" else 0
    if k == 1:
        return alphas[0], 1.0
    w, s = sla.eigh_tridiagonal(
        alphas, betas, select="i", select_range=(idx, idx), lapack_driver="stebz"
    )
    return w[0], s[-1, 0]


def lanczos_pencil(matvec_a, matvec_b, solve_b, n, which=("max",), tol=DEFAULT_TOL,
                   max_iter=None, v0=None):
    """Extreme eigenvalues of ``B^{-1} A`` for symmetric ``A`` and SPD ``B``.

    Runs Lanczos on ``B^{-1} A`` in the ``B`` inner product, which is the
    Lanczos process on the whitened matrix ``L^{-1} A L^{-T}`` written
    without the factor ``L``. Every new vector is reorthogonalized twice
    against the whole basis.

    Parameters
    ----------
    matvec_a, matvec_b, solve_b : callable
        ``v -> A v``, ``v -> B v`` and ``v -> B^{-1} v``.
    n : int
    which : tuple of {"min", "max"}
        Ends of the spectrum that must converge.
    tol : float
        Relative Ritz residual ``beta_k |s_k| / |theta|`` required.
    max_iter : int, optional
        Defaults to ``5 n``.
    v0 : ndarray, optional
        Starting vector; a fixed pseudo-random vector by default.

    Returns
    -------
    dict mapping each entry of ``which`` to its eigenvalue estimate.
    """
    if max_iter is None:
        max_iter = 5 * n
    v = np.random.default_rng(0).standard_normal(n) if v0 is None else np.array(v0, float)
    kmax = min(max_iter, n)
    Q = np.empty((kmax, n))
    P = np.empty((kmax, n))  # P[j] = B Q[j]
    alphas, betas = [], []

    p = matvec_b(v)
    nrm = np.sqrt(v @ p)
    Q[0], P[0] = v / nrm, p / nrm
    residual = np.inf
    for j in range(kmax):
        try:
            w = solve_b(matvec_a(Q[j]))
        except Exception as exc:
            raise SolveFailure(f"B-solve failed: {exc}") from exc
        if not np.all(np.isfinite(w)):
            raise SolveFailure("B-solve returned non-finite values")
        alphas.append(P[j] @ w)
        for _ in range(2):
            w -= Q[: j + 1].T @ (P[: j + 1] @ w)
        p = matvec_b(w)
        beta = np.sqrt(max(w @ p, 0.0))

        a = np.array(alphas)
        b = np.array(betas)
        scale = np.max(np.abs(a))
        # an invariant subspace (or the whole space) makes the Ritz values exact
        exact = j + 1 == n or beta <= 1e-14 * scale
        out = {}
        residual = 0.0
        for end in which:
            theta, s_last = _ritz_end(a, b, end)
            out[end] = theta
            if not exact:
                residual = max(residual, beta * abs(s_last) / abs(theta))
        if exact or residual <= tol:
            return out
        if j + 1 == kmax:
            break
        betas.append(beta)
        Q[j + 1], P[j + 1] = w / beta, p / beta
    raise NoConvergence(
        f"Lanczos did not reach tol={tol:g} in {kmax} iterations (residual {residual:.3e})",
        iterations=kmax,
        residual=residual,
    )


def extreme_pair_krylov(matvec_x, matvec_y, solve_x, n, tol=DEFAULT_TOL, max_iter=None,
                        solve_y=None, v0=None):
    """Extreme eigenvalues of ``Y X^{-1}`` from matrix-vector products.

    ``lam_max`` comes from Lanczos on the pencil ``(Y, X)``. When
    ``solve_y`` is given, ``lam_min`` is ``1 / lam_max`` of the swapped
    pencil ``(X, Y)``; otherwise both ends are read off a single Lanczos
    run and both must converge.

    Parameters
    ----------
    matvec_x, matvec_y : callable
        ``v -> X v`` and ``v -> Y v``.
    solve_x : callable
        ``v -> X^{-1} v``, e.g. backed by a sparse Cholesky factor.
    n : int
    tol : float
        Relative residual required of each converged Ritz pair.
    max_iter : int, optional
        Lanczos steps per run, ``5 n`` by default.
    solve_y : callable, optional
    v0 : ndarray, optional

    Raises
    ------
    NoConvergence
    SolveFailure
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if solve_y is None:
        ends = lanczos_pencil(matvec_y, matvec_x, solve_x, n, ("min", "max"), tol,
                              max_iter, v0)
        lo, hi = ends["min"], ends["max"]
    else:
        hi = lanczos_pencil(matvec_y, matvec_x, solve_x, n, ("max",), tol, max_iter, v0)["max"]
        inv = lanczos_pencil(matvec_x, matvec_y, solve_y, n, ("max",), tol, max_iter, v0)["max"]
        lo = 1.0 / inv
    if not 0 < lo <= hi:
        if 0 < hi <= lo <= hi * (1 + 10 * tol):
            lo = hi
        else:
            raise FactorizationFailure(f"invalid extreme pair ({lo}, {hi})")
    return ExtremePair(float(lo), float(hi))


def dense_operators(A):
    """``(matvec, solve)`` callbacks backed by a dense matrix and its Cholesky factor."""
    a = np.asarray(A)
    cho = (dense_cholesky(a), True)
    return (lambda v: a @ v), (lambda v: sla.cho_solve(cho, v))


def sparse_operators(A):
    """``(matvec, solve)`` callbacks backed by a sparse matrix and its factorization."""
    m = A.matrix
    fac = SparseCholesky(A)
    return (lambda v: m @ v), fac.solve


def extreme_pair(X, Y, tol=DEFAULT_TOL, max_iter=None):
    """Extreme pair of ``Y X^{-1}``; Lanczos for sparse operands, dense otherwise."""
    check_same_dim(X, Y)
    if isinstance(X, SparseSpd) or isinstance(Y, SparseSpd):
        mx, sx = sparse_operators(X) if isinstance(X, SparseSpd) else dense_operators(X)
        my, sy = sparse_operators(Y) if isinstance(Y, SparseSpd) else dense_operators(Y)
        return extreme_pair_krylov(mx, my, sx, X.shape[0], tol=tol, max_iter=max_iter,
                                   solve_y=sy)
    return extreme_pair_dense(X, Y)


def lanczos_smallest(A, tol=1e-8):
    """Estimate of the smallest eigenvalue of a symmetric (sparse) matrix, no inverse."""
    n = A.shape[0]
    ident = lambda v: v  # noqa: E731
    out = lanczos_pencil(lambda v: A @ v, ident, ident, n, ("min",), tol)
    return out["min"]

