"""Means of finite sets of SPD matrices.

The inductive Thompson mean is the limit of

    X_{i+1} = X_i *_{1/(i+1)} Y_j,    j = ((i - 1) mod k) + 1,

which cycles through the inputs. Every iterate is a linear combination of
the starting point and the inputs, so the mean keeps any pattern the
inputs share.

The sequence itself converges slowly: after ``m`` cycles the distance to
the limit decays roughly like ``log(m) / m``, while successive cycle starts
only differ by ``O(1 / m^2)``. :func:`inductive_mean` therefore runs a few
cycles of the sequence and then solves for its limit directly. With step
sizes ``1/(i+1)`` the limit is the point where the cycle-averaged step
vanishes, i.e. where

    sum_j d/dt (X *_t Y_j) |_{t=0} = sum_j (a_j Y_j + b_j X) = 0,

with ``a_j = log(M_j / m_j) / (M_j - m_j)`` and ``b_j = log m_j - m_j a_j``
built from the extreme eigenvalues ``(m_j, M_j)`` of ``Y_j X^{-1}``. The
fixed-point map ``X -> sum_j a_j Y_j / (-sum_j b_j)`` is again a positive
combination of the inputs.
"""

from dataclasses import dataclass, field
from itertools import count

import numpy as np
import scipy.linalg as sla

from .core import (
    DenseSpd,
    ExtremePair,
    SparseSpd,
    align_patterns,
    as_operand,
    check_same_dim,
    dense_cholesky,
)
from .errors import DimensionMismatch, FactorizationFailure, NoConvergence
from .geneig import DEFAULT_TOL, extreme_pair_krylov, sparse_operators
from .geometry import combine, dist_thompson, star_coefficients


@dataclass
class MeanReport:
    """Outcome of an iterative mean computation.

    Attributes
    ----------
    result : DenseSpd or SparseSpd
    cycles : int
        Cycles (inductive mean) or iterations (Karcher mean) performed.
    final_gap : float
        Last convergence measure: Thompson distance between successive
        cycle starts, or the Frobenius norm of the mean logarithm.
    converged : bool
    method : str
    """

    result: object
    cycles: int
    final_gap: float
    converged: bool
    method: str = ""
    gaps: list = field(default_factory=list, repr=False)


def _inputs(ys, x1=None):
    ys = [as_operand(y) for y in ys]
    if not ys:
        raise ValueError("need at least one matrix")
    sparse = isinstance(ys[0], SparseSpd)
    mats = ys if x1 is None else ys + [as_operand(x1)]
    check_same_dim(*mats)
    if any(isinstance(m, SparseSpd) != sparse for m in mats):
        raise DimensionMismatch("inputs mix sparse and dense matrices")
    return ys, sparse


class _Pencils:
    """Extreme pairs of ``(Y_j, X)`` for fixed inputs, reusing factorizations."""

    def __init__(self, ys, tol):
        self.ys = ys
        self.tol = tol
        self.sparse = isinstance(ys[0], SparseSpd)
        self.n = ys[0].n
        if self.sparse:
            self._ops = [sparse_operators(y) for y in ys]

    def against(self, X, js=None):
        js = range(len(self.ys)) if js is None else js
        if self.sparse:
            mx, sx = sparse_operators(X)
            out = []
            for j in js:
                my, sy = self._ops[j]
                out.append(extreme_pair_krylov(mx, my, sx, self.n, tol=self.tol, solve_y=sy))
            return out
        L = dense_cholesky(X.array)
        out = []
        for j in js:
            C = sla.solve_triangular(L, self.ys[j].array, lower=True)
            C = sla.solve_triangular(L, C.T, lower=True)
            w = sla.eigvalsh(0.5 * (C + C.T))
            if not w[0] > 0:
                raise FactorizationFailure("pencil has a non-positive eigenvalue")
            out.append(ExtremePair(float(w[0]), float(w[-1])))
        return out


def inductive_sequence(ys, x1=None, tol=DEFAULT_TOL):
    """Yield ``X_1, X_2, ...`` of the inductive sequence.

    ``X_1`` defaults to ``Y_1``. Each step is ``X_{i+1} = X_i *_{1/(i+1)} Y_j``
    with ``j = ((i - 1) mod k) + 1``. ``tol`` is the Lanczos tolerance used
    for sparse inputs.
    """
    ys, _ = _inputs(ys, x1)
    pencils = _Pencils(ys, tol)
    k = len(ys)
    X = ys[0] if x1 is None else as_operand(x1)
    for i in count(1):
        yield X
        j = (i - 1) % k
        (pair,) = pencils.against(X, [j])
        a, b = star_coefficients(pair, 1.0 / (i + 1))
        X = combine([a, b], [ys[j], X])


def stationary_step(pairs, ys):
    """One application of ``X -> sum_j a_j Y_j / (-sum_j b_j)``.

    ``pairs[j]`` is the extreme pair of ``Y_j X^{-1}`` at the current ``X``.
    """
    a = np.empty(len(pairs))
    bsum = 0.0
    for j, p in enumerate(pairs):
        m, M = p.lam_min, p.lam_max
        L = np.log(M) - np.log(m)
        a[j] = 1.0 / m if L == 0.0 else L / (m * np.expm1(L))
        bsum += np.log(m) - m * a[j]
    k = len(pairs)
    if bsum > -k:
        # rescaling X by c shifts every b_j by -log c; pick c so that sum b_j = -k
        c = np.exp((bsum + k) / k)
        return combine(c * a / k, ys)
    return combine(a / -bsum, ys)


def inductive_mean(ys, x1=None, tol=1e-8, max_cycles=100_000, warm_cycles=10, refine=True,
                   eig_tol=DEFAULT_TOL):
    """Inductive Thompson mean of ``ys``.

    Runs ``warm_cycles`` full cycles of :func:`inductive_sequence` from
    ``x1`` (default ``Y_1``), then iterates the stationary-point map until
    the Thompson distance between successive cycle starts is at most
    ``tol``. With ``refine=False`` the sequence alone is run until that
    gap criterion holds, which is exact only up to the slow convergence of
    the sequence.

    Parameters
    ----------
    ys : sequence of DenseSpd, SparseSpd or arrays
        All dense or all sparse, same dimension.
    x1 : optional
        Starting point of the sequence.
    tol : float
    max_cycles : int
    warm_cycles : int
    refine : bool
    eig_tol : float
        Lanczos tolerance for sparse inputs.

    Returns
    -------
    MeanReport

    Raises
    ------
    DimensionMismatch
    NoConvergence
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    ys, _ = _inputs(ys, x1)
    k = len(ys)
    gaps = []
    seq = inductive_sequence(ys, x1, tol=eig_tol)
    start = next(seq)
    limit = max_cycles if not refine else min(warm_cycles, max_cycles)
    cycles = 0
    while cycles < limit:
        for _ in range(k):
            X = next(seq)
        cycles += 1
        gaps.append(dist_thompson(start, X, tol=eig_tol))
        start = X
        if gaps[-1] == 0.0 or (not refine and gaps[-1] <= tol):
            return MeanReport(start, cycles, gaps[-1], True, "sequence", gaps)
    if not refine:
        raise NoConvergence(
            f"inductive sequence gap {gaps[-1]:.3e} > tol after {cycles} cycles",
            iterations=cycles,
            residual=gaps[-1],
        )

    pencils = _Pencils(ys, eig_tol)
    X = start
    while cycles < max_cycles:
        X_new = stationary_step(pencils.against(X), ys)
        cycles += 1
        gaps.append(dist_thompson(X, X_new, tol=eig_tol))
        X = X_new
        if gaps[-1] <= tol:
            return MeanReport(X, cycles, gaps[-1], True, "stationary", gaps)
    raise NoConvergence(
        f"inductive mean gap {gaps[-1]:.3e} > tol after {cycles} cycles",
        iterations=cycles,
        residual=gaps[-1],
    )


def _sym_fn(w, V, fn):
    return (V * fn(w)) @ V.T


def karcher_mean(ys, tol=1e-10, max_iter=500):
    """Riemannian barycentre by fixed-point iteration.

    ``X <- X^{1/2} exp(mean_j log(X^{-1/2} Y_j X^{-1/2})) X^{1/2}`` from the
    arithmetic mean, until the Frobenius norm of the mean log is at most
    ``tol``. Sparse inputs are densified.
    """
    mats = [as_operand(y) for y in ys]
    if not mats:
        raise ValueError("need at least one matrix")
    check_same_dim(*mats)
    arrays = [m.toarray() for m in mats]
    X = sum(arrays) / len(arrays)
    norm = np.inf
    for it in range(1, max_iter + 1):
        w, V = np.linalg.eigh(X)
        if not w[0] > 0:
            raise FactorizationFailure("Karcher iterate lost positive definiteness")
        s, si = _sym_fn(w, V, np.sqrt), _sym_fn(w, V, lambda v: 1.0 / np.sqrt(v))
        T = np.zeros_like(X)
        for Y in arrays:
            wy, Vy = np.linalg.eigh(si @ Y @ si)
            T += _sym_fn(wy, Vy, np.log)
        T /= len(arrays)
        T = 0.5 * (T + T.T)
        norm = float(np.linalg.norm(T))
        if norm <= tol:
            return MeanReport(DenseSpd(X), it, norm, True, "karcher")
        wt, Vt = np.linalg.eigh(T)
        X = s @ _sym_fn(wt, Vt, np.exp) @ s
        X = 0.5 * (X + X.T)
    raise NoConvergence(f"Karcher mean did not converge in {max_iter} iterations",
                        iterations=max_iter, residual=norm)


def arithmetic_mean(ys):
    mats = [as_operand(y) for y in ys]
    if not mats:
        raise ValueError("need at least one matrix")
    check_same_dim(*mats)
    return combine([1.0 / len(mats)] * len(mats), mats)


@dataclass(frozen=True)
class SparsityReport:
    out_of_pattern: int
    nnz: int
    n: int

    @property
    def fill_ratio(self):
        return self.nnz / self.n**2


def pattern_keys(pattern, n):
    """Normalize a pattern (SparseSpd, key array or ``(i, j)`` pairs) to sorted keys."""
    if isinstance(pattern, SparseSpd):
        return pattern.keys
    arr = np.asarray(list(pattern) if isinstance(pattern, (set, frozenset)) else pattern)
    if arr.ndim == 2:
        arr = arr[:, 0].astype(np.int64) * n + arr[:, 1]
    return np.unique(arr.astype(np.int64))


def union_pattern(mats):
    return align_patterns(list(mats))[0]


def sparsity_report(M, reference_pattern, threshold=1e-12):
    """Count entries of ``M`` above ``threshold`` outside ``reference_pattern``.

    ``M`` may be sparse or dense. ``nnz`` counts entries above the
    threshold, so explicit zeros do not count as fill.
    """
    if isinstance(M, SparseSpd):
        n = M.n
        keys = M.keys[np.abs(M.data) > threshold]
    else:
        a = np.asarray(M.array if isinstance(M, DenseSpd) else M)
        n = a.shape[0]
        keys = np.flatnonzero(np.abs(a) > threshold).astype(np.int64)
    ref = pattern_keys(reference_pattern, n)
    outside = int(np.count_nonzero(~np.isin(keys, ref)))
    return SparsityReport(out_of_pattern=outside, nnz=int(keys.size), n=n)
