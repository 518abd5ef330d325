"""Determinants along geodesics and the distance between geodesic midpoints.

Everything here is a function of the generalized spectrum of ``Y X^{-1}``:

* the Euclidean midpoint scales ``sqrt(det XY)`` by
  ``prod (sqrt(l) + 1/sqrt(l)) / 2 >= 1`` (swelling);
* the ``*_{1/2}`` midpoint scales it by
  ``prod (sqrt(l) + sqrt(l_M l_m)/sqrt(l)) / (sqrt(l_M) + sqrt(l_m)) <= 1``
  (shrinkage);
* the Riemannian distance between the Riemannian and ``*`` midpoints is the
  root sum of squared logs of those shrinkage factors, bounded by
  ``sqrt(n - 2) log cosh(r / 2)`` with ``r`` the Thompson distance.
"""

from dataclasses import dataclass

import numpy as np

from .core import as_spectrum
from .geometry import dist_riemannian, geodesic_riemannian, geodesic_star, riemannian_path
from .geometry import star_coefficients
from .geneig import full_spectrum


@dataclass(frozen=True)
class MidpointReport:
    """Distance between the Riemannian and ``*`` midpoints, with its bound.

    Attributes
    ----------
    d_rt : float
        Riemannian distance between the two midpoints.
    r : float
        Thompson distance ``max |log lambda_i|``.
    upper : float
        ``sqrt(n - 2) log cosh(r / 2)``.
    f : float
        ``d_rt / r``, or 0 when ``r == 0``.
    """

    d_rt: float
    r: float
    upper: float
    f: float


def log_cosh(x):
    x = np.abs(x)
    return x + np.log1p(np.exp(-2.0 * x)) - np.log(2.0)


def det_euclid_midpoint_factor(spec):
    """``det((X + Y) / 2) / sqrt(det XY)`` from the spectrum of ``Y X^{-1}``."""
    s = np.sqrt(as_spectrum(spec).lams)
    return float(np.prod((s + 1.0 / s) / 2.0))


def det_star_midpoint_factor(spec):
    """``det(X *_{1/2} Y) / sqrt(det XY)`` from the spectrum of ``Y X^{-1}``."""
    lams = as_spectrum(spec).lams
    s = np.sqrt(lams)
    sm, sM = s[0], s[-1]
    return float(np.prod((s + sm * sM / s) / (sM + sm)))


def _log_shrink(logl):
    """Per-eigenvalue log shrinkage factors, for rows of log-spectra.

    With ``c`` the centre and ``h`` the half-width of ``[log l_m, log l_M]``
    the factor is ``cosh((log l - c) / 2) / cosh(h / 2)``. Entries equal to
    an extreme are exactly zero.
    """
    logl = np.atleast_2d(logl)
    lo = logl.min(axis=1, keepdims=True)
    hi = logl.max(axis=1, keepdims=True)
    c = 0.5 * (lo + hi)
    h = 0.5 * (hi - lo)
    out = log_cosh(0.5 * (logl - c)) - log_cosh(0.5 * h)
    out[(logl == lo) | (logl == hi)] = 0.0
    return out


def midpoint_bound(n, r):
    """``sqrt(n - 2) log cosh(r / 2)``, zero for ``n = 2``."""
    return np.sqrt(max(n - 2, 0)) * log_cosh(np.asarray(r, dtype=float) / 2.0)


def midpoint_distance(spec):
    """Closed-form ``d_R(X # Y, X * Y)`` and its bound, from the spectrum.

    Returns
    -------
    MidpointReport
    """
    lams = as_spectrum(spec).lams
    logl = np.log(lams)
    d_rt = float(np.sqrt(np.sum(_log_shrink(logl) ** 2)))
    r = float(np.max(np.abs(logl)))
    upper = float(midpoint_bound(lams.size, r))
    return MidpointReport(d_rt=d_rt, r=r, upper=upper, f=d_rt / r if r > 0 else 0.0)


def normalized_distances(log_spectra):
    """Vectorized ``(r, f)`` for rows of log-eigenvalues.

    Parameters
    ----------
    log_spectra : ndarray, shape (count, n)

    Returns
    -------
    r, f : ndarray, shape (count,)
    """
    logl = np.atleast_2d(np.asarray(log_spectra, dtype=float))
    d = np.sqrt(np.sum(_log_shrink(logl) ** 2, axis=1))
    r = np.max(np.abs(logl), axis=1)
    f = np.divide(d, r, out=np.zeros_like(d), where=r > 0)
    return r, f


def midpoint_distance_direct(X, Y):
    """``d_R`` between the explicitly built Riemannian and ``*`` midpoints."""
    return dist_riemannian(geodesic_riemannian(X, Y, 0.5), geodesic_star(X, Y, 0.5))


def sample_log_spectra(n, r, rng):
    """Rows of log-eigenvalues with ``max |log lambda_i| = r`` exactly.

    One coordinate is ``+r`` or ``-r`` (fair coin), the others are uniform
    on ``[-r, r]``. ``r`` may be an array, one row per entry.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    count = r.size
    logl = rng.uniform(-1.0, 1.0, size=(count, n)) * r[:, None]
    pin = rng.integers(0, n, size=count)
    sign = np.where(rng.random(count) < 0.5, -1.0, 1.0)
    logl[np.arange(count), pin] = sign * r
    return logl


def sample_spectra(n, r, count, seed=None):
    """Random spectra with Thompson radius ``r``.

    Parameters
    ----------
    n : int
        Dimension, at least 2.
    r : float
        Required ``max |log lambda_i|``.
    count : int
    seed : int or Generator

    Returns
    -------
    ndarray, shape (count, n)
        One ascending spectrum per row.
    """
    if n < 2 or r < 0:
        raise ValueError("need n >= 2 and r >= 0")
    rng = np.random.default_rng(seed)
    logl = sample_log_spectra(n, np.full(count, float(r)), rng)
    return np.sort(np.exp(logl), axis=1)


def log_det_profiles(X, Y, t_grid):
    """Log-determinants along the three interpolations between ``X`` and ``Y``.

    Each determinant is taken of the explicitly formed interpolant.

    Returns
    -------
    euclid, riem, star : ndarray, shape (len(t_grid),)
    """
    X, Y = np.asarray(X), np.asarray(Y)
    path = riemannian_path(X, Y)
    spec = full_spectrum(X, Y)
    pair = spec.extreme_pair()
    out = np.empty((3, len(t_grid)))
    for k, t in enumerate(t_grid):
        a, b = star_coefficients(pair, t)
        out[0, k] = np.linalg.slogdet((1.0 - t) * X + t * Y)[1]
        out[1, k] = np.linalg.slogdet(path(t).array)[1]
        out[2, k] = np.linalg.slogdet(a * Y + b * X)[1]
    return out[0], out[1], out[2]
