"""Matrix-valued affinity estimators and their analytic limiting errors.

Each estimator maps observed lag moments to an ``|S| x |S|`` matrix whose
``(i, j)`` entry scores the arrow ``j -> i``.  The ``*_from_moments`` forms
take ``LagMoments`` (empirical or analytic); the plain forms take an observed
series and a sample count.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConditioningError, ParameterError
from .graphgen import ObservedSet
from .moments import TOL_SERIES, LagMoments, lag_moments, limit_r0
from .noise import CovarianceSpec

COND_MAX = 1e12
METHODS = ("granger", "one_lag", "nig", "precision")


@dataclass
class EstimateMatrix:
    method: str
    values: np.ndarray
    n_samples: int | None = None
    observed: ObservedSet | None = None

    def scores(self) -> np.ndarray:
        """Affinity scores where larger means "more likely connected"."""
        return -self.values if self.method == "precision" else self.values

    def normalized(self, sigma2_gap: float) -> np.ndarray:
        """NIG values divided by a user-supplied ``sigma2_gap`` (display only)."""
        return self.values / sigma2_gap


@dataclass
class ErrorMatrix:
    values: np.ndarray
    provenance: str


def guarded_inv(M, what: str = "matrix") -> np.ndarray:
    """Inverse through an SVD, refusing condition numbers above ``COND_MAX``."""
    M = np.asarray(M, dtype=float)
    U, s, Vt = np.linalg.svd(M)
    if s[0] == 0 or not np.all(np.isfinite(s)) or s[-1] * COND_MAX < s[0]:
        cond = np.inf if s[-1] == 0 else s[0] / s[-1]
        raise ConditioningError(f"{what} is singular or ill-conditioned (cond={cond:.3g})")
    return (Vt.T / s) @ U.T


def granger_from_moments(m: LagMoments) -> np.ndarray:
    return m[1] @ guarded_inv(m[0], "lag-0 covariance")


def one_lag_from_moments(m: LagMoments) -> np.ndarray:
    return m[1].copy()


def nig_from_moments(m: LagMoments) -> np.ndarray:
    return m[1] - m[3]


def precision_from_moments(m: LagMoments) -> np.ndarray:
    return guarded_inv(m[0], "lag-0 covariance")


_FROM_MOMENTS = {
    "granger": (granger_from_moments, 1),
    "one_lag": (one_lag_from_moments, 1),
    "nig": (nig_from_moments, 3),
    "precision": (precision_from_moments, 0),
}


def estimate_from_moments(method: str, m: LagMoments, observed=None) -> EstimateMatrix:
    try:
        fn, _ = _FROM_MOMENTS[method]
    except KeyError:
        raise ParameterError(f"unknown method {method!r}; choose from {METHODS}") from None
    return EstimateMatrix(method, fn(m), m.n_samples, observed)


def estimate(method: str, ts, n: int) -> EstimateMatrix:
    _, lag = _FROM_MOMENTS.get(method, (None, None))
    if lag is None:
        raise ParameterError(f"unknown method {method!r}; choose from {METHODS}")
    m = lag_moments(ts, lag, n)
    return estimate_from_moments(method, m, getattr(ts, "observed", None))


def granger(ts, n: int) -> EstimateMatrix:
    return estimate("granger", ts, n)


def one_lag(ts, n: int) -> EstimateMatrix:
    return estimate("one_lag", ts, n)


def nig(ts, n: int) -> EstimateMatrix:
    return estimate("nig", ts, n)


def precision(ts, n: int) -> EstimateMatrix:
    return estimate("precision", ts, n)


def granger_limit_error(A, s: ObservedSet, sigma: CovarianceSpec | None = None) -> ErrorMatrix:
    """Limit of the Granger estimator minus ``A_S`` under partial observation.

    With ``P = R_0^{-1}`` the limit error is ``-A_SS' (P_S'S')^{-1} P_S'S``.
    For white noise this is ``A_SS' (I - [A^2]_S'S')^{-1} [A^2]_S'S``.
    """
    A = np.asarray(A, dtype=float)
    S, L = s.indices, s.latent
    if L.size == 0:
        return ErrorMatrix(np.zeros((S.size, S.size)), "granger_full")
    if sigma is None:
        A2 = A @ A
        inner = np.eye(L.size) - A2[np.ix_(L, L)]
        vals = A[np.ix_(S, L)] @ guarded_inv(inner, "latent block") @ A2[np.ix_(L, S)]
        return ErrorMatrix(vals, "granger_diagonal")
    P = guarded_inv(limit_r0(A, sigma), "stationary covariance")
    vals = -A[np.ix_(S, L)] @ guarded_inv(P[np.ix_(L, L)], "latent precision block") @ P[np.ix_(L, S)]
    return ErrorMatrix(vals, "granger_colored")


def nig_limit_error(A, sigma: CovarianceSpec, rho: float | None = None,
                    tol: float = TOL_SERIES) -> ErrorMatrix:
    """Normalized limiting error of ``(R_1 - R_3) / sigma2_gap`` around ``A``.

    ``rho`` defaults to the common row sum of ``A``.  The residual series
    ``sum_i A^(i+1) Sigma_bar A^i`` is summed until its terms fall below
    ``tol`` relative to the running sum.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if rho is None:
        rho = float(A.sum(axis=1).mean())
    term = A @ sigma.residual
    total = term.copy()
    for _ in range(100_000):
        term = A @ term @ A.T
        total += term
        scale = np.abs(total).max()
        if np.abs(term).max() <= tol * (scale if scale > 0 else 1.0):
            break
    vals = sigma.beta * rho * np.ones((n, n)) + (np.eye(n) - A @ A) @ total
    return ErrorMatrix(vals / sigma.sigma2_gap, "nig_theorem1")
