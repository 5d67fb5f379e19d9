"""Empirical lag covariances and their stationary limits."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LengthError, ParameterError, StabilityError

TOL_SERIES = 1e-12
MAX_SERIES_TERMS = 100_000
BLOCK = 4096


@dataclass
class LagMoments:
    """``mats[k]`` holds the lag-``k`` covariance for ``k = 0..max_lag``."""

    mats: list
    n_samples: int | None = None

    @property
    def max_lag(self) -> int:
        return len(self.mats) - 1

    def __getitem__(self, k):
        return self.mats[k]

    def restrict(self, idx) -> "LagMoments":
        idx = np.asarray(idx)
        return LagMoments([m[np.ix_(idx, idx)] for m in self.mats], self.n_samples)


class LagCovAccumulator:
    """Streaming sums ``sum_l y(l+k) y(l)^T`` for ``k = 0..max_lag``.

    Rows are pushed in time order.  A base index ``l`` is complete once row
    ``l + max_lag`` has arrived; ``n_complete`` counts those.  Block products
    go through BLAS and the running sums use Kahan compensation, so the
    result does not depend on how the series is chunked beyond ~1e-15
    relative.
    """

    def __init__(self, dim: int, max_lag: int):
        if max_lag < 0:
            raise ParameterError("max_lag must be >= 0")
        self.dim = dim
        self.max_lag = max_lag
        self._sum = np.zeros((max_lag + 1, dim, dim))
        self._comp = np.zeros_like(self._sum)
        self._tail = np.empty((0, dim))
        self.n_complete = 0

    def _add(self, k, term):
        y = term - self._comp[k]
        t = self._sum[k] + y
        self._comp[k] = (t - self._sum[k]) - y
        self._sum[k] = t

    def push(self, rows) -> None:
        rows = np.asarray(rows, dtype=float)
        buf = np.concatenate([self._tail, rows]) if self._tail.size else rows
        nb = max(buf.shape[0] - self.max_lag, 0)
        for start in range(0, nb, BLOCK):
            stop = min(start + BLOCK, nb)
            base = buf[start:stop]
            for k in range(self.max_lag + 1):
                self._add(k, buf[start + k:stop + k].T @ base)
        self.n_complete += nb
        self._tail = buf[nb:].copy()

    def moments(self) -> LagMoments:
        if self.n_complete == 0:
            raise LengthError("no complete samples accumulated")
        mats = [(self._sum[k] - self._comp[k]) / self.n_complete for k in range(self.max_lag + 1)]
        return LagMoments(mats, self.n_complete)


def _as_array(ts):
    return np.asarray(getattr(ts, "data", ts), dtype=float)


def lag_moments(ts, max_lag: int, n: int | None = None) -> LagMoments:
    """All lag covariances ``0..max_lag`` from the first ``n`` bases of ``ts``."""
    Y = _as_array(ts)
    if n is None:
        n = Y.shape[0] - max_lag
    if n < 1 or Y.shape[0] < n + max_lag:
        raise LengthError(f"need {n + max_lag} samples for n={n}, lag {max_lag}; have {Y.shape[0]}")
    acc = LagCovAccumulator(Y.shape[1], max_lag)
    acc.push(Y[: n + max_lag])
    return acc.moments()


def lag_moments_at(ts, max_lag: int, checkpoints) -> dict:
    """One streaming pass returning ``{n: LagMoments}`` for increasing checkpoints."""
    Y = _as_array(ts)
    cps = list(checkpoints)
    if any(b <= a for a, b in zip(cps, cps[1:])):
        raise ParameterError("checkpoints must be strictly increasing")
    if cps and Y.shape[0] < cps[-1] + max_lag:
        raise LengthError(f"series of length {Y.shape[0]} too short for checkpoint {cps[-1]}")
    acc = LagCovAccumulator(Y.shape[1], max_lag)
    out = {}
    pos = 0
    for n in cps:
        acc.push(Y[pos: n + max_lag])
        pos = n + max_lag
        out[n] = acc.moments()
    return out


def empirical_lag_cov(ts, k: int, n: int) -> np.ndarray:
    """``(1/n) sum_{l<n} y(l+k) y(l)^T``."""
    if k < 0 or n < 1:
        raise ParameterError("need k >= 0 and n >= 1")
    Y = _as_array(ts)
    if Y.shape[0] < n + k:
        raise LengthError(f"need {n + k} samples, have {Y.shape[0]}")
    total = np.zeros((Y.shape[1], Y.shape[1]))
    comp = np.zeros_like(total)
    for start in range(0, n, BLOCK):
        stop = min(start + BLOCK, n)
        term = Y[start + k:stop + k].T @ Y[start:stop] - comp
        t = total + term
        comp = (t - total) - term
        total = t
    return total / n


def limit_r0(A, sigma, tol: float = TOL_SERIES) -> np.ndarray:
    """Stationary covariance ``sum_i A^i Sigma (A^T)^i`` by direct series summation."""
    A = np.asarray(A, dtype=float)
    S = np.asarray(getattr(sigma, "sigma", sigma), dtype=float)
    term = S.copy()
    total = S.copy()
    for _ in range(MAX_SERIES_TERMS):
        term = A @ term @ A.T
        total += term
        scale = np.abs(total).max()
        if np.abs(term).max() < tol * (scale if scale > 0 else 1.0):
            return total
    raise StabilityError("series for the stationary covariance did not converge")


def limit_rk(A, r0, k: int) -> np.ndarray:
    if k < 0:
        raise ParameterError("lag must be >= 0")
    out = np.asarray(r0, dtype=float).copy()
    for _ in range(k):
        out = A @ out
    return out


def limit_moments(A, sigma, max_lag: int) -> LagMoments:
    A = np.asarray(A, dtype=float)
    r0 = limit_r0(A, sigma)
    mats = [r0]
    for _ in range(max_lag):
        mats.append(A @ mats[-1])
    return LagMoments(mats, None)
