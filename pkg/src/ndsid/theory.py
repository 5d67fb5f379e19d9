"""Oscillation calculus and identifiability checks.

Nothing here touches data: every check consumes analytic objects (an
interaction matrix, a noise covariance, an estimate with known truth).
"""
from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import linprog

from .errors import AssumptionViolation, DegenerateInputError, ParameterError
from .graphgen import InteractionMatrix, smallest_offdiag_positive, spectral_radius
from .noise import CovarianceSpec, offdiag


MARGIN_RTOL = 1e-12


def osc(values) -> float:
    """``max - min`` of a nonempty collection."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise ParameterError("oscillation of an empty collection")
    return float(v.max() - v.min())


def osc_offdiag(M) -> float:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 2:
        raise ParameterError(f"need a square matrix of size >= 2, got {M.shape}")
    return osc(offdiag(M))


def osc_gain(B) -> float:
    """Smallest ``k`` with ``Osc(B v) <= k Osc(v)`` for all ``v``.

    Finite only when all rows of ``B`` share the same sum; then it equals
    ``max_{i,j} ||B_i - B_j||_1 / 2``.
    """
    B = np.asarray(B, dtype=float)
    rows = B.sum(axis=1)
    if np.ptp(rows) > 1e-12 * max(1.0, np.abs(rows).max()):
        return float("inf")
    diff = np.abs(B[:, None, :] - B[None, :, :]).sum(axis=2)
    return float(diff.max() / 2)


def check_flatness(err, A_S):
    """Is ``Osc(Off(err)) <= A+_min / 2``?  Returns ``(holds, slack)``."""
    E = np.asarray(getattr(err, "values", err), dtype=float)
    a_min = smallest_offdiag_positive(A_S)
    if np.isnan(a_min):
        raise DegenerateInputError("A_S has no nonzero off-diagonal entry")
    slack = a_min / 2 - osc_offdiag(E)
    return slack >= 0, slack


def theorem2_rhs(a_plus_min: float, rho: float) -> float:
    return a_plus_min * (1 - rho ** 2) / (2 * rho * (rho ** 2 + 1))


@dataclass
class ConsistencyReport:
    osc_noise: float
    sigma2_gap: float
    a_plus_min: float
    rho: float
    rho_from_row_sums: bool
    thm2_lhs: float
    thm2_rhs: float
    thm2_margin: float
    min_intervention: float
    osc_error: float | None = None
    eq5_holds: bool | None = None
    threshold: float | None = None

    @property
    def certified(self) -> bool:
        # equality passes; the tolerance keeps rounding at equality from flipping the verdict
        return self.thm2_margin >= -MARGIN_RTOL * self.thm2_rhs

    @property
    def verdict(self) -> str:
        # the condition is sufficient only: a failure is "uncertified", not "inconsistent"
        return "certified" if self.certified else "uncertified"

    def to_text(self) -> str:
        rows = [("verdict", self.verdict)] + [(k, v) for k, v in asdict(self).items()]
        width = max(len(k) for k, _ in rows)
        lines = []
        for k, v in rows:
            if isinstance(v, float):
                v = f"{v:.10g}"
            lines.append(f"{k.ljust(width)}  {v}")
        if not self.rho_from_row_sums:
            lines.append("note: row sums are not constant; rho is the spectral radius and "
                         "the stochastic premise is unverified")
        return "\n".join(lines)

    def to_csv(self, header: bool = True) -> str:
        d = {"verdict": self.verdict, **asdict(self)}
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(d), lineterminator="\n")
        if header:
            w.writeheader()
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in d.items()})
        return buf.getvalue()


def _rho_of(A) -> tuple[float, bool]:
    rows = A.sum(axis=1)
    if np.ptp(rows) <= 1e-12 * max(1.0, abs(rows.max())):
        return float(rows.mean()), True
    return spectral_radius(A), False


def _validate(A, sigma: CovarianceSpec):
    if np.any(A < 0):
        raise AssumptionViolation("interaction matrix has negative entries", assumption="NDS stability")
    if not np.allclose(A, A.T, atol=1e-12):
        raise AssumptionViolation("interaction matrix is not symmetric", assumption="NDS stability")
    rho, exact = _rho_of(A)
    if not 0 < rho < 1:
        raise AssumptionViolation(f"spectral radius {rho:.6g} not in (0, 1)", assumption="NDS stability")
    if sigma.sigma2_gap <= 0:
        raise AssumptionViolation("sigma2_gap <= 0", assumption="pairwise distinguishability")
    return rho, exact


def check_theorem2(A, sigma: CovarianceSpec) -> ConsistencyReport:
    """Evaluate both sides of the oscillation condition for feature separability."""
    A = np.asarray(getattr(A, "A", A), dtype=float)
    rho, exact = _validate(A, sigma)
    a_min = smallest_offdiag_positive(A)
    if np.isnan(a_min):
        raise DegenerateInputError("interaction matrix has no edges")
    lhs = sigma.offdiag_osc() / sigma.sigma2_gap
    rhs = theorem2_rhs(a_min, rho)
    return ConsistencyReport(
        osc_noise=sigma.offdiag_osc(), sigma2_gap=sigma.sigma2_gap, a_plus_min=a_min,
        rho=rho, rho_from_row_sums=exact, thm2_lhs=lhs, thm2_rhs=rhs,
        thm2_margin=rhs - lhs, min_intervention=_min_intervention(sigma, rhs))


def _min_intervention(sigma: CovarianceSpec, rhs: float) -> float:
    if not rhs > 0:
        raise DegenerateInputError("right-hand side of the condition is zero")
    return max(0.0, sigma.offdiag_osc() / rhs - sigma.sigma2_gap)


def min_intervention(A, sigma: CovarianceSpec) -> float:
    """Smallest intervention variance that makes the oscillation condition hold."""
    return check_theorem2(A, sigma).min_intervention


def oscillation_bound_factor(rho: float) -> float:
    """``rho (1 + rho^2) / (1 - rho^2)``: bound on Osc of the unnormalized NIG error per unit noise Osc."""
    return rho * (1 + rho ** 2) / (1 - rho ** 2)


@dataclass
class Threshold:
    tau: float
    gap: float


def find_threshold(est, truth_support) -> Threshold | None:
    """Midpoint threshold separating connected from disconnected off-diagonal scores.

    Returns None when some disconnected pair scores at least as high as some
    connected pair.  ``gap`` is ``min(connected) - max(disconnected)``.
    """
    vals = np.asarray(est.scores() if hasattr(est, "scores") else est, dtype=float)
    truth = np.asarray(truth_support) != 0
    if vals.shape != truth.shape:
        raise ParameterError(f"shape mismatch {vals.shape} vs {truth.shape}")
    mask = ~np.eye(vals.shape[0], dtype=bool)
    conn = vals[mask & truth]
    disc = vals[mask & ~truth]
    if conn.size == 0:
        return Threshold(float(disc.max()), np.inf)
    if disc.size == 0:
        return Threshold(float(conn.min()) - 1.0, np.inf)
    gap = float(conn.min() - disc.max())
    if gap <= 0:
        return None
    return Threshold(float(disc.max() + gap / 2), gap)


@dataclass
class Separator:
    w: np.ndarray
    b: float
    margin: float


def hard_margin_separator(X, labels) -> Separator | None:
    """Affine hyperplane with ``sign(w.x + b)`` matching ``labels`` on every row.

    Solves ``max t`` subject to ``y_i (w.x_i + b) >= t``, ``|w|_inf <= 1``,
    ``t <= 1`` on standardized columns; returns None when the best ``t`` is
    not positive.  ``w`` and ``b`` are mapped back to the input coordinates.
    """
    X = np.asarray(X, dtype=float)
    y = np.where(np.asarray(labels) != 0, 1.0, -1.0)
    if np.all(y == y[0]):
        return Separator(np.zeros(X.shape[1]), float(y[0]), np.inf)
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    sd[sd == 0] = 1.0
    Z = (X - mu) / sd
    n, d = Z.shape
    # variables: w (d), b, t ; minimize -t
    c = np.zeros(d + 2)
    c[-1] = -1.0
    A_ub = np.hstack([-y[:, None] * Z, -y[:, None], np.ones((n, 1))])
    b_ub = np.zeros(n)
    bounds = [(-1, 1)] * d + [(None, None), (None, 1.0)]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if res.status != 0 or -res.fun <= 1e-9:
        return None
    w_std, b_std, t = res.x[:d], res.x[d], res.x[d + 1]
    w = w_std / sd
    b = b_std - float(w @ mu)
    # confirm in the original coordinates
    if np.any(y * (X @ w + b) <= 0):
        return None
    return Separator(w, float(b), float(t))
