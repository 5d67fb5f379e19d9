"""Colored noise covariances, their flat-plus-residual decomposition, and sampling."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AssumptionViolation, ConstructionError, ParameterError
from .rng import make_rng

PSD_TOL = 1e-10
DIAG_RTOL = 1e-9


def offdiag(M) -> np.ndarray:
    """Off-diagonal entries of a square matrix, row-major."""
    M = np.asarray(M)
    return M[~np.eye(M.shape[0], dtype=bool)]


@dataclass(frozen=True)
class CovarianceSpec:
    """Noise covariance together with its decomposition

    ``sigma = sigma2_gap * I + beta * 11^T + residual``.
    """

    sigma: np.ndarray
    sigma2_gap: float
    beta: float
    residual: np.ndarray

    @classmethod
    def from_matrix(cls, sigma) -> "CovarianceSpec":
        sigma = np.asarray(sigma, dtype=float)
        gap, beta, residual = decompose_covariance(sigma)
        return cls(sigma, gap, beta, residual)

    @property
    def n(self) -> int:
        return self.sigma.shape[0]

    @property
    def sigma2(self) -> float:
        return float(self.sigma[0, 0])

    def offdiag_osc(self) -> float:
        off = offdiag(self.sigma)
        return float(off.max() - off.min())

    def with_intervention(self, variance: float) -> "CovarianceSpec":
        """Effective covariance when an independent N(0, variance I) input is added."""
        if variance < 0:
            raise ParameterError(f"intervention variance must be >= 0, got {variance}")
        return CovarianceSpec.from_matrix(self.sigma + variance * np.eye(self.n))

    def scaled(self, c2: float) -> "CovarianceSpec":
        return CovarianceSpec(c2 * self.sigma, c2 * self.sigma2_gap, c2 * self.beta, c2 * self.residual)


@dataclass(frozen=True)
class InterventionSpec:
    variance: float = 0.0

    def __post_init__(self):
        if not self.variance >= 0:
            raise ParameterError(f"intervention variance must be >= 0, got {self.variance}")


def decompose_covariance(sigma):
    """Split a covariance into ``(sigma2_gap, beta, residual)``.

    ``sigma2_gap`` is the diagonal value minus the largest off-diagonal entry,
    ``beta`` the mean off-diagonal entry, and ``residual`` whatever is left.
    """
    S = np.asarray(sigma, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1] or S.shape[0] < 2:
        raise ParameterError(f"need a square matrix of size >= 2, got {S.shape}")
    if not np.allclose(S, S.T, rtol=0, atol=1e-12 * max(1.0, np.abs(S).max())):
        raise ParameterError("covariance is not symmetric")
    d = np.diag(S)
    s2 = float(d[0])
    if np.abs(d - s2).max() > DIAG_RTOL * max(abs(s2), 1e-300):
        raise AssumptionViolation("diagonal of the noise covariance is not constant",
                                  assumption="nodewise homogeneity")
    off = offdiag(S)
    gap = s2 - float(off.max())
    if gap <= 0:
        raise AssumptionViolation(f"sigma2_gap = {gap:g} <= 0",
                                  assumption="pairwise distinguishability")
    n = S.shape[0]
    beta = float(off.sum()) / (n * (n - 1))
    residual = S - gap * np.eye(n) - beta * np.ones((n, n))
    return gap, beta, residual


def check_psd(S, scale) -> float:
    lam_min = float(np.linalg.eigvalsh(S)[0])
    if lam_min < -PSD_TOL * scale:
        raise ConstructionError(
            f"covariance is not PSD (smallest eigenvalue {lam_min:.3g}); "
            "reduce the oscillation or beta")
    return lam_min


def build_covariance(n: int, sigma2: float, beta: float, osc: float, seed: int = 0) -> CovarianceSpec:
    """Random covariance with diagonal ``sigma2`` and off-diagonals centred on ``beta``.

    Off-diagonal perturbations are uniform on ``[-osc/2, osc/2]`` and then
    recentred so that their mean is exactly zero, which keeps ``beta`` exact.
    """
    if n < 2:
        raise ParameterError(f"need n >= 2, got {n}")
    if osc < 0 or beta + osc / 2 < 0 or not sigma2 > beta + osc / 2:
        raise ParameterError("need sigma2 > beta + osc/2 >= 0 and osc >= 0")
    rng = make_rng(seed)
    iu = np.triu_indices(n, k=1)
    u = rng.uniform(-osc / 2, osc / 2, size=iu[0].size)
    u -= u.mean()
    S = np.zeros((n, n))
    S[iu] = beta + u
    S = S + S.T
    np.fill_diagonal(S, sigma2)
    check_psd(S, sigma2)
    return CovarianceSpec.from_matrix(S)


def covariance_at_ratio(n: int, sigma2: float, beta: float, ratio: float, seed: int = 0) -> CovarianceSpec:
    """Random covariance as in ``build_covariance`` with ``Osc(Off) / sigma2_gap`` equal to ``ratio``.

    The uniform draws scale linearly with ``osc`` for a fixed seed, so one
    unit-scale draw fixes both the achieved oscillation and the largest
    off-diagonal excess, and the right ``osc`` follows in closed form.
    """
    if ratio < 0:
        raise ParameterError("ratio must be >= 0")
    unit = build_covariance(n, beta + 1.0 + 1e3, beta, 1.0, seed)
    c = unit.offdiag_osc()
    d = float(offdiag(unit.sigma).max()) - beta
    head = sigma2 - beta
    o = ratio * head / (c + ratio * d) if ratio > 0 else 0.0
    return build_covariance(n, sigma2, beta, o, seed)


def flat_covariance(n: int, sigma2: float, beta: float) -> CovarianceSpec:
    """``sigma2`` on the diagonal, ``beta`` everywhere else."""
    return build_covariance(n, sigma2, beta, 0.0)


def symmetric_factor(S) -> np.ndarray:
    """Symmetric square root ``L`` with ``L @ L.T == S`` for PSD ``S``."""
    S = np.asarray(S, dtype=float)
    w, V = np.linalg.eigh(S)
    if w[0] < -PSD_TOL * max(1.0, abs(w[-1])):
        raise ConstructionError(f"cannot factor a non-PSD matrix (eigenvalue {w[0]:.3g})")
    return (V * np.sqrt(np.clip(w, 0.0, None))) @ V.T


def sample_noise(spec, length: int, seed: int = 0) -> np.ndarray:
    """``length`` i.i.d. Gaussian draws with covariance ``spec.sigma``, one per row."""
    S = spec.sigma if isinstance(spec, CovarianceSpec) else np.asarray(spec, dtype=float)
    if length < 0:
        raise ParameterError("length must be >= 0")
    L = symmetric_factor(S)
    z = make_rng(seed).standard_normal((length, S.shape[0]))
    return z @ L.T


def add_intervention(noise, intervention: InterventionSpec, seed: int = 0) -> np.ndarray:
    noise = np.asarray(noise, dtype=float)
    if intervention.variance == 0:
        return noise.copy()
    xi = make_rng(seed).standard_normal(noise.shape)
    return noise + np.sqrt(intervention.variance) * xi
