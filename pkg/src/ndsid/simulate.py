"""Linear networked dynamics ``y(t+1) = A y(t) + x(t+1) [+ xi(t+1)]``."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, StabilityError
from .graphgen import InteractionMatrix, ObservedSet
from .noise import CovarianceSpec, InterventionSpec, add_intervention, sample_noise
from .rng import child_seed


@dataclass
class TimeSeries:
    """``data[t]`` is the state vector at retained time ``t``."""

    data: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def n_nodes(self) -> int:
        return self.data.shape[1]

    @property
    def length(self) -> int:
        return self.data.shape[0]


@dataclass
class ObservedTimeSeries:
    data: np.ndarray
    observed: ObservedSet
    meta: dict = field(default_factory=dict)

    @property
    def length(self) -> int:
        return self.data.shape[0]


def default_burn_in(rho: float) -> int:
    return 10 * math.ceil(round(1.0 / (1.0 - rho), 9))


def simulate(A, noise: CovarianceSpec, length: int, *, intervention: InterventionSpec | None = None,
             burn_in: int | None = None, seed: int = 0) -> TimeSeries:
    """Iterate the recursion from ``y(0) = 0`` and drop the first ``burn_in`` states.

    Noise and intervention draws use separate child seeds, so turning the
    intervention on does not change the noise path.
    """
    A_mat = A.A if isinstance(A, InteractionMatrix) else np.asarray(A, dtype=float)
    if length < 1:
        raise ParameterError("length must be >= 1")
    if A_mat.ndim != 2 or A_mat.shape != noise.sigma.shape:
        raise ParameterError(f"A {A_mat.shape} does not match noise {noise.sigma.shape}")
    eig = np.linalg.eigvals(A_mat)
    rho = float(np.abs(eig).max()) if eig.size else 0.0
    if rho >= 1.0:
        raise StabilityError(f"spectral radius {rho:.6g} >= 1")
    if burn_in is None:
        burn_in = default_burn_in(rho)
    total = burn_in + length
    x = sample_noise(noise, total, seed=child_seed(seed, "noise"))
    if intervention is not None and intervention.variance > 0:
        x = add_intervention(x, intervention, seed=child_seed(seed, "intervention"))

    # y[t] = A y[t-1] + x[t]; written on rows, y_row[t] = y_row[t-1] @ A.T + x_row[t]
    At = np.ascontiguousarray(A_mat.T)
    y = np.empty_like(x)
    prev = np.zeros(A_mat.shape[0])
    for t in range(total):
        prev = prev @ At + x[t]
        y[t] = prev
    meta = {"seed": seed, "burn_in": burn_in}
    return TimeSeries(y[burn_in:], meta)


def observe(ts: TimeSeries, s: ObservedSet) -> ObservedTimeSeries:
    if s.n_total != ts.n_nodes:
        raise ParameterError(f"observed set is for {s.n_total} nodes, series has {ts.n_nodes}")
    return ObservedTimeSeries(ts.data[:, s.indices], s, dict(ts.meta))
