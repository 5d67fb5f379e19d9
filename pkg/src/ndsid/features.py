"""Per-pair feature vectors built from observed lag moments.

Pairs are ordered ``(i, j)`` with ``i != j`` in row-major order over the
observed (local) indices; the pair ``(i, j)`` describes the arrow ``j -> i``.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConditioningError, LengthError, ParameterError
from .estimators import guarded_inv
from .moments import LagMoments, lag_moments

DEFAULT_D = 1
DEFAULT_M = 4


def ordered_pairs(n: int) -> np.ndarray:
    ii, jj = np.nonzero(~np.eye(n, dtype=bool))
    return np.column_stack([ii, jj])


@dataclass
class ScalingRecord:
    mean: np.ndarray
    var: np.ndarray
    keep: np.ndarray  # boolean mask of retained coordinates

    def apply(self, fs: "FeatureSet") -> "FeatureSet":
        if fs.values.shape[1] != self.keep.size:
            raise ParameterError(f"feature dimension {fs.values.shape[1]} != scaling dimension {self.keep.size}")
        vals = (fs.values[:, self.keep] - self.mean) / np.sqrt(self.var)
        names = [n for n, k in zip(fs.names, self.keep) if k]
        return replace(fs, values=vals, names=names, scaling=self)


@dataclass
class FeatureSet:
    pairs: np.ndarray
    values: np.ndarray
    names: list
    labels: np.ndarray | None = None
    scaling: ScalingRecord | None = None
    meta: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def __len__(self):
        return self.pairs.shape[0]

    def with_labels(self, A_S) -> "FeatureSet":
        A_S = np.asarray(A_S)
        lab = (A_S[self.pairs[:, 0], self.pairs[:, 1]] != 0).astype(int)
        return replace(self, labels=lab)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["i", "j", "label", *[f"k_{t}" for t in range(self.dim)]])
            for (i, j), lab, row in zip(self.pairs, self._labels_or_blank(), self.values):
                w.writerow([int(i), int(j), lab, *[repr(float(v)) for v in row]])

    def _labels_or_blank(self):
        return self.labels if self.labels is not None else [""] * len(self)


def pooled(sets) -> FeatureSet:
    sets = list(sets)
    if not sets:
        raise ParameterError("nothing to pool")
    names = sets[0].names
    if any(s.names != names for s in sets):
        raise ParameterError("feature sets have different coordinates")
    labels = None
    if all(s.labels is not None for s in sets):
        labels = np.concatenate([s.labels for s in sets])
    return FeatureSet(np.concatenate([s.pairs for s in sets]), np.concatenate([s.values for s in sets]),
                      list(names), labels)


def _moments(source, n, max_lag) -> LagMoments:
    if isinstance(source, LagMoments):
        if source.max_lag < max_lag:
            raise LengthError(f"moments only reach lag {source.max_lag}, need {max_lag}")
        return source
    return lag_moments(source, max_lag, n)


def build_F(source, n: int | None = None, D: int = DEFAULT_D, M: int = DEFAULT_M) -> FeatureSet:
    """Coordinate ``t`` of pair ``(i, j)`` is ``[R_{D+t}]_ij`` for ``t = 0..M-D``."""
    if not (0 <= D <= 1 and M >= 3):
        raise ParameterError(f"need 0 <= D <= 1 and M >= 3, got D={D}, M={M}")
    m = _moments(source, n, M)
    pairs = ordered_pairs(m[0].shape[0])
    vals = np.column_stack([m[k][pairs[:, 0], pairs[:, 1]] for k in range(D, M + 1)])
    return FeatureSet(pairs, vals, [f"F{k}" for k in range(D, M + 1)], meta={"n": m.n_samples})


def build_T(source, n: int | None = None, M: int = DEFAULT_M) -> FeatureSet:
    """Coordinate ``k`` of pair ``(i, j)`` is ``[([R_k]_S)^{-1}]_ij`` for ``k = 0..M``."""
    if M < 0:
        raise ParameterError("M must be >= 0")
    m = _moments(source, n, M)
    pairs = ordered_pairs(m[0].shape[0])
    cols = []
    for k in range(M + 1):
        try:
            inv = guarded_inv(m[k], f"lag-{k} covariance")
        except ConditioningError as exc:
            raise ConditioningError(f"T feature at lag {k}: {exc}") from exc
        cols.append(inv[pairs[:, 0], pairs[:, 1]])
    return FeatureSet(pairs, np.column_stack(cols), [f"T{k}" for k in range(M + 1)],
                      meta={"n": m.n_samples})


def concat_K(F: FeatureSet, T: FeatureSet) -> FeatureSet:
    if T.dim == 0 or F.dim == 0:
        raise ParameterError("cannot concatenate an empty feature block")
    if not np.array_equal(F.pairs, T.pairs):
        raise ParameterError("F and T are over different pair lists")
    labels = F.labels if F.labels is not None else T.labels
    return FeatureSet(F.pairs, np.hstack([F.values, T.values]), F.names + T.names, labels,
                      meta=dict(F.meta))


def build_K(source, n: int | None = None, D: int = DEFAULT_D, M: int = DEFAULT_M) -> FeatureSet:
    m = _moments(source, n, M)
    return concat_K(build_F(m, D=D, M=M), build_T(m, M=M))


def center(fs: FeatureSet) -> FeatureSet:
    return replace(fs, values=fs.values - fs.values.mean(axis=0))


def fit_scaling(fs: FeatureSet) -> ScalingRecord:
    """Population (1/N) mean and variance per coordinate; zero-variance coordinates are dropped."""
    mean = fs.values.mean(axis=0)
    var = fs.values.var(axis=0)
    keep = var > 0
    if not keep.all():
        dropped = [n for n, k in zip(fs.names, keep) if not k]
        warnings.warn(f"dropping zero-variance feature coordinates: {dropped}", RuntimeWarning, stacklevel=2)
    return ScalingRecord(mean[keep], var[keep], keep)


def standard_scale(fs: FeatureSet) -> tuple[FeatureSet, ScalingRecord]:
    rec = fit_scaling(fs)
    return rec.apply(fs), rec
