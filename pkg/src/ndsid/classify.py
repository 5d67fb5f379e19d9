"""Graph estimates from scores or features: 1-D Gaussian mixture, small FFNN, accuracy."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DegenerateInputError, DivergenceError, FormatError, ParameterError
from .rng import make_rng

# ---------------------------------------------------------------------------
# Gaussian mixture


@dataclass
class GmmModel:
    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    log_likelihood: float

    def posterior_high(self, x) -> np.ndarray:
        """Posterior probability of the larger-mean component."""
        logp = _component_logpdf(np.asarray(x, dtype=float)[None, :], self.means[:, None],
                                 self.variances[:, None]) + np.log(self.weights)[:, None]
        logp -= logp.max(axis=0)
        p = np.exp(logp)
        p /= p.sum(axis=0)
        return p[int(np.argmax(self.means))]


def _component_logpdf(x, mu, var):
    return -0.5 * (np.log(2 * np.pi * var) + (x - mu) ** 2 / var)


def gmm_fit_predict(scores, seed: int = 0, restarts: int = 50, max_iter: int = 500,
                    tol: float = 1e-9):
    """Two-component 1-D Gaussian mixture fitted by EM; larger mean means "connected".

    Restarts begin from mean pairs at random lower/upper quantiles of the
    scores (all run in parallel); the restart with the best final
    log-likelihood wins.  Returns ``(labels, model)``.
    """
    x = np.asarray(scores, dtype=float).ravel()
    if x.size < 4:
        raise ParameterError("need at least 4 scores")
    span = float(x.max() - x.min())
    if span == 0:
        raise DegenerateInputError("all scores are equal; a single cluster cannot be split")
    rng = make_rng(seed)
    floor = 1e-12 * span ** 2
    q = rng.uniform(0.05, 0.45, size=restarts)
    q[0] = 0.25
    mu = np.column_stack([np.quantile(x, q), np.quantile(x, 1 - q)])  # (R, 2)
    var = np.full((restarts, 2), max(x.var(), floor))
    w = np.full((restarts, 2), 0.5)
    prev = np.full(restarts, -np.inf)
    active = np.ones(restarts, dtype=bool)
    ll = prev.copy()
    for _ in range(max_iter):
        logp = _component_logpdf(x[None, None, :], mu[:, :, None], var[:, :, None]) + np.log(w)[:, :, None]
        mx = logp.max(axis=1, keepdims=True)
        lse = mx[:, 0, :] + np.log(np.exp(logp - mx).sum(axis=1))
        ll = lse.sum(axis=1)
        resp = np.exp(logp - lse[:, None, :])
        nk = resp.sum(axis=2) + 1e-300
        new_mu = (resp * x).sum(axis=2) / nk
        new_var = np.maximum((resp * (x - new_mu[:, :, None]) ** 2).sum(axis=2) / nk, floor)
        new_w = np.clip(nk / x.size, 1e-300, None)
        mu = np.where(active[:, None], new_mu, mu)
        var = np.where(active[:, None], new_var, var)
        w = np.where(active[:, None], new_w, w)
        active &= np.abs(ll - prev) >= tol
        prev = ll
        if not active.any():
            break
    best = int(np.argmax(np.where(np.isfinite(ll), ll, -np.inf)))
    model = GmmModel(w[best] / w[best].sum(), mu[best].copy(), var[best].copy(), float(ll[best]))
    labels = (model.posterior_high(x) > 0.5).astype(int)
    return labels, model


# ---------------------------------------------------------------------------
# Feed-forward network


def _softplus(z):
    return np.logaddexp(0.0, z)


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


@dataclass
class TrainingSpec:
    hidden: tuple = (32, 16)
    epochs: int = 300
    learning_rate: float = 1e-2
    momentum: float = 0.9
    batch_size: int = 128
    class_weighting: bool = True
    early_stop_tol: float = 1e-7
    early_stop_window: int = 10


@dataclass
class FfnnModel:
    dims: tuple
    weights: list
    biases: list
    meta: dict = field(default_factory=dict)

    @classmethod
    def init(cls, dims, seed: int = 0) -> "FfnnModel":
        rng = make_rng(seed)
        Ws, bs = [], []
        for a, b in zip(dims[:-1], dims[1:]):
            Ws.append(rng.normal(0.0, np.sqrt(2.0 / (a + b)), size=(a, b)))
            bs.append(np.zeros(b))
        return cls(tuple(int(d) for d in dims), Ws, bs, {})

    @property
    def n_params(self) -> int:
        return sum(W.size + b.size for W, b in zip(self.weights, self.biases))

    def flat(self) -> np.ndarray:
        return np.concatenate([np.concatenate([W.ravel(), b]) for W, b in zip(self.weights, self.biases)])

    def set_flat(self, theta) -> None:
        pos = 0
        for W, b in zip(self.weights, self.biases):
            W[...] = theta[pos:pos + W.size].reshape(W.shape)
            pos += W.size
            b[...] = theta[pos:pos + b.size]
            pos += b.size

    def logits(self, X) -> np.ndarray:
        h = np.asarray(X, dtype=float)
        if h.ndim != 2 or h.shape[1] != self.dims[0]:
            raise ParameterError(f"expected {self.dims[0]} input features, got shape {h.shape}")
        for W, b in zip(self.weights[:-1], self.biases[:-1]):
            h = _softplus(h @ W + b)
        return (h @ self.weights[-1] + self.biases[-1])[:, 0]

    def save(self, path) -> None:
        lines = ["ndsid-ffnn 1", "dims " + " ".join(str(d) for d in self.dims),
                 "activation softplus sigmoid"]
        for W, b in zip(self.weights, self.biases):
            lines.append(" ".join(repr(float(v)) for v in W.ravel()))
            lines.append(" ".join(repr(float(v)) for v in b))
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path) -> "FfnnModel":
        lines = Path(path).read_text().splitlines()
        if not lines or lines[0].split() != ["ndsid-ffnn", "1"]:
            raise FormatError(f"{path}: not an ndsid-ffnn v1 model")
        try:
            dims = tuple(int(t) for t in lines[1].split()[1:])
            Ws, bs = [], []
            body = lines[3:]
            for li, (a, b) in enumerate(zip(dims[:-1], dims[1:])):
                W = np.array([float(t) for t in body[2 * li].split()]).reshape(a, b)
                bias = np.array([float(t) for t in body[2 * li + 1].split()])
                if bias.size != b:
                    raise ValueError("bias size")
                Ws.append(W)
                bs.append(bias)
        except (ValueError, IndexError) as exc:
            raise FormatError(f"{path}: malformed model ({exc})") from exc
        return cls(dims, Ws, bs, {})


def _class_weights(y, on: bool):
    if not on:
        return np.ones_like(y, dtype=float)
    n_pos = y.sum()
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        return np.ones_like(y, dtype=float)
    return np.where(y == 1, y.size / (2.0 * n_pos), y.size / (2.0 * n_neg))


def loss_and_grad(model: FfnnModel, X, y, sw=None):
    """Weighted mean binary cross-entropy and its gradient (flat, matching ``model.flat()``)."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    sw = np.ones_like(y) if sw is None else sw
    acts = [X]
    pre = []
    h = X
    for W, b in zip(model.weights[:-1], model.biases[:-1]):
        z = h @ W + b
        pre.append(z)
        h = _softplus(z)
        acts.append(h)
    logit = (h @ model.weights[-1] + model.biases[-1])[:, 0]
    # BCE with logits: softplus(z) - y z
    loss = float(np.sum(sw * (_softplus(logit) - y * logit)) / y.size)
    delta = (sw * (_sigmoid(logit) - y) / y.size)[:, None]
    gW, gb = [None] * len(model.weights), [None] * len(model.biases)
    for li in range(len(model.weights) - 1, -1, -1):
        gW[li] = acts[li].T @ delta
        gb[li] = delta.sum(axis=0)
        if li > 0:
            delta = (delta @ model.weights[li].T) * _sigmoid(pre[li - 1])
    grad = np.concatenate([np.concatenate([g.ravel(), c]) for g, c in zip(gW, gb)])
    return loss, grad


def _canonical_order(X, y):
    # lexsort treats the last key as primary: X[:, 0] first, labels last
    return np.lexsort([y, *(X[:, c] for c in range(X.shape[1] - 1, -1, -1))])


def ffnn_train(X, y, spec: TrainingSpec | None = None, seed: int = 0) -> FfnnModel:
    """Mini-batch momentum gradient descent on weighted cross-entropy.

    Rows are first put in a canonical (lexicographic) order, so the result
    does not depend on the order in which training pairs were supplied.
    """
    spec = spec or TrainingSpec()
    X = np.asarray(getattr(X, "values", X), dtype=float)
    y = np.asarray(y, dtype=int).ravel()
    if X.shape[0] != y.size:
        raise ParameterError("features and labels differ in length")
    order = _canonical_order(X, y)
    X, y = X[order], y[order]
    rng = make_rng(seed)
    model = FfnnModel.init((X.shape[1], *spec.hidden, 1), seed=int(rng.integers(2**62)))
    sw = _class_weights(y, spec.class_weighting)
    theta = model.flat()
    vel = np.zeros_like(theta)
    losses = []
    for epoch in range(spec.epochs):
        perm = rng.permutation(y.size)
        for start in range(0, y.size, spec.batch_size):
            idx = perm[start:start + spec.batch_size]
            model.set_flat(theta)
            _, g = loss_and_grad(model, X[idx], y[idx], sw[idx])
            vel = spec.momentum * vel - spec.learning_rate * g
            theta = theta + vel
        model.set_flat(theta)
        loss, _ = loss_and_grad(model, X, y, sw)
        if not np.isfinite(loss):
            raise DivergenceError(f"loss became {loss} at epoch {epoch}; use a smaller learning rate")
        losses.append(loss)
        w = spec.early_stop_window
        if len(losses) > w and abs(losses[-1 - w] - losses[-1]) < spec.early_stop_tol:
            break
    model.set_flat(theta)
    model.meta = {"epochs": len(losses), "learning_rate": spec.learning_rate, "seed": seed,
                  "loss_curve": losses, "final_loss": losses[-1] if losses else None}
    return model


def ffnn_predict(model: FfnnModel, X):
    """Return ``(probabilities, labels)`` with the 0.5 cutoff."""
    X = np.asarray(getattr(X, "values", X), dtype=float)
    p = _sigmoid(model.logits(X))
    return p, (p > 0.5).astype(int)


# ---------------------------------------------------------------------------
# Graph estimates and accuracy


@dataclass
class GraphEstimate:
    support: np.ndarray
    scores: np.ndarray | None = None

    def __post_init__(self):
        self.support = np.asarray(self.support, dtype=int)
        np.fill_diagonal(self.support, 0)

    @classmethod
    def from_pairs(cls, n: int, pairs, labels, scores=None) -> "GraphEstimate":
        sup = np.zeros((n, n), dtype=int)
        sup[pairs[:, 0], pairs[:, 1]] = labels
        sc = None
        if scores is not None:
            sc = np.zeros((n, n))
            sc[pairs[:, 0], pairs[:, 1]] = scores
        return cls(sup, sc)


def gmm_graph(score_matrix, seed: int = 0) -> GraphEstimate:
    S = np.asarray(score_matrix, dtype=float)
    mask = ~np.eye(S.shape[0], dtype=bool)
    labels, _ = gmm_fit_predict(S[mask], seed=seed)
    sup = np.zeros(S.shape, dtype=int)
    sup[mask] = labels
    return GraphEstimate(sup, S)


def accuracy(pred, truth, directed: bool = True) -> float:
    """Fraction of ordered off-diagonal pairs classified correctly.

    In undirected mode pair ``(i, j)`` counts as correct only when both
    ``(i, j)`` and ``(j, i)`` are correct.
    """
    P = np.asarray(getattr(pred, "support", pred)) != 0
    T = np.asarray(truth) != 0
    if P.shape != T.shape or P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise ParameterError(f"shape mismatch {P.shape} vs {T.shape}")
    ok = P == T
    if not directed:
        ok = ok & ok.T
    mask = ~np.eye(P.shape[0], dtype=bool)
    return float(ok[mask].mean())
