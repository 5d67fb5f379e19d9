"""Experiment harness: regimes, accuracy-vs-n sweeps, FFNN training and generalization.

Configuration is flat ``key = value`` text with dotted sections, e.g.::

    regime.N = 50
    regime.S = 35
    noise.beta = 10
    data.checkpoints = 1000, 10000, 100000
    methods = granger, nig, ffnn

See ``SCHEMA`` for every accepted key and its default.  Unknown keys are
rejected.
"""
from __future__ import annotations

import csv
import io
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .classify import (FfnnModel, GraphEstimate, TrainingSpec, accuracy, ffnn_predict, ffnn_train,
                       gmm_graph)
from .errors import ConfigError, NDSError
from .estimators import estimate_from_moments
from .features import ScalingRecord, build_K, pooled, standard_scale
from .graphgen import ObservedSet, erdos_renyi, laplacian_weights, load_adjacency, sample_observed
from .matrix_io import read_matrix, write_matrix
from .moments import lag_moments_at
from .noise import CovarianceSpec, InterventionSpec, build_covariance, covariance_at_ratio
from .rng import child_seed
from .simulate import simulate
from .theory import ConsistencyReport, check_theorem2, theorem2_rhs

ESTIMATOR_METHODS = ("granger", "one_lag", "nig", "precision")
ALL_METHODS = ESTIMATOR_METHODS + ("ffnn", "nig_oracle")
_LAGS = {"granger": 1, "one_lag": 1, "nig": 3, "precision": 0, "nig_oracle": 3}


def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _opt(parse):
    def inner(s):
        return None if s.strip().lower() in ("", "none", "auto") else parse(s)
    return inner


def _list(parse):
    def inner(s):
        return tuple(parse(t) for t in s.split(",") if t.strip())
    return inner


def _str(s):
    return s.strip()


# dotted key -> (attribute, parser, default)
SCHEMA = {
    "regime.id": ("regime_id", _str, "default"),
    "regime.N": ("N", int, 50),
    "regime.S": ("S", _opt(int), None),
    "regime.p": ("p", float, 0.5),
    "regime.directed": ("directed", _bool, False),
    "regime.alpha": ("alpha", float, 0.5),
    "regime.rho": ("rho", float, 0.6),
    "regime.graph_file": ("graph_file", _opt(_str), None),
    "noise.sigma2": ("sigma2", _opt(float), None),
    "noise.headroom": ("headroom", float, 2.0),
    "noise.beta": ("beta", float, 0.0),
    "noise.osc": ("osc", _opt(float), None),
    "noise.osc_fraction": ("osc_fraction", _opt(float), None),
    "noise.intervention": ("intervention", float, 0.0),
    "data.checkpoints": ("checkpoints", _list(int), (1000, 10000, 100000)),
    "data.length": ("length", _opt(int), None),
    "data.burn_in": ("burn_in", _opt(int), None),
    "data.trials": ("trials", int, 5),
    "data.seed": ("seed", int, 0),
    "methods": ("methods", _list(_str), ("granger", "nig")),
    "features.D": ("D", int, 1),
    "features.M": ("M", int, 4),
    "features.scaling": ("scaling", _str, "per_dataset"),
    "classify.symmetrize": ("symmetrize", _opt(_bool), None),
    "train.betas": ("train_betas", _list(float), tuple(float(b) for b in range(0, 55, 5))),
    "train.hidden": ("hidden", _list(int), (32, 16)),
    "train.epochs": ("epochs", int, 300),
    "train.learning_rate": ("learning_rate", float, 1e-2),
    "train.momentum": ("momentum", float, 0.9),
    "train.batch_size": ("batch_size", int, 128),
    "train.class_weighting": ("class_weighting", _bool, True),
    "train.early_stop_tol": ("early_stop_tol", float, 1e-7),
    "train.early_stop_window": ("early_stop_window", int, 10),
    "train.model": ("model_prefix", _opt(_str), None),
    "output.csv": ("out_csv", _opt(_str), None),
    "output.timing": ("timing", _bool, False),
}


@dataclass(frozen=True)
class ExperimentConfig:
    regime_id: str = "default"
    N: int = 50
    S: int | None = None
    p: float = 0.5
    directed: bool = False
    alpha: float = 0.5
    rho: float = 0.6
    graph_file: str | None = None
    sigma2: float | None = None
    headroom: float = 2.0
    beta: float = 0.0
    osc: float | None = None
    osc_fraction: float | None = None
    intervention: float = 0.0
    checkpoints: tuple = (1000, 10000, 100000)
    length: int | None = None
    burn_in: int | None = None
    trials: int = 5
    seed: int = 0
    methods: tuple = ("granger", "nig")
    D: int = 1
    M: int = 4
    scaling: str = "per_dataset"
    symmetrize: bool | None = None
    train_betas: tuple = tuple(float(b) for b in range(0, 55, 5))
    hidden: tuple = (32, 16)
    epochs: int = 300
    learning_rate: float = 1e-2
    momentum: float = 0.9
    batch_size: int = 128
    class_weighting: bool = True
    early_stop_tol: float = 1e-7
    early_stop_window: int = 10
    model_prefix: str | None = None
    out_csv: str | None = None
    timing: bool = False

    def __post_init__(self):
        self.validate()

    # ---- parsing -------------------------------------------------------

    @classmethod
    def from_text(cls, text: str, **overrides) -> "ExperimentConfig":
        kw = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
            key, value = (t.strip() for t in line.split("=", 1))
            if key not in SCHEMA:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            attr, parse, _ = SCHEMA[key]
            try:
                kw[attr] = parse(value)
            except ValueError as exc:
                raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None
        kw.update(overrides)
        return cls(**kw)

    @classmethod
    def from_file(cls, path, **overrides) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_text(text, **overrides)

    def to_text(self) -> str:
        out = []
        for key, (attr, _, _) in SCHEMA.items():
            v = getattr(self, attr)
            if v is None:
                v = "none"
            elif isinstance(v, tuple):
                v = ", ".join(str(t) for t in v)
            elif isinstance(v, bool):
                v = str(v).lower()
            out.append(f"{key} = {v}")
        return "\n".join(out) + "\n"

    def validate(self) -> None:
        def need(cond, msg):
            if not cond:
                raise ConfigError(msg)

        need(self.N >= 2, "regime.N must be >= 2")
        need(self.n_observed >= 2 and self.n_observed <= self.N, "regime.S must be in [2, N]")
        need(0 <= self.p <= 1, "regime.p must be in [0, 1]")
        need(0 < self.rho < 1 and 0 < self.alpha <= self.rho, "need 0 < alpha <= rho < 1")
        need(len(self.checkpoints) > 0, "data.checkpoints is empty")
        need(all(c > 0 for c in self.checkpoints), "checkpoints must be positive")
        need(all(a < b for a, b in zip(self.checkpoints, self.checkpoints[1:])),
             "data.checkpoints must be strictly increasing")
        need(self.trials >= 1, "data.trials must be >= 1")
        need(self.burn_in is None or self.burn_in >= 0, "data.burn_in must be >= 0")
        need(len(self.methods) > 0, "methods list is empty")
        bad = [m for m in self.methods if m not in ALL_METHODS]
        need(not bad, f"unknown methods {bad}; choose from {ALL_METHODS}")
        need(len(set(self.methods)) == len(self.methods), "duplicate methods")
        need(0 <= self.D <= 1 and self.M >= 3, "need 0 <= features.D <= 1 and features.M >= 3")
        need(self.scaling in ("per_dataset", "training"), "features.scaling must be per_dataset or training")
        need(self.headroom > 0, "noise.headroom must be > 0")
        need(self.osc is None or self.osc_fraction is None, "set at most one of noise.osc and noise.osc_fraction")
        need(self.intervention >= 0, "noise.intervention must be >= 0")
        need(self.epochs >= 0 and self.batch_size >= 1 and all(h >= 1 for h in self.hidden),
             "bad training spec")
        need(len(self.train_betas) > 0, "train.betas is empty")
        if self.length is not None:
            need(self.length >= self.checkpoints[-1] + self.max_lag,
                 f"checkpoint {self.checkpoints[-1]} needs data.length >= "
                 f"{self.checkpoints[-1] + self.max_lag}, got {self.length}")
        if self.graph_file is not None:
            need(os.path.isfile(self.graph_file), f"regime.graph_file {self.graph_file} does not exist")

    # ---- derived -------------------------------------------------------

    @property
    def n_observed(self) -> int:
        return self.N if self.S is None else self.S

    @property
    def max_lag(self) -> int:
        lags = [self.M if m == "ffnn" else _LAGS[m] for m in self.methods]
        return max(lags + [1])

    @property
    def sim_length(self) -> int:
        return self.length if self.length is not None else self.checkpoints[-1] + self.max_lag

    @property
    def do_symmetrize(self) -> bool:
        return (not self.directed) if self.symmetrize is None else self.symmetrize

    @property
    def training_spec(self) -> TrainingSpec:
        return TrainingSpec(hidden=tuple(self.hidden), epochs=self.epochs, learning_rate=self.learning_rate,
                            momentum=self.momentum, batch_size=self.batch_size,
                            class_weighting=self.class_weighting, early_stop_tol=self.early_stop_tol,
                            early_stop_window=self.early_stop_window)


@dataclass
class ResultRow:
    regime: str
    method: str
    beta: float
    n: int
    trial: int
    seed: int
    accuracy: float | None
    error: str = ""
    wall_time: float | None = None

    def __post_init__(self):
        if self.accuracy is not None and not 0.0 <= self.accuracy <= 1.0:
            raise ValueError(f"accuracy {self.accuracy} outside [0, 1]")

    @property
    def ok(self) -> bool:
        return not self.error


CSV_FIELDS = ["regime", "method", "beta", "n", "trial", "seed", "accuracy", "error"]


def _csv_fields(timing: bool):
    return CSV_FIELDS + (["wall_time"] if timing else [])


def _csv_record(row: ResultRow, timing: bool) -> list:
    acc = "" if row.accuracy is None else repr(float(row.accuracy))
    rec = [row.regime, row.method, repr(float(row.beta)), row.n, row.trial, row.seed, acc, row.error]
    if timing:
        rec.append("" if row.wall_time is None else f"{row.wall_time:.6f}")
    return rec


# ---- regimes ---------------------------------------------------------------

@dataclass
class Instance:
    A: object  # InteractionMatrix
    cov: CovarianceSpec
    observed: ObservedSet
    seed: int

    @property
    def A_S(self) -> np.ndarray:
        s = self.observed.indices
        return self.A.A[np.ix_(s, s)]


def make_instance(cfg: ExperimentConfig, seed: int, beta: float | None = None) -> Instance:
    """Graph, weights, noise covariance and observed set for one trial seed."""
    beta = cfg.beta if beta is None else beta
    if cfg.graph_file is not None:
        G = load_adjacency(cfg.graph_file, directed=cfg.directed)
        if G.n != cfg.N:
            raise ConfigError(f"graph file has {G.n} nodes, regime.N is {cfg.N}")
    else:
        G = erdos_renyi(cfg.N, cfg.p, cfg.directed, seed=child_seed(seed, "graph"))
    A = laplacian_weights(G, cfg.alpha, cfg.rho)
    sigma2 = cfg.sigma2 if cfg.sigma2 is not None else beta + cfg.headroom
    cseed = child_seed(seed, "covariance", repr(float(beta)))
    if cfg.osc_fraction is not None:
        a_min = A.a_plus_min()
        if math.isnan(a_min):
            raise ConfigError("noise.osc_fraction needs a graph with at least one edge")
        cov = covariance_at_ratio(cfg.N, sigma2, beta, cfg.osc_fraction * theorem2_rhs(a_min, cfg.rho), cseed)
    else:
        cov = build_covariance(cfg.N, sigma2, beta, cfg.osc or 0.0, cseed)
    obs = sample_observed(cfg.N, cfg.n_observed, seed=child_seed(seed, "observed"))
    return Instance(A, cov, obs, seed)


def instance_moments(cfg: ExperimentConfig, inst: Instance) -> dict:
    """Simulate once to the largest checkpoint and return observed moments at every checkpoint."""
    iv = InterventionSpec(cfg.intervention) if cfg.intervention > 0 else None
    ts = simulate(inst.A, inst.cov, cfg.sim_length, intervention=iv, burn_in=cfg.burn_in,
                  seed=child_seed(inst.seed, "simulate"))
    return lag_moments_at(ts.data[:, inst.observed.indices], cfg.max_lag, cfg.checkpoints)


def trial_seed(cfg: ExperimentConfig, trial: int) -> int:
    return child_seed(cfg.seed, "trial", trial)


# ---- trained FFNN bundle -----------------------------------------------------

@dataclass
class TrainedModels:
    """One FFNN (and its training scaling record) per checkpoint."""

    models: dict
    scalings: dict
    train_accuracy: dict = field(default_factory=dict)

    def save(self, prefix) -> list:
        paths = []
        for n, model in self.models.items():
            mpath = f"{prefix}.n{n}.model"
            model.save(mpath)
            rec = self.scalings[n]
            spath = f"{prefix}.n{n}.scaling"
            write_matrix(spath, np.vstack([_expand(rec.mean, rec.keep), _expand(rec.var, rec.keep),
                                           rec.keep.astype(float)]))
            paths += [mpath, spath]
        return paths

    @classmethod
    def load(cls, prefix, checkpoints) -> "TrainedModels":
        models, scalings = {}, {}
        for n in checkpoints:
            mpath, spath = f"{prefix}.n{n}.model", f"{prefix}.n{n}.scaling"
            if not (os.path.isfile(mpath) and os.path.isfile(spath)):
                raise ConfigError(f"no trained model for checkpoint {n} at {prefix}")
            models[n] = FfnnModel.load(mpath)
            S = read_matrix(spath)
            keep = S[2] != 0
            scalings[n] = ScalingRecord(S[0][keep], S[1][keep], keep)
        return cls(models, scalings)


def _expand(v, keep):
    out = np.zeros(keep.size)
    out[keep] = v
    return out


def _train_features(cfg: ExperimentConfig, beta: float, seed: int):
    inst = make_instance(cfg, seed, beta=beta)
    moms = instance_moments(replace(cfg, methods=("ffnn",)), replace(inst, seed=child_seed(seed, "beta",
                                                                                            repr(beta))))
    return {n: build_K(moms[n], D=cfg.D, M=cfg.M).with_labels(inst.A_S) for n in cfg.checkpoints}


def train_models(cfg: ExperimentConfig, threads: int = 1) -> TrainedModels:
    """Train one FFNN per checkpoint on a single graph realization across the beta sweep.

    Graph, weights and observed set are shared by the whole sweep; each beta
    gets its own covariance draw and simulation.  With ``scaling ==
    "training"`` one scaling record is fitted on the pooled K features and
    reused at test time; with ``"per_dataset"`` each dataset is
    standardized on its own before pooling.
    """
    seed = child_seed(cfg.seed, "train")
    per_beta = list(_imap(_train_features, [(cfg, b, seed) for b in cfg.train_betas], threads))
    models, scalings, train_acc = {}, {}, {}
    for n in cfg.checkpoints:
        sets = [d[n] for d in per_beta]
        if cfg.scaling == "per_dataset":
            P = pooled([standard_scale(s)[0] for s in sets])
            rec = None
        else:
            P, rec = standard_scale(pooled(sets))
        model = ffnn_train(P.values, P.labels, cfg.training_spec, seed=child_seed(seed, "ffnn", n))
        _, lab = ffnn_predict(model, P.values)
        models[n] = model
        scalings[n] = rec if rec is not None else ScalingRecord(np.zeros(P.dim), np.ones(P.dim),
                                                                np.ones(P.dim, dtype=bool))
        train_acc[n] = float((lab == P.labels).mean())
        model.meta["train_accuracy"] = train_acc[n]
    return TrainedModels(models, scalings, train_acc)


# ---- evaluation ---------------------------------------------------------------

def _symmetric(M, on: bool):
    return (M + M.T) / 2 if on else M


def best_threshold_accuracy(scores, truth, directed: bool = True) -> float:
    """Best accuracy over all single thresholds on ``scores``; 1.0 exactly when a consistent threshold exists."""
    scores = np.asarray(scores, dtype=float)
    n = scores.shape[0]
    mask = ~np.eye(n, dtype=bool)
    cuts = np.unique(scores[mask])
    cuts = np.concatenate([[cuts[0] - 1.0], (cuts[:-1] + cuts[1:]) / 2, [cuts[-1] + 1.0]])
    best = 0.0
    for tau in cuts:
        best = max(best, accuracy((scores > tau).astype(int) * mask, truth, directed=directed))
        if best == 1.0:
            break
    return best


def evaluate_method(method: str, m, A_S, cfg: ExperimentConfig, seed: int, n: int,
                    trained: TrainedModels | None = None) -> float:
    sym = cfg.do_symmetrize
    if method in ESTIMATOR_METHODS:
        S = _symmetric(estimate_from_moments(method, m).scores(), sym)
        return accuracy(gmm_graph(S, seed=child_seed(seed, "gmm", method, n)), A_S, directed=cfg.directed)
    if method == "nig_oracle":
        S = _symmetric(estimate_from_moments("nig", m).scores(), sym)
        return best_threshold_accuracy(S, A_S, directed=cfg.directed)
    if method == "ffnn":
        if trained is None or n not in trained.models:
            raise ConfigError(f"no trained FFNN for checkpoint {n}")
        K = build_K(m, D=cfg.D, M=cfg.M)
        Ks = standard_scale(K)[0] if cfg.scaling == "per_dataset" else trained.scalings[n].apply(K)
        prob, _ = ffnn_predict(trained.models[n], Ks.values)
        k = A_S.shape[0]
        P = np.zeros((k, k))
        P[K.pairs[:, 0], K.pairs[:, 1]] = prob
        P = _symmetric(P, sym)
        return accuracy(GraphEstimate((P > 0.5).astype(int)), A_S, directed=cfg.directed)
    raise ConfigError(f"unknown method {method!r}")


def _error_tag(exc: Exception) -> str:
    msg = " ".join(str(exc).split()).replace(",", ";")
    return f"{type(exc).__name__}: {msg}"


def run_trial(cfg: ExperimentConfig, trial: int, trained: TrainedModels | None = None) -> list:
    seed = trial_seed(cfg, trial)
    t0 = time.perf_counter()
    try:
        inst = make_instance(cfg, seed)
        moms = instance_moments(cfg, inst)
    except NDSError as exc:
        return [ResultRow(cfg.regime_id, meth, cfg.beta, n, trial, seed, None, _error_tag(exc))
                for n in cfg.checkpoints for meth in cfg.methods]
    setup = time.perf_counter() - t0
    rows = []
    for n in cfg.checkpoints:
        for meth in cfg.methods:
            t1 = time.perf_counter()
            try:
                acc, err = evaluate_method(meth, moms[n], inst.A_S, cfg, seed, n, trained), ""
            except ConfigError:
                raise
            except NDSError as exc:
                acc, err = None, _error_tag(exc)
            rows.append(ResultRow(cfg.regime_id, meth, cfg.beta, n, trial, seed, acc, err,
                                  wall_time=time.perf_counter() - t1 + setup))
    return rows


def _call(args):
    fn, a = args
    return fn(*a)


def _imap(fn, arglist, threads: int):
    """Ordered map, in worker processes when ``threads > 1``."""
    if threads <= 1 or len(arglist) <= 1:
        for a in arglist:
            yield fn(*a)
        return
    with ProcessPoolExecutor(max_workers=threads) as ex:
        yield from ex.map(_call, [(fn, a) for a in arglist])


def run_benchmark(cfg: ExperimentConfig, out=None, trained: TrainedModels | None = None,
                  threads: int = 1) -> list:
    """Run every method at every checkpoint for ``cfg.trials`` trials.

    Rows are written to ``out`` (path, file object or ``cfg.out_csv``) as each
    trial finishes, in trial order, and flushed per row.  Failures inside a
    trial become rows with an ``error`` tag.
    """
    if "ffnn" in cfg.methods and trained is None:
        if cfg.model_prefix is not None and os.path.isfile(f"{cfg.model_prefix}.n{cfg.checkpoints[0]}.model"):
            trained = TrainedModels.load(cfg.model_prefix, cfg.checkpoints)
        else:
            trained = train_models(cfg, threads=threads)
    out = out if out is not None else cfg.out_csv
    with _Writer(out, cfg.timing) as w:
        rows = []
        for trial_rows in _imap(run_trial, [(cfg, t, trained) for t in range(cfg.trials)], threads):
            for r in trial_rows:
                w.write(r)
            rows.extend(trial_rows)
    return rows


def train_and_generalize(train_cfg: ExperimentConfig, test_cfgs, out=None, threads: int = 1):
    """Train on ``train_cfg`` then evaluate the same models on each test regime.

    Returns ``(trained, rows)``.  Test checkpoints must be a subset of the
    training checkpoints.
    """
    trained = train_models(train_cfg, threads=threads)
    rows = []
    with _Writer(out, any(c.timing for c in test_cfgs)) as w:
        for cfg in test_cfgs:
            missing = set(cfg.checkpoints) - set(train_cfg.checkpoints)
            if missing:
                raise ConfigError(f"test checkpoints {sorted(missing)} were not trained")
            for trial_rows in _imap(run_trial, [(cfg, t, trained) for t in range(cfg.trials)], threads):
                for r in trial_rows:
                    w.write(r)
                rows.extend(trial_rows)
    return trained, rows


class _Writer:
    def __init__(self, target, timing: bool):
        self.target, self.timing = target, timing
        self.fh = None
        self.own = False

    def __enter__(self):
        if self.target is None:
            return self
        if isinstance(self.target, (str, os.PathLike)):
            self.fh = open(self.target, "w", newline="")
            self.own = True
        else:
            self.fh = self.target
        self.w = csv.writer(self.fh, lineterminator="\n")
        self.w.writerow(_csv_fields(self.timing))
        self.fh.flush()
        return self

    def write(self, row: ResultRow):
        if self.fh is not None:
            self.w.writerow(_csv_record(row, self.timing))
            self.fh.flush()

    def __exit__(self, *exc):
        if self.own:
            self.fh.close()


def read_results(path) -> list:
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.append(ResultRow(rec["regime"], rec["method"], float(rec["beta"]), int(rec["n"]),
                                  int(rec["trial"]), int(rec["seed"]),
                                  float(rec["accuracy"]) if rec["accuracy"] else None, rec["error"],
                                  float(rec["wall_time"]) if rec.get("wall_time") else None))
    return rows


# ---- summaries ----------------------------------------------------------------

@dataclass
class SummaryRow:
    regime: str
    method: str
    n: int
    mean: float
    sd: float
    median: float
    count: int
    errors: int


def summarize(rows) -> list:
    """Per (regime, method, n): mean, sample sd, median and counts of successful trials."""
    groups: dict = {}
    for r in rows:
        groups.setdefault((r.regime, r.method, r.n), []).append(r)
    out = []
    for (regime, method, n), rs in groups.items():
        acc = np.array([r.accuracy for r in rs if r.ok], dtype=float)
        errs = sum(not r.ok for r in rs)
        if acc.size:
            sd = float(acc.std(ddof=1)) if acc.size > 1 else 0.0
            out.append(SummaryRow(regime, method, n, float(acc.mean()), sd, float(np.median(acc)), acc.size, errs))
        else:
            out.append(SummaryRow(regime, method, n, float("nan"), float("nan"), float("nan"), 0, errs))
    return out


def plotdata(results_path, out=None) -> str:
    """Mean and sd accuracy per method and checkpoint, as CSV text (also written to ``out``)."""
    summary = summarize(read_results(results_path))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["regime", "method", "n", "mean", "sd", "median", "count", "errors"])
    for s in summary:
        w.writerow([s.regime, s.method, s.n, f"{s.mean:.6f}", f"{s.sd:.6f}", f"{s.median:.6f}", s.count, s.errors])
    text = buf.getvalue()
    if out is not None:
        with open(out, "w") as fh:
            fh.write(text)
    return text


def audit(A_path, sigma_path) -> ConsistencyReport:
    """Consistency report for an interaction matrix and a noise covariance stored as matrix text files."""
    A = read_matrix(A_path)
    cov = CovarianceSpec.from_matrix(read_matrix(sigma_path))
    return check_theorem2(A, cov)
