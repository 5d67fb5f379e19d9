"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

Run on its own with ``pytest tests/test_acceptance.py -v`` or
``python tests/test_acceptance.py``.  The summary lines are printed at the
end of the session.
"""
import contextlib
import io
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.linalg import solve_discrete_lyapunov

from ndsid import cli
from ndsid.bench import ExperimentConfig, make_instance, run_benchmark, summarize, trial_seed
from ndsid.classify import FfnnModel, gmm_fit_predict, loss_and_grad
from ndsid.estimators import granger_limit_error, nig_limit_error
from ndsid.features import build_F, center
from ndsid.graphgen import ObservedSet, erdos_renyi, laplacian_weights, sample_observed
from ndsid.moments import empirical_lag_cov, limit_moments
from ndsid.noise import CovarianceSpec, covariance_at_ratio, flat_covariance
from ndsid.simulate import simulate
from ndsid.theory import (check_theorem2, find_threshold, hard_margin_separator, min_intervention, osc,
                          osc_gain, osc_offdiag, oscillation_bound_factor, theorem2_rhs)

sys.path.insert(0, str(Path(__file__).parent))
from conftest import random_instance  # noqa: E402

ROOT = Path(__file__).resolve().parents[1]
_LINES: dict = {}


@pytest.fixture(scope="module", autouse=True)
def _report(request):
    yield
    tr = request.config.pluginmanager.get_plugin("terminalreporter")
    write = tr.write_line if tr is not None else print
    write("")
    write("acceptance criteria")
    for k in sorted(_LINES):
        write(_LINES[k])


@contextlib.contextmanager
def criterion(k: int, title: str):
    info: dict = {}
    t0 = time.perf_counter()
    try:
        yield info
    except BaseException:
        _LINES[k] = f"criterion {k:2d} FAIL  {title}  {info.get('detail', '')}".rstrip()
        raise
    dt = time.perf_counter() - t0
    _LINES[k] = f"criterion {k:2d} PASS  {title}  ({dt:.1f}s) {info.get('detail', '')}".rstrip()


def lyapunov_r0(A, sigma):
    """Independent oracle: stationary covariance from scipy's discrete Lyapunov solver."""
    return solve_discrete_lyapunov(np.asarray(A), sigma.sigma)


def _instances_1():
    return [random_instance(seed) for seed in range(50)]


# ---------------------------------------------------------------------------

def test_criterion_01_nig_identity():
    with criterion(1, "NIG limit identity (R1 - R3)/gap = A + E on 50 instances") as info:
        t0 = time.perf_counter()
        worst = 0.0
        for A, cov in _instances_1():
            assert A.n <= 15 and A.rho in (0.4, 0.6, 0.8)
            R0 = lyapunov_r0(A.A, cov)
            R1, R3 = A.A @ R0, np.linalg.matrix_power(A.A, 3) @ R0
            E = nig_limit_error(A.A, cov).values
            worst = max(worst, np.abs((R1 - R3) / cov.sigma2_gap - A.A - E).max())
        elapsed = time.perf_counter() - t0
        info["detail"] = f"max-abs {worst:.2e}"
        assert worst < 1e-8
        assert elapsed < 10


def test_criterion_02_flat_noise():
    with criterion(2, "flat noise gives flat error and a threshold with gap A+min * gap") as info:
        worst_osc, worst_slack = 0.0, np.inf
        for seed in range(10):
            A, _ = random_instance(seed)
            for beta in (0.0, 5.0, 50.0):
                cov = flat_covariance(A.n, beta + 1.0 + seed % 3, beta)
                E = nig_limit_error(A.A, cov).values
                worst_osc = max(worst_osc, osc_offdiag(E))
                m = limit_moments(A.A, cov, 3)
                th = find_threshold(m[1] - m[3], A.A)
                assert th is not None
                worst_slack = min(worst_slack, th.gap - A.a_plus_min() * cov.sigma2_gap)
        info["detail"] = f"max Osc(Off(E)) {worst_osc:.1e}, min gap slack {worst_slack:.1e}"
        assert worst_osc < 1e-10
        assert worst_slack >= -1e-9


def _budget_instance(rng, ratio_of_rhs):
    n = int(rng.integers(4, 16))
    rho = float(rng.choice([0.4, 0.6, 0.8, 0.9]))
    while True:
        G = erdos_renyi(n, float(rng.uniform(0.2, 0.9)), seed=int(rng.integers(1 << 30)))
        if G.n_edges() > 0:
            break
    A = laplacian_weights(G, float(rng.uniform(0.2, 1.0)) * rho, rho)
    beta = float(rng.uniform(0.0, 5.0))
    sigma2 = beta + float(rng.uniform(0.5, 3.0))
    rhs = theorem2_rhs(A.a_plus_min(), rho)
    cov = covariance_at_ratio(n, sigma2, beta, ratio_of_rhs * rhs, seed=int(rng.integers(1 << 30)))
    return A, cov


def _consistency_checks(A, cov):
    m = limit_moments(A.A, cov, 4)
    th = find_threshold(m[1] - m[3], A.A)
    F = center(build_F(m).with_labels(A.A))
    sep = hard_margin_separator(F.values, F.labels)
    return th is not None, sep is not None


def test_criterion_03_separability_soundness():
    with criterion(3, "condition with 5% margin gives threshold and F separator, 100/100") as info:
        t0 = time.perf_counter()
        rng = np.random.default_rng(303)
        thresholds = separators = 0
        for _ in range(100):
            A, cov = _budget_instance(rng, float(rng.uniform(0.0, 0.95)))
            rep = check_theorem2(A.A, cov)
            assert rep.thm2_margin >= 0.05 * rep.thm2_rhs - 1e-15
            th, sep = _consistency_checks(A, cov)
            thresholds += th
            separators += sep
        elapsed = time.perf_counter() - t0
        info["detail"] = f"thresholds {thresholds}/100, separators {separators}/100"
        assert thresholds == 100 and separators == 100
        assert elapsed < 60


def _symmetric_stochastic(rng, n):
    G = erdos_renyi(n, float(rng.uniform(0.2, 0.9)), seed=int(rng.integers(1 << 30)))
    if G.n_edges() == 0:
        G = erdos_renyi(n, 1.0)
    return laplacian_weights(G, float(rng.uniform(0.1, 0.99)), 0.99).A / 0.99


def _equal_row_sums(rng, n):
    B = rng.uniform(0, 1, (n, n)) * (rng.uniform(size=(n, n)) < 0.6) + 1e-3
    return B / B.sum(axis=1, keepdims=True) * rng.uniform(0.2, 1.5)


def test_criterion_04_osc_calculus():
    with criterion(4, "Osc properties 1-4 on 200 instances each and the proof-chain bound") as info:
        rng = np.random.default_rng(404)
        viol = {1: 0, 3: 0, 4: 0}
        worst2 = 0.0
        for _ in range(200):
            n = int(rng.integers(2, 20))
            Abar = _symmetric_stochastic(rng, n)
            assert np.allclose(Abar.sum(axis=1), 1) and np.allclose(Abar, Abar.T)
            v = rng.normal(size=n) * rng.uniform(0.1, 100)
            viol[1] += int(osc(Abar @ v) > osc(v) + 1e-12 * np.abs(v).max())

            a = float(rng.normal() * 10)
            worst2 = max(worst2, abs(osc(a * v) - abs(a) * osc(v)) / max(1.0, abs(a) * osc(v)))

            b, c = rng.normal(size=n) * 5, rng.normal(size=n) * 5
            viol[3] += int(osc(b + c) > osc(b) + osc(c) + 1e-12)

            B, C = _equal_row_sums(rng, n), _equal_row_sums(rng, n)
            kb, kc = osc_gain(B), osc_gain(C)
            w = rng.normal(size=n)
            viol[4] += int(osc(C @ B @ w) > kb * kc * osc(w) + 1e-12)
        chain = 0
        for A, cov in _instances_1():
            E_unnorm = nig_limit_error(A.A, cov).values * cov.sigma2_gap
            chain += osc_offdiag(E_unnorm) > oscillation_bound_factor(A.rho) * cov.offdiag_osc() + 1e-12
        info["detail"] = f"violations {viol}, property 2 rel-err {worst2:.1e}, chain violations {chain}"
        assert worst2 <= 1e-12
        assert sum(viol.values()) == 0 and chain == 0


def test_criterion_05_granger_limits():
    with criterion(5, "Granger limit errors under full and partial observation") as info:
        rng = np.random.default_rng(505)
        full = part = 0.0
        for _ in range(20):
            G = erdos_renyi(6, float(rng.uniform(0.3, 0.9)), seed=int(rng.integers(1 << 30)))
            if G.n_edges() == 0:
                continue
            rho = float(rng.choice([0.4, 0.6, 0.8]))
            A = laplacian_weights(G, float(rng.uniform(0.3, 1.0)) * rho, rho).A
            cov = CovarianceSpec.from_matrix(np.eye(6))
            R0 = lyapunov_r0(A, cov)
            full = max(full, np.abs(A @ R0 @ np.linalg.inv(R0) - A).max())
            full = max(full, np.abs(granger_limit_error(A, ObservedSet.full(6)).values).max())
            s = sample_observed(6, 4, seed=int(rng.integers(1 << 30)))
            S = s.indices
            lim = (A @ R0)[np.ix_(S, S)] @ np.linalg.inv(R0[np.ix_(S, S)]) - A[np.ix_(S, S)]
            part = max(part, np.abs(lim - granger_limit_error(A, s).values).max())
        info["detail"] = f"full {full:.1e}, partial {part:.1e}"
        assert full < 1e-9 and part < 1e-9


def test_criterion_06_moment_convergence(two_node):
    with criterion(6, "empirical R0, R1, R3 within 5% of analytic at n = 2e5 (median of 20 seeds)") as info:
        t0 = time.perf_counter()
        cov = CovarianceSpec.from_matrix(np.eye(2))
        R0 = lyapunov_r0(two_node, cov)
        truth = {0: R0, 1: two_node @ R0, 3: np.linalg.matrix_power(two_node, 3) @ R0}
        rel = {k: [] for k in truth}
        for seed in range(20):
            ts = simulate(two_node, cov, 200_003, seed=seed)
            for k, R in truth.items():
                rel[k].append(np.abs(empirical_lag_cov(ts, k, 200_000) - R) / np.abs(R))
        med = {k: np.median(np.array(v), axis=0).max() for k, v in rel.items()}
        elapsed = time.perf_counter() - t0
        info["detail"] = ", ".join(f"R{k} {v:.3%}" for k, v in med.items())
        assert all(v < 0.05 for v in med.values())
        assert elapsed < 30


def test_criterion_07_classifier_sanity():
    with criterion(7, "FFNN gradient check and GMM two-component recovery") as info:
        rng = np.random.default_rng(707)
        model = FfnnModel.init((1, 3, 1), seed=3)
        assert model.n_params == 10
        X, y, sw = rng.normal(size=(9, 1)), rng.integers(0, 2, 9), rng.uniform(0.5, 2, 9)
        theta = model.flat()
        _, g = loss_and_grad(model, X, y, sw)
        num = np.zeros_like(theta)
        h = 1e-6
        for i in range(theta.size):
            t = theta.copy()
            t[i] += h
            model.set_flat(t)
            up = loss_and_grad(model, X, y, sw)[0]
            t[i] -= 2 * h
            model.set_flat(t)
            num[i] = (up - loss_and_grad(model, X, y, sw)[0]) / (2 * h)
        model.set_flat(theta)
        rel = np.linalg.norm(g - num) / np.linalg.norm(g + num)

        truth = rng.integers(0, 2, 500)
        x = np.where(truth == 1, 5.0, 0.0) + 0.5 * rng.standard_normal(500)
        labels, _ = gmm_fit_predict(x, seed=0)
        acc = float((labels == truth).mean())
        info["detail"] = f"grad rel-err {rel:.1e}, GMM accuracy {acc:.3f}"
        assert rel < 1e-5 and acc >= 0.99


@pytest.mark.slow
def test_criterion_08_desk_scale_trend():
    with criterion(8, "desk-scale accuracy-vs-n trend, FFNN on K against Granger+GMM") as info:
        t0 = time.perf_counter()
        cfg = ExperimentConfig.from_file(ROOT / "configs" / "fig3_desk.cfg")
        assert (cfg.N, cfg.n_observed, cfg.p, cfg.beta, cfg.trials) == (50, 35, 0.5, 10.0, 5)
        assert cfg.checkpoints == (1000, 10000, 100000)
        for t in range(cfg.trials):
            inst = make_instance(cfg, trial_seed(cfg, t))
            rep = check_theorem2(inst.A, inst.cov)
            assert rep.thm2_lhs <= rep.thm2_rhs / 2 * (1 + 1e-9)
        rows = run_benchmark(cfg, io.StringIO())
        assert all(r.ok for r in rows)
        med = {(s.method, s.n): s.median for s in summarize(rows)}
        elapsed = time.perf_counter() - t0
        ff = [med["ffnn", n] for n in cfg.checkpoints]
        gr = [med["granger", n] for n in cfg.checkpoints]
        info["detail"] = (f"ffnn {', '.join(f'{a:.3f}' for a in ff)} | granger {', '.join(f'{a:.3f}' for a in gr)}"
                          f" | {elapsed:.0f}s")
        assert ff[-1] >= 0.9
        assert all(f >= g for f, g in zip(ff, gr))
        assert all(b >= a - 0.02 for a, b in zip(ff, ff[1:]))
        assert elapsed < 15 * 60


def test_criterion_09_intervention_rescue():
    with criterion(9, "minimal intervention turns failing instances into certified ones") as info:
        rng = np.random.default_rng(909)
        rescued = 0
        for _ in range(20):
            A, cov = _budget_instance(rng, float(rng.uniform(1.5, 5.0)))
            before = check_theorem2(A.A, cov)
            assert before.thm2_margin < 0
            v = min_intervention(A.A, cov)
            assert v > 0
            boosted = cov.with_intervention(v)
            after = check_theorem2(A.A, boosted)
            assert after.thm2_margin >= -1e-12 * after.thm2_rhs
            th, sep = _consistency_checks(A, boosted)
            rescued += th and sep
        info["detail"] = f"rescued {rescued}/20"
        assert rescued == 20


def test_criterion_10_reproducible_bench(tmp_path):
    with criterion(10, "repeated bench runs give byte-identical CSVs") as info:
        cfg = tmp_path / "c.cfg"
        cfg.write_text("regime.N = 12\nregime.S = 9\nregime.alpha = 0.5\nregime.rho = 0.7\n"
                       "noise.beta = 3\nnoise.osc_fraction = 0.5\ndata.checkpoints = 500, 3000\n"
                       "data.trials = 3\nmethods = granger, one_lag, nig, precision, nig_oracle, ffnn\n"
                       "train.betas = 0, 3\ntrain.epochs = 40\n")
        outs = []
        for i, threads in enumerate((1, 1, 2)):
            out = tmp_path / f"r{i}.csv"
            assert cli.main(["bench", "--config", str(cfg), "--out", str(out), "--threads", str(threads)]) == 0
            outs.append(out.read_bytes())
        info["detail"] = f"{len(outs[0])} bytes x {len(outs)} runs"
        assert outs[0] == outs[1] == outs[2]


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
