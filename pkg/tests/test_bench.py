import io

import numpy as np
import pytest

from ndsid import bench
from ndsid.bench import ExperimentConfig, ResultRow, run_benchmark, summarize, train_and_generalize
from ndsid.errors import ConditioningError, ConfigError
from ndsid.matrix_io import write_matrix
from ndsid.noise import flat_covariance
from ndsid.theory import find_threshold

SMALL = dict(N=8, S=6, alpha=0.5, rho=0.6, beta=1.0, osc_fraction=0.5, checkpoints=(500, 2000), trials=2)


def _csv(cfg, **kw):
    buf = io.StringIO()
    rows = run_benchmark(cfg, buf, **kw)
    return buf.getvalue(), rows


@pytest.mark.parametrize("text, match", [
    ("bogus.key = 3", "unknown key"),
    ("methods =", "methods list is empty"),
    ("data.checkpoints = 100, 50", "strictly increasing"),
    ("data.trials = 0", "trials"),
    ("regime.directed = maybe", "bad value"),
    ("regime.N", "expected 'key = value'"),
    ("data.checkpoints = 1000\ndata.length = 1000", "data.length"),
    ("methods = granger, lasso", "unknown methods"),
    ("regime.graph_file = /nonexistent/adj.txt", "does not exist"),
    ("noise.osc = 0.1\nnoise.osc_fraction = 0.5", "at most one"),
])
def test_config_errors(text, match):
    with pytest.raises(ConfigError, match=match):
        ExperimentConfig.from_text(text)


def test_config_roundtrip_and_comments():
    cfg = ExperimentConfig.from_text("# comment\nregime.N = 12  # trailing\nmethods = nig, ffnn\n"
                                     "data.checkpoints = 10, 20\nclassify.symmetrize = auto\n")
    assert cfg.N == 12 and cfg.methods == ("nig", "ffnn") and cfg.checkpoints == (10, 20)
    assert cfg.symmetrize is None and cfg.do_symmetrize
    assert ExperimentConfig.from_text(cfg.to_text()) == cfg
    assert cfg.max_lag == cfg.M
    assert ExperimentConfig.from_text("", seed=9).seed == 9


def test_granger_full_observation_white_noise():
    cfg = ExperimentConfig(N=10, alpha=0.5, rho=0.6, beta=0.0, checkpoints=(100_000,), trials=5,
                           methods=("granger",), seed=3)
    _, rows = _csv(cfg)
    assert np.mean([r.accuracy for r in rows]) >= 0.99


def test_reproducible_bytes_and_no_timing_column():
    cfg = ExperimentConfig(methods=("granger", "nig", "precision", "nig_oracle"), **SMALL)
    a, _ = _csv(cfg)
    b, _ = _csv(cfg)
    assert a == b
    assert a.splitlines()[0] == ",".join(bench.CSV_FIELDS)
    assert len(a.splitlines()) == 1 + 2 * 2 * 4
    timed, _ = _csv(ExperimentConfig(methods=("granger",), timing=True, **SMALL))
    assert timed.splitlines()[0].endswith(",wall_time")


def test_adding_a_method_does_not_perturb_others():
    _, one = _csv(ExperimentConfig(methods=("granger",), **SMALL))
    _, two = _csv(ExperimentConfig(methods=("nig", "granger"), **SMALL))
    assert [r.accuracy for r in one] == [r.accuracy for r in two if r.method == "granger"]


def test_threads_give_identical_output():
    cfg = ExperimentConfig(methods=("granger",), **SMALL)
    assert _csv(cfg)[0] == _csv(cfg, threads=2)[0]


def test_crash_isolation(monkeypatch):
    cfg = ExperimentConfig(methods=("granger", "nig"), **SMALL)
    bad_seed = bench.trial_seed(cfg, 1)
    real = bench.evaluate_method

    def flaky(method, m, A_S, cfg_, seed, n, trained=None):
        if seed == bad_seed and method == "granger":
            raise ConditioningError("lag-0 covariance is singular")
        return real(method, m, A_S, cfg_, seed, n, trained)

    monkeypatch.setattr(bench, "evaluate_method", flaky)
    text, rows = _csv(cfg)
    failed = [r for r in rows if not r.ok]
    assert len(failed) == 2 and all(r.trial == 1 and r.method == "granger" for r in failed)
    assert all(r.error.startswith("ConditioningError") for r in failed)
    assert len(rows) == 8 and all(r.accuracy is not None for r in rows if r.ok)
    assert text.count("ConditioningError") == 2


def test_result_row_rejects_bad_accuracy():
    with pytest.raises(ValueError):
        ResultRow("r", "granger", 0.0, 10, 0, 1, 1.5)


def test_summarize_and_plotdata(tmp_path):
    cfg = ExperimentConfig(methods=("granger",), out_csv=str(tmp_path / "r.csv"), **SMALL)
    rows = run_benchmark(cfg)
    summary = summarize(rows)
    assert [(s.method, s.n) for s in summary] == [("granger", 500), ("granger", 2000)]
    acc = [r.accuracy for r in rows if r.n == 500]
    assert summary[0].mean == pytest.approx(np.mean(acc))
    assert summary[0].sd == pytest.approx(np.std(acc, ddof=1))
    text = bench.plotdata(tmp_path / "r.csv", out=tmp_path / "p.csv")
    assert text.splitlines()[0] == "regime,method,n,mean,sd,median,count,errors"
    assert (tmp_path / "p.csv").read_text() == text


def test_audit(tmp_path):
    A = np.array([[0.3, 0.3], [0.3, 0.3]])
    write_matrix(tmp_path / "A.txt", A)
    write_matrix(tmp_path / "S.txt", flat_covariance(2, 2.0, 0.5).sigma)
    rep = bench.audit(tmp_path / "A.txt", tmp_path / "S.txt")
    assert rep.verdict == "certified" and rep.rho == pytest.approx(0.6)


@pytest.mark.parametrize("seed", range(20))
def test_best_threshold_matches_find_threshold(seed):
    rng = np.random.default_rng(seed)
    truth = (rng.uniform(size=(6, 6)) < 0.4).astype(int)
    np.fill_diagonal(truth, 0)
    scores = truth * rng.uniform(0.5, 1.0, (6, 6)) + rng.normal(0, 0.2 * (seed % 3), (6, 6))
    exists = find_threshold(scores, truth) is not None
    assert (bench.best_threshold_accuracy(scores, truth) == 1.0) == exists


def test_instance_margin_and_shared_training_graph():
    cfg = ExperimentConfig(N=20, S=12, alpha=0.6, rho=0.8, beta=10.0, headroom=1.0, osc_fraction=0.5)
    inst = bench.make_instance(cfg, 11)
    from ndsid.theory import check_theorem2
    rep = check_theorem2(inst.A, inst.cov)
    assert rep.thm2_lhs == pytest.approx(rep.thm2_rhs / 2, rel=1e-9)
    assert inst.cov.sigma2 == pytest.approx(11.0)
    other = bench.make_instance(cfg, 11, beta=20.0)
    assert np.array_equal(other.A.A, inst.A.A) and np.array_equal(other.observed.indices, inst.observed.indices)
    assert other.cov.beta == pytest.approx(20.0)


@pytest.fixture(scope="module")
def generalization():
    train = ExperimentConfig(N=20, S=16, alpha=0.6, rho=0.8, beta=0.0, headroom=1.0, osc_fraction=0.5,
                             checkpoints=(5000, 50000), train_betas=(0.0, 5.0, 10.0), epochs=150,
                             methods=("ffnn",), trials=3, seed=5)
    same = train
    sparse = ExperimentConfig(**{**train.__dict__, "p": 0.2, "regime_id": "sparse"})
    flat = ExperimentConfig(**{**train.__dict__, "osc_fraction": None, "beta": 10.0, "regime_id": "flat",
                               "seed": 8})
    return train_and_generalize(train, [same, sparse, flat])


def test_generalization_in_sample(generalization):
    trained, rows = generalization
    n = 50000
    acc = np.mean([r.accuracy for r in rows if r.regime == "default" and r.n == n])
    assert acc >= trained.train_accuracy[n] - 0.05


def test_generalization_sparser_regime_runs(generalization):
    _, rows = generalization
    sparse = [r for r in rows if r.regime == "sparse"]
    assert len(sparse) == 6 and all(r.ok for r in sparse)


def test_generalization_flat_noise(generalization):
    _, rows = generalization
    flat = [r.accuracy for r in rows if r.regime == "flat" and r.n == 50000]
    assert min(flat) >= 0.95


def test_models_save_load(generalization, tmp_path):
    trained, _ = generalization
    trained.save(tmp_path / "m")
    back = bench.TrainedModels.load(tmp_path / "m", (5000, 50000))
    for n in (5000, 50000):
        assert np.array_equal(back.models[n].flat(), trained.models[n].flat())
    with pytest.raises(ConfigError):
        bench.TrainedModels.load(tmp_path / "m", (123,))


def test_untrained_checkpoint_rejected(generalization):
    trained, _ = generalization
    cfg = ExperimentConfig(N=20, S=16, alpha=0.6, rho=0.8, checkpoints=(7000,), methods=("ffnn",))
    with pytest.raises(ConfigError):
        run_benchmark(cfg, io.StringIO(), trained=trained)


def test_training_scaling_record_is_saved_and_reused(tmp_path):
    cfg = ExperimentConfig(N=10, S=8, alpha=0.5, rho=0.7, beta=2.0, osc_fraction=0.5, checkpoints=(3000,),
                           train_betas=(0.0, 4.0), epochs=30, methods=("ffnn",), trials=2, scaling="training")
    trained, rows = train_and_generalize(cfg, [cfg])
    rec = trained.scalings[3000]
    assert not np.allclose(rec.mean, 0) and all(r.ok for r in rows)
    trained.save(tmp_path / "m")
    back = bench.TrainedModels.load(tmp_path / "m", (3000,))
    assert np.allclose(back.scalings[3000].mean, rec.mean, rtol=0, atol=0)
    again = run_benchmark(cfg, io.StringIO(), trained=back)
    assert [r.accuracy for r in again] == [r.accuracy for r in rows]
