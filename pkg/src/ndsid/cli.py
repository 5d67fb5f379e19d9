"""Command-line entry point: ``ndsid <subcommand> [options]``.

Exit codes: 0 success, 2 configuration or input error, 3 numerical or
assumption failure, 4 run finished but some rows carry an error tag.
"""
from __future__ import annotations

import argparse
import os
import sys

from . import bench
from .errors import (AssumptionViolation, ConditioningError, ConfigError, ConstructionError, DegenerateInputError,
                     DivergenceError, FormatError, LengthError, NDSError, ParameterError, StabilityError)
from .estimators import METHODS, estimate
from .features import build_F, build_K, build_T
from .matrix_io import read_matrix, write_matrix
from .noise import CovarianceSpec
from .rng import child_seed
from .simulate import simulate

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_PARTIAL = 0, 2, 3, 4

_NUMERIC = (StabilityError, ConditioningError, AssumptionViolation, DivergenceError, DegenerateInputError,
            ConstructionError)


def _load_config(args) -> bench.ExperimentConfig:
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.config is None:
        return bench.ExperimentConfig(**overrides)
    return bench.ExperimentConfig.from_file(args.config, **overrides)


def _emit(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def cmd_generate(args) -> int:
    cfg = _load_config(args)
    inst = bench.make_instance(cfg, bench.trial_seed(cfg, args.trial))
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    write_matrix(os.path.join(out, "G.txt"), inst.A.graph.adj.astype(float))
    write_matrix(os.path.join(out, "A.txt"), inst.A.A)
    write_matrix(os.path.join(out, "sigma.txt"), inst.cov.sigma)
    write_matrix(os.path.join(out, "observed.txt"), inst.observed.indices[None, :].astype(float))
    print(f"wrote G.txt A.txt sigma.txt observed.txt to {out}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.A is not None:
        if args.sigma is None:
            raise ConfigError("--A needs --sigma")
        A = read_matrix(args.A)
        cov = CovarianceSpec.from_matrix(read_matrix(args.sigma))
        length = args.length or 10_000
        seed = args.seed or 0
        ts = simulate(A, cov, length, burn_in=args.burn_in, seed=seed)
        data = ts.data
    else:
        cfg = _load_config(args)
        inst = bench.make_instance(cfg, bench.trial_seed(cfg, args.trial))
        length = args.length or cfg.sim_length
        ts = simulate(inst.A, inst.cov, length, burn_in=cfg.burn_in if args.burn_in is None else args.burn_in,
                      seed=child_seed(inst.seed, "simulate"))
        data = ts.data if args.all_nodes else ts.data[:, inst.observed.indices]
    if args.out is None:
        raise ConfigError("simulate needs --out")
    write_matrix(args.out, data)
    return EXIT_OK


def cmd_estimate(args) -> int:
    Y = read_matrix(args.series)
    est = estimate(args.method, Y, args.n if args.n is not None else Y.shape[0] - 3)
    if args.format == "matrix":
        if args.out is None:
            raise ConfigError("matrix output needs --out")
        write_matrix(args.out, est.values)
    else:
        lines = ["method,n,i,j,value"]
        k = est.values.shape[0]
        for i in range(k):
            for j in range(k):
                lines.append(f"{args.method},{est.n_samples},{i},{j},{float(est.values[i, j])!r}")
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_features(args) -> int:
    Y = read_matrix(args.series)
    n = args.n if args.n is not None else Y.shape[0] - args.M
    if args.kind == "F":
        fs = build_F(Y, n, D=args.D, M=args.M)
    elif args.kind == "T":
        fs = build_T(Y, n, M=args.M)
    else:
        fs = build_K(Y, n, D=args.D, M=args.M)
    if args.labels is not None:
        fs = fs.with_labels(read_matrix(args.labels))
    if args.out is None:
        raise ConfigError("features needs --out")
    fs.to_csv(args.out)
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = _load_config(args)
    prefix = args.out or cfg.model_prefix
    if prefix is None:
        raise ConfigError("train needs --out or train.model")
    trained = bench.train_models(cfg, threads=args.threads)
    for path in trained.save(prefix):
        print(path)
    for n, acc in trained.train_accuracy.items():
        print(f"n={n} training accuracy {acc:.4f}")
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg = _load_config(args)
    out = args.out or cfg.out_csv or sys.stdout
    rows = bench.run_benchmark(cfg, out=out, threads=args.threads)
    bad = [r for r in rows if not r.ok]
    if bad:
        print(f"{len(bad)} of {len(rows)} rows failed", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_audit(args) -> int:
    report = bench.audit(args.A, args.sigma)
    text = report.to_text() + "\n\n" + report.to_csv()
    _emit(text, args.out)
    return EXIT_OK


def cmd_plotdata(args) -> int:
    text = bench.plotdata(args.results)
    _emit(text, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="experiment config (dotted key = value lines)")
    common.add_argument("--seed", type=int, help="master seed; overrides data.seed")
    common.add_argument("--out", metavar="PATH", help="output file, directory or prefix")
    common.add_argument("--threads", type=int, default=1, help="worker processes for trials")

    p = argparse.ArgumentParser(prog="ndsid", description="Topology inference for linear networked systems.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[common], help="write G, A, Sigma and S for one trial")
    g.add_argument("--trial", type=int, default=0)
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("simulate", parents=[common], help="simulate a series to the matrix text format")
    s.add_argument("--A", metavar="PATH")
    s.add_argument("--sigma", metavar="PATH")
    s.add_argument("--length", type=int)
    s.add_argument("--burn-in", type=int, dest="burn_in")
    s.add_argument("--trial", type=int, default=0)
    s.add_argument("--all-nodes", action="store_true", help="keep latent nodes (config mode)")
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser("estimate", parents=[common], help="estimate an affinity matrix from a series")
    e.add_argument("--series", required=True, metavar="PATH")
    e.add_argument("--method", choices=METHODS, default="nig")
    e.add_argument("--n", type=int)
    e.add_argument("--format", choices=("matrix", "csv"), default="csv")
    e.set_defaults(func=cmd_estimate)

    f = sub.add_parser("features", parents=[common], help="dump per-pair features as CSV")
    f.add_argument("--series", required=True, metavar="PATH")
    f.add_argument("--n", type=int)
    f.add_argument("--kind", choices=("F", "T", "K"), default="K")
    f.add_argument("--D", type=int, default=1)
    f.add_argument("--M", type=int, default=4)
    f.add_argument("--labels", metavar="PATH", help="observed interaction matrix used for labels")
    f.set_defaults(func=cmd_features)

    t = sub.add_parser("train", parents=[common], help="train per-checkpoint FFNNs over the beta sweep")
    t.set_defaults(func=cmd_train)

    b = sub.add_parser("bench", parents=[common], help="accuracy-vs-n benchmark to CSV")
    b.set_defaults(func=cmd_bench)

    a = sub.add_parser("audit", parents=[common], help="consistency report for A and Sigma")
    a.add_argument("--A", required=True, metavar="PATH")
    a.add_argument("--sigma", required=True, metavar="PATH")
    a.set_defaults(func=cmd_audit)

    d = sub.add_parser("plotdata", parents=[common], help="mean and sd accuracy per method and n")
    d.add_argument("results", metavar="RESULTS_CSV")
    d.set_defaults(func=cmd_plotdata)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except (ConfigError, FormatError, ParameterError, LengthError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _NUMERIC as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except NDSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
