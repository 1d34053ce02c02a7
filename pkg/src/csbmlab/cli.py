"""Command line entry point: ``csbmlab {generate,theory,eval,rewire,sweep}``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time

import numpy as np

from .generators import (CsbmParams, DegreeWeightSpec, ParameterError, lambda_to_probs,
                         sample_model, shuffle_nodes)
from .io import DatasetFormatError, read_dataset, write_dataset
from .models.linear import one_layer_predict, to_signed, two_layer_linear_predict
from .models.nn import TrainConfig, TrainingDivergedError, train_gcn, train_mlp
from .models.spectral import aligned_accuracy, spectral_cluster
from .restructure import MODES, RewireConfig, nullify_dataset
from .rng import RngStream
from .sweep import METHODS, SweepConfig, mean_direction, sweep_to_dir
from .theory import (TruncationError, conditional_accuracy, expected_accuracy_one_layer,
                     two_layer_accuracy)

MODELS = ("sbm", "csbm", "dcsbm", "hsbm", "enn", "triadic")
EVAL_METHODS = ("one-layer", "two-layer-linear", "gcn", "mlp", "spectral")


class UsageError(ValueError):
    pass


def _add_generator_flags(p: argparse.ArgumentParser, with_model_default: str | None = None):
    g = p.add_argument_group("generator")
    g.add_argument("--model", choices=MODELS, default=with_model_default,
                   required=with_model_default is None)
    g.add_argument("--n", type=int, default=1000)
    g.add_argument("--k", type=int, default=2)
    g.add_argument("--d", type=float, default=10.0)
    g.add_argument("--lambda", dest="lam", type=float, default=0.0)
    g.add_argument("--mu", type=float, default=0.0)
    g.add_argument("--sigma", type=float, default=0.2)
    g.add_argument("--m-feat", type=int, default=10)
    g.add_argument("--mean-mode", choices=("orthogonal", "diametric"), default="orthogonal")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--exponent", type=float, default=2.5, help="dcsbm power-law exponent")
    g.add_argument("--w-min", type=float, default=1.0, help="dcsbm minimum weight")
    g.add_argument("--p-sub", type=float, default=None, help="hsbm sub-cluster edge probability")
    g.add_argument("--mu-sub", type=float, default=None, help="hsbm sub-cluster offset norm")
    g.add_argument("--subclusters", type=int, default=5, help="hsbm sub-clusters per class")
    g.add_argument("--eps-intra", type=float, default=0.05)
    g.add_argument("--eps-inter", type=float, default=0.02)
    g.add_argument("--closure-fraction", type=float, default=0.3)


def _params(args) -> CsbmParams:
    dc = None
    if args.model == "dcsbm":
        dc = DegreeWeightSpec.power_law(args.exponent, args.w_min)
    return CsbmParams(n=args.n, k=args.k, d=args.d, lam=args.lam, mu=args.mu,
                      m_feat=args.m_feat, sigma=args.sigma, mean_mode=args.mean_mode,
                      degree_correction=dc)


def _sample(args, stream: RngStream):
    return sample_model(args.model, _params(args), stream, p_sub=args.p_sub, mu_sub=args.mu_sub,
                        subclusters_per_class=args.subclusters, eps_intra=args.eps_intra,
                        eps_inter=args.eps_inter, closure_fraction=args.closure_fraction)


def _provenance(args) -> dict:
    keys = ("model", "n", "k", "d", "lam", "mu", "sigma", "m_feat", "mean_mode", "seed")
    out = {k if k != "lam" else "lambda": getattr(args, k) for k in keys}
    extra = {"dcsbm": ("exponent", "w_min"), "hsbm": ("p_sub", "mu_sub", "subclusters"),
             "enn": ("eps_intra", "eps_inter"), "triadic": ("closure_fraction",)}
    out.update({k: getattr(args, k) for k in extra.get(args.model, ())})
    return out


def cmd_generate(args) -> int:
    stream = RngStream(args.seed)
    data = _sample(args, stream)
    if args.shuffle:
        data = shuffle_nodes(data, stream.child(99))
    write_dataset(args.out, data, {"generator": _provenance(args)})
    print(f"wrote {args.out}: n={data.n} edges={data.graph.n_edges}", file=sys.stderr)
    return 0


def cmd_theory(args) -> int:
    w = csv.writer(sys.stdout, lineterminator="\n")
    if args.formula == "one-layer-conditional":
        if args.n_in is None or args.n_out is None:
            raise UsageError("one-layer-conditional needs --n-in and --n-out")
        w.writerow(["mu", "theta", "n_in", "n_out", "sigma", "accuracy"])
        for mu in args.mu:
            acc = conditional_accuracy(mu, args.theta, args.n_in, args.n_out, args.sigma)
            w.writerow([mu, args.theta, args.n_in, args.n_out, args.sigma, repr(float(acc))])
    elif args.formula == "one-layer-expected":
        w.writerow(["mu", "theta", "N", "p_in", "p_out", "sigma", "accuracy"])
        for mu in args.mu:
            for lam in args.lam:
                if args.p_in is not None and args.p_out is not None:
                    p_in, p_out = args.p_in, args.p_out
                else:
                    p_in, p_out = lambda_to_probs(args.d, lam, args.N)
                acc = expected_accuracy_one_layer(mu, args.theta, args.N, p_in, p_out, args.sigma)
                w.writerow([mu, args.theta, args.N, repr(p_in), repr(p_out), args.sigma, repr(acc)])
    else:
        w.writerow(["mu", "sigma", "d", "lambda", "sign_k", "accuracy", "neglected_mass",
                    "n_in_max", "n_out_max", "n2_max"])
        for mu in args.mu:
            for lam in args.lam:
                r = two_layer_accuracy(mu, args.sigma, args.d, lam, args.sign_k, args.tail_mass)
                lim = r.truncation_limits
                w.writerow([mu, args.sigma, args.d, lam, args.sign_k, repr(r.accuracy),
                            repr(r.neglected_mass), lim["n_in"], lim["n_out"], lim["n2"]])
    return 0


def _class_direction(data) -> np.ndarray:
    if data.k != 2:
        raise UsageError("linear graph models need a binary dataset")
    X, y = data.features, data.labels
    w = X[y == 0].mean(axis=0) - X[y == 1].mean(axis=0)
    norm = np.linalg.norm(w)
    if norm == 0:
        w = np.zeros(X.shape[1])
        w[0] = 1.0
        return w
    return w / norm


def _evaluate(method, train, test, cfg: TrainConfig, stream: RngStream, direction=None) -> float:
    if method in ("gcn", "mlp", "one-layer", "two-layer-linear") and test.features is None:
        raise UsageError(f"{method} needs node features")
    if method == "gcn":
        return train_gcn(train, test, cfg, stream.generator).test_accuracy
    if method == "mlp":
        return train_mlp(train, test, cfg, stream.generator).test_accuracy
    if method == "spectral":
        return aligned_accuracy(spectral_cluster(test.graph, test.k, stream), test.labels)
    if direction is None:
        direction = _class_direction(train)
    if method == "one-layer":
        pred = one_layer_predict(test.graph, test.features, direction)
    else:
        pred = two_layer_linear_predict(test.graph, test.features, direction, 1)
    return float(np.mean(pred == to_signed(test.labels)))


def cmd_eval(args) -> int:
    cfg = TrainConfig(hidden=args.hidden, epochs=args.epochs, learning_rate=args.learning_rate,
                      seed=args.seed)
    trained = args.method in ("gcn", "mlp")
    runs = []
    if args.train_dataset or args.test_dataset:
        if not (args.train_dataset and args.test_dataset):
            raise UsageError("--train-dataset and --test-dataset go together")
        train, test = read_dataset(args.train_dataset), read_dataset(args.test_dataset)
        runs = [(args.seed + t, train, test, None) for t in range(args.trials)]
    elif args.dataset:
        if trained:
            raise UsageError(f"{args.method} trains on one graph and tests on another; "
                             "pass --train-dataset and --test-dataset")
        data = read_dataset(args.dataset)
        runs = [(args.seed + t, data, data, None) for t in range(args.trials)]
    else:
        for t in range(args.trials):
            seed = args.seed + t
            stream = RngStream(seed)
            train, test = _sample(args, stream.child(0)), _sample(args, stream.child(1))
            direction = None
            if args.method in ("one-layer", "two-layer-linear"):
                direction = mean_direction(_params(args).replace(degree_correction=None))
            runs.append((seed, train, test, direction))

    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["method", "seed", "accuracy", "wall_time_s"])
    for seed, train, test, direction in runs:
        t0 = time.perf_counter()
        acc = _evaluate(args.method, train, test, cfg, RngStream(seed, (2,)), direction)
        w.writerow([args.method, seed, repr(acc), f"{time.perf_counter() - t0:.4f}"])
    return 0


def cmd_rewire(args) -> int:
    cfg = RewireConfig(swaps_per_edge=args.swaps_per_edge, seed=args.seed)
    nullify_dataset(args.input, args.out, args.mode, cfg, RngStream(args.seed))
    print(f"wrote {args.out} (mode={args.mode})", file=sys.stderr)
    return 0


_SWEEP_OVERRIDES = {
    "lambda_min": float, "lambda_max": float, "lambda_steps": int,
    "mu_min": float, "mu_max": float, "mu_steps": int, "trials": int,
    "n": int, "k": int, "d": float, "m_feat": int, "sigma": float, "hidden": int,
    "epochs": int, "learning_rate": float, "margin": float, "master_seed": int,
}


def cmd_sweep(args) -> int:
    raw = {}
    if args.config:
        with open(args.config) as fh:
            raw = json.load(fh)
        cfg = SweepConfig.from_dict(raw)
        raw = cfg.to_dict()
    for key in _SWEEP_OVERRIDES:
        val = getattr(args, key)
        if val is not None:
            raw[key] = val
    for key in ("methods", "aggregation", "mean_mode"):
        val = getattr(args, key)
        if val is not None:
            raw[key] = val
    if args.smoothing is not None:
        raw["smoothing"] = args.smoothing
    if args.timing:
        raw["timing"] = True
    cfg = SweepConfig.from_dict(raw)
    pm, summary = sweep_to_dir(cfg, args.out, workers=args.workers)
    print(f"{summary['n_records']} records, {summary['n_errors']} errors, "
          f"{len(summary['flagged'])} all-NaN cells -> {args.out}", file=sys.stderr)
    return 0 if not summary["flagged"] else 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="csbmlab", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="sample a random graph dataset")
    _add_generator_flags(p)
    p.add_argument("--shuffle", action="store_true", help="randomly permute node ids")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("theory", help="evaluate closed-form accuracies")
    p.add_argument("--formula", required=True,
                   choices=("one-layer-conditional", "one-layer-expected", "two-layer"))
    p.add_argument("--mu", type=float, nargs="+", default=[1.0])
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--n-in", type=int)
    p.add_argument("--n-out", type=int)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--N", type=int, default=1000)
    p.add_argument("--p-in", type=float)
    p.add_argument("--p-out", type=float)
    p.add_argument("--d", type=float, default=10.0)
    p.add_argument("--lambda", dest="lam", type=float, nargs="+", default=[0.0])
    p.add_argument("--sign-k", type=int, choices=(1, -1), default=1)
    p.add_argument("--tail-mass", type=float, default=1e-8)
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("eval", help="score a classifier")
    p.add_argument("--method", required=True, choices=EVAL_METHODS)
    p.add_argument("--dataset")
    p.add_argument("--train-dataset")
    p.add_argument("--test-dataset")
    p.add_argument("--trials", type=int, default=1)
    _add_generator_flags(p, with_model_default="csbm")
    p.add_argument("--hidden", type=int, default=16)
    p.add_argument("--epochs", type=int, default=400)
    p.add_argument("--learning-rate", type=float, default=0.01)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("rewire", help="erase higher-order structure from a dataset")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=MODES, default="both")
    p.add_argument("--swaps-per-edge", type=float, default=10.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_rewire)

    p = sub.add_parser("sweep", help="run a (lambda, mu) phase-map sweep")
    p.add_argument("--config", help="JSON file with sweep settings")
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=1)
    for key, typ in _SWEEP_OVERRIDES.items():
        p.add_argument("--" + key.replace("_", "-"), dest=key, type=typ, default=None)
    p.add_argument("--methods", nargs="+", choices=METHODS)
    p.add_argument("--aggregation", choices=("mean", "max", "both"))
    p.add_argument("--mean-mode", choices=("orthogonal", "diametric"))
    p.add_argument("--smoothing", dest="smoothing", action="store_true", default=None)
    p.add_argument("--no-smoothing", dest="smoothing", action="store_false")
    p.add_argument("--timing", action="store_true", help="record wall times (breaks byte-identity)")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ParameterError, DatasetFormatError, TruncationError,
            TrainingDivergedError, FileNotFoundError, ValueError) as exc:
        print(f"csbmlab {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
