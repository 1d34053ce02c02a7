"""(lambda, mu) phase-map sweeps: run, aggregate, smooth, compare, write CSV.

Every (cell, trial) pair is an independent task whose random stream is
derived from ``(master_seed, lambda index, mu index, trial)``, so results do
not depend on worker count or scheduling order. Records are sorted into
canonical order before anything is written.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy.signal import convolve2d

from .generators import CsbmParams, ParameterError, class_means, sample_csbm
from .models.linear import one_layer_predict, to_signed, two_layer_linear_predict
from .models.nn import TrainConfig, train_gcn, train_mlp
from .models.spectral import aligned_accuracy, spectral_cluster
from .rng import RngStream
from .theory import one_layer_accuracy_from_params, two_layer_accuracy

log = logging.getLogger(__name__)

TRAINED = ("gcn", "mlp", "spectral", "one-layer", "two-layer-linear")
THEORY = ("theory-one-layer", "theory-two-layer")
METHODS = TRAINED + THEORY
RAW_HEADER = ["lambda", "mu", "trial", "method", "accuracy", "wall_time_s"]


@dataclass
class SweepConfig:
    lambda_min: float = -3.0
    lambda_max: float = 3.0
    lambda_steps: int = 13
    mu_min: float = 0.0
    mu_max: float = 2.0
    mu_steps: int = 9
    trials: int = 10
    methods: tuple = ("gcn", "mlp", "spectral")
    # base cSBM parameters (everything except lambda and mu)
    n: int = 1000
    k: int = 2
    d: float = 10.0
    m_feat: int = 10
    sigma: float = 0.2
    mean_mode: str = "orthogonal"
    # training
    hidden: int = 16
    epochs: int = 400
    learning_rate: float = 0.01
    aggregation: str = "both"
    smoothing: bool = False
    margin: float = 0.02
    master_seed: int = 0
    # off by default so that repeated runs write identical files
    timing: bool = False

    def __post_init__(self):
        self.methods = tuple(self.methods)
        if self.lambda_steps < 1 or self.mu_steps < 1:
            raise ParameterError("grids must have at least one step")
        if self.trials < 1:
            raise ParameterError("trials must be at least 1")
        bad = [m for m in self.methods if m not in METHODS]
        if bad or not self.methods:
            raise ParameterError(f"unknown or empty methods {bad}; choose from {METHODS}")
        if len(set(self.methods)) != len(self.methods):
            raise ParameterError("methods must not repeat")
        root = math.sqrt(self.d)
        if max(abs(self.lambda_min), abs(self.lambda_max)) > root + 1e-12:
            raise ParameterError(f"|lambda| must not exceed sqrt(d) = {root:.6g}")
        if self.lambda_min > self.lambda_max or self.mu_min > self.mu_max:
            raise ParameterError("grid minimum exceeds maximum")
        if self.aggregation not in ("mean", "max", "both"):
            raise ParameterError("aggregation must be mean, max or both")
        if self.margin < 0:
            raise ParameterError("margin must be non-negative")
        TrainConfig(self.hidden, self.epochs, self.learning_rate)
        self.base_params(0.0, 0.0)

    @property
    def lambdas(self) -> np.ndarray:
        return np.linspace(self.lambda_min, self.lambda_max, self.lambda_steps)

    @property
    def mus(self) -> np.ndarray:
        return np.linspace(self.mu_min, self.mu_max, self.mu_steps)

    def base_params(self, lam: float, mu: float) -> CsbmParams:
        return CsbmParams(n=self.n, k=self.k, d=self.d, lam=float(lam), mu=float(mu),
                          m_feat=self.m_feat, sigma=self.sigma, mean_mode=self.mean_mode)

    def train_config(self) -> TrainConfig:
        return TrainConfig(hidden=self.hidden, epochs=self.epochs, learning_rate=self.learning_rate)

    @classmethod
    def from_dict(cls, raw: dict) -> "SweepConfig":
        """Flat field names, plus optional ``lambda_grid`` / ``mu_grid``
        (``{"min", "max", "steps"}``) and ``base`` (cSBM fields) groups."""
        raw = dict(raw)
        flat = {}
        for axis in ("lambda", "mu"):
            grid = raw.pop(f"{axis}_grid", None)
            if grid is not None:
                for key in ("min", "max", "steps"):
                    if key in grid:
                        flat[f"{axis}_{key}"] = grid[key]
        flat.update(raw.pop("base", {}) or {})
        flat.update(raw)
        names = {f.name for f in fields(cls)}
        unknown = sorted(set(flat) - names)
        if unknown:
            raise ParameterError(f"unknown sweep config keys: {unknown}")
        return cls(**flat)

    @classmethod
    def from_json(cls, path) -> "SweepConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        out = asdict(self)
        out["methods"] = list(self.methods)
        return out


class Record(NamedTuple):
    lam: float
    mu: float
    trial: int
    method: str
    accuracy: float
    wall_time_s: float


@dataclass
class PhaseMap:
    lambdas: np.ndarray
    mus: np.ndarray
    methods: tuple
    trials: int
    records: list = field(default_factory=list)
    errors: list = field(default_factory=list)

    def values(self, method: str) -> np.ndarray:
        """``(n_lambda, n_mu, trials)`` accuracies, NaN where missing."""
        out = np.full((len(self.lambdas), len(self.mus), self.trials), np.nan)
        li = {float(v): i for i, v in enumerate(self.lambdas)}
        mi = {float(v): i for i, v in enumerate(self.mus)}
        for r in self.records:
            if r.method == method:
                out[li[r.lam], mi[r.mu], r.trial] = r.accuracy
        return out


def _effective_mu(params: CsbmParams) -> float:
    # half the distance between the two class means, measured along their difference
    M = class_means(params)
    return float(np.linalg.norm(M[0] - M[1]) / 2.0)


def mean_direction(params: CsbmParams) -> np.ndarray:
    """Unit vector from the class-1 mean to the class-0 mean (binary)."""
    M = class_means(params)
    w = M[0] - M[1]
    norm = np.linalg.norm(w)
    if norm == 0:
        # mu = 0: any fixed direction gives chance accuracy; keep it deterministic
        w = np.zeros(params.m_feat)
        w[0] = 1.0
        return w
    return w / norm


def _signed_accuracy(pred, labels) -> float:
    return float(np.mean(pred == to_signed(labels)))


def _evaluate(method: str, params: CsbmParams, cfg: SweepConfig, train, test, stream: RngStream):
    if method == "gcn":
        return train_gcn(train, test, cfg.train_config(), stream.generator).test_accuracy
    if method == "mlp":
        return train_mlp(train, test, cfg.train_config(), stream.generator).test_accuracy
    if method == "spectral":
        pred = spectral_cluster(test.graph, test.k, stream)
        return aligned_accuracy(pred, test.labels)
    if method == "one-layer":
        return _signed_accuracy(one_layer_predict(test.graph, test.features, mean_direction(params)),
                                test.labels)
    if method == "two-layer-linear":
        return _signed_accuracy(
            two_layer_linear_predict(test.graph, test.features, mean_direction(params), 1), test.labels)
    if method == "theory-one-layer":
        if params.k != 2:
            raise ParameterError("the one-layer formula is binary")
        return one_layer_accuracy_from_params(_effective_mu(params), params.sigma, params.d,
                                              params.lam, params.n)
    if method == "theory-two-layer":
        if params.k != 2:
            raise ParameterError("the two-layer formula is binary")
        return two_layer_accuracy(_effective_mu(params), params.sigma, params.d, params.lam).accuracy
    raise ParameterError(f"unknown method {method!r}")


def _run_task(cfg: SweepConfig, li: int, mi: int, trial: int):
    lam, mu = float(cfg.lambdas[li]), float(cfg.mus[mi])
    stream = RngStream(cfg.master_seed, (li, mi, trial))
    methods = [m for m in cfg.methods if m in TRAINED or trial == 0]
    records, errors = [], []
    params = train = test = None
    try:
        params = cfg.base_params(lam, mu)
        if any(m in TRAINED for m in methods):
            train = sample_csbm(params, stream.child(0))
            test = sample_csbm(params, stream.child(1))
    except Exception as exc:  # noqa: BLE001 - a broken cell must not stop the sweep
        errors.append((lam, mu, trial, "*", f"{type(exc).__name__}: {exc}"))
        return [Record(lam, mu, trial, m, math.nan, 0.0) for m in methods], errors

    for j, method in enumerate(cfg.methods):
        if method not in methods:
            continue
        t0 = time.perf_counter()
        try:
            acc = float(_evaluate(method, params, cfg, train, test, stream.child(2 + j)))
        except Exception as exc:  # noqa: BLE001
            acc = math.nan
            errors.append((lam, mu, trial, method,
                           f"{type(exc).__name__}: {exc}\n{traceback.format_exc(limit=3)}"))
        wall = time.perf_counter() - t0 if cfg.timing else 0.0
        records.append(Record(lam, mu, trial, method, acc, wall))
    return records, errors


def _run_task_star(args):
    return _run_task(*args)


def run_sweep(cfg: SweepConfig, workers: int = 1) -> PhaseMap:
    tasks = [(cfg, li, mi, t) for li in range(cfg.lambda_steps)
             for mi in range(cfg.mu_steps) for t in range(cfg.trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_task_star, tasks, chunksize=max(1, len(tasks) // (8 * workers))))
    else:
        results = [_run_task(*t) for t in tasks]

    order = {m: i for i, m in enumerate(cfg.methods)}
    li = {float(v): i for i, v in enumerate(cfg.lambdas)}
    mi = {float(v): i for i, v in enumerate(cfg.mus)}
    records = [r for recs, _ in results for r in recs]
    records.sort(key=lambda r: (li[r.lam], mi[r.mu], r.trial, order[r.method]))
    errors = [e for _, errs in results for e in errs]
    for e in errors:
        log.warning("cell lambda=%g mu=%g trial=%d method=%s failed: %s", *e)
    return PhaseMap(cfg.lambdas, cfg.mus, cfg.methods, cfg.trials, records, errors)


@dataclass
class Aggregate:
    how: str
    values: dict
    counts: dict

    @property
    def flagged(self) -> list:
        """``(lambda index, mu index, method)`` for cells with no finite trial."""
        out = []
        for method, c in self.counts.items():
            for i, j in zip(*np.nonzero(c == 0)):
                out.append((int(i), int(j), method))
        return sorted(out)


def aggregate(pm: PhaseMap, how: str = "mean") -> Aggregate:
    """Per-cell mean or max over trials, ignoring NaN trials."""
    if how not in ("mean", "max"):
        raise ValueError("how must be 'mean' or 'max'")
    values, counts = {}, {}
    for method in pm.methods:
        v = pm.values(method)
        if method in THEORY:
            v = v[:, :, :1]
        ok = np.isfinite(v)
        cnt = ok.sum(axis=2)
        filled = np.where(ok, v, -np.inf if how == "max" else 0.0)
        if how == "max":
            agg = filled.max(axis=2)
        else:
            with np.errstate(invalid="ignore", divide="ignore"):
                agg = filled.sum(axis=2) / cnt
        values[method] = np.where(cnt > 0, agg, np.nan)
        counts[method] = cnt
    return Aggregate(how, values, counts)


def smooth(grid, size: int = 5) -> np.ndarray:
    """Box filter averaging over in-bounds, non-NaN neighbours."""
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 2 or grid.size == 0:
        raise ValueError("smooth needs a non-empty 2-D grid")
    kernel = np.ones((size, size))
    ok = np.isfinite(grid)
    total = convolve2d(np.where(ok, grid, 0.0), kernel, mode="same")
    count = convolve2d(ok.astype(float), kernel, mode="same")
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(count > 0, total / count, np.nan)


def best_method_map(grids: dict, margin: float = 0.02) -> np.ndarray:
    """Label each cell with the method ahead of every other by ``margin``, else ``"tie"``."""
    names = list(grids)
    if not names:
        raise ValueError("no grids given")
    shape = np.shape(grids[names[0]])
    if any(np.shape(grids[m]) != shape for m in names):
        raise ValueError("grids must share a shape")
    stack = np.stack([np.asarray(grids[m], dtype=float) for m in names])
    out = np.full(stack.shape[1:], "tie", dtype=object)
    for idx in np.ndindex(*stack.shape[1:]):
        col = stack[(slice(None),) + idx]
        finite = np.nonzero(np.isfinite(col))[0]
        if finite.size == 0:
            continue
        vals = col[finite]
        top = int(np.argmax(vals))
        rest = np.delete(vals, top)
        if rest.size == 0 or (vals[top] > rest.max() and vals[top] - rest.max() >= margin):
            out[idx] = names[finite[top]]
    return out


# ---------------------------------------------------------------- output

def _fmt(x: float) -> str:
    return "nan" if not math.isfinite(x) else repr(float(x))


def _coord(x: float) -> str:
    return f"{float(x):.10g}"


def write_raw(path, pm: PhaseMap) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RAW_HEADER)
        for r in pm.records:
            w.writerow([_coord(r.lam), _coord(r.mu), r.trial, r.method, _fmt(r.accuracy),
                        _fmt(r.wall_time_s)])


def write_grid(path, pm: PhaseMap, grids: dict) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["lambda", "mu", "method", "value"])
        for i, lam in enumerate(pm.lambdas):
            for j, mu in enumerate(pm.mus):
                for method in pm.methods:
                    w.writerow([_coord(lam), _coord(mu), method, _fmt(grids[method][i, j])])


def write_best(path, pm: PhaseMap, labels: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["lambda", "mu", "label"])
        for i, lam in enumerate(pm.lambdas):
            for j, mu in enumerate(pm.mus):
                w.writerow([_coord(lam), _coord(mu), labels[i, j]])


def write_outputs(out_dir, pm: PhaseMap, cfg: SweepConfig) -> dict:
    """Write raw/mean/max/best CSVs (and smoothed grids when enabled).

    Returns a summary with the flagged (all-NaN) cells.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_raw(out / "raw.csv", pm)
    aggs = {how: aggregate(pm, how) for how in ("mean", "max")}
    grids = {}
    for how, agg in aggs.items():
        write_grid(out / f"{how}.csv", pm, agg.values)
        grids[how] = agg.values
        if cfg.smoothing:
            grids[how] = {m: smooth(g) for m, g in agg.values.items()}
            write_grid(out / f"{how}_smooth.csv", pm, grids[how])
    source = "mean" if cfg.aggregation == "mean" else "max"
    write_best(out / "best.csv", pm, best_method_map(grids[source], cfg.margin))
    if pm.errors:
        with open(out / "errors.log", "w") as fh:
            for lam, mu, trial, method, msg in pm.errors:
                fh.write(f"lambda={lam:g} mu={mu:g} trial={trial} method={method}: {msg}\n")
    flagged = aggs["mean"].flagged
    return {"flagged": flagged, "n_records": len(pm.records), "n_errors": len(pm.errors)}


def sweep_to_dir(cfg: SweepConfig, out_dir, workers: int = 1) -> tuple[PhaseMap, dict]:
    pm = run_sweep(cfg, workers)
    summary = write_outputs(out_dir, pm, cfg)
    with open(Path(out_dir) / "config.json", "w") as fh:
        json.dump(cfg.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return pm, summary


def expected_record_count(cfg: SweepConfig) -> int:
    cells = cfg.lambda_steps * cfg.mu_steps
    n_theory = sum(m in THEORY for m in cfg.methods)
    return cells * (cfg.trials * (len(cfg.methods) - n_theory) + n_theory)


__all__ = [
    "SweepConfig", "Record", "PhaseMap", "Aggregate", "run_sweep", "aggregate", "smooth",
    "best_method_map", "write_outputs", "sweep_to_dir", "expected_record_count", "METHODS",
]
