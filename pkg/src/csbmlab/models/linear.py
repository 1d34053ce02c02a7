"""Fixed-weight GCN scorers and the ReLU-free linearization.

Binary conventions: class 0 is the ``+1`` class and class 1 the ``-1``
class; a score of exactly zero predicts ``+1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..generators import CsbmParams, ParameterError, sample_csbm
from ..graph import Graph
from ..rng import RandomLike, as_generator


def to_signed(labels) -> np.ndarray:
    """Map class indices {0, 1} to {+1, -1}."""
    labels = np.asarray(labels)
    if labels.size and (labels.min() < 0 or labels.max() > 1):
        raise ValueError("signed labels need a binary problem")
    return 1 - 2 * labels.astype(np.int64)


def _sign(scores: np.ndarray) -> np.ndarray:
    return np.where(scores >= 0, 1, -1)


def _check_features(g: Graph, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != g.n:
        raise ValueError(f"features must be a {g.n} x m matrix, got shape {X.shape}")
    return X


def one_layer_scores(g: Graph, X, W) -> np.ndarray:
    X = _check_features(g, X)
    W = np.asarray(W, dtype=float).ravel()
    if W.shape[0] != X.shape[1]:
        raise ValueError(f"weight length {W.shape[0]} != feature dimension {X.shape[1]}")
    return g.adjacency @ (X @ W)


def one_layer_predict(g: Graph, X, W) -> np.ndarray:
    """``sign(A X W)`` without self-loops; isolated nodes score 0 and get +1."""
    W = np.asarray(W, dtype=float).ravel()
    if not np.any(W):
        raise ParameterError("W must be non-zero")
    return _sign(one_layer_scores(g, X, W))


def _hop(g: Graph, v: np.ndarray, self_loops: bool) -> np.ndarray:
    out = g.adjacency @ v
    return out + v if self_loops else out


def two_layer_linear_scores(g: Graph, X, m) -> np.ndarray:
    X = _check_features(g, X)
    s = X @ np.asarray(m, dtype=float).ravel()
    return _hop(g, _hop(g, s, True), True)


def two_layer_linear_predict(g: Graph, X, m, sign_k: int = 1) -> np.ndarray:
    """``sign(sign_k * sum_{j in N[i]} sum_{k in N[j]} X(k).m)`` with self-loops."""
    if sign_k not in (1, -1):
        raise ParameterError("sign_k must be +1 or -1")
    return _sign(sign_k * two_layer_linear_scores(g, X, m))


@dataclass
class TwoLayerGcn:
    """``y(i) = sum_{j in N(i)} relu(sum_{k in N(j)} X(k) W) . c``."""

    W: np.ndarray
    c: np.ndarray
    with_self_loops: bool = True

    def __post_init__(self):
        self.W = np.atleast_2d(np.asarray(self.W, dtype=float))
        self.c = np.asarray(self.c, dtype=float).ravel()
        if self.W.shape[1] != self.c.shape[0] or self.c.shape[0] < 1:
            raise ValueError(f"W has {self.W.shape[1]} columns but c has {self.c.shape[0]} entries")
        if not (np.all(np.isfinite(self.W)) and np.all(np.isfinite(self.c))):
            raise ValueError("model weights must be finite")

    @classmethod
    def random(cls, m_feat: int, hidden: int, rng: RandomLike = None,
               with_self_loops: bool = True, scale: float = 1.0) -> "TwoLayerGcn":
        gen = as_generator(rng)
        W = gen.standard_normal((m_feat, hidden)) * scale / math.sqrt(m_feat)
        c = gen.standard_normal(hidden) * scale / math.sqrt(hidden)
        return cls(W, c, with_self_loops)


def _aggregate(g: Graph, Y: np.ndarray, self_loops: bool) -> np.ndarray:
    out = g.adjacency @ Y
    return out + Y if self_loops else out


def gcn_forward(g: Graph, X, model: TwoLayerGcn) -> np.ndarray:
    X = _check_features(g, X)
    if X.shape[1] != model.W.shape[0]:
        raise ValueError(f"feature dimension {X.shape[1]} != W rows {model.W.shape[0]}")
    H = _aggregate(g, X @ model.W, model.with_self_loops)
    return _aggregate(g, np.maximum(H, 0.0), model.with_self_loops) @ model.c


def linearize(g: Graph, X, model: TwoLayerGcn) -> np.ndarray:
    """Scores of the model with the ReLU removed and the output halved."""
    X = _check_features(g, X)
    if X.shape[1] != model.W.shape[0]:
        raise ValueError(f"feature dimension {X.shape[1]} != W rows {model.W.shape[0]}")
    v = X @ (model.W @ model.c)
    return 0.5 * _hop(g, _hop(g, v, model.with_self_loops), model.with_self_loops)


def project_features(X, m) -> np.ndarray:
    m = np.asarray(m, dtype=float).ravel()
    m = m / np.linalg.norm(m)
    X = np.asarray(X, dtype=float)
    return np.outer(X @ m, m)


def reflect_features(X, m) -> np.ndarray:
    """Reflect every row across ``span(m)``: keep the m-part, negate the rest."""
    P = project_features(X, m)
    return 2.0 * P - np.asarray(X, dtype=float)


def project_linear(g: Graph, X, model: TwoLayerGcn, m) -> np.ndarray:
    """Linearized scores with features projected onto ``span(m)``."""
    return linearize(g, project_features(X, m), model)


def logistic_cost(scores, labels) -> float:
    """Mean of ``log(1 + exp(-v_i * score_i))`` for labels ``v_i`` in {+1, -1}."""
    return float(np.mean(logistic_terms(scores, labels)))


def logistic_terms(scores, labels) -> np.ndarray:
    s = np.asarray(scores, dtype=float)
    v = np.asarray(labels, dtype=float)
    if s.shape != v.shape:
        raise ValueError(f"{s.shape[0]} scores for {v.shape[0]} labels")
    return np.logaddexp(0.0, -v * s)


@dataclass
class CostTrial:
    """Monte Carlo costs of a GCN, its linearization and its projection."""

    C_y: float
    C_Ly: float
    C_PSLy: float
    standard_errors: dict = field(default_factory=dict)
    n_nodes: int = 0

    def linearization_holds(self, z: float = 3.0) -> bool:
        return self.C_Ly <= self.C_y + z * self.standard_errors["Ly_minus_y"]

    def projection_holds(self, z: float = 3.0) -> bool:
        return self.C_PSLy <= self.C_Ly + z * self.standard_errors["PSLy_minus_Ly"]


def cost_inequality_trial(params: CsbmParams, model: TwoLayerGcn, n_nodes_sampled: int,
                          rng: RandomLike = None) -> CostTrial:
    """Estimate C(y), C(L[y]) and C(P_S[L[y]]) on fresh cSBM draws.

    Graphs are drawn independently until ``n_nodes_sampled`` node terms are
    collected. Standard errors are node-level; the paired ones
    (``Ly_minus_y``, ``PSLy_minus_Ly``) are for the cost differences.
    """
    if params.k != 2 or params.mean_mode != "diametric":
        raise ParameterError("the cost comparison needs a binary cSBM with diametric means")
    if params.degree_correction is not None:
        raise ParameterError("the cost comparison needs equal-law nodes (no degree correction)")
    gen = as_generator(rng)
    m = np.zeros(params.m_feat)
    m[0] = 1.0
    fy, fl, fp = [], [], []
    total = 0
    while total < n_nodes_sampled:
        data = sample_csbm(params, gen)
        v = to_signed(data.labels)
        take = min(data.n, n_nodes_sampled - total)
        idx = np.arange(data.n) if take == data.n else np.sort(gen.choice(data.n, take, replace=False))
        fy.append(logistic_terms(gcn_forward(data.graph, data.features, model)[idx], v[idx]))
        fl.append(logistic_terms(linearize(data.graph, data.features, model)[idx], v[idx]))
        fp.append(logistic_terms(project_linear(data.graph, data.features, model, m)[idx], v[idx]))
        total += take
    fy, fl, fp = (np.concatenate(a) for a in (fy, fl, fp))

    def se(a):
        return float(a.std(ddof=1) / math.sqrt(a.shape[0])) if a.shape[0] > 1 else 0.0

    return CostTrial(
        C_y=float(fy.mean()), C_Ly=float(fl.mean()), C_PSLy=float(fp.mean()),
        standard_errors={"y": se(fy), "Ly": se(fl), "PSLy": se(fp),
                         "Ly_minus_y": se(fl - fy), "PSLy_minus_Ly": se(fp - fl)},
        n_nodes=total,
    )
