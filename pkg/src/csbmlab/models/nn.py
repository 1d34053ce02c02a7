"""Two-layer GCN and MLP classifiers trained full-batch with Adam.

Both networks share one forward/backward pass,
``Z = P relu(P X W1 + b1) W2 + b2``, where ``P`` is the symmetrically
normalised self-looped adjacency for the GCN and the identity for the MLP.
Gradients are written out by hand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp

from ..graph import Graph, LabeledGraph
from ..rng import RandomLike, as_generator


class TrainingDivergedError(FloatingPointError):
    """Loss became NaN or infinite during training."""


@dataclass(frozen=True)
class TrainConfig:
    hidden: int = 16
    epochs: int = 400
    learning_rate: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.hidden < 1 or self.epochs < 1:
            raise ValueError("hidden and epochs must be at least 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")


@dataclass
class TrainResult:
    test_accuracy: float
    loss_curve: list = field(repr=False)
    train_accuracy: float = float("nan")
    params: Optional[dict] = field(default=None, repr=False)


def normalized_adjacency(g: Graph) -> sp.csr_matrix:
    """``D^-1/2 (A + I) D^-1/2`` with ``D`` the self-looped degrees."""
    A = g.adjacency + sp.identity(g.n, format="csr")
    dinv = 1.0 / np.sqrt(np.asarray(A.sum(axis=1)).ravel())
    D = sp.diags(dinv)
    return (D @ A @ D).tocsr()


def init_params(m_feat: int, hidden: int, k: int, rng: RandomLike = None) -> dict:
    gen = as_generator(rng)
    return {
        "W1": gen.standard_normal((m_feat, hidden)) / math.sqrt(m_feat),
        "b1": np.zeros(hidden),
        "W2": gen.standard_normal((hidden, k)) / math.sqrt(hidden),
        "b2": np.zeros(k),
    }


def _log_softmax(Z):
    Zs = Z - Z.max(axis=1, keepdims=True)
    return Zs - np.log(np.exp(Zs).sum(axis=1, keepdims=True))


def forward(params: dict, X, P=None) -> np.ndarray:
    """Class logits; ``P=None`` means no propagation (MLP)."""
    R = X if P is None else P @ X
    H = np.maximum(R @ params["W1"] + params["b1"], 0.0)
    Q = H if P is None else P @ H
    return Q @ params["W2"] + params["b2"]


def loss_and_grads(params: dict, X, y, P=None) -> tuple[float, dict]:
    """Mean softmax cross-entropy and its gradient w.r.t. every parameter.

    ``P`` must be symmetric (true for the normalised adjacency).
    """
    R = X if P is None else P @ X
    return _loss_pre(params, R, np.asarray(y, dtype=np.int64), P)


class Adam:
    """Adam with bias correction, updating a dict of arrays in place."""

    def __init__(self, params: dict, lr=0.01, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params: dict, grads: dict) -> None:
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for k, g in grads.items():
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * g * g
            params[k] -= self.lr * (self.m[k] / c1) / (np.sqrt(self.v[k] / c2) + self.eps)


def fit_two_layer(X, y, k: int, cfg: TrainConfig, P=None, rng: RandomLike = None):
    """Train from scratch; returns ``(params, loss_curve)``."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    gen = as_generator(cfg.seed if rng is None else rng)
    params = init_params(X.shape[1], cfg.hidden, k, gen)
    # the first-layer propagation of fixed features never changes
    R = X if P is None else P @ X
    opt = Adam(params, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.eps)
    curve = []
    for _ in range(cfg.epochs):
        loss, grads = _loss_pre(params, R, y, P)
        if not math.isfinite(loss):
            raise TrainingDivergedError(f"loss became {loss} after {len(curve)} epochs")
        curve.append(loss)
        opt.step(params, grads)
    return params, curve


def _loss_pre(params, R, y, P):
    # loss_and_grads with the first propagation already applied
    n = R.shape[0]
    pre = R @ params["W1"] + params["b1"]
    H = np.maximum(pre, 0.0)
    Q = H if P is None else P @ H
    Z = Q @ params["W2"] + params["b2"]
    logp = _log_softmax(Z)
    loss = -float(logp[np.arange(n), y].mean())
    dZ = np.exp(logp)
    dZ[np.arange(n), y] -= 1.0
    dZ /= n
    dQ = dZ @ params["W2"].T
    dH = dQ if P is None else P @ dQ
    dpre = dH * (pre > 0)
    return loss, {"W2": Q.T @ dZ, "b2": dZ.sum(axis=0), "W1": R.T @ dpre, "b1": dpre.sum(axis=0)}


def _check_pair(train: LabeledGraph, test: LabeledGraph):
    if train.features is None or test.features is None:
        raise ValueError("training and test graphs need node features")
    if train.m_feat != test.m_feat or train.k != test.k:
        raise ValueError("train and test graphs disagree on feature dimension or class count")


def _accuracy(params, X, y, P) -> float:
    return float(np.mean(forward(params, X, P).argmax(axis=1) == y))


def train_gcn(train: LabeledGraph, test: LabeledGraph, cfg: TrainConfig = TrainConfig(),
              rng: RandomLike = None) -> TrainResult:
    """Train on one graph, report accuracy on an independent one."""
    _check_pair(train, test)
    P_train = normalized_adjacency(train.graph)
    params, curve = fit_two_layer(train.features, train.labels, train.k, cfg, P_train, rng)
    P_test = normalized_adjacency(test.graph)
    return TrainResult(
        test_accuracy=_accuracy(params, test.features, test.labels, P_test),
        loss_curve=curve,
        train_accuracy=_accuracy(params, train.features, train.labels, P_train),
        params=params,
    )


def train_mlp(train: LabeledGraph, test: LabeledGraph, cfg: TrainConfig = TrainConfig(),
              rng: RandomLike = None) -> TrainResult:
    """Graph-blind baseline: same network with propagation replaced by identity."""
    _check_pair(train, test)
    params, curve = fit_two_layer(train.features, train.labels, train.k, cfg, None, rng)
    return TrainResult(
        test_accuracy=_accuracy(params, test.features, test.labels, None),
        loss_curve=curve,
        train_accuracy=_accuracy(params, train.features, train.labels, None),
        params=params,
    )
