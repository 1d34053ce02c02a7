"""Feature-blind spectral clustering and permutation-aligned scoring."""

from __future__ import annotations

from itertools import permutations

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, eigsh
from sklearn.cluster import KMeans

from ..graph import Graph
from ..rng import RandomLike, as_stream

DENSE_LIMIT = 500


def spectral_embedding(g: Graph, k: int, rng: RandomLike = None) -> np.ndarray:
    """Bottom-``k`` eigenvectors of ``I - D^-1/2 A D^-1/2``, rows unit-normalised.

    Isolated nodes have zero rows in the normalised adjacency and keep a
    zero embedding row.
    """
    deg = g.degree().astype(float)
    dinv = np.zeros_like(deg)
    dinv[deg > 0] = 1.0 / np.sqrt(deg[deg > 0])
    D = sp.diags(dinv)
    S = (D @ g.adjacency @ D).tocsr()
    k = min(k, g.n)
    if g.n <= DENSE_LIMIT:
        _, vecs = np.linalg.eigh(S.toarray())
        U = vecs[:, -k:]
    else:
        v0 = as_stream(rng).child(0).generator.standard_normal(g.n)
        try:
            _, U = eigsh(S, k=k, which="LA", v0=v0)
        except ArpackNoConvergence:
            _, vecs = np.linalg.eigh(S.toarray())
            U = vecs[:, -k:]
    norms = np.linalg.norm(U, axis=1, keepdims=True)
    return np.divide(U, norms, out=np.zeros_like(U), where=norms > 1e-12)


def spectral_cluster(g: Graph, k: int, rng: RandomLike = None,
                     n_init: int = 10, max_iter: int = 300) -> np.ndarray:
    """Cluster labels in ``[0, k)``; arbitrary up to permutation."""
    if k < 2:
        raise ValueError("k must be at least 2")
    stream = as_stream(rng)
    U = spectral_embedding(g, k, stream)
    km = KMeans(n_clusters=k, n_init=n_init, max_iter=max_iter,
                random_state=stream.child(1).int_seed())
    return km.fit_predict(U)


def aligned_accuracy(pred, truth, permutation_invariant: bool = True) -> float:
    """Fraction of agreeing labels, maximised over relabelings of ``pred``.

    Label values are matched by identity; with ``permutation_invariant`` the
    best bijection between the label sets is searched exhaustively.
    """
    pred = np.asarray(pred).ravel()
    truth = np.asarray(truth).ravel()
    if pred.shape != truth.shape:
        raise ValueError(f"{pred.shape[0]} predictions for {truth.shape[0]} labels")
    if pred.size == 0:
        return float("nan")
    if not permutation_invariant:
        return float(np.mean(pred == truth))
    values, inv = np.unique(np.concatenate([pred, truth]), return_inverse=True)
    k = values.shape[0]
    if k > 8:
        raise ValueError(f"exhaustive alignment supports at most 8 classes, got {k}")
    p, t = inv[:pred.size], inv[pred.size:]
    conf = np.zeros((k, k), dtype=np.int64)
    np.add.at(conf, (p, t), 1)
    rows = np.arange(k)
    best = max(conf[rows, list(perm)].sum() for perm in permutations(range(k)))
    return float(best / pred.size)
