"""Erase higher-order structure while keeping first-order statistics.

Edges are randomized by double-edge swaps restricted to edge pairs of the
same block category, which keeps every node degree and every between/within
class edge count exactly. Features are redrawn per class and coordinate from
a Gaussian with the empirical mean and standard deviation.
"""

from __future__ import annotations

import math
import shutil
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .graph import Graph, LabeledGraph
from .io import read_dataset, read_meta, write_edges, write_features, write_meta
from .rng import RandomLike, as_generator

MODES = ("edges", "features", "both")


class DegenerateClassError(ValueError):
    """A class is too small for its feature spread to be estimated."""


@dataclass(frozen=True)
class RewireConfig:
    swaps_per_edge: float = 10.0
    seed: Optional[int] = None

    def __post_init__(self):
        if not self.swaps_per_edge > 0:
            raise ValueError("swaps_per_edge must be positive")


def rewire_preserving_blocks(g: Graph, labels, cfg: RewireConfig = RewireConfig(),
                             rng: RandomLike = None) -> Graph:
    """Markov-chain double-edge swaps that preserve degrees and block counts.

    Each attempt draws an edge uniformly and a partner uniformly from the
    same block category (unordered endpoint-class pair). Both are oriented
    so that their first endpoints share a class and the second endpoints
    are exchanged. Swaps creating a self-loop or a duplicate edge are
    rejected. Categories with a single edge pass through unchanged.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (g.n,):
        raise ValueError(f"label vector has length {labels.shape[0]}, graph has {g.n} nodes")
    m = g.n_edges
    if m < 2:
        return g
    gen = as_generator(cfg.seed if rng is None else rng)
    n = g.n

    E = g.edges.copy()
    cu, cv = labels[E[:, 0]], labels[E[:, 1]]
    # orient cross-class edges so the lower class comes first
    flip = cu > cv
    E[flip] = E[flip][:, ::-1]
    lo, hi = np.minimum(cu, cv), np.maximum(cu, cv)
    k = int(labels.max()) + 1
    cat = lo * k + hi
    members = {}
    for pos, c in enumerate(cat.tolist()):
        members.setdefault(c, []).append(pos)
    cat_of = cat.tolist()
    same_class = (lo == hi).tolist()

    us = E[:, 0].tolist()
    vs = E[:, 1].tolist()
    present = set((min(a, b) * n + max(a, b)) for a, b in zip(us, vs))

    attempts = int(math.ceil(cfg.swaps_per_edge * m))
    first = gen.integers(0, m, size=attempts).tolist()
    second = gen.random(attempts).tolist()
    coin = gen.integers(0, 2, size=attempts).tolist()

    for t in range(attempts):
        e1 = first[t]
        pool = members[cat_of[e1]]
        if len(pool) < 2:
            continue
        e2 = pool[int(second[t] * len(pool))]
        if e2 == e1:
            continue
        a, b = us[e1], vs[e1]
        c, d = us[e2], vs[e2]
        if same_class[e1] and coin[t]:
            c, d = d, c
        # new edges (a, d) and (c, b)
        if a == d or c == b:
            continue
        k1 = min(a, d) * n + max(a, d)
        k2 = min(c, b) * n + max(c, b)
        if k1 == k2 or k1 in present or k2 in present:
            continue
        present.discard(min(a, b) * n + max(a, b))
        present.discard(min(c, d) * n + max(c, d))
        present.add(k1)
        present.add(k2)
        us[e1], vs[e1] = a, d
        us[e2], vs[e2] = c, b

    return Graph.from_edges(n, np.column_stack([us, vs]))


def resample_features_per_class(X, labels, rng: RandomLike = None) -> np.ndarray:
    """Redraw features independently per class and coordinate.

    Each coordinate of a class is replaced by draws from a Gaussian with that
    class's empirical mean and (sample) standard deviation, so
    cross-coordinate correlations are destroyed.
    """
    X = np.asarray(X, dtype=float)
    labels = np.asarray(labels)
    if X.ndim != 2 or X.shape[0] != labels.shape[0]:
        raise ValueError("feature rows must match the label vector")
    gen = as_generator(rng)
    out = np.empty_like(X)
    for c in np.unique(labels):
        sel = labels == c
        size = int(sel.sum())
        if size < 2:
            raise DegenerateClassError(f"class {c} has {size} node(s); need at least 2")
        mean = X[sel].mean(axis=0)
        std = X[sel].std(axis=0, ddof=1)
        out[sel] = mean + std * gen.standard_normal((size, X.shape[1]))
    return out


def nullify(data: LabeledGraph, mode: str = "both", cfg: RewireConfig = RewireConfig(),
            rng: RandomLike = None) -> LabeledGraph:
    """In-memory version of :func:`nullify_dataset`."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    gen = as_generator(cfg.seed if rng is None else rng)
    out = data
    if mode in ("edges", "both"):
        out = out.with_graph(rewire_preserving_blocks(data.graph, data.labels, cfg, gen))
    if mode in ("features", "both"):
        if data.features is None:
            raise ValueError("dataset has no features to resample")
        out = out.with_features(resample_features_per_class(data.features, data.labels, gen))
    return out


def nullify_dataset(dir_in, dir_out, mode: str = "both", cfg: RewireConfig = RewireConfig(),
                    rng: RandomLike = None) -> Path:
    """Write a structure-erased copy of a dataset directory.

    Files a mode does not touch are copied byte for byte; ``meta.json``
    records what was done.
    """
    src, dst = Path(dir_in), Path(dir_out)
    data = read_dataset(src)
    out = nullify(data, mode, cfg, rng)
    dst.mkdir(parents=True, exist_ok=True)

    if mode in ("edges", "both"):
        write_edges(dst / "edges.csv", out.graph)
    else:
        shutil.copyfile(src / "edges.csv", dst / "edges.csv")
    shutil.copyfile(src / "labels.csv", dst / "labels.csv")
    if (src / "features.csv").exists():
        if mode in ("features", "both"):
            write_features(dst / "features.csv", out.features)
        else:
            shutil.copyfile(src / "features.csv", dst / "features.csv")

    meta = read_meta(src)
    meta["nullified"] = {
        "source": str(src),
        "mode": mode,
        "swaps_per_edge": cfg.swaps_per_edge,
        "seed": cfg.seed,
    }
    write_meta(dst / "meta.json", meta)
    return dst


def class_degrees(g: Graph, labels, k: Optional[int] = None) -> np.ndarray:
    """``n x k`` matrix: neighbours of each node in each class."""
    labels = np.asarray(labels, dtype=np.int64)
    k = int(labels.max()) + 1 if k is None else k
    return np.asarray(g.adjacency @ np.eye(k)[labels]).round().astype(np.int64)


def null_triangle_expectation(g: Graph, labels, k: Optional[int] = None) -> float:
    """Expected triangles of a random graph matched to ``g``'s class degrees.

    Block configuration model: every node keeps its number of neighbours in
    each class (which block-preserving swaps never change) and stubs are
    otherwise paired at random. A node contributes ``k_b (k_c - [b == c])``
    ordered stub pairs towards classes ``b`` and ``c``. Sparse-limit
    expression, no sampling involved.
    """
    labels = np.asarray(labels, dtype=np.int64)
    K = class_degrees(g, labels, k).astype(float)
    k = K.shape[1]
    onehot = np.eye(k)[labels]
    E = onehot.T @ K
    S = np.zeros((k, k, k))
    for a in range(k):
        Ka = K[labels == a]
        for b in range(k):
            for c in range(k):
                S[a, b, c] = np.sum(Ka[:, b] * (Ka[:, c] - (b == c)))
    total = 0.0
    for a in range(k):
        for b in range(k):
            for c in range(k):
                den = E[a, b] * E[b, c] * E[a, c]
                if den > 0:
                    total += S[a, b, c] * S[b, a, c] * S[c, a, b] / den
    return total / 6.0
