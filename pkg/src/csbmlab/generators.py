"""Samplers for attributed random graphs.

Covers the plain SBM, the contextual SBM (Gaussian features), a Bernoulli
degree-corrected SBM, a hierarchical SBM with sub-clusters, the
epsilon-neighbourhood SBM on the unit square and single-pass triadic closure.
All samplers are deterministic functions of their parameters and the
random stream they are handed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .graph import Graph, LabeledGraph
from .rng import RandomLike, as_generator

MEAN_MODES = ("orthogonal", "diametric")


class ParameterError(ValueError):
    """Generative parameters outside their valid domain."""


@dataclass(frozen=True)
class DegreeWeightSpec:
    """Per-node degree weights for the degree-corrected SBM.

    ``kind="power_law"`` draws integer weights with ``P(w) ~ w**-exponent``
    for ``w >= w_min``; ``kind="explicit"`` uses ``weights`` as given. Either
    way weights are rescaled to mean 1 inside each class before use.
    """

    kind: str = "power_law"
    exponent: float = 2.5
    w_min: float = 1.0
    weights: Optional[Sequence[float]] = None

    def __post_init__(self):
        if self.kind not in ("power_law", "explicit"):
            raise ParameterError(f"unknown degree weight kind {self.kind!r}")
        if self.kind == "power_law":
            if self.exponent <= 1:
                raise ParameterError("power-law exponent must exceed 1")
            if self.w_min <= 0:
                raise ParameterError("w_min must be positive")
        else:
            if self.weights is None:
                raise ParameterError("explicit weights required")
            w = np.asarray(self.weights, dtype=float)
            if w.ndim != 1 or np.any(~np.isfinite(w)) or np.any(w <= 0):
                raise ParameterError("explicit weights must be positive and finite")

    @classmethod
    def explicit(cls, weights) -> "DegreeWeightSpec":
        return cls(kind="explicit", weights=tuple(float(w) for w in weights))

    @classmethod
    def power_law(cls, exponent: float = 2.5, w_min: float = 1.0) -> "DegreeWeightSpec":
        return cls(kind="power_law", exponent=exponent, w_min=w_min)

    def draw(self, labels, k: int, rng: RandomLike = None) -> np.ndarray:
        labels = np.asarray(labels)
        if self.kind == "explicit":
            raw = np.asarray(self.weights, dtype=float)
            if raw.shape != labels.shape:
                raise ParameterError(
                    f"{raw.shape[0]} explicit weights for {labels.shape[0]} nodes")
        else:
            # discrete power law, continuous-approximation inverse transform
            u = as_generator(rng).random(labels.shape[0])
            raw = np.floor((self.w_min - 0.5) * (1.0 - u) ** (-1.0 / (self.exponent - 1.0)) + 0.5)
            raw = np.maximum(raw, self.w_min)
        return normalize_weights(raw, labels, k)


def normalize_weights(weights, labels, k: int) -> np.ndarray:
    w = np.asarray(weights, dtype=float).copy()
    labels = np.asarray(labels)
    for c in range(k):
        sel = labels == c
        if sel.any():
            w[sel] /= w[sel].mean()
    return w


@dataclass(frozen=True)
class CsbmParams:
    """Configuration of a (contextual, optionally degree-corrected) SBM.

    ``lam`` is the edge-information parameter and ``mu`` the distance of each
    class feature mean from the origin.
    """

    n: int = 1000
    k: int = 2
    d: float = 10.0
    lam: float = 0.0
    mu: float = 0.0
    m_feat: int = 10
    sigma: float = 0.2
    mean_mode: str = "orthogonal"
    degree_correction: Optional[DegreeWeightSpec] = None

    def __post_init__(self):
        if self.n <= 0 or self.k <= 0:
            raise ParameterError("n and k must be positive")
        if self.n % self.k:
            raise ParameterError(f"n={self.n} is not divisible by k={self.k}")
        if self.d <= 0:
            raise ParameterError("expected degree d must be positive")
        if abs(self.lam) > math.sqrt(self.d) + 1e-12:
            raise ParameterError(f"|lambda|={abs(self.lam)} exceeds sqrt(d)={math.sqrt(self.d):.6g}")
        if self.mean_mode not in MEAN_MODES:
            raise ParameterError(f"mean_mode must be one of {MEAN_MODES}")
        if self.mean_mode == "diametric" and self.k != 2:
            raise ParameterError("diametric means require k=2")
        if not self.sigma > 0:
            raise ParameterError("sigma must be positive")
        if self.mean_mode == "orthogonal" and self.m_feat < self.k:
            raise ParameterError("orthogonal means need m_feat >= k")
        if self.mean_mode == "diametric" and self.m_feat < 1:
            raise ParameterError("m_feat must be at least 1")

    @property
    def probs(self) -> tuple[float, float]:
        return lambda_to_probs(self.d, self.lam, self.n)

    def replace(self, **changes) -> "CsbmParams":
        return replace(self, **changes)


def lambda_to_probs(d: float, lam: float, n: int) -> tuple[float, float]:
    """Map (expected degree, edge information) to ``(p_in, p_out)``."""
    if d <= 0 or n <= 0:
        raise ParameterError("d and n must be positive")
    root = math.sqrt(d)
    if abs(lam) > root + 1e-12:
        raise ParameterError(f"|lambda|={abs(lam)} exceeds sqrt(d)={root:.6g}")
    p_in = (d + lam * root) / n
    p_out = (d - lam * root) / n
    if max(p_in, p_out) > 1.0:
        raise ParameterError(f"edge probability {max(p_in, p_out):.6g} exceeds 1")
    return max(p_in, 0.0), max(p_out, 0.0)


def block_labels(n: int, k: int) -> np.ndarray:
    """First ``n/k`` nodes class 0, next ``n/k`` class 1, and so on."""
    return np.repeat(np.arange(k), n // k)


def _triangle_pairs(t: np.ndarray, s: int) -> tuple[np.ndarray, np.ndarray]:
    # row-major enumeration of {(i, j): 0 <= i < j < s}
    total = s * (s - 1) // 2
    r = total - 1 - t  # index counted from the end
    q = np.floor((np.sqrt(8.0 * r + 1.0) - 1.0) / 2.0).astype(np.int64)
    # guard against sqrt rounding
    q -= (q * (q + 1) // 2 > r)
    q += ((q + 1) * (q + 2) // 2 <= r)
    i = s - 2 - q
    j = t - (total - (s - i) * (s - i - 1) // 2) + i + 1
    return i, j


def sample_block_model(sizes, P, rng: RandomLike = None) -> Graph:
    """Bernoulli block model: pair (u, v) linked with ``P[block(u), block(v)]``.

    Per block pair the edge count is drawn from its binomial law and that many
    distinct pairs are chosen uniformly, which is the same law as independent
    Bernoulli trials but costs O(edges).
    """
    gen = as_generator(rng)
    sizes = [int(s) for s in sizes]
    P = np.asarray(P, dtype=float)
    B = len(sizes)
    if P.shape != (B, B) or not np.allclose(P, P.T):
        raise ParameterError("block probability matrix must be symmetric and match the block count")
    if np.any(P < 0) or np.any(P > 1):
        raise ParameterError("block probabilities must lie in [0, 1]")
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    chunks = []
    for a in range(B):
        for b in range(a, B):
            p = P[a, b]
            pairs = sizes[a] * (sizes[a] - 1) // 2 if a == b else sizes[a] * sizes[b]
            if pairs == 0 or p == 0:
                continue
            m = pairs if p == 1 else int(gen.binomial(pairs, p))
            if m == 0:
                continue
            t = np.arange(pairs) if m == pairs else np.sort(gen.choice(pairs, size=m, replace=False))
            if a == b:
                i, j = _triangle_pairs(t, sizes[a])
            else:
                i, j = np.divmod(t, sizes[b])
            chunks.append(np.column_stack([i + offsets[a], j + offsets[b]]))
    n = int(offsets[-1])
    edges = np.concatenate(chunks) if chunks else np.empty((0, 2), dtype=np.int64)
    return Graph.from_edges(n, edges)


def _two_level_probs(k: int, p_in: float, p_out: float) -> np.ndarray:
    P = np.full((k, k), p_out)
    np.fill_diagonal(P, p_in)
    return P


def sample_sbm(params: CsbmParams, rng: RandomLike = None) -> tuple[Graph, np.ndarray]:
    p_in, p_out = lambda_to_probs(params.d, params.lam, params.n)
    sizes = [params.n // params.k] * params.k
    g = sample_block_model(sizes, _two_level_probs(params.k, p_in, p_out), rng)
    return g, block_labels(params.n, params.k)


def sample_dcsbm(params: CsbmParams, rng: RandomLike = None,
                 weights: Optional[np.ndarray] = None) -> tuple[Graph, np.ndarray]:
    """Degree-corrected SBM with pair probability ``min(1, w_i w_j p_block)``.

    ``weights`` (already normalized) may be passed to skip the weight draw.
    """
    if params.degree_correction is None and weights is None:
        raise ParameterError("sample_dcsbm needs params.degree_correction")
    gen = as_generator(rng)
    p_in, p_out = lambda_to_probs(params.d, params.lam, params.n)
    labels = block_labels(params.n, params.k)
    if weights is None:
        weights = params.degree_correction.draw(labels, params.k, gen)
    w = np.asarray(weights, dtype=float)

    n = params.n
    chunks = []
    step = 1024
    for start in range(0, n - 1, step):
        rows = np.arange(start, min(start + step, n - 1))
        prob = np.minimum(1.0, np.outer(w[rows], w) *
                          np.where(labels[rows, None] == labels[None, :], p_in, p_out))
        u = gen.random(prob.shape)
        hit = (u < prob) & (np.arange(n)[None, :] > rows[:, None])
        r, c = np.nonzero(hit)
        chunks.append(np.column_stack([rows[r], c]))
    edges = np.concatenate(chunks) if chunks else np.empty((0, 2), dtype=np.int64)
    return Graph.from_edges(n, edges), labels


def class_means(params: CsbmParams) -> np.ndarray:
    """``k x m_feat`` matrix of class feature means."""
    M = np.zeros((params.k, params.m_feat))
    if params.mean_mode == "orthogonal":
        M[np.arange(params.k), np.arange(params.k)] = params.mu
    else:
        M[0, 0], M[1, 0] = params.mu, -params.mu
    return M


def mean_directions(params: CsbmParams) -> np.ndarray:
    """Orthonormal rows spanning the directions the class means live on."""
    if params.mean_mode == "orthogonal":
        return np.eye(params.m_feat)[:params.k]
    return np.eye(params.m_feat)[:1]


def sample_features(labels, params: CsbmParams, rng: RandomLike = None) -> np.ndarray:
    labels = np.asarray(labels)
    if params.mean_mode == "diametric" and params.k != 2:
        raise ParameterError("diametric means require k=2")
    gen = as_generator(rng)
    z = gen.standard_normal((labels.shape[0], params.m_feat))
    return class_means(params)[labels] + params.sigma * z


def sample_csbm(params: CsbmParams, rng: RandomLike = None) -> LabeledGraph:
    """Graph (SBM, or DC-SBM when degree correction is set) plus features."""
    gen = as_generator(rng)
    if params.degree_correction is not None:
        g, labels = sample_dcsbm(params, gen)
    else:
        g, labels = sample_sbm(params, gen)
    X = sample_features(labels, params, gen)
    return LabeledGraph(g, labels, params.k, X)


def sample_hsbm(params: CsbmParams, subclusters_per_class: int = 5,
                p_sub: Optional[float] = None, mu_sub: Optional[float] = None,
                rng: RandomLike = None) -> LabeledGraph:
    """Hierarchical SBM: each class split into equal, denser sub-clusters.

    Pairs inside one sub-cluster link with ``p_sub`` (default ``2 * p_in``),
    other same-class pairs with ``p_in`` and cross-class pairs with ``p_out``.
    Each sub-cluster gets a feature offset of norm ``mu_sub`` (default
    ``mu / 4``) along a random direction orthogonal to all class means.
    Returned labels are the top-level classes.
    """
    s = int(subclusters_per_class)
    if s < 1 or params.n % (params.k * s):
        raise ParameterError(f"n={params.n} is not divisible by k*subclusters={params.k * s}")
    gen = as_generator(rng)
    p_in, p_out = lambda_to_probs(params.d, params.lam, params.n)
    p_sub = min(1.0, 2.0 * p_in) if p_sub is None else float(p_sub)
    mu_sub = params.mu / 4.0 if mu_sub is None else float(mu_sub)
    if p_sub < p_in - 1e-15:
        raise ParameterError("p_sub must be at least p_in")
    if not 0 <= p_sub <= 1:
        raise ParameterError("p_sub must lie in [0, 1]")

    B = params.k * s
    block_class = np.repeat(np.arange(params.k), s)
    P = np.where(block_class[:, None] == block_class[None, :], p_in, p_out)
    np.fill_diagonal(P, p_sub)
    g = sample_block_model([params.n // B] * B, P, gen)
    labels = block_labels(params.n, params.k)
    sub = block_labels(params.n, B)

    X = sample_features(labels, params, gen)
    if mu_sub != 0:
        basis = mean_directions(params)
        # orthonormal basis of the complement of the class-mean span
        q, _ = np.linalg.qr(np.vstack([basis, np.eye(params.m_feat)]).T)
        comp = q[:, basis.shape[0]:params.m_feat]
        if comp.shape[1] == 0:
            raise ParameterError("no feature directions orthogonal to the class means")
        dirs = gen.standard_normal((B, comp.shape[1])) @ comp.T
        dirs *= mu_sub / np.linalg.norm(dirs, axis=1, keepdims=True)
        X = X + dirs[sub]
    return LabeledGraph(g, labels, params.k, X)


def sample_enn_sbm(n: int, eps_intra: float, eps_inter: float,
                   rng: RandomLike = None) -> tuple[LabeledGraph, np.ndarray]:
    """Epsilon-neighbourhood graph on uniform points in the unit square.

    Half the nodes (chosen uniformly) are class 0. Same-class pairs link
    within distance ``eps_intra``, cross-class pairs within ``eps_inter``.
    """
    if n % 2:
        raise ParameterError("n must be even")
    if eps_intra < 0 or eps_inter < 0:
        raise ParameterError("epsilon radii must be non-negative")
    gen = as_generator(rng)
    pos = gen.random((n, 2))
    labels = gen.permutation(np.repeat([0, 1], n // 2))
    r = max(eps_intra, eps_inter)
    pairs = cKDTree(pos).query_pairs(r, output_type="ndarray") if r > 0 else np.empty((0, 2), int)
    if pairs.size:
        dist = np.linalg.norm(pos[pairs[:, 0]] - pos[pairs[:, 1]], axis=1)
        same = labels[pairs[:, 0]] == labels[pairs[:, 1]]
        keep = np.where(same, dist <= eps_intra, dist <= eps_inter)
        pairs = pairs[keep]
    return LabeledGraph(Graph.from_edges(n, pairs), labels, 2), pos


def open_wedge_pairs(g: Graph) -> np.ndarray:
    """Distinct non-adjacent pairs ``(u, w)``, ``u < w``, with a common neighbour."""
    A = g.adjacency
    two = (A @ A).tocoo()
    mask = two.row < two.col
    u, w = two.row[mask], two.col[mask]
    if u.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    adj = np.asarray(A[u, w]).ravel() > 0
    return np.column_stack([u[~adj], w[~adj]]).astype(np.int64)


def apply_triadic_closure(g: Graph, fraction: float, rng: RandomLike = None) -> Graph:
    """Close ``floor(fraction * count)`` open wedges of the input graph.

    Candidates are the distinct endpoint pairs of open wedges in ``g``; a
    uniform sample without replacement is added in one pass, so wedges
    created along the way are not closed.
    """
    if not 0 <= fraction <= 1:
        raise ParameterError("closure fraction must lie in [0, 1]")
    cand = open_wedge_pairs(g)
    m = int(math.floor(fraction * cand.shape[0]))
    if m == 0:
        return g
    pick = as_generator(rng).choice(cand.shape[0], size=m, replace=False)
    return Graph.from_edges(g.n, np.concatenate([g.edges, cand[pick]]))


def shuffle_nodes(data: LabeledGraph, rng: RandomLike = None) -> LabeledGraph:
    """Relabel nodes by a uniform random permutation."""
    perm = as_generator(rng).permutation(data.n)  # old id -> new id
    inv = np.argsort(perm)
    g = Graph.from_edges(data.n, perm[data.graph.edges])
    X = None if data.features is None else data.features[inv]
    return LabeledGraph(g, data.labels[inv], data.k, X)


def sample_model(model: str, params: CsbmParams, rng: RandomLike = None, *,
                 p_sub: Optional[float] = None, mu_sub: Optional[float] = None,
                 subclusters_per_class: int = 5,
                 eps_intra: float = 0.05, eps_inter: float = 0.02,
                 closure_fraction: float = 0.3) -> LabeledGraph:
    """Dispatch by family name: sbm, csbm, dcsbm, hsbm, enn or triadic.

    ``sbm`` returns no features; ``enn`` ignores ``params`` apart from ``n``
    and attaches cSBM features for its random labels.
    """
    gen = as_generator(rng)
    if model == "sbm":
        g, labels = sample_sbm(params, gen)
        return LabeledGraph(g, labels, params.k)
    if model == "csbm":
        return sample_csbm(params.replace(degree_correction=None), gen)
    if model == "dcsbm":
        if params.degree_correction is None:
            params = params.replace(degree_correction=DegreeWeightSpec())
        return sample_csbm(params, gen)
    if model == "hsbm":
        return sample_hsbm(params, subclusters_per_class, p_sub, mu_sub, gen)
    if model == "enn":
        if params.k != 2:
            raise ParameterError("the epsilon-neighbourhood model is binary")
        data, _ = sample_enn_sbm(params.n, eps_intra, eps_inter, gen)
        return data.with_features(sample_features(data.labels, params, gen))
    if model == "triadic":
        data = sample_csbm(params.replace(degree_correction=None), gen)
        return data.with_graph(apply_triadic_closure(data.graph, closure_fraction, gen))
    raise ParameterError(f"unknown model {model!r}")
