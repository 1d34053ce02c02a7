"""scikit-learn style wrappers around the graph classifiers.

Graph-aware estimators take the graph as a keyword argument to ``fit`` and
``predict`` (``graph=``), the feature matrix as ``X``. Labels may be any
hashable values; they are mapped to ``classes_`` like sklearn does.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, ClusterMixin, TransformerMixin
from sklearn.metrics import accuracy_score
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ..generators import ParameterError
from ..graph import Graph
from ..restructure import DegenerateClassError, RewireConfig, rewire_preserving_blocks
from ..rng import as_generator
from .linear import one_layer_scores, two_layer_linear_scores
from .nn import TrainConfig, fit_two_layer, forward, normalized_adjacency
from .spectral import spectral_cluster


def _check_graph(graph, n: int) -> Graph:
    if not isinstance(graph, Graph):
        raise TypeError("graph= must be a csbmlab Graph")
    if graph.n != n:
        raise ValueError(f"graph has {graph.n} nodes but X has {n} rows")
    return graph


def _encode(y):
    classes, codes = np.unique(y, return_inverse=True)
    return classes, codes.astype(np.int64)


class _TwoLayerNet(ClassifierMixin, BaseEstimator):
    _propagate = True

    def __init__(self, hidden=16, epochs=400, learning_rate=0.01, random_state=None):
        self.hidden = hidden
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.random_state = random_state

    def _operator(self, graph, n):
        if not self._propagate:
            return None
        if graph is None:
            raise ValueError(f"{type(self).__name__} needs graph=")
        return normalized_adjacency(_check_graph(graph, n))

    def fit(self, X, y, graph=None):
        X, y = check_X_y(X, y)
        self.classes_, codes = _encode(y)
        if self.classes_.shape[0] < 2:
            raise ValueError("need at least two classes")
        self.n_features_in_ = X.shape[1]
        cfg = TrainConfig(hidden=self.hidden, epochs=self.epochs, learning_rate=self.learning_rate)
        P = self._operator(graph, X.shape[0])
        self.params_, self.loss_curve_ = fit_two_layer(
            X, codes, self.classes_.shape[0], cfg, P, as_generator(self.random_state))
        return self

    def decision_function(self, X, graph=None):
        check_is_fitted(self, "params_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return forward(self.params_, X, self._operator(graph, X.shape[0]))

    def predict_proba(self, X, graph=None):
        Z = self.decision_function(X, graph)
        Z = np.exp(Z - Z.max(axis=1, keepdims=True))
        return Z / Z.sum(axis=1, keepdims=True)

    def predict(self, X, graph=None):
        Z = self.decision_function(X, graph)
        return self.classes_[Z.argmax(axis=1)]

    def score(self, X, y, graph=None, sample_weight=None):
        return accuracy_score(y, self.predict(X, graph), sample_weight=sample_weight)


class GCNClassifier(_TwoLayerNet):
    """Two-layer GCN (normalised self-looped adjacency), full-batch Adam.

    Train on one graph and predict on another by passing a different
    ``graph=`` to ``predict``.
    """


class MLPClassifier(_TwoLayerNet):
    """The same network without propagation; ``graph`` is accepted and ignored."""

    _propagate = False


class _SignedGraphClassifier(ClassifierMixin, BaseEstimator):
    # binary: the first class in ``classes_`` is the +1 side

    def _fit_direction(self, X, y):
        X, y = check_X_y(X, y)
        self.classes_, codes = _encode(y)
        if self.classes_.shape[0] != 2:
            raise ValueError("this model is binary")
        self.n_features_in_ = X.shape[1]
        return X, codes

    def _scores(self, X, graph):
        raise NotImplementedError

    def decision_function(self, X, graph=None):
        check_is_fitted(self, "classes_")
        X = check_array(X)
        if graph is None:
            raise ValueError(f"{type(self).__name__} needs graph=")
        return self._scores(X, _check_graph(graph, X.shape[0]))

    def predict(self, X, graph=None):
        s = self.decision_function(X, graph)
        return self.classes_[np.where(s >= 0, 0, 1)]

    def score(self, X, y, graph=None, sample_weight=None):
        return accuracy_score(y, self.predict(X, graph), sample_weight=sample_weight)


def _mean_difference(X, codes):
    w = X[codes == 0].mean(axis=0) - X[codes == 1].mean(axis=0)
    norm = np.linalg.norm(w)
    if norm == 0:
        raise ParameterError("class means coincide; cannot estimate a direction")
    return w / norm


class OneLayerGCN(_SignedGraphClassifier):
    """``sign(A X W)`` with no self-loops.

    ``weights=None`` estimates ``W`` from training data as the unit
    difference of the two class means.
    """

    def __init__(self, weights=None):
        self.weights = weights

    def fit(self, X, y, graph=None):
        X, codes = self._fit_direction(X, y)
        if self.weights is None:
            self.coef_ = _mean_difference(X, codes)
        else:
            w = np.asarray(self.weights, dtype=float).ravel()
            if w.shape[0] != X.shape[1] or not np.any(w):
                raise ParameterError("weights must be a non-zero vector of length m_feat")
            self.coef_ = w
        return self

    def _scores(self, X, graph):
        return one_layer_scores(graph, X, self.coef_)


class TwoLayerLinearGCN(_SignedGraphClassifier):
    """``sign(K sum_j sum_k X(k).m)`` over self-looped two-hop walks."""

    def __init__(self, direction=None, sign_k=1):
        self.direction = direction
        self.sign_k = sign_k

    def fit(self, X, y, graph=None):
        if self.sign_k not in (1, -1):
            raise ParameterError("sign_k must be +1 or -1")
        X, codes = self._fit_direction(X, y)
        if self.direction is None:
            self.coef_ = _mean_difference(X, codes)
        else:
            m = np.asarray(self.direction, dtype=float).ravel()
            if m.shape[0] != X.shape[1] or not np.any(m):
                raise ParameterError("direction must be a non-zero vector of length m_feat")
            self.coef_ = m / np.linalg.norm(m)
        return self

    def _scores(self, X, graph):
        return self.sign_k * two_layer_linear_scores(graph, X, self.coef_)


class SpectralClusterer(ClusterMixin, BaseEstimator):
    """Normalised spectral embedding followed by k-means; ``fit`` takes a Graph."""

    def __init__(self, n_clusters=2, n_init=10, max_iter=300, random_state=None):
        self.n_clusters = n_clusters
        self.n_init = n_init
        self.max_iter = max_iter
        self.random_state = random_state

    def fit(self, graph, y=None):
        if not isinstance(graph, Graph):
            raise TypeError("SpectralClusterer.fit expects a Graph")
        self.labels_ = spectral_cluster(graph, self.n_clusters, self.random_state,
                                        n_init=self.n_init, max_iter=self.max_iter)
        return self


class FeatureResampler(BaseEstimator):
    """Per-class, per-coordinate Gaussian refit of a feature matrix.

    ``fit`` records class means and sample standard deviations;
    ``sample(y)`` draws a fresh matrix for the given labels.
    """

    def __init__(self, random_state=None):
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        self.classes_, codes = _encode(y)
        counts = np.bincount(codes, minlength=self.classes_.shape[0])
        if counts.min() < 2:
            bad = self.classes_[counts.argmin()]
            raise DegenerateClassError(f"class {bad} has {counts.min()} node(s); need at least 2")
        self.means_ = np.stack([X[codes == c].mean(axis=0) for c in range(len(self.classes_))])
        self.stds_ = np.stack([X[codes == c].std(axis=0, ddof=1) for c in range(len(self.classes_))])
        self.n_features_in_ = X.shape[1]
        self._gen = as_generator(self.random_state)
        return self

    def sample(self, y):
        check_is_fitted(self, "means_")
        y = np.asarray(y)
        idx = np.searchsorted(self.classes_, y)
        if np.any(idx >= len(self.classes_)) or np.any(self.classes_[np.minimum(idx, len(self.classes_) - 1)] != y):
            raise ValueError("labels contain classes not seen in fit")
        noise = self._gen.standard_normal((y.shape[0], self.n_features_in_))
        return self.means_[idx] + self.stds_[idx] * noise

    def fit_transform(self, X, y):
        return self.fit(X, y).sample(y)


class EdgeRewirer(TransformerMixin, BaseEstimator):
    """Block-preserving double-edge swaps as a transformer on ``Graph`` objects."""

    def __init__(self, swaps_per_edge=10.0, random_state=None):
        self.swaps_per_edge = swaps_per_edge
        self.random_state = random_state

    def fit(self, graph, y=None):
        if not isinstance(graph, Graph):
            raise TypeError("EdgeRewirer expects a Graph")
        self.n_nodes_ = graph.n
        self._gen = as_generator(self.random_state)
        return self

    def transform(self, graph, y=None):
        check_is_fitted(self, "n_nodes_")
        if y is None:
            raise ValueError("EdgeRewirer needs node labels (y)")
        return rewire_preserving_blocks(graph, y, RewireConfig(self.swaps_per_edge), self._gen)

    def fit_transform(self, graph, y=None, **fit_params):
        return self.fit(graph).transform(graph, y)
