import math

import numpy as np
import pytest

from csbmlab.generators import CsbmParams, ParameterError, sample_csbm
from csbmlab.graph import Graph
from csbmlab.models.linear import (TwoLayerGcn, cost_inequality_trial, gcn_forward, linearize,
                                   logistic_cost, one_layer_predict, project_linear,
                                   reflect_features, to_signed, two_layer_linear_predict)
from csbmlab.theory import expected_accuracy_one_layer, lambda_to_probs


def path(n=4):
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def test_one_layer_constant_rows():
    m = np.array([0.6, 0.8])
    X = np.tile(m, (4, 1))
    assert one_layer_predict(path(), X, m).tolist() == [1, 1, 1, 1]


def test_one_layer_negation_flips_nonzero():
    rng = np.random.default_rng(0)
    g = path(6)
    X = rng.standard_normal((6, 3))
    W = rng.standard_normal(3)
    assert np.array_equal(one_layer_predict(g, -X, W), -one_layer_predict(g, X, W))


def test_one_layer_errors_and_isolated():
    with pytest.raises(ParameterError):
        one_layer_predict(path(), np.ones((4, 2)), [0, 0])
    with pytest.raises(ValueError):
        one_layer_predict(path(), np.ones((3, 2)), [1, 0])
    assert one_layer_predict(Graph.empty(2), -np.ones((2, 2)), [1, 1]).tolist() == [1, 1]


def test_one_layer_scale_invariance():
    data = sample_csbm(CsbmParams(lam=2, mu=1, sigma=1, mean_mode="diametric"), 0)
    m = np.eye(10)[0]
    assert np.array_equal(one_layer_predict(data.graph, data.features, m),
                          one_layer_predict(data.graph, data.features, 2 * m))


def test_one_layer_matches_theory():
    p = CsbmParams(lam=2, mu=1, sigma=1, mean_mode="diametric")
    m = np.eye(10)[0]
    accs = [np.mean(one_layer_predict(d.graph, d.features, m) == to_signed(d.labels))
            for d in (sample_csbm(p, s) for s in range(20))]
    p_in, p_out = lambda_to_probs(10, 2, 1000)
    assert abs(np.mean(accs) - expected_accuracy_one_layer(1, 0, 1000, p_in, p_out)) <= 0.02


def test_two_layer_isolated_node_and_flip():
    m = np.array([1.0, 0.0])
    assert two_layer_linear_predict(Graph.empty(1), np.array([[0.3, 5.0]]), m, 1).tolist() == [1]
    rng = np.random.default_rng(1)
    X = rng.standard_normal((4, 2))
    a = two_layer_linear_predict(path(), X, m, 1)
    assert np.array_equal(two_layer_linear_predict(path(), X, m, -1), -a)
    with pytest.raises(ParameterError):
        two_layer_linear_predict(path(), X, m, 0)


def test_two_layer_walk_counts():
    # path 0-1-2: self-looped two-walk counts from node 0 are (2, 2, 1)
    g = path(3)
    X = np.eye(3)
    scores = np.array([two_layer_linear_predict(g, X, e, 1) for e in np.eye(3)])
    assert np.all(scores == 1)
    from csbmlab.models.linear import two_layer_linear_scores
    assert two_layer_linear_scores(g, X, [1, 0, 0]).tolist() == [2, 2, 1]


def random_instance(rng, n=30, m=4, p=5):
    e = rng.integers(0, n, size=(3 * n, 2))
    e = e[e[:, 0] != e[:, 1]]
    g = Graph.from_edges(n, e)
    return g, rng.standard_normal((n, m)), TwoLayerGcn.random(m, p, rng, bool(rng.integers(2)))


def test_gcn_forward_trivial():
    rng = np.random.default_rng(2)
    g, X, model = random_instance(rng)
    zero = TwoLayerGcn(np.zeros_like(model.W), model.c)
    assert np.all(gcn_forward(g, X, zero) == 0)
    scaled = TwoLayerGcn(model.W, 3.0 * model.c, model.with_self_loops)
    np.testing.assert_allclose(gcn_forward(g, X, scaled), 3 * gcn_forward(g, X, model), atol=1e-12)
    neg = TwoLayerGcn(np.array([[1.0]]), np.array([1.0]))
    assert np.all(gcn_forward(g, -np.abs(rng.standard_normal((g.n, 1))) - 0.1, neg) == 0)


def test_zero_model_scores():
    rng = np.random.default_rng(3)
    g, X, model = random_instance(rng)
    zero = TwoLayerGcn(np.zeros_like(model.W), model.c)
    m = np.eye(4)[0]
    for f in (gcn_forward(g, X, zero), linearize(g, X, zero), project_linear(g, X, zero, m)):
        assert np.all(f == 0)


def test_gcn_forward_against_loops():
    rng = np.random.default_rng(4)
    g, X, model = random_instance(rng, n=12)
    nb = [set(g.neighbors(i).tolist()) | ({i} if model.with_self_loops else set()) for i in range(12)]
    ref = []
    for i in range(12):
        s = 0.0
        for j in nb[i]:
            h = sum(X[k] @ model.W for k in nb[j])
            s += np.maximum(h, 0) @ model.c
        ref.append(s)
    np.testing.assert_allclose(gcn_forward(g, X, model), ref, atol=1e-10)


def test_linearization_identities():
    rng = np.random.default_rng(5)
    for _ in range(100):
        g, X, model = random_instance(rng)
        m = rng.standard_normal(X.shape[1])
        L = linearize(g, X, model)
        assert np.max(np.abs(L - (gcn_forward(g, X, model) - gcn_forward(g, -X, model)) / 2)) <= 1e-9
        PL = project_linear(g, X, model, m)
        half = (L + linearize(g, reflect_features(X, m), model)) / 2
        assert np.max(np.abs(PL - half)) <= 1e-9


def test_logistic_cost_examples():
    assert logistic_cost(np.zeros(5), np.ones(5)) == pytest.approx(math.log(2), abs=1e-15)
    assert logistic_cost([np.inf], [1]) == 0.0
    assert logistic_cost([1e6], [-1]) == pytest.approx(1e6)
    ref = (math.log(1 + math.exp(-1)) + math.log(1 + math.e)) / 2
    assert logistic_cost([1, -1], [1, 1]) == pytest.approx(ref, abs=1e-15)
    assert ref == pytest.approx(0.8132616875182228, abs=1e-15)
    with pytest.raises(ValueError):
        logistic_cost([1, 2], [1])


def test_cost_trial_zero_model():
    p = CsbmParams(n=200, lam=1, mu=1, sigma=1, mean_mode="diametric")
    t = cost_inequality_trial(p, TwoLayerGcn(np.zeros((10, 3)), np.zeros(3)), 400, 0)
    assert t.C_y == t.C_Ly == t.C_PSLy == pytest.approx(math.log(2), abs=1e-15)


def test_cost_trial_inequalities_hold_on_sample():
    p = CsbmParams(n=400, lam=1, mu=1, sigma=1, mean_mode="diametric")
    rng = np.random.default_rng(6)
    for _ in range(5):
        t = cost_inequality_trial(p, TwoLayerGcn.random(10, 4, rng), 2000, rng)
        assert t.linearization_holds() and t.projection_holds()
        assert t.n_nodes == 2000


def test_cost_trial_rejects_asymmetric_setups():
    model = TwoLayerGcn.random(10, 2, 0)
    with pytest.raises(ParameterError):
        cost_inequality_trial(CsbmParams(n=100), model, 10, 0)
    with pytest.raises(ValueError):
        TwoLayerGcn(np.ones((3, 2)), np.ones(3))
