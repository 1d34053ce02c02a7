"""The ten acceptance criteria, each reporting one PASS/FAIL line.

Lines are echoed in the pytest terminal summary ("acceptance criteria").
"""

import math
import time

import numpy as np
import pytest

from csbmlab.generators import CsbmParams, lambda_to_probs, sample_csbm, sample_model
from csbmlab.graph import Graph, block_edge_counts, degree_sequence, triangle_count
from csbmlab.models.linear import (TwoLayerGcn, cost_inequality_trial, gcn_forward, linearize,
                                   one_layer_predict, project_linear, reflect_features, to_signed,
                                   two_layer_linear_predict)
from csbmlab.models.nn import TrainConfig, init_params, loss_and_grads, normalized_adjacency, train_gcn
from csbmlab.models.spectral import aligned_accuracy, spectral_cluster
from csbmlab.generators import sample_sbm
from csbmlab.restructure import RewireConfig, null_triangle_expectation, rewire_preserving_blocks
from csbmlab.rng import RngStream
from csbmlab.sweep import SweepConfig, sweep_to_dir
from csbmlab.theory import expected_accuracy_one_layer, optimal_theta, two_layer_accuracy

M_UNIT = np.eye(10)[0]


def test_criterion_01_one_layer_theory_vs_simulation(report):
    t0 = time.perf_counter()
    worst, cells = 0.0, []
    for lam in (-2, 0, 2):
        for mu in (0, 0.5, 1):
            p = CsbmParams(n=1000, k=2, d=10, lam=lam, mu=mu, sigma=1, mean_mode="diametric")
            accs = []
            for s in range(20):
                data = sample_csbm(p, RngStream(1, (lam + 2, int(mu * 2), s)))
                pred = one_layer_predict(data.graph, data.features, M_UNIT)
                accs.append(np.mean(pred == to_signed(data.labels)))
            p_in, p_out = lambda_to_probs(10, lam, 1000)
            theory = expected_accuracy_one_layer(mu, 0.0, 1000, p_in, p_out, 1.0)
            gap = abs(theory - np.mean(accs))
            worst = max(worst, gap)
            cells.append(f"({lam},{mu}):{theory:.4f}/{np.mean(accs):.4f}")
    elapsed = time.perf_counter() - t0
    ok = worst <= 0.02 and elapsed < 120
    report(1, ok, f"max |theory - sim| = {worst:.4f} (tol 0.02), {elapsed:.1f}s; " + " ".join(cells))
    assert ok


def test_criterion_02_two_layer_theory_vs_simulation(report):
    t0 = time.perf_counter()
    r = two_layer_accuracy(5.0, 1.0, 10, 2, sign_k=1, tail_mass_bound=1e-8)
    p = CsbmParams(n=2000, k=2, d=10, lam=2, mu=5.0, sigma=1.0, mean_mode="diametric")
    accs = []
    for s in range(50):
        data = sample_csbm(p, RngStream(2, (s,)))
        pred = two_layer_linear_predict(data.graph, data.features, M_UNIT, 1)
        accs.append(np.mean(pred == to_signed(data.labels)))
    mc = float(np.mean(accs))
    elapsed = time.perf_counter() - t0
    gap = abs(r.accuracy - mc)
    ok = gap <= 0.015 and r.neglected_mass <= 1e-8 and elapsed < 300
    report(2, ok, f"theory {r.accuracy:.5f}, Monte Carlo {mc:.5f} (SE {np.std(accs, ddof=1) / math.sqrt(50):.5f}), "
                  f"gap {gap:.5f} (tol 0.015), neglected mass {r.neglected_mass:.2e}, {elapsed:.1f}s")
    assert ok


def test_criterion_03_cost_inequalities(report):
    rng = np.random.default_rng(3)
    lin_ok = proj_ok = 0
    for _ in range(100):
        lam = rng.uniform(-2, 2)
        mu = rng.uniform(0, 1.5)
        p = CsbmParams(n=500, k=2, d=10, lam=lam, mu=mu, sigma=1.0, mean_mode="diametric")
        model = TwoLayerGcn.random(10, int(rng.integers(1, 17)), rng,
                                   with_self_loops=bool(rng.integers(2)),
                                   scale=float(rng.uniform(0.1, 3.0)))
        t = cost_inequality_trial(p, model, 2000, rng)
        lin_ok += t.linearization_holds(3.0)
        proj_ok += t.projection_holds(3.0)
    ok = lin_ok >= 99 and proj_ok >= 99
    report(3, ok, f"C(L[y]) <= C(y) + 3SE in {lin_ok}/100; C(P_S L[y]) <= C(L[y]) + 3SE in {proj_ok}/100")
    assert ok


def test_criterion_04_linearization_identities(report):
    rng = np.random.default_rng(4)
    worst_l = worst_p = 0.0
    for i in range(100):
        n = int(rng.integers(5, 200))
        if i % 2:
            p = CsbmParams(n=2 * (n // 2) + 40, lam=float(rng.uniform(-2, 2)), mu=1.0,
                           m_feat=6, sigma=1.0, mean_mode="diametric")
            data = sample_csbm(p, rng)
            g, n = data.graph, data.n
        else:
            e = rng.integers(0, n, size=(int(rng.integers(0, 5 * n)), 2))
            g = Graph.from_edges(n, e[e[:, 0] != e[:, 1]])
        X = rng.standard_normal((n, 6)) * rng.uniform(0.1, 5)
        model = TwoLayerGcn.random(6, int(rng.integers(1, 20)), rng, bool(rng.integers(2)))
        m = rng.standard_normal(6)
        L = linearize(g, X, model)
        worst_l = max(worst_l, np.max(np.abs(L - (gcn_forward(g, X, model) - gcn_forward(g, -X, model)) / 2)))
        half = (L + linearize(g, reflect_features(X, m), model)) / 2
        worst_p = max(worst_p, np.max(np.abs(project_linear(g, X, model, m) - half)))
    ok = worst_l <= 1e-9 and worst_p <= 1e-9
    report(4, ok, f"max deviation: L vs odd part {worst_l:.2e}, P_S L vs reflection mean {worst_p:.2e} (tol 1e-9)")
    assert ok


def test_criterion_05_rewiring(report):
    exact = []
    for j, model in enumerate(["sbm", "csbm", "dcsbm", "hsbm", "enn", "triadic"]):
        data = sample_model(model, CsbmParams(n=1000, lam=1, mu=1), RngStream(5, (j,)))
        out = rewire_preserving_blocks(data.graph, data.labels, RewireConfig(), RngStream(5, (j, 1)))
        exact.append(np.array_equal(degree_sequence(out), degree_sequence(data.graph))
                     and np.array_equal(block_edge_counts(out, data.labels, 2),
                                        block_edge_counts(data.graph, data.labels, 2)))
    tri = sample_model("triadic", CsbmParams(n=1000, d=10, lam=1, mu=1), RngStream(5, (99,)))
    before = triangle_count(tri.graph)
    after = [triangle_count(rewire_preserving_blocks(tri.graph, tri.labels, RewireConfig(),
                                                     RngStream(5, (99, s)))) for s in range(20)]
    mean, se = float(np.mean(after)), float(np.std(after, ddof=1) / math.sqrt(20))
    null = null_triangle_expectation(tri.graph, tri.labels)
    ok = all(exact) and abs(mean - null) <= 3 * se
    report(5, ok, f"exact invariants on 6/6 families: {all(exact)}; triangles {before} -> "
                  f"{mean:.1f} +- {se:.1f} (20 rewires), matched null {null:.1f}, "
                  f"|diff|/SE = {abs(mean - null) / se:.2f} (tol 3)")
    assert ok


def _best_of_10(lam, mu):
    p = CsbmParams(n=1000, k=2, d=10, lam=lam, mu=mu, sigma=0.2)
    accs = []
    for s in range(10):
        root = RngStream(6, (int(lam * 10) + 100, int(mu * 10), s))
        train, test = sample_csbm(p, root.child(0)), sample_csbm(p, root.child(1))
        accs.append(train_gcn(train, test, TrainConfig(), root.child(2)).test_accuracy)
    return max(accs), float(np.mean(accs))


def test_criterion_06_gcn_corners(report):
    t0 = time.perf_counter()
    a, a_mean = _best_of_10(3, 2)
    b, b_mean = _best_of_10(0, 0)
    c, c_mean = _best_of_10(3, 0)
    elapsed = time.perf_counter() - t0
    parts = [a >= 0.95, b <= 0.6, c >= 0.8]
    ok = all(parts) and elapsed < 600
    report(6, ok, f"best-of-10: (3,2) {a:.3f} [>=0.95 {'ok' if parts[0] else 'MISS'}], "
                  f"(0,0) {b:.3f} [<=0.6 {'ok' if parts[1] else 'MISS'}], "
                  f"(3,0) {c:.3f} [>=0.8 {'ok' if parts[2] else 'MISS'}]; "
                  f"means {a_mean:.3f}/{b_mean:.3f}/{c_mean:.3f}; {elapsed:.1f}s")
    assert ok


def test_criterion_07_spectral(report):
    hi = lo = 0
    for s in range(20):
        g, labels = sample_sbm(CsbmParams(lam=3), RngStream(7, (0, s)))
        hi += aligned_accuracy(spectral_cluster(g, 2, RngStream(7, (2, s))), labels) >= 0.9
        g, labels = sample_sbm(CsbmParams(lam=0), RngStream(7, (1, s)))
        lo += aligned_accuracy(spectral_cluster(g, 2, RngStream(7, (3, s))), labels) <= 0.6
    ok = hi >= 18 and lo >= 18
    report(7, ok, f"lambda=3: >=0.9 in {hi}/20; lambda=0: <=0.6 in {lo}/20 (need 18)")
    assert ok


def _grad_rel_error(params, X, y, P, h=1e-5):
    _, grads = loss_and_grads(params, X, y, P)
    worst = 0.0
    for name, arr in params.items():
        num = np.zeros_like(arr)
        for idx in np.ndindex(arr.shape):
            orig = arr[idx]
            arr[idx] = orig + h
            up, _ = loss_and_grads(params, X, y, P)
            arr[idx] = orig - h
            dn, _ = loss_and_grads(params, X, y, P)
            arr[idx] = orig
            num[idx] = (up - dn) / (2 * h)
        scale = max(np.linalg.norm(num), np.linalg.norm(grads[name]), 1e-12)
        worst = max(worst, np.linalg.norm(num - grads[name]) / scale)
    return worst


def test_criterion_08_gradients(report):
    rng = np.random.default_rng(8)
    worst = {"gcn": 0.0, "mlp": 0.0}
    for _ in range(20):
        n, m = 20, 4
        e = rng.integers(0, n, size=(3 * n, 2))
        g = Graph.from_edges(n, e[e[:, 0] != e[:, 1]])
        X = rng.standard_normal((n, m))
        k = int(rng.integers(2, 4))
        y = rng.integers(0, k, size=n)
        params = init_params(m, int(rng.integers(2, 9)), k, rng)
        worst["gcn"] = max(worst["gcn"], _grad_rel_error(params, X, y, normalized_adjacency(g)))
        worst["mlp"] = max(worst["mlp"], _grad_rel_error(params, X, y, None))
    ok = max(worst.values()) < 1e-4
    report(8, ok, f"max relative error gcn {worst['gcn']:.2e}, mlp {worst['mlp']:.2e} (tol 1e-4, 20 instances)")
    assert ok


def test_criterion_09_optimal_theta(report):
    p_in, p_out = lambda_to_probs(10, 2, 1000)
    homo = optimal_theta(1.0, 1000, p_in, p_out)
    q_in, q_out = lambda_to_probs(10, -2, 1000)
    hetero = optimal_theta(1.0, 1000, q_in, q_out)
    gap = abs(homo.acc_at_0 - homo.acc_at_pi)
    name = {0.0: "theta=0", math.pi: "theta=pi"}
    ok = (gap > 1e-4 and homo.theta_star is not None and hetero.theta_star is not None
          and homo.theta_star != hetero.theta_star)
    report(9, ok, f"homophilous (lambda=2) winner {name[homo.theta_star]} "
                  f"(acc 0: {homo.acc_at_0:.4f}, pi: {homo.acc_at_pi:.4f}, gap {gap:.4f}); "
                  f"heterophilous (lambda=-2) winner {name[hetero.theta_star]}")
    assert ok


@pytest.mark.slow
def test_criterion_10_sweep_determinism(report, tmp_path):
    cfg = SweepConfig()
    t0 = time.perf_counter()
    sweep_to_dir(cfg, tmp_path / "w1", workers=1)
    t1 = time.perf_counter()
    sweep_to_dir(cfg, tmp_path / "w2", workers=2)
    t2 = time.perf_counter()
    a = (tmp_path / "w1/raw.csv").read_bytes()
    b = (tmp_path / "w2/raw.csv").read_bytes()
    n_rows = a.count(b"\n") - 1
    ok = a == b and n_rows == 13 * 9 * 10 * 3
    report(10, ok, f"default config ({n_rows} records): raw.csv byte-identical across 1 and 2 workers: "
                   f"{a == b}; runs took {t1 - t0:.0f}s and {t2 - t1:.0f}s")
    assert ok
