import numpy as np
import pytest

from codedopt.errors import BadShape, DimensionMismatch, IndivisibleRows
from codedopt.problem import (
    QuadraticProblem,
    gen_synthetic,
    gradient,
    objective,
    partition_rows,
    solve_reference,
)


def brute_objective(X, y, lam, w):
    total = 0.0
    for i in range(X.shape[0]):
        r = sum(X[i, j] * w[j] for j in range(X.shape[1])) - y[i]
        total += 0.5 * r * r
    return total + 0.5 * lam * sum(wi * wi for wi in w)


def fd_gradient(prob, w, h=1e-6):
    g = np.zeros_like(w)
    for j in range(len(w)):
        e = np.zeros_like(w)
        e[j] = h
        g[j] = (objective(prob, w + e) - objective(prob, w - e)) / (2 * h)
    return g


def gd_to_convergence(X, y, lam, iters=200000):
    w = np.zeros(X.shape[1])
    step = 1.0 / (np.linalg.norm(X, 2) ** 2 + lam)
    for _ in range(iters):
        w = w - step * (X.T @ (X @ w - y) + lam * w)
    return w


def test_gen_synthetic_deterministic():
    a = gen_synthetic(32, 4, seed=5)
    b = gen_synthetic(32, 4, seed=5)
    assert np.array_equal(a.X, b.X) and np.array_equal(a.y, b.y)


def test_gen_synthetic_target_variance():
    prob = gen_synthetic(4096, 16, seed=2)
    # y entries are N(0, p): sample variance should sit near p = 16.
    assert 13.0 < prob.y.var() < 19.0


def test_gen_synthetic_positive_mu_across_seeds():
    for seed in range(10):
        prob = gen_synthetic(512, 64, seed=seed)
        assert prob.mu > 0
        assert prob.mu <= prob.M


def test_gen_synthetic_rejects_wide():
    with pytest.raises(BadShape):
        gen_synthetic(4, 4, seed=0)


def test_objective_hand_arithmetic():
    prob = QuadraticProblem.from_data(np.array([[2.0]]), np.array([4.0]))
    assert objective(prob, np.array([1.0])) == 2.0
    assert gradient(prob, np.array([1.0]))[0] == -4.0


def test_objective_zero_residual():
    prob = QuadraticProblem.from_data(np.eye(3), np.array([1.0, -2.0, 0.5]))
    w_star = solve_reference(prob).w_star
    assert np.allclose(w_star, prob.y)
    assert objective(prob, w_star) <= 1e-20


def test_objective_matches_summation_oracle():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((6, 3))
    y = rng.standard_normal(6)
    w = rng.standard_normal(3)
    prob = QuadraticProblem.from_data(X, y, lam=0.3)
    fast = objective(prob, w)
    slow = brute_objective(X, y, 0.3, w)
    assert abs(fast - slow) <= 1e-12 * max(1.0, abs(slow))


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(1)
    prob = gen_synthetic(40, 6, seed=3, lam=0.1)
    for _ in range(100):
        w = rng.standard_normal(6)
        g = gradient(prob, w)
        approx = fd_gradient(prob, w)
        assert np.linalg.norm(g - approx) <= 1e-6 * max(1.0, np.linalg.norm(g))


def test_gradient_vanishes_at_optimum():
    prob = gen_synthetic(64, 8, seed=4)
    ref = solve_reference(prob)
    scale = 1.0 + np.linalg.norm(prob.X.T @ prob.y)
    assert np.linalg.norm(gradient(prob, ref.w_star)) <= 1e-8 * scale


def test_solve_reference_matches_long_run_gd():
    rng = np.random.default_rng(7)
    X = rng.standard_normal((3, 2))
    y = rng.standard_normal(3)
    prob = QuadraticProblem.from_data(X, y, lam=0.05)
    ref = solve_reference(prob)
    assert np.allclose(ref.w_star, gd_to_convergence(X, y, 0.05), atol=1e-6)


def test_solve_reference_shrinks_with_lambda():
    rng = np.random.default_rng(8)
    X = rng.standard_normal((20, 4))
    y = rng.standard_normal(20)
    norms = []
    for lam in (1.0, 10.0, 100.0):
        prob = QuadraticProblem.from_data(X, y, lam=lam)
        norms.append(np.linalg.norm(solve_reference(prob).w_star))
    assert norms[0] > norms[1] > norms[2]


def test_strong_convexity_surrogate():
    prob = gen_synthetic(48, 5, seed=9)
    ref = solve_reference(prob)
    rng = np.random.default_rng(10)
    for _ in range(50):
        w = ref.w_star + rng.standard_normal(5)
        gap = objective(prob, w) - ref.f_star
        dist = np.linalg.norm(w - ref.w_star) ** 2
        assert gap >= 0.5 * prob.mu * dist - 1e-9


def test_dimension_mismatch():
    prob = gen_synthetic(8, 2, seed=0)
    with pytest.raises(DimensionMismatch):
        objective(prob, np.zeros(3))
    with pytest.raises(DimensionMismatch):
        gradient(prob, np.zeros(5))


def test_partition_rows_even_split():
    parts = partition_rows(8, 4)
    assert parts == [range(0, 2), range(2, 4), range(4, 6), range(6, 8)]


def test_partition_rows_cover_disjoint():
    parts = partition_rows(30, 5)
    seen = sorted(i for r in parts for i in r)
    assert seen == list(range(30))


def test_partition_rows_rejects_uneven():
    with pytest.raises(IndivisibleRows):
        partition_rows(6, 4)


def test_problem_save_load_round_trip(tmp_path):
    prob = gen_synthetic(16, 3, seed=12, lam=0.25)
    prob.save(tmp_path)
    back = QuadraticProblem.load(tmp_path)
    assert np.array_equal(back.X, prob.X)
    assert np.array_equal(back.y, prob.y)
    assert back.lam == prob.lam
