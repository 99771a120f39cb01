import math

import numpy as np
import pytest

from bandit_lens.models import LinearRewardModel


def one_dim_model(lam=1.0):
    return LinearRewardModel(("a1",), dim=1, ridge_lambda=lam)


def test_prior_only_weights_are_zero():
    model = one_dim_model()
    assert model.theta("a1").tolist() == [0.0]
    assert model.predict_mean("a1", np.array([1.0])) == 0.0


def test_single_update_ridge_algebra():
    # Hand ridge: A = 1 + 1*1 = 2, b = 1*1 = 1, theta = b/A = 0.5
    model = one_dim_model(lam=1.0)
    model.update("a1", np.array([1.0]), 1.0)
    A, b = model.accumulators("a1")
    assert A.tolist() == [[2.0]]
    assert b.tolist() == [1.0]
    assert model.theta("a1").tolist() == [0.5]
    assert model.predict_mean("a1", np.array([1.0])) == 0.5


def test_sequential_equals_batch():
    x1, r1 = np.array([1.0, 0.5]), 1.0
    x2, r2 = np.array([1.0, -0.25]), 2.0
    seq = LinearRewardModel(("a1",), 2)
    seq.update("a1", x1, r1)
    seq.update("a1", x2, r2)
    batch = LinearRewardModel(("a1",), 2)
    batch.update_batch("a1", np.stack([x1, x2]), np.array([r1, r2]))
    A1, b1 = seq.accumulators("a1")
    A2, b2 = batch.accumulators("a1")
    assert np.allclose(A1, A2)
    assert np.allclose(b1, b2)
    assert np.allclose(seq.theta("a1"), batch.theta("a1"))


def test_update_touches_only_that_arm():
    model = LinearRewardModel(("a1", "a2"), 1)
    model.update("a1", np.array([1.0]), 3.0)
    assert model.theta("a2").tolist() == [0.0]
    A2, b2 = model.accumulators("a2")
    assert A2.tolist() == [[1.0]]
    assert b2.tolist() == [0.0]


def test_non_finite_inputs_rejected():
    model = one_dim_model()
    with pytest.raises(ValueError):
        model.update("a1", np.array([float("inf")]), 1.0)
    with pytest.raises(ValueError):
        model.update("a1", np.array([1.0]), float("nan"))


def test_ucb_alpha_zero_equals_mean():
    model = one_dim_model()
    model.update("a1", np.array([1.0]), 1.0)
    x = np.array([1.0])
    assert model.ucb_score("a1", x, 0.0) == model.predict_mean("a1", x)


def test_ucb_prior_only_hand_value():
    # theta = 0, width = sqrt(1/1) = 1, so score = 0 + 1*1 = 1
    model = one_dim_model(lam=1.0)
    assert model.ucb_score("a1", np.array([1.0]), 1.0) == pytest.approx(1.0)


def test_ucb_after_update_hand_value():
    # A = 2 -> width sqrt(1/2); mean 0.5; score = 0.5 + sqrt(0.5)
    model = one_dim_model(lam=1.0)
    model.update("a1", np.array([1.0]), 1.0)
    expected = 0.5 + math.sqrt(0.5)
    assert model.ucb_score("a1", np.array([1.0]), 1.0) == pytest.approx(expected)
    assert expected == pytest.approx(1.2071, abs=1e-4)


def test_prediction_linear_in_non_intercept_components():
    model = LinearRewardModel(("a1",), 3)
    rng = np.random.default_rng(0)
    for _ in range(20):
        x = np.array([1.0, *rng.normal(size=2)])
        model.update("a1", x, rng.normal())
    theta = model.theta("a1")
    x = np.array([0.0, 2.0, -1.0])  # intercept excluded
    assert model.predict_mean("a1", 2 * x) == pytest.approx(
        2 * model.predict_mean("a1", x)
    )
    assert model.predict_mean("a1", x) == pytest.approx(theta[1] * 2 + theta[2] * -1)


def test_width_never_increases_after_updates():
    rng = np.random.default_rng(42)
    model = LinearRewardModel(("a1",), 3)
    probe = np.array([1.0, 0.3, -0.7])
    last = model.width("a1", probe)
    for _ in range(50):
        u = np.array([1.0, *rng.normal(size=2)])
        model.update("a1", u, rng.normal())
        now = model.width("a1", probe)
        assert now <= last + 1e-12
        last = now


def test_theta_recomputable_from_accumulators():
    model = LinearRewardModel(("a1",), 2)
    rng = np.random.default_rng(1)
    for _ in range(10):
        model.update("a1", np.array([1.0, rng.normal()]), rng.normal())
    A, b = model.accumulators("a1")
    assert np.allclose(model.theta("a1"), np.linalg.solve(A, b))
    # and A stays symmetric positive definite
    assert np.allclose(A, A.T)
    assert (np.linalg.eigvalsh(A) > 0).all()


def test_copy_is_independent():
    model = one_dim_model()
    clone = model.copy()
    model.update("a1", np.array([1.0]), 1.0)
    assert clone.theta("a1").tolist() == [0.0]
    assert model.theta("a1").tolist() == [0.5]


def test_predict_matrix_matches_scalar_path():
    model = LinearRewardModel(("a1", "a2"), 2)
    model.update("a1", np.array([1.0, 0.5]), 2.0)
    model.update("a2", np.array([1.0, -0.5]), -1.0)
    X = np.array([[1.0, 0.0], [1.0, 1.0]])
    mat = model.predict_matrix(X)
    for i, x in enumerate(X):
        for j, arm in enumerate(model.arm_ids):
            assert mat[i, j] == pytest.approx(model.predict_mean(arm, x))
