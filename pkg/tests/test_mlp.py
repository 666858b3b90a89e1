import numpy as np
import pytest

from mgtdetect.models import MLPModel, TrainConfig, mlp_fit, mlp_forward, mlp_loss_and_grad
from oracles import central_difference, mlp_objective, scaled_max_error


def test_zero_weights_give_uniform():
    m = MLPModel(np.zeros((4, 3)), np.zeros(4), np.zeros((5, 4)), np.zeros(5))
    assert mlp_forward(m, np.ones(3)).tolist() == pytest.approx([0.2] * 5)


def test_xor():
    X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
    y = np.array([0, 1, 1, 0])
    cfg = TrainConfig.defaults("mlp", hidden_size=8, epochs=2000, learning_rate=0.1, seed=0)
    m = mlp_fit(X, y, cfg)
    assert m.predict(X).tolist() == y.tolist()


def test_gradient_vs_finite_differences():
    rng = np.random.default_rng(7)
    for _ in range(20):
        n, d, h, c = (int(v) for v in rng.integers([2, 1, 1, 2], [7, 5, 6, 5]))
        params = [rng.normal(size=(h, d)), rng.normal(size=h), rng.normal(size=(c, h)), rng.normal(size=c)]
        X = rng.normal(size=(n, d))
        y = rng.integers(0, c, size=n)
        alpha = float(rng.uniform(0, 0.1))
        value, grads = mlp_loss_and_grad(params, X, y, c, alpha)
        assert value == pytest.approx(mlp_objective(params, X, y, alpha), rel=1e-10)
        num = central_difference(lambda p: mlp_objective(p, X, y, alpha), params)
        assert scaled_max_error(grads, num) < 1e-4


def test_forward_is_distribution():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(30, 6))
    m = mlp_fit(X, rng.integers(0, 4, size=30), TrainConfig.defaults("mlp", epochs=3, hidden_size=5))
    p = m.predict_proba(X)
    assert np.all((p >= 0) & (p <= 1))
    assert np.allclose(p.sum(axis=1), 1.0, atol=1e-9)


def test_deterministic():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(40, 5))
    y = rng.integers(0, 3, size=40)
    cfg = TrainConfig.defaults("mlp", epochs=5, hidden_size=7)
    a, b = mlp_fit(X, y, cfg), mlp_fit(X, y, cfg)
    assert all(p.tobytes() == q.tobytes() for p, q in zip(a.params(), b.params()))


def test_init_range():
    X = np.zeros((2, 16))
    m = mlp_fit(X, [0, 1], TrainConfig.defaults("mlp", epochs=0, hidden_size=9))
    assert np.abs(m.W1).max() <= 1 / 4
    assert np.abs(m.W2).max() <= 1 / 3


def test_unknown_class():
    with pytest.raises(ValueError, match="unknown class"):
        mlp_fit(np.zeros((2, 2)), [0, 5], n_classes=3)


def test_state_round_trip():
    m = mlp_fit(np.eye(3), [0, 1, 2], TrainConfig.defaults("mlp", epochs=2, hidden_size=4))
    again = MLPModel.from_state(m.get_state())
    assert np.array_equal(again.W2, m.W2) and again.config == m.config
