"""Fully connected network: gradients, determinism, prediction contracts."""

import numpy as np
import pytest

from oracles import fcn_forward_reference, finite_difference_gradients
from pathdepth.errors import DegenerateFeatureWarning, InsufficientRows
from pathdepth.models import FullyConnectedNetwork, loss_and_gradients


def random_problem(rng, n=12, dim=3, hidden=8):
    X = rng.normal(size=(n, dim))
    y = rng.normal(loc=100.0, scale=10.0, size=n)
    params = {
        "W1": rng.normal(scale=0.5, size=(hidden, dim)),
        "b1": rng.normal(scale=0.1, size=hidden),
        "W2": rng.normal(scale=0.5, size=hidden),
        "b2": np.array(float(rng.normal(loc=100.0))),
    }
    return X, y, params


class TestGradients:
    def test_analytic_matches_finite_differences(self):
        rng = np.random.default_rng(71)
        for _ in range(10):
            X, y, params = random_problem(rng)

            def loss_fn(p):
                return loss_and_gradients(p["W1"], p["b1"], p["W2"],
                                          float(p["b2"]), X, y)[0]

            _, gW1, gb1, gW2, gb2 = loss_and_gradients(
                params["W1"], params["b1"], params["W2"],
                float(params["b2"]), X, y)
            numeric = finite_difference_gradients(loss_fn, params, eps=1e-4)
            for analytic, key in ((gW1, "W1"), (gb1, "b1"), (gW2, "W2"),
                                  (np.array(gb2), "b2")):
                num = numeric[key]
                denom = np.maximum(np.abs(analytic) + np.abs(num), 1e-8)
                rel = np.abs(analytic - num) / denom
                assert rel.max() < 1e-4

    def test_dropout_mask_scales_gradient_path(self):
        rng = np.random.default_rng(72)
        X, y, params = random_problem(rng, n=6, hidden=4)
        mask = np.zeros((6, 4))
        loss, gW1, gb1, gW2, gb2 = loss_and_gradients(
            params["W1"], params["b1"], params["W2"], float(params["b2"]),
            X, y, dropout_mask=mask)
        # with every hidden unit dropped, only the output bias learns
        assert np.all(gW1 == 0.0) and np.all(gb1 == 0.0)
        assert np.all(gW2 == 0.0)
        assert gb2 != 0.0


class TestFit:
    def test_constant_target_learned(self):
        rng = np.random.default_rng(73)
        X = np.column_stack([10.0 ** rng.uniform(2, 4, 2000),
                             rng.choice([449.0, 915.0], 2000)])
        y = np.full(2000, 120.0)
        model = FullyConnectedNetwork(n_features=2, hidden_units=64,
                                      batch_size=256, random_state=0)
        model.fit(X, y)
        X_new = np.column_stack([10.0 ** rng.uniform(2, 4, 200),
                                 rng.choice([449.0, 915.0], 200)])
        preds = model.predict(X_new)
        assert np.abs(preds - 120.0).max() < 0.5

    def test_bitwise_deterministic_given_seed(self):
        rng = np.random.default_rng(74)
        X = rng.normal(size=(300, 3)) * [1000.0, 500.0, 50.0] \
            + [3000.0, 2000.0, 100.0]
        y = rng.normal(loc=140.0, scale=8.0, size=300)
        kwargs = dict(n_features=3, hidden_units=32, batch_size=64,
                      epochs=5, random_state=42)
        a = FullyConnectedNetwork(**kwargs).fit(X, y)
        b = FullyConnectedNetwork(**kwargs).fit(X, y)
        assert np.array_equal(a.W1_, b.W1_)
        assert np.array_equal(a.b1_, b.b1_)
        assert np.array_equal(a.W2_, b.W2_)
        assert a.b2_ == b.b2_
        assert a.best_epoch_ == b.best_epoch_

    def test_different_seed_changes_weights(self):
        rng = np.random.default_rng(75)
        X = rng.normal(size=(100, 2)) + 10.0
        y = rng.normal(size=100)
        a = FullyConnectedNetwork(n_features=2, hidden_units=8, epochs=2,
                                  random_state=0).fit(X, y)
        b = FullyConnectedNetwork(n_features=2, hidden_units=8, epochs=2,
                                  random_state=1).fit(X, y)
        assert not np.array_equal(a.W1_, b.W1_)

    def test_insufficient_rows(self):
        with pytest.raises(InsufficientRows):
            FullyConnectedNetwork(n_features=2).fit([[1.0, 2.0]], [3.0])

    def test_degenerate_feature_flagged(self):
        rng = np.random.default_rng(76)
        X = np.column_stack([rng.uniform(100, 200, 50),
                             np.full(50, 915.0)])   # constant frequency
        y = rng.normal(size=50)
        with pytest.warns(DegenerateFeatureWarning):
            model = FullyConnectedNetwork(n_features=2, hidden_units=4,
                                          epochs=1).fit(X, y)
        assert model.scaler_std_[1] == 1.0

    def test_validation_tracking(self):
        rng = np.random.default_rng(77)
        X = rng.normal(size=(200, 2)) + 5.0
        y = rng.normal(size=200)
        model = FullyConnectedNetwork(n_features=2, hidden_units=8,
                                      epochs=6, batch_size=64).fit(X, y)
        assert len(model.val_mse_path_) == 6
        assert 1 <= model.best_epoch_ <= 6
        best = model.val_mse_path_[model.best_epoch_ - 1]
        assert best == min(model.val_mse_path_)


class TestPredict:
    def _manual_model(self, W1, b1, W2, b2, mean=None, std=None, dim=2):
        model = FullyConnectedNetwork(n_features=dim,
                                      hidden_units=len(b1))
        model.W1_ = np.asarray(W1, float)
        model.b1_ = np.asarray(b1, float)
        model.W2_ = np.asarray(W2, float)
        model.b2_ = float(b2)
        model.scaler_mean_ = np.zeros(dim) if mean is None else \
            np.asarray(mean, float)
        model.scaler_std_ = np.ones(dim) if std is None else \
            np.asarray(std, float)
        model.n_features_in_ = dim
        return model

    def test_zero_weights_output_bias(self):
        model = self._manual_model(np.zeros((4, 2)), np.zeros(4),
                                   np.zeros(4), 100.0)
        assert np.all(model.predict([[1.0, 2.0], [9.0, -3.0]]) == 100.0)

    def test_relu_gates_negative_preactivations(self):
        W1 = -np.ones((8, 2))
        b1 = np.full(8, -5.0)
        W2 = np.ones(8) * 3.0
        model = self._manual_model(W1, b1, W2, 42.0)
        assert model.predict([[1.0, 1.0]])[0] == 42.0

    def test_matches_reference_forward(self):
        rng = np.random.default_rng(78)
        dim, hidden = 3, 16
        model = self._manual_model(rng.normal(size=(hidden, dim)),
                                   rng.normal(size=hidden),
                                   rng.normal(size=hidden),
                                   float(rng.normal()),
                                   mean=rng.normal(size=dim),
                                   std=rng.uniform(0.5, 2.0, dim), dim=dim)
        X = rng.normal(size=(50, dim))
        expected = fcn_forward_reference(model.W1_, model.b1_, model.W2_,
                                         model.b2_, model.scaler_mean_,
                                         model.scaler_std_, X)
        assert np.abs(model.predict(X) - expected).max() < 1e-9

    def test_scaler_transform_invariance(self):
        rng = np.random.default_rng(79)
        dim = 2
        base = self._manual_model(rng.normal(size=(8, dim)),
                                  rng.normal(size=8), rng.normal(size=8),
                                  5.0, mean=[10.0, 20.0], std=[2.0, 4.0],
                                  dim=dim)
        # rescale features x' = a*x + b with a matching scaler update
        a = np.array([3.0, 0.5])
        b = np.array([-1.0, 7.0])
        shifted = self._manual_model(base.W1_, base.b1_, base.W2_, base.b2_,
                                     mean=a * base.scaler_mean_ + b,
                                     std=a * base.scaler_std_, dim=dim)
        X = rng.normal(size=(20, dim)) * 5.0 + 15.0
        assert np.abs(base.predict(X)
                      - shifted.predict(X * a + b)).max() < 1e-9

    def test_repeated_calls_identical(self):
        rng = np.random.default_rng(80)
        X = rng.normal(size=(50, 2)) + 10.0
        y = rng.normal(size=50)
        model = FullyConnectedNetwork(n_features=2, hidden_units=8,
                                      epochs=2).fit(X, y)
        assert np.array_equal(model.predict(X), model.predict(X))
