"""Network forward/backward correctness against independent oracles."""

import numpy as np
import pytest

from plantloop.neural import (ConstantFeature, DimensionMismatch, Divergence,
                              FeedforwardNet, GRUNet, Normalizer, TrainConfig,
                              grad_check, loss_and_grads, net_from_json,
                              net_to_json, train)


def fnn_oracle(net, x):
    """Independent forward recomputation with bare matrix arithmetic."""
    h = x
    n_layers = len(net.layer_widths) - 1
    for i in range(n_layers):
        z = h @ net.params[f"W{i}"] + net.params[f"b{i}"]
        h = z if i == n_layers - 1 else np.tanh(z)
    return h


def gru_step_oracle(net, x, state):
    """Independent single-step recomputation of the gated recurrence."""
    h = net.hidden_size
    new_state = []
    inp = x
    for layer in range(net.num_layers):
        s = state[layer]
        gx = inp @ net.params[f"U{layer}"] + net.params[f"b{layer}"]
        gs = s @ net.params[f"W{layer}"]
        z = 1 / (1 + np.exp(-(gx[:, :h] + gs[:, :h])))
        r = 1 / (1 + np.exp(-(gx[:, h:2 * h] + gs[:, h:2 * h])))
        cand = np.tanh(gx[:, 2 * h:] + r * gs[:, 2 * h:])
        s_new = (1 - z) * s + z * cand
        new_state.append(s_new)
        inp = s_new
    return inp @ net.params["V"] + net.params["bv"], np.stack(new_state)


class TestFeedforward:
    def test_zero_net_outputs_zero(self):
        net = FeedforwardNet([3, 4, 2], seed=0)
        for k in net.params:
            net.params[k][:] = 0.0
        out = net.forward(np.array([[1.0, -2.0, 3.0]]))
        assert np.array_equal(out, np.zeros((1, 2)))

    def test_odd_activation_at_origin(self):
        net = FeedforwardNet([1, 1, 1], seed=0)
        net.params["W0"][:] = 1.0
        net.params["W1"][:] = 1.0
        assert net.forward(np.array([[0.0]]))[0, 0] == 0.0

    def test_matches_matrix_oracle(self):
        rng = np.random.default_rng(5)
        net = FeedforwardNet([4, 7, 6, 3], seed=11)
        x = rng.normal(size=(9, 4))
        assert np.max(np.abs(net.forward(x) - fnn_oracle(net, x))) < 1e-12

    def test_dimension_mismatch(self):
        net = FeedforwardNet([3, 4, 2], seed=0)
        with pytest.raises(DimensionMismatch):
            net.forward(np.ones((2, 5)))


class TestRecurrent:
    def test_split_sequence_equivalence(self):
        net = GRUNet(2, 5, 1, num_layers=2, seed=7)
        seq = np.random.default_rng(0).normal(size=(3, 8, 2))
        full, st_full = net.forward(seq)
        o1, st1 = net.forward(seq[:, :5])
        o2, st2 = net.forward(seq[:, 5:], state=st1)
        assert np.max(np.abs(np.concatenate([o1, o2], axis=1) - full)) < 1e-12
        assert np.max(np.abs(st2 - st_full)) < 1e-12

    def test_zero_params_output_zero(self):
        net = GRUNet(2, 4, 3, seed=0)
        for k in net.params:
            net.params[k][:] = 0.0
        out, _ = net.forward(np.random.default_rng(1).normal(size=(2, 6, 2)))
        assert np.array_equal(out, np.zeros((2, 6, 3)))

    def test_single_step_matches_hand_oracle(self):
        net = GRUNet(3, 4, 2, num_layers=2, seed=3)
        rng = np.random.default_rng(9)
        x = rng.normal(size=(5, 3))
        state = rng.normal(size=(2, 5, 4))
        got_y, got_s = net.step(x, state.copy())
        want_y, want_s = gru_step_oracle(net, x, state)
        assert np.max(np.abs(got_y - want_y)) < 1e-12
        assert np.max(np.abs(got_s - want_s)) < 1e-12

    def test_causality(self):
        # Perturbing step t must not change outputs before t.
        net = GRUNet(2, 6, 2, seed=4)
        rng = np.random.default_rng(2)
        seq = rng.normal(size=(1, 10, 2))
        base, _ = net.forward(seq)
        mod = seq.copy()
        mod[0, 6] += 1.0
        out, _ = net.forward(mod)
        assert np.array_equal(out[0, :6], base[0, :6])
        assert np.any(out[0, 6:] != base[0, 6:])

    def test_empty_sequence_rejected(self):
        net = GRUNet(2, 4, 1, seed=0)
        with pytest.raises(DimensionMismatch):
            net.forward(np.zeros((1, 0, 2)))


class TestGradients:
    def test_fnn_finite_difference(self):
        worst = 0.0
        for seed in range(6):
            rng = np.random.default_rng(seed)
            net = FeedforwardNet([3, 8, 6, 2], seed=seed)
            x = rng.normal(size=(7, 3))
            y = rng.normal(size=(7, 2))
            worst = max(worst, grad_check(net, x, y, eps=1e-5,
                                          l2=0.01 if seed % 2 else 0.0))
        assert worst < 1e-4

    def test_gru_finite_difference_through_time(self):
        worst = 0.0
        for seed in range(6):
            rng = np.random.default_rng(100 + seed)
            net = GRUNet(3, 5, 2, num_layers=2, seed=seed)
            x = rng.normal(size=(4, 5, 3))
            y = rng.normal(size=(4, 5, 2))
            worst = max(worst, grad_check(net, x, y, eps=1e-5,
                                          l2=0.001 if seed % 2 else 0.0))
        assert worst < 1e-4

    def test_zero_gradient_at_perfect_fit(self):
        net = FeedforwardNet([2, 4, 1], seed=1)
        x = np.random.default_rng(0).normal(size=(5, 2))
        y = net.forward(x)
        _, grads = loss_and_grads(net, x, y)
        assert all(np.max(np.abs(g)) < 1e-8 for g in grads.values())

    def test_eps_bounds(self):
        net = FeedforwardNet([2, 3, 1], seed=0)
        x = np.ones((2, 2))
        y = np.ones((2, 1))
        with pytest.raises(ValueError):
            grad_check(net, x, y, eps=1e-8)


XOR_X = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=float)
XOR_Y = np.array([[0], [1], [1], [0]], dtype=float)


class TestTraining:
    def test_xor(self):
        net = FeedforwardNet([2, 8, 8, 1], seed=3)
        cfg = TrainConfig(batch_size=4, learning_rate=0.1, epochs_max=5000,
                          validation_patience=10**6, early_stop_patience=10**6,
                          target_training_error=0.005, seed=1)
        hist = train(net, (XOR_X, XOR_Y), (XOR_X, XOR_Y), (XOR_X, XOR_Y), cfg)
        assert hist.train_mse[-1] < 0.01

    def test_xor_smoothed_loss_non_increasing(self):
        net = FeedforwardNet([2, 8, 8, 1], seed=3)
        cfg = TrainConfig(batch_size=4, learning_rate=0.1, epochs_max=200,
                          validation_patience=10**6, early_stop_patience=10**6,
                          seed=1)
        hist = train(net, (XOR_X, XOR_Y), (XOR_X, XOR_Y), (XOR_X, XOR_Y), cfg)
        losses = np.array(hist.train_mse)
        smooth = np.convolve(losses, np.ones(10) / 10, mode="valid")
        tail = smooth[len(smooth) // 2:]
        # monotone in expectation: averaged blocks of the smoothed tail
        # decrease (momentum jitter within a block is tolerated)
        blocks = np.array_split(tail, 8)
        means = np.array([b.mean() for b in blocks])
        assert np.all(np.diff(means) <= np.maximum(0.01 * means[:-1], 1e-9))

    def test_l2_shrinks_weights(self):
        # heavy regularization needs a bare, small learning rate to stay stable
        def train_with(l2):
            net = FeedforwardNet([2, 6, 1], seed=2)
            cfg = TrainConfig(batch_size=4, learning_rate=1e-4, momentum=0.0,
                              epochs_max=200, validation_patience=10**6,
                              early_stop_patience=10**6, l2_weight=l2, seed=5)
            train(net, (XOR_X, XOR_Y), (XOR_X, XOR_Y), (XOR_X, XOR_Y), cfg)
            return np.sqrt(sum(float(np.sum(net.params[k] ** 2))
                               for k in net.weight_names()))
        assert train_with(1e3) < train_with(0.0)

    def test_l2_term_added_to_loss(self):
        net = FeedforwardNet([2, 4, 1], seed=0)
        x = np.random.default_rng(1).normal(size=(6, 2))
        y = np.random.default_rng(2).normal(size=(6, 1))
        plain, _ = loss_and_grads(net, x, y, l2=0.0)
        reg, _ = loss_and_grads(net, x, y, l2=0.5)
        assert reg >= plain

    def test_seed_determinism(self):
        results = []
        for _ in range(2):
            net = FeedforwardNet([2, 6, 1], seed=9)
            cfg = TrainConfig(batch_size=2, learning_rate=0.05, epochs_max=50,
                              validation_patience=10, early_stop_patience=30,
                              seed=4)
            train(net, (XOR_X, XOR_Y), (XOR_X, XOR_Y), (XOR_X, XOR_Y), cfg)
            results.append({k: v.copy() for k, v in net.params.items()})
        for k in results[0]:
            assert np.array_equal(results[0][k], results[1][k])

    def test_sine_sequence_gru(self):
        rng = np.random.default_rng(0)
        t = np.arange(420) * 0.15
        sig = np.sin(t) + 0.3 * np.sin(2.7 * t)
        L = 14
        x = np.stack([sig[i:i + L] for i in range(len(sig) - L - 1)])[:, :, None]
        y = np.stack([sig[i + 1:i + L + 1] for i in range(len(sig) - L - 1)])[:, :, None]
        idx = rng.permutation(len(x))
        tr, te = idx[:300], idx[300:]
        net = GRUNet(1, 16, 1, num_layers=2, seed=0)
        cfg = TrainConfig(sequence_length=L, batch_size=50, learning_rate=0.02,
                          epochs_max=150, validation_patience=15,
                          early_stop_patience=50, seed=2)
        hist = train(net, (x[tr], y[tr]), (x[te], y[te]), (x[te], y[te]), cfg)
        assert hist.test_mse[hist.best_epoch] < 0.1 * float(np.var(sig))

    def test_divergence_detected(self):
        net = FeedforwardNet([2, 8, 1], seed=0)
        cfg = TrainConfig(batch_size=4, learning_rate=50.0, epochs_max=500,
                          validation_patience=10**6, early_stop_patience=10**6,
                          seed=0)
        with pytest.raises(Divergence):
            train(net, (XOR_X, XOR_Y), (XOR_X, XOR_Y), (XOR_X, XOR_Y), cfg)


class TestNormalizer:
    def test_round_trip(self):
        rng = np.random.default_rng(3)
        data = rng.normal(size=(50, 4)) * [1, 10, 100, 0.1] + [5, -3, 0, 2]
        norm = Normalizer.fit(data)
        back = norm.inverse(norm.transform(data))
        assert np.max(np.abs(back - data)) < 1e-12

    def test_constant_feature_rejected(self):
        data = np.ones((10, 2))
        data[:, 0] = np.arange(10)
        with pytest.raises(ConstantFeature):
            Normalizer.fit(data)


class TestSerialization:
    def test_fnn_round_trip_bit_exact(self):
        net = FeedforwardNet([3, 5, 2], seed=8)
        back = net_from_json(net_to_json(net))
        for k in net.params:
            assert np.array_equal(net.params[k], back.params[k])

    def test_gru_round_trip_through_json_text(self):
        import json
        net = GRUNet(2, 4, 1, num_layers=2, seed=8)
        doc = json.loads(json.dumps(net_to_json(net)))
        back = net_from_json(doc)
        for k in net.params:
            assert np.array_equal(net.params[k], back.params[k])
        x = np.random.default_rng(0).normal(size=(2, 5, 2))
        assert np.array_equal(net.forward(x)[0], back.forward(x)[0])
