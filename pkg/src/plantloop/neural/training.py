"""Mini-batch gradient training with L2 regularization, plateau learning-rate
decay, and test-plateau early stopping."""

from __future__ import annotations

from dataclasses import dataclass, asdict, replace

import numpy as np

from .nets import FeedforwardNet, GRUNet


class Divergence(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    sequence_length: int = 5
    batch_size: int = 100
    learning_rate: float = 0.01
    epochs_max: int = 200
    target_training_error: float = 0.0
    validation_patience: int = 10
    l2_weight: float = 0.0
    lr_decay_factor: float = 0.5
    early_stop_patience: int = 25
    momentum: float = 0.9
    seed: int = 0

    def __post_init__(self):
        if self.sequence_length < 1 or self.batch_size < 1 or self.epochs_max < 1:
            raise ValueError("sequence_length, batch_size, epochs_max must be >= 1")
        if self.learning_rate <= 0 or self.l2_weight < 0:
            raise ValueError("learning_rate must be > 0 and l2_weight >= 0")
        if not 0 < self.lr_decay_factor <= 1:
            raise ValueError("lr_decay_factor must be in (0, 1]")

    def to_json(self) -> dict:
        return asdict(self)

    @staticmethod
    def from_json(d: dict) -> "TrainConfig":
        return TrainConfig(**d)


@dataclass
class TrainHistory:
    train_mse: list
    val_mse: list
    test_mse: list
    learning_rates: list
    stopped_reason: str
    best_epoch: int


def loss_and_grads(net, x: np.ndarray, y: np.ndarray, l2: float = 0.0):
    """Total loss (MSE + l2 * sum of squared weights) and its gradients."""
    if net.kind == "gru":
        outs, _, cache = net.forward_cached(x)
        resid = outs - y
        n = resid.size
        d_outs = (2.0 / n) * resid
        grads = net.backward(x, cache, d_outs)
    else:
        outs, acts = net.forward_cached(x)
        resid = outs - y
        n = resid.size
        grads = net.backward(acts, (2.0 / n) * resid)
    loss = float(np.mean(resid ** 2))
    if l2 > 0.0:
        for name in net.weight_names():
            w = net.params[name]
            loss += l2 * float(np.sum(w * w))
            grads[name] = grads[name] + 2.0 * l2 * w
    return loss, grads


def mse_of(net, x: np.ndarray, y: np.ndarray, batch: int = 4096) -> float:
    """Dataset MSE evaluated in batches (no regularization term)."""
    total, count = 0.0, 0
    for i in range(0, len(x), batch):
        xb, yb = x[i:i + batch], y[i:i + batch]
        if net.kind == "gru":
            out, _ = net.forward(xb)
        else:
            out = net.forward(xb)
        total += float(np.sum((out - yb) ** 2))
        count += yb.size
    return total / count


def train(net, train_data, val_data, test_data, config: TrainConfig) -> TrainHistory:
    """Train in place; restores the parameters of the best test epoch.

    Learning rate is halved when validation MSE stops improving for
    ``validation_patience`` evaluations; training stops early when test MSE
    stops improving for ``early_stop_patience`` evaluations.
    """
    x_train, y_train = train_data
    rng = np.random.default_rng(config.seed)
    velocity = {k: np.zeros_like(v) for k, v in net.params.items()}
    lr = config.learning_rate
    history = TrainHistory([], [], [], [], "epochs_max", 0)
    best_val = np.inf
    best_test = np.inf
    best_params = {k: v.copy() for k, v in net.params.items()}
    val_stall = 0
    test_stall = 0
    n = len(x_train)
    for epoch in range(config.epochs_max):
        order = rng.permutation(n)
        for i in range(0, n, config.batch_size):
            sel = order[i:i + config.batch_size]
            loss, grads = loss_and_grads(net, x_train[sel], y_train[sel],
                                         config.l2_weight)
            if not np.isfinite(loss):
                raise Divergence(f"non-finite loss at epoch {epoch}")
            for k, g in grads.items():
                velocity[k] = config.momentum * velocity[k] - lr * g
                net.params[k] += velocity[k]
        train_mse = mse_of(net, x_train, y_train)
        val_mse = mse_of(net, *val_data)
        test_mse = mse_of(net, *test_data)
        history.train_mse.append(train_mse)
        history.val_mse.append(val_mse)
        history.test_mse.append(test_mse)
        history.learning_rates.append(lr)
        if not np.isfinite(train_mse):
            raise Divergence(f"non-finite training MSE at epoch {epoch}")
        if val_mse < best_val * (1.0 - 1e-12):
            best_val = val_mse
            val_stall = 0
        else:
            val_stall += 1
            if val_stall >= config.validation_patience:
                lr *= config.lr_decay_factor
                val_stall = 0
        if test_mse < best_test * (1.0 - 1e-12):
            best_test = test_mse
            test_stall = 0
            history.best_epoch = epoch
            best_params = {k: v.copy() for k, v in net.params.items()}
        else:
            test_stall += 1
            if test_stall >= config.early_stop_patience:
                history.stopped_reason = "test_plateau"
                break
        if train_mse <= config.target_training_error:
            history.stopped_reason = "target_training_error"
            break
    for k in net.params:
        net.params[k] = best_params[k]
    return history


def grad_check(net, x: np.ndarray, y: np.ndarray, eps: float = 1e-5,
               l2: float = 0.0, max_entries_per_param: int | None = None,
               rng: np.random.Generator | None = None) -> float:
    """Max relative error of analytic gradients vs central finite differences."""
    if not 1e-7 <= eps <= 1e-3:
        raise ValueError("eps must be in [1e-7, 1e-3]")
    _, grads = loss_and_grads(net, x, y, l2)

    def loss_only() -> float:
        if net.kind == "gru":
            outs, _ = net.forward(x)
        else:
            outs = net.forward(x)
        loss = float(np.mean((outs - y) ** 2))
        if l2 > 0.0:
            for name in net.weight_names():
                w = net.params[name]
                loss += l2 * float(np.sum(w * w))
        return loss

    worst = 0.0
    for name, p in net.params.items():
        flat = p.reshape(-1)
        idxs = np.arange(flat.size)
        if max_entries_per_param and flat.size > max_entries_per_param:
            gen = rng or np.random.default_rng(0)
            idxs = gen.choice(flat.size, size=max_entries_per_param, replace=False)
        g_flat = grads[name].reshape(-1)
        for j in idxs:
            orig = flat[j]
            flat[j] = orig + eps
            lp = loss_only()
            flat[j] = orig - eps
            lm = loss_only()
            flat[j] = orig
            numeric = (lp - lm) / (2.0 * eps)
            denom = max(abs(numeric), abs(g_flat[j]), 1e-8)
            worst = max(worst, abs(numeric - g_flat[j]) / denom)
    return worst
