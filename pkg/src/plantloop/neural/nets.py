"""Feedforward and gated-recurrent networks with hand-rolled gradients.

Parameters live in an ordered dict of float64 arrays so the trainer and the
finite-difference checker can treat any net as a flat parameter vector.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np


class DimensionMismatch(ValueError):
    pass


def _sigmoid(x: np.ndarray) -> np.ndarray:
    # Clip keeps exp() in range; saturation beyond +-500 is exact in float64.
    return 1.0 / (1.0 + np.exp(-np.clip(x, -500.0, 500.0)))


def _init_matrix(rng: np.random.Generator, fan_in: int, shape: tuple) -> np.ndarray:
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


class FeedforwardNet:
    """Fully connected net, tanh hidden layers, linear output."""

    kind = "fnn"

    def __init__(self, layer_widths: Sequence[int], seed: int = 0):
        if len(layer_widths) < 3:
            raise ValueError("need at least one hidden layer")
        self.layer_widths = list(layer_widths)
        self.seed = seed
        rng = np.random.default_rng(seed)
        self.params: dict[str, np.ndarray] = {}
        for i, (n_in, n_out) in enumerate(zip(layer_widths[:-1], layer_widths[1:])):
            self.params[f"W{i}"] = _init_matrix(rng, n_in, (n_in, n_out))
            self.params[f"b{i}"] = np.zeros(n_out)

    @property
    def input_size(self) -> int:
        return self.layer_widths[0]

    @property
    def output_size(self) -> int:
        return self.layer_widths[-1]

    def weight_names(self) -> list[str]:
        return [k for k in self.params if k.startswith("W")]

    def forward(self, x: np.ndarray) -> np.ndarray:
        out, _ = self.forward_cached(np.atleast_2d(x))
        return out

    def forward_cached(self, x: np.ndarray):
        if x.ndim != 2 or x.shape[1] != self.input_size:
            raise DimensionMismatch(
                f"expected (batch, {self.input_size}) input, got {x.shape}")
        n_layers = len(self.layer_widths) - 1
        acts = [x]
        h = x
        for i in range(n_layers):
            z = h @ self.params[f"W{i}"] + self.params[f"b{i}"]
            h = z if i == n_layers - 1 else np.tanh(z)
            acts.append(h)
        return h, acts

    def backward(self, acts, d_out: np.ndarray) -> dict[str, np.ndarray]:
        n_layers = len(self.layer_widths) - 1
        grads: dict[str, np.ndarray] = {}
        delta = d_out
        for i in range(n_layers - 1, -1, -1):
            h_in = acts[i]
            grads[f"W{i}"] = h_in.T @ delta
            grads[f"b{i}"] = delta.sum(axis=0)
            if i > 0:
                delta = (delta @ self.params[f"W{i}"].T) * (1.0 - acts[i] ** 2)
        return grads


class GRUNet:
    """Stacked GRU with a linear readout at every sequence step.

    Gate parameters are packed [update | reset | candidate] along the last
    axis: U maps the layer input, W maps the carried hidden state, V is the
    readout from the top layer.
    """

    kind = "gru"

    def __init__(self, input_size: int, hidden_size: int, output_size: int,
                 num_layers: int = 2, seed: int = 0):
        self.input_size = input_size
        self.hidden_size = hidden_size
        self.output_size = output_size
        self.num_layers = num_layers
        self.seed = seed
        rng = np.random.default_rng(seed)
        h = hidden_size
        self.params: dict[str, np.ndarray] = {}
        for layer in range(num_layers):
            n_in = input_size if layer == 0 else h
            self.params[f"U{layer}"] = _init_matrix(rng, n_in, (n_in, 3 * h))
            self.params[f"W{layer}"] = _init_matrix(rng, h, (h, 3 * h))
            self.params[f"b{layer}"] = np.zeros(3 * h)
        self.params["V"] = _init_matrix(rng, h, (h, output_size))
        self.params["bv"] = np.zeros(output_size)

    def weight_names(self) -> list[str]:
        return [k for k in self.params if not k.startswith("b")]

    def zero_state(self, batch: int) -> np.ndarray:
        return np.zeros((self.num_layers, batch, self.hidden_size))

    def step(self, x: np.ndarray, state: np.ndarray):
        """One sequence step. x: (B, F); state: (layers, B, H). Returns
        (output (B, O), new state)."""
        if x.shape[1] != self.input_size:
            raise DimensionMismatch(
                f"expected (batch, {self.input_size}) input, got {x.shape}")
        h = self.hidden_size
        new_state = np.empty_like(state)
        inp = x
        for layer in range(self.num_layers):
            s = state[layer]
            gx = inp @ self.params[f"U{layer}"] + self.params[f"b{layer}"]
            gs = s @ self.params[f"W{layer}"]
            z = _sigmoid(gx[:, :h] + gs[:, :h])
            r = _sigmoid(gx[:, h:2 * h] + gs[:, h:2 * h])
            cand = np.tanh(gx[:, 2 * h:] + r * gs[:, 2 * h:])
            new_state[layer] = (1.0 - z) * s + z * cand
            inp = new_state[layer]
        out = inp @ self.params["V"] + self.params["bv"]
        return out, new_state

    def _run_layer(self, layer: int, x_tm: np.ndarray, s0: np.ndarray,
                   collect: bool):
        """One layer over a time-major (T, B, F) sequence; the input-side
        product is a single matmul, only the recurrent half runs per step."""
        h = self.hidden_size
        T, batch, n_in = x_tm.shape
        gx = (x_tm.reshape(T * batch, n_in) @ self.params[f"U{layer}"]
              + self.params[f"b{layer}"]).reshape(T, batch, 3 * h)
        w = self.params[f"W{layer}"]
        out_seq = np.empty((T, batch, h))
        caches = None
        if collect:
            caches = {k: np.empty((T, batch, h))
                      for k in ("s_prev", "z", "r", "sh", "cand")}
        s = s0
        for t in range(T):
            gs = s @ w
            gates = _sigmoid(gx[t, :, :2 * h] + gs[:, :2 * h])
            z, r = gates[:, :h], gates[:, h:]
            sh = gs[:, 2 * h:]
            cand = np.tanh(gx[t, :, 2 * h:] + r * sh)
            s_new = (1.0 - z) * s + z * cand
            if collect:
                caches["s_prev"][t] = s
                caches["z"][t] = z
                caches["r"][t] = r
                caches["sh"][t] = sh
                caches["cand"][t] = cand
            out_seq[t] = s_new
            s = s_new
        return out_seq, s, caches

    def _check_seq(self, seq: np.ndarray) -> None:
        if seq.ndim != 3:
            raise DimensionMismatch("sequence input must be (batch, time, features)")
        if seq.shape[1] == 0:
            raise DimensionMismatch("empty sequence")
        if seq.shape[2] != self.input_size:
            raise DimensionMismatch(
                f"expected {self.input_size} input features, got {seq.shape[2]}")

    def forward(self, seq: np.ndarray, state: np.ndarray | None = None):
        """Run a sequence. seq: (B, T, F). Returns (outputs (B, T, O), state)."""
        self._check_seq(seq)
        batch = seq.shape[0]
        if state is None:
            state = self.zero_state(batch)
        final = np.empty_like(state)
        x = np.ascontiguousarray(seq.transpose(1, 0, 2))
        for layer in range(self.num_layers):
            x, s_last, _ = self._run_layer(layer, x, state[layer], collect=False)
            final[layer] = s_last
        T = x.shape[0]
        outs = (x.reshape(T * batch, -1) @ self.params["V"]
                + self.params["bv"]).reshape(T, batch, self.output_size)
        return outs.transpose(1, 0, 2), final

    def forward_cached(self, seq: np.ndarray, state: np.ndarray | None = None):
        """Forward pass recording per-layer intermediates for BPTT."""
        self._check_seq(seq)
        batch = seq.shape[0]
        if state is None:
            state = self.zero_state(batch)
        final = np.empty_like(state)
        cache = {"inputs": [], "layers": []}
        x = np.ascontiguousarray(seq.transpose(1, 0, 2))
        for layer in range(self.num_layers):
            cache["inputs"].append(x)
            x, s_last, lc = self._run_layer(layer, x, state[layer], collect=True)
            cache["layers"].append(lc)
            final[layer] = s_last
        cache["top"] = x
        T = x.shape[0]
        outs = (x.reshape(T * batch, -1) @ self.params["V"]
                + self.params["bv"]).reshape(T, batch, self.output_size)
        return outs.transpose(1, 0, 2), final, cache

    def backward(self, seq: np.ndarray, cache, d_outs: np.ndarray) -> dict[str, np.ndarray]:
        """Backprop through time; d_outs matches the forward outputs (B, T, O)."""
        h = self.hidden_size
        batch, T, _ = seq.shape
        d_outs_tm = np.ascontiguousarray(d_outs.transpose(1, 0, 2))
        grads = {}
        top = cache["top"]
        flat_d = d_outs_tm.reshape(T * batch, self.output_size)
        grads["V"] = top.reshape(T * batch, h).T @ flat_d
        grads["bv"] = flat_d.sum(axis=0)
        d_seq = (flat_d @ self.params["V"].T).reshape(T, batch, h)
        for layer in range(self.num_layers - 1, -1, -1):
            lc = cache["layers"][layer]
            inp_seq = cache["inputs"][layer]
            w = self.params[f"W{layer}"]
            dgx = np.empty((T, batch, 3 * h))
            dgs = np.empty((T, batch, 3 * h))
            ds_carry = np.zeros((batch, h))
            for t in range(T - 1, -1, -1):
                s, z, r = lc["s_prev"][t], lc["z"][t], lc["r"][t]
                sh, cand = lc["sh"][t], lc["cand"][t]
                ds_new = d_seq[t] + ds_carry
                dcand_pre = (ds_new * z) * (1.0 - cand ** 2)
                dz_pre = (ds_new * (cand - s)) * z * (1.0 - z)
                dr_pre = (dcand_pre * sh) * r * (1.0 - r)
                dgx[t, :, :h] = dz_pre
                dgx[t, :, h:2 * h] = dr_pre
                dgx[t, :, 2 * h:] = dcand_pre
                dgs[t, :, :2 * h] = dgx[t, :, :2 * h]
                dgs[t, :, 2 * h:] = dcand_pre * r
                ds_carry = ds_new * (1.0 - z) + dgs[t] @ w.T
            n_in = inp_seq.shape[2]
            flat_dgx = dgx.reshape(T * batch, 3 * h)
            grads[f"U{layer}"] = inp_seq.reshape(T * batch, n_in).T @ flat_dgx
            grads[f"b{layer}"] = flat_dgx.sum(axis=0)
            grads[f"W{layer}"] = (lc["s_prev"].reshape(T * batch, h).T
                                  @ dgs.reshape(T * batch, 3 * h))
            d_seq = (flat_dgx @ self.params[f"U{layer}"].T).reshape(T, batch, n_in)
        return grads
