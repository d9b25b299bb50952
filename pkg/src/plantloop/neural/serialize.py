"""Versioned JSON serialization for trained networks.

Parameters are stored as JSON decimal text (shortest round-trip repr), so a
load reproduces the saved float64 values bit-exactly.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .nets import FeedforwardNet, GRUNet

SCHEMA_VERSION = 1


def net_to_json(net) -> dict:
    if net.kind == "fnn":
        meta = {"layer_widths": net.layer_widths}
    else:
        meta = {"input_size": net.input_size, "hidden_size": net.hidden_size,
                "output_size": net.output_size, "num_layers": net.num_layers}
    return {
        "kind": net.kind,
        "seed": net.seed,
        **meta,
        "params": {k: v.tolist() for k, v in net.params.items()},
    }


def net_from_json(d: dict):
    if d["kind"] == "fnn":
        net = FeedforwardNet(d["layer_widths"], seed=d.get("seed", 0))
    elif d["kind"] == "gru":
        net = GRUNet(d["input_size"], d["hidden_size"], d["output_size"],
                     num_layers=d["num_layers"], seed=d.get("seed", 0))
    else:
        raise ValueError(f"unknown net kind {d['kind']!r}")
    for k, v in d["params"].items():
        arr = np.asarray(v, dtype=float)
        if arr.shape != net.params[k].shape:
            raise ValueError(f"shape mismatch for {k}")
        net.params[k] = arr
    return net


def save_payload(path: str | Path, kind: str, payload: dict) -> None:
    doc = {"schema_version": SCHEMA_VERSION, "model_kind": kind, **payload}
    Path(path).write_text(json.dumps(doc))


def load_payload(path: str | Path, kind: str) -> dict:
    doc = json.loads(Path(path).read_text())
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema version {doc.get('schema_version')}")
    if doc.get("model_kind") != kind:
        raise ValueError(f"expected {kind} model file, found {doc.get('model_kind')}")
    return doc
