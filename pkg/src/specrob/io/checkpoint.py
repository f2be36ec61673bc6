"""Model checkpoints: a single JSON file with base64 float64 weights.

Weights are stored little-endian so checkpoints are portable; loading
rebuilds the architecture and overwrites its parameters in place.
"""

import base64
import json

import numpy as np

from ..filters import FilterSpec
from ..model.network import BuiltinModel, build_network

__all__ = ["save_checkpoint", "load_checkpoint"]

_FORMAT = "specrob-checkpoint-v1"


def _param_items(network):
    for si, (name, layers) in enumerate(network.stages):
        for li, layer in enumerate(layers):
            for pname, arr in layer.params.items():
                yield f"{name}.{li}.{pname}", arr


def save_checkpoint(path, model: BuiltinModel, arch: str, seed: int) -> None:
    params = {}
    for key, arr in _param_items(model.network):
        params[key] = {
            "shape": list(arr.shape),
            "data": base64.b64encode(arr.astype("<f8").tobytes()).decode("ascii"),
        }
    doc = {
        "format": _FORMAT,
        "arch": arch,
        "seed": seed,
        "input_shape": list(model.input_shape),
        "class_count": model.class_count,
        "front_end": (
            {"mode": model.front_end.mode, "bandwidth": model.front_end.bandwidth}
            if model.front_end
            else None
        ),
        "model_id": model.model_id,
        "train_log": model.train_log,
        "params": params,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True)
        fh.write("\n")


def load_checkpoint(path) -> tuple[BuiltinModel, str]:
    """Returns (model, arch name)."""
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format") != _FORMAT:
        raise ValueError(f"not a specrob checkpoint: {path}")
    arch = doc["arch"]
    network = build_network(
        arch, tuple(doc["input_shape"]), doc["class_count"], doc.get("seed", 0)
    )
    stored = doc["params"]
    for key, arr in _param_items(network):
        entry = stored.get(key)
        if entry is None:
            raise ValueError(f"checkpoint missing parameter {key}")
        data = np.frombuffer(
            base64.b64decode(entry["data"]), dtype="<f8"
        ).reshape(entry["shape"])
        if data.shape != arr.shape:
            raise ValueError(f"parameter {key} has shape {data.shape}, want {arr.shape}")
        arr[...] = data
    front_end = None
    if doc.get("front_end"):
        front_end = FilterSpec(doc["front_end"]["mode"], doc["front_end"]["bandwidth"])
    model = BuiltinModel(
        network,
        front_end=front_end,
        model_id=doc.get("model_id", "builtin"),
        train_log=doc.get("train_log", []),
    )
    return model, arch
