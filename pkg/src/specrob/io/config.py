"""Experiment configuration: strict JSON schema validation and run manifests.

Unknown keys anywhere in a config are rejected so that typos fail fast.
Every CLI run writes a manifest (config hash, seed, toolkit version) next
to its outputs; identical manifests imply bitwise-identical CSV outputs.
"""

import hashlib
import json

import jsonschema

__all__ = ["load_config", "validate_config", "config_hash", "write_manifest"]

_AUG_STAGE = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kind"],
    "properties": {
        "kind": {
            "enum": [
                "flip_crop",
                "gaussian",
                "band_limited",
                "matched",
                "corruption_set",
                "adversarial",
            ]
        },
        "pad": {"type": "integer", "minimum": 0},
        "sigma": {"type": "number", "minimum": 0},
        "per_image": {"type": "boolean"},
        "mode": {"enum": ["low", "high"]},
        "bandwidth": {"type": "integer", "minimum": 1},
        "target_norm": {"type": "number", "exclusiveMinimum": 0},
        "template": {"type": "string"},
        "names": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "severities": {
            "type": "array",
            "items": {"type": "integer", "minimum": 1, "maximum": 5},
            "minItems": 1,
        },
        "epsilon": {"type": "number", "minimum": 0, "maximum": 1},
        "step_size": {"type": "number", "minimum": 0},
        "steps": {"type": "integer", "minimum": 0},
        "random_init": {"type": "boolean"},
    },
}

_SYNTH = {
    "type": "object",
    "additionalProperties": False,
    "required": ["n"],
    "properties": {
        "n": {"type": "integer", "minimum": 1},
        "classes": {"type": "integer", "minimum": 2},
        "size": {"type": "integer", "minimum": 4},
        "channels": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer"},
        "split": {"type": "string"},
    },
}

TRAIN_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["dataset", "train", "out"],
    "properties": {
        "dataset": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "train": {"type": "string"},
                "test": {"type": "string"},
                "synthetic": _SYNTH,
                "synthetic_test": _SYNTH,
                "limit": {"type": "integer", "minimum": 1},
            },
        },
        "model": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"arch": {"enum": ["smallconv", "mlp"]}},
        },
        "train": {
            "type": "object",
            "additionalProperties": False,
            "required": ["epochs", "batch_size"],
            "properties": {
                "epochs": {"type": "integer", "minimum": 1},
                "batch_size": {"type": "integer", "minimum": 1},
                "learning_rate": {"type": "number", "exclusiveMinimum": 0},
                "lr_decay": {"type": "number", "exclusiveMinimum": 0},
                "lr_decay_epochs": {
                    "type": "array",
                    "items": {"type": "integer", "minimum": 0},
                },
                "momentum": {"type": "number", "minimum": 0, "maximum": 1},
                "weight_decay": {"type": "number", "minimum": 0},
            },
        },
        "augmentation": {"type": "array", "items": _AUG_STAGE},
        "front_end": {
            "type": "object",
            "additionalProperties": False,
            "required": ["mode", "bandwidth"],
            "properties": {
                "mode": {"enum": ["low", "high"]},
                "bandwidth": {"type": "integer", "minimum": 1},
            },
        },
        "seed": {"type": "integer"},
        "out": {"type": "string"},
    },
}


def validate_config(config: dict, schema: dict = TRAIN_SCHEMA) -> dict:
    try:
        jsonschema.validate(config, schema)
    except jsonschema.ValidationError as exc:
        raise ValueError(f"invalid config: {exc.message}") from exc
    return config


def load_config(path, schema: dict = TRAIN_SCHEMA) -> dict:
    with open(path) as fh:
        try:
            config = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"config is not valid JSON: {exc}") from exc
    return validate_config(config, schema)


def config_hash(config: dict) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def write_manifest(path, command: str, config: dict, seed: int) -> None:
    from .. import __version__

    doc = {
        "toolkit_version": __version__,
        "command": command,
        "config_hash": config_hash(config),
        "config": config,
        "seed": seed,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
