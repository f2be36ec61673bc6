"""Classifier stack: built-in differentiable network, training, PGD, and
the external-process adapter."""

from .attack import PgdConfig, pgd_attack
from .external import ExternalModel, ExternalModelError, external_model
from .frontend import front_end_transform, front_end_vjp
from .network import (
    ARCHITECTURES,
    BuiltinModel,
    ModelHandle,
    Network,
    build_network,
)
from .training import (
    AdversarialStage,
    BandNoiseStage,
    CorruptionSetStage,
    FlipCrop,
    GaussianStage,
    MatchedNoiseStage,
    TrainConfig,
    TrainingDivergedError,
    adversarial_train,
    train,
)

__all__ = [
    "ARCHITECTURES",
    "AdversarialStage",
    "BandNoiseStage",
    "BuiltinModel",
    "CorruptionSetStage",
    "ExternalModel",
    "ExternalModelError",
    "FlipCrop",
    "GaussianStage",
    "MatchedNoiseStage",
    "ModelHandle",
    "Network",
    "PgdConfig",
    "TrainConfig",
    "TrainingDivergedError",
    "adversarial_train",
    "build_network",
    "external_model",
    "front_end_transform",
    "front_end_vjp",
    "pgd_attack",
    "train",
]
