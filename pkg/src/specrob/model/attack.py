"""Projected gradient descent attack under an l-infinity budget.

Iterated signed-gradient ascent on the cross-entropy loss, projected onto
the epsilon ball around the clean input and onto the valid pixel range
after every step.
"""

from dataclasses import dataclass

import numpy as np

from .._rng import rng_for

__all__ = ["PgdConfig", "pgd_attack"]


@dataclass(frozen=True)
class PgdConfig:
    epsilon: float = 8.0 / 255.0
    step_size: float = 2.0 / 255.0
    steps: int = 20
    random_init: bool = True
    seed: int = 0

    def __post_init__(self):
        if not (0.0 <= self.epsilon <= 1.0):
            raise ValueError("epsilon must lie in [0, 1]")
        if self.step_size < 0 or self.steps < 0:
            raise ValueError("step_size and steps must be nonnegative")


def pgd_attack(model, x, labels, cfg: PgdConfig, rng=None):
    """Attack a single (C, H, W) image or an (N, C, H, W) batch.

    Returns (x_adv, success): success means the model misclassifies x_adv.
    For a single image the results are unbatched. x_adv always satisfies
    ||x_adv - x||_inf <= epsilon and x_adv in [0, 1].
    """
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 3
    if single:
        x = x[None]
        labels = np.asarray([labels])
    labels = np.asarray(labels)
    if rng is None:
        rng = rng_for(cfg.seed, "pgd")

    lo = np.maximum(x - cfg.epsilon, 0.0)
    hi = np.minimum(x + cfg.epsilon, 1.0)
    if cfg.random_init:
        x_adv = np.clip(x + rng.uniform(-cfg.epsilon, cfg.epsilon, x.shape), lo, hi)
    else:
        x_adv = x.copy()
    for _ in range(cfg.steps):
        g = model.grad_input(x_adv, labels)
        x_adv = np.clip(x_adv + cfg.step_size * np.sign(g), lo, hi)
    success = model.predict(x_adv) != labels
    if single:
        return x_adv[0], bool(success[0])
    return x_adv, success
