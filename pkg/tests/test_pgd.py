import numpy as np
import pytest

from specrob._rng import rng_for
from specrob.io.datasets import Dataset
from specrob.model import (
    BuiltinModel,
    PgdConfig,
    TrainConfig,
    adversarial_train,
    build_network,
    pgd_attack,
    train,
)
from specrob.model.layers import Dense, Flatten
from specrob.model.network import Network


def tiny_model(seed=0):
    return BuiltinModel(build_network("mlp", (1, 4, 4), 3, seed))


class TestPgdContracts:
    def test_eps_zero_identity(self, rng):
        model = tiny_model()
        x = rng.random((4, 1, 4, 4))
        y = rng.integers(0, 3, size=4)
        cfg = PgdConfig(epsilon=0.0, step_size=0.01, steps=5, seed=1)
        x_adv, _ = pgd_attack(model, x, y, cfg)
        np.testing.assert_array_equal(x_adv, x)

    def test_single_image_signature(self, rng):
        model = tiny_model()
        x = rng.random((1, 4, 4))
        x_adv, success = pgd_attack(model, x, 1, PgdConfig(steps=3, seed=2))
        assert x_adv.shape == x.shape
        assert isinstance(success, bool)

    def test_fuzzed_constraints(self):
        # Feasibility: x_adv always lies in [max(x-eps,0), min(x+eps,1)],
        # which embeds both the l_inf ball and the pixel range.
        model = tiny_model(seed=4)
        rng = rng_for(0, "fuzz")
        for trial in range(300):
            eps = float(rng.uniform(0, 0.3))
            cfg = PgdConfig(
                epsilon=eps,
                step_size=float(rng.uniform(0, 0.2)),
                steps=int(rng.integers(0, 5)),
                random_init=bool(rng.integers(2)),
                seed=trial,
            )
            x = rng.random((2, 1, 4, 4))
            y = rng.integers(0, 3, size=2)
            x_adv, _ = pgd_attack(model, x, y, cfg)
            lo = np.maximum(x - eps, 0.0)
            hi = np.minimum(x + eps, 1.0)
            assert np.all(x_adv >= lo) and np.all(x_adv <= hi)
            assert np.all(x_adv >= 0.0) and np.all(x_adv <= 1.0)

    def test_invalid_config(self):
        with pytest.raises(ValueError):
            PgdConfig(epsilon=1.5)
        with pytest.raises(ValueError):
            PgdConfig(step_size=-0.1)


class TestPgdOptimality:
    def test_linear_model_reaches_ball_boundary(self):
        # For a linear two-class model the loss gradient direction is
        # constant, so PGD with enough steps drives every coordinate with a
        # nonzero weight to the epsilon boundary on its optimal side.
        net = Network(
            [("logits", [Flatten(), Dense(4, 2, rng_for(0, "w"))])],
            (1, 2, 2),
            2,
        )
        layer = net.stages[0][1][1]
        layer.params["w"][...] = np.array(
            [[1.0, -2.0, 0.5, -0.25], [-1.0, 2.0, -0.5, 0.25]]
        )
        layer.params["b"][...] = 0.0
        model = BuiltinModel(net)
        x = np.full((1, 1, 2, 2), 0.5)
        y = np.array([0])  # attack pushes toward class 1
        eps = 0.1
        cfg = PgdConfig(
            epsilon=eps, step_size=0.03, steps=10, random_init=False, seed=0
        )
        x_adv, _ = pgd_attack(model, x, y, cfg)
        delta = (x_adv - x).ravel()
        # dLoss/dx has the sign of (w1 - w0) rows; ascent saturates each
        # coordinate at eps * sign.
        expected = eps * np.sign(np.array([-2.0, 4.0, -1.0, 0.5]))
        np.testing.assert_allclose(delta, expected, atol=1e-12)

    def test_attack_flips_margin_classifier(self):
        # Thin-margin logistic model: PGD must achieve misclassification.
        net = Network(
            [("logits", [Flatten(), Dense(4, 2, rng_for(1, "w"))])], (1, 2, 2), 2
        )
        layer = net.stages[0][1][1]
        layer.params["w"][...] = np.array([[1.0, 1.0, 1.0, 1.0],
                                           [-1.0, -1.0, -1.0, -1.0]])
        layer.params["b"][...] = np.array([0.0, 1.9])
        model = BuiltinModel(net)
        x = np.full((1, 1, 2, 2), 0.5)  # logit0 = 2.0 vs logit1 = -0.1 + 1.9
        assert model.predict(x)[0] == 0
        cfg = PgdConfig(epsilon=0.1, step_size=0.05, steps=5, random_init=False)
        x_adv, success = pgd_attack(model, x, np.array([0]), cfg)
        assert bool(success[0] if np.ndim(success) else success)


class TestAdversarialTrain:
    @pytest.fixture(scope="class")
    def toy_dataset(self):
        rng = rng_for(3, "advset")
        n = 160
        labels = np.arange(n) % 2
        images = np.full((n, 1, 4, 4), 0.35)
        images[labels == 1] += 0.25
        images += 0.03 * rng.standard_normal(images.shape)
        return Dataset(np.clip(images, 0, 1), labels)

    def test_eps_zero_reduces_to_plain_train(self, toy_dataset):
        cfg = TrainConfig(epochs=2, batch_size=32, seed=5)
        pgd = PgdConfig(epsilon=0.0, step_size=0.01, steps=2, seed=5)
        plain = train(toy_dataset, cfg, arch="mlp")
        adv = adversarial_train(toy_dataset, cfg, pgd, arch="mlp")
        for (_, _, p1), (_, _, p2) in zip(
            plain.network.parameters(), adv.network.parameters()
        ):
            np.testing.assert_array_equal(p1, p2)

    def test_adversarial_training_improves_adversarial_accuracy(self, toy_dataset):
        cfg = TrainConfig(epochs=12, batch_size=32, learning_rate=0.02, seed=5)
        pgd = PgdConfig(epsilon=0.08, step_size=0.02, steps=5, seed=5)
        plain = train(toy_dataset, cfg, arch="mlp")
        robust = adversarial_train(toy_dataset, cfg, pgd, arch="mlp")
        x, y = toy_dataset.images, toy_dataset.labels
        eval_pgd = PgdConfig(epsilon=0.08, step_size=0.02, steps=8, seed=11)
        _, s_plain = pgd_attack(plain, x, y, eval_pgd)
        _, s_robust = pgd_attack(robust, x, y, eval_pgd)
        adv_acc_plain = 1.0 - s_plain.mean()
        adv_acc_robust = 1.0 - s_robust.mean()
        assert adv_acc_robust > adv_acc_plain
        # Clean accuracy is recorded in the log either way (trade-off is
        # observed, not asserted).
        assert "train_accuracy" in robust.train_log[-1]
