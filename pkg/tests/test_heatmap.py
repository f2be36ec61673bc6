import numpy as np
import pytest

from specrob.basis import FrequencyIndex, PerturbationParams
from specrob.fft import dft2
from specrob.heatmap import bandlimited_error_curve, error_heatmap, layer_heatmap
from specrob.model import BuiltinModel, build_network
from specrob.model.layers import Dense, Flatten
from specrob.model.network import ModelHandle, Network
from specrob._rng import rng_for


class ConstantModel(ModelHandle):
    """Always predicts a fixed class."""

    capabilities = frozenset({"logits"})

    def __init__(self, k=4, winner=0, input_shape=(1, 4, 4)):
        self.class_count = k
        self.input_shape = input_shape
        self.layer_names = ["logits"]
        self.model_id = "stub-constant"
        self.winner = winner

    def forward(self, batch):
        logits = np.zeros((batch.shape[0], self.class_count))
        logits[:, self.winner] = 1.0
        return logits


class SpectralThresholdModel(ModelHandle):
    """Predicts class 1 iff |F(X)[p, q]| averaged over channels > tau."""

    capabilities = frozenset({"logits"})

    def __init__(self, p, q, tau, input_shape=(1, 8, 8)):
        self.class_count = 2
        self.input_shape = input_shape
        self.layer_names = ["logits"]
        self.model_id = "stub-spectral"
        self.p, self.q, self.tau = p, q, tau

    def forward(self, batch):
        mags = np.abs(np.fft.fft2(batch, axes=(-2, -1))[:, :, self.p, self.q])
        score = mags.mean(axis=1) - self.tau
        return np.stack([-score, score], axis=1)


class TestErrorHeatmap:
    def test_v_zero_gives_clean_error_everywhere(self, rng):
        model = ConstantModel(k=4, winner=0)
        images = rng.random((8, 1, 4, 4))
        labels = np.array([0, 0, 1, 2, 3, 0, 1, 0])
        clean = (model.predict(images) != labels).mean()
        hm = error_heatmap(model, images, labels, PerturbationParams(v=0.0))
        np.testing.assert_allclose(hm.grid, clean)
        assert hm.kind == "error_rate"
        assert hm.sample_count == 8

    def test_constant_model_flat(self, rng):
        model = ConstantModel(k=3, winner=2)
        images = rng.random((6, 1, 4, 4))
        labels = np.array([2, 2, 0, 1, 2, 0])
        hm = error_heatmap(model, images, labels, PerturbationParams(v=2.0, seed=1))
        np.testing.assert_allclose(hm.grid, 0.5)

    def test_spectral_threshold_classifier_hotspot(self):
        # Inputs straddle tau at exactly one frequency; perturbing that
        # frequency (or its partner) flips decisions, others are untouched.
        p, q = 1, 3
        h = w = 8
        rng = rng_for(5, "hotspot")
        base = rng.random((20, 1, h, w)) * 0.1 + 0.45
        mags = np.abs(np.fft.fft2(base, axes=(-2, -1))[:, :, p, q]).mean(axis=1)
        tau = float(np.median(mags))
        model = SpectralThresholdModel(p, q, tau)
        labels = (mags > tau).astype(int)  # clean error 0 (up to ties)
        v = 4.0  # probe shifts the bin magnitude by ~v*sqrt(HW/2) >> spread
        hm = error_heatmap(model, base, labels, PerturbationParams(v=v, seed=2))
        grid = hm.grid
        hot = {(p, q), ((-p) % h, (-q) % w)}
        for i in range(h):
            for j in range(w):
                r, c = FrequencyIndex(i, j).to_shifted(h, w)
                if (i, j) in hot:
                    assert grid[r, c] > 0.25, (i, j, grid[r, c])
                else:
                    assert grid[r, c] <= 0.10, (i, j, grid[r, c])

    def test_mirror_consistency_full_vs_half(self, rng):
        model = SpectralThresholdModel(2, 1, 5.0)
        images = rng.random((6, 1, 8, 8))
        labels = rng.integers(0, 2, size=6)
        params = PerturbationParams(v=1.5, seed=3)
        half = error_heatmap(model, images, labels, params)
        full = error_heatmap(model, images, labels, params, full_grid=True)
        np.testing.assert_array_equal(half.grid, full.grid)

    def test_determinism(self, rng):
        model = SpectralThresholdModel(1, 1, 4.0)
        images = rng.random((5, 1, 8, 8))
        labels = rng.integers(0, 2, size=5)
        params = PerturbationParams(v=1.0, seed=9)
        a = error_heatmap(model, images, labels, params)
        b = error_heatmap(model, images, labels, params)
        np.testing.assert_array_equal(a.grid, b.grid)

    def test_window_mode(self, rng):
        model = ConstantModel(k=2, winner=0, input_shape=(1, 8, 8))
        images = rng.random((4, 1, 8, 8))
        labels = np.array([0, 1, 0, 1])
        hm = error_heatmap(
            model, images, labels, PerturbationParams(v=1.0, seed=0), window=3
        )
        assert hm.grid.shape == (3, 3)
        assert hm.window == 3
        np.testing.assert_allclose(hm.grid, 0.5)

    def test_empty_image_set_rejected(self):
        model = ConstantModel()
        with pytest.raises(ValueError):
            error_heatmap(
                model, np.empty((0, 1, 4, 4)), np.empty(0), PerturbationParams(v=1.0)
            )


class TestLayerHeatmap:
    def test_input_tap_cell_value_is_sqrt_c_times_v(self, rng):
        model = BuiltinModel(build_network("smallconv", (3, 8, 8), 4, 0))
        images = rng.random((5, 3, 8, 8))
        v = 2.5
        hm = layer_heatmap(model, images, "input", PerturbationParams(v=v, seed=1))
        np.testing.assert_allclose(hm.grid, np.sqrt(3) * v, atol=1e-9)
        assert hm.kind == "layer_delta"
        assert hm.layer == "input"

    def test_v_zero_gives_zero_grid(self, rng):
        model = BuiltinModel(build_network("smallconv", (3, 8, 8), 4, 0))
        images = rng.random((3, 3, 8, 8))
        hm = layer_heatmap(model, images, "conv1", PerturbationParams(v=0.0))
        np.testing.assert_allclose(hm.grid, 0.0, atol=1e-12)

    def test_orthogonal_linear_layer_constant_grid(self, rng):
        # For an orthogonal dense map, ||W d|| = ||d|| = sqrt(C) v everywhere.
        n_in = 2 * 4 * 4
        q, _ = np.linalg.qr(rng.standard_normal((n_in, n_in)))
        net = Network(
            [("logits", [Flatten(), Dense(n_in, n_in, rng_for(0, "d"))])],
            (2, 4, 4),
            n_in,
        )
        net.stages[0][1][1].params["w"][...] = q
        net.stages[0][1][1].params["b"][...] = 0.0
        model = BuiltinModel(net)
        images = rng.random((4, 2, 4, 4))
        v = 1.25
        hm = layer_heatmap(model, images, "logits", PerturbationParams(v=v, seed=2))
        np.testing.assert_allclose(hm.grid, np.sqrt(2) * v, atol=1e-9)

    def test_unknown_layer_rejected(self, rng):
        model = BuiltinModel(build_network("mlp", (1, 4, 4), 2, 0))
        with pytest.raises(ValueError, match="unknown layer"):
            layer_heatmap(
                model, rng.random((2, 1, 4, 4)), "conv9", PerturbationParams(v=1.0)
            )

    def test_taps_capability_required(self, rng):
        model = ConstantModel()
        with pytest.raises(ValueError, match="layer taps"):
            layer_heatmap(
                model, rng.random((2, 1, 4, 4)), "logits", PerturbationParams(v=1.0)
            )


class TestBandCurve:
    def test_norm_zero_gives_clean_error(self, rng):
        model = ConstantModel(k=2, winner=0, input_shape=(1, 8, 8))
        images = rng.random((6, 1, 8, 8))
        labels = np.array([0, 1, 1, 0, 1, 0])
        rows = bandlimited_error_curve(
            model, images, labels, "low", [0.0], [1, 3], seed=1
        )
        clean = (model.predict(images) != labels).mean()
        for row in rows:
            assert row["error_rate"] == clean

    def test_full_bandwidth_modes_same_distribution(self, rng):
        # With B = full width both filters are the identity, so the noise
        # distributions coincide; with matched seeds the draws are equal.
        model = SpectralThresholdModel(1, 2, 5.0)
        images = rng.random((10, 1, 8, 8))
        labels = rng.integers(0, 2, size=10)
        low = bandlimited_error_curve(
            model, images, labels, "low", [8.0], [8], seed=3
        )
        high = bandlimited_error_curve(
            model, images, labels, "high", [8.0], [8], seed=3
        )
        assert abs(low[0]["error_rate"] - high[0]["error_rate"]) <= 0.2

    def test_rows_structure(self, rng):
        model = ConstantModel(k=2, winner=0, input_shape=(1, 8, 8))
        images = rng.random((4, 1, 8, 8))
        labels = np.array([0, 0, 1, 1])
        rows = bandlimited_error_curve(
            model, images, labels, "high", [0.0, 4.0], [1, 3, 5], seed=2
        )
        assert len(rows) == 6
        assert {(r["bandwidth"], r["norm"]) for r in rows} == {
            (1, 0.0), (1, 4.0), (3, 0.0), (3, 4.0), (5, 0.0), (5, 4.0)
        }
