import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from specrob.io.datasets import Dataset
from specrob.metrics import (
    MetricsReport,
    accuracy_table,
    evaluate_error_grid,
    mce,
    scatter_fit,
    scatter_points,
)

from oracles import ols_fit
from test_heatmap import ConstantModel

# Severity-averaged accuracies per corruption: (natural baseline, model).
# Columns follow the benchmark's published per-training-regime numbers.
TABLE_ACCURACIES = {
    "brightness": (0.9493, 0.9244, 0.8705, 0.8996, 0.9275, 0.9635),
    "contrast": (0.8225, 0.5703, 0.7700, 0.6917, 0.7806, 0.9526),
    "defocus_blur": (0.8456, 0.8371, 0.8355, 0.9063, 0.7489, 0.9229),
    "elastic_transform": (0.8600, 0.8429, 0.8175, 0.8838, 0.7870, 0.8726),
    "fog": (0.8997, 0.7194, 0.7263, 0.8191, 0.8811, 0.9463),
    "gaussian_blur": (0.7273, 0.7907, 0.8213, 0.8929, 0.6453, 0.8840),
    "glass_blur": (0.5677, 0.8046, 0.8017, 0.8770, 0.4735, 0.7621),
    "impulse_noise": (0.5428, 0.8308, 0.6881, 0.5999, 0.3619, 0.8560),
    "jpeg_compression": (0.8009, 0.9078, 0.8541, 0.8405, 0.6395, 0.8142),
    "motion_blur": (0.8079, 0.7715, 0.8045, 0.8605, 0.7206, 0.8491),
    "pixelate": (0.7317, 0.8983, 0.8531, 0.9156, 0.6234, 0.7066),
    "shot_noise": (0.6773, 0.9233, 0.8275, 0.7447, 0.5374, 0.7834),
    "snow": (0.8505, 0.8835, 0.8258, 0.8688, 0.7929, 0.8939),
    "speckle_noise": (0.7041, 0.9171, 0.8183, 0.7502, 0.5603, 0.8125),
    "zoom_blur": (0.8046, 0.8163, 0.8279, 0.8987, 0.6514, 0.8994),
}
COLUMN_MCE = {
    1: 0.9831,  # gaussian augmentation
    2: 1.0825,  # adversarial training
    3: 0.8924,  # low-pass front end
    4: 1.4449,  # high-pass front end
    5: 0.6376,  # learned-policy augmentation
}


def column_error_grid(col):
    """Expand severity-averaged accuracies into a (K, 5) error grid."""
    accs = np.array([row[col] for row in TABLE_ACCURACIES.values()])
    return np.repeat((1.0 - accs)[:, None], 5, axis=1)


class TestMce:
    def test_baseline_against_itself_is_exactly_one(self, rng):
        grid = rng.uniform(0.05, 0.9, size=(15, 5))
        assert mce(grid, grid) == 1.0

    @pytest.mark.parametrize("col,expected", sorted(COLUMN_MCE.items()))
    def test_published_table_fixtures(self, col, expected):
        got = mce(column_error_grid(col), column_error_grid(0))
        assert got == pytest.approx(expected, abs=0.005)

    def test_zero_baseline_rejected(self):
        f = np.full((3, 5), 0.2)
        f0 = np.full((3, 5), 0.2)
        f0[1] = 0.0
        with pytest.raises(ValueError, match="undefined ratio"):
            mce(f, f0)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            mce(np.zeros((3, 5)), np.zeros((4, 5)))

    @given(st.randoms(use_true_random=False))
    @settings(max_examples=20, deadline=None)
    def test_invariant_under_corruption_and_severity_permutations(self, pyrng):
        rng = np.random.default_rng(pyrng.randrange(2**32))
        f = rng.uniform(0.05, 0.9, size=(6, 5))
        f0 = rng.uniform(0.05, 0.9, size=(6, 5))
        base = mce(f, f0)
        perm = rng.permutation(6)
        assert mce(f[perm], f0[perm]) == pytest.approx(base, rel=1e-12)
        sperm = rng.permutation(5)
        assert mce(f[:, sperm], f0[:, sperm]) == pytest.approx(base, rel=1e-12)


class TestAccuracyTable:
    def test_constant_model_on_balanced_data(self, rng):
        images = rng.random((40, 3, 32, 32)) * 0.8 + 0.1
        labels = np.arange(40) % 10
        ds = Dataset(images, labels)
        model = ConstantModel(k=10, winner=0, input_shape=(3, 32, 32))
        report = accuracy_table(model, ds, ["gaussian_noise", "contrast"], seed=1)
        # Constant predictor is right exactly on the class-0 tenth.
        for row in report.rows:
            assert row.error == pytest.approx(0.9)
        assert report.average_accuracy == pytest.approx(0.1)
        assert report.clean_error == pytest.approx(0.9)

    def test_perfect_stub(self, rng):
        images = rng.random((12, 3, 32, 32)) * 0.5 + 0.25
        labels = np.zeros(12, dtype=int)
        ds = Dataset(images, labels)
        model = ConstantModel(k=10, winner=0, input_shape=(3, 32, 32))
        report = accuracy_table(model, ds, ["contrast"], seed=0)
        assert report.average_accuracy == 1.0
        assert all(r.error == 0.0 for r in report.rows)

    def test_error_grid_layout(self, rng):
        images = rng.random((10, 3, 32, 32))
        labels = np.arange(10) % 2
        ds = Dataset(images, labels)
        model = ConstantModel(k=2, winner=1, input_shape=(3, 32, 32))
        report = accuracy_table(model, ds, ["contrast", "brightness"], seed=0)
        assert report.error_grid.shape == (2, 5)

    def test_empty_dataset_rejected(self):
        model = ConstantModel(k=2, winner=0, input_shape=(3, 32, 32))
        with pytest.raises(ValueError):
            evaluate_error_grid(
                model, np.empty((0, 3, 32, 32)), np.empty(0), ["contrast"]
            )


class TestScatterFit:
    def test_collinear_points(self):
        points = [(x, 2 * x + 1) for x in (0.0, 0.3, 0.7, 1.0)]
        k, r = scatter_fit(points)
        assert k == pytest.approx(2.0, abs=1e-12)
        assert r == pytest.approx(0.0, abs=1e-12)

    def test_symmetric_cross_has_zero_slope(self):
        k, r = scatter_fit([(0, 1), (0, -1), (1, 1), (1, -1)])
        assert k == pytest.approx(0.0, abs=1e-12)
        assert r == pytest.approx(1.0, abs=1e-12)

    def test_matches_normal_equations_oracle(self, rng):
        points = rng.standard_normal((20, 2))
        k, r = scatter_fit(points)
        k_ref, r_ref = ols_fit(points)
        assert k == pytest.approx(k_ref, abs=1e-9)
        assert r == pytest.approx(r_ref, abs=1e-9)

    def test_degenerate_x_rejected(self):
        with pytest.raises(ValueError, match="degenerate"):
            scatter_fit([(1.0, 0.0), (1.0, 2.0)])
        with pytest.raises(ValueError):
            scatter_fit([(1.0, 0.0)])


class TestScatterPoints:
    def test_deltas_in_percentage_points(self):
        rows_f = [("contrast", s, 0.4) for s in range(1, 6)]
        rows_f0 = [("contrast", s, 0.5) for s in range(1, 6)]
        from specrob.metrics import CorruptionRow

        rep = MetricsReport(
            rows=[CorruptionRow(*r) for r in rows_f], corruptions=["contrast"]
        )
        base = MetricsReport(
            rows=[CorruptionRow(*r) for r in rows_f0], corruptions=["contrast"]
        )
        points = scatter_points(rep, base, {"contrast": 0.1})
        assert points == [(0.1, pytest.approx(10.0))]

    def test_missing_energy_rejected(self):
        from specrob.metrics import CorruptionRow

        rep = MetricsReport(
            rows=[CorruptionRow("fog", s, 0.2) for s in range(1, 6)],
            corruptions=["fog"],
        )
        with pytest.raises(ValueError, match="missing energy"):
            scatter_points(rep, rep, {})
