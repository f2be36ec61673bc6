import numpy as np
import pytest

from specrob._rng import rng_for
from specrob.corruptions import (
    SEVERITIES,
    CorruptionSpec,
    apply_corruption,
    apply_corruption_batch,
    brightness,
    contrast,
    corruption_suite,
    defocus_blur,
    gaussian_blur,
    gaussian_noise,
    impulse_noise,
    jpeg_like,
    motion_blur,
    pixelate,
    shot_noise,
    speckle_noise,
)


@pytest.fixture(scope="module")
def images():
    rng = rng_for(77, "corruption-tests")
    # Smooth-ish fields so blurs have realistic deltas.
    base = rng.random((12, 3, 32, 32))
    from scipy.ndimage import gaussian_filter

    smoothed = np.stack(
        [np.stack([gaussian_filter(ch, 1.5) for ch in img]) for img in base]
    )
    return np.clip(0.5 + 2.0 * (smoothed - 0.5), 0.05, 0.95)


class TestSuite:
    def test_twelve_names(self):
        suite = corruption_suite()
        assert len(suite) == 12
        assert len({name for name, _ in suite}) == 12

    def test_family_tags(self):
        families = dict(corruption_suite())
        assert families["fog"] == "weather"
        assert families["pixelate"] == "digital"
        assert families["gaussian_noise"] == "noise"
        assert families["motion_blur"] == "blur"
        assert set(families.values()) == {"noise", "blur", "weather", "digital"}

    def test_unknown_name_rejected(self):
        with pytest.raises(ValueError):
            CorruptionSpec("glass_blur", 1)
        with pytest.raises(ValueError):
            CorruptionSpec("gaussian_noise", 6)


class TestNeutralParameters:
    """Forcing each scale parameter to its neutral value returns the input."""

    def test_gaussian_noise_sigma_zero(self, images):
        x = images[0]
        assert np.array_equal(gaussian_noise(x, 0.0, rng_for(0, "t")), x)

    def test_contrast_factor_one(self, images):
        x = images[0]
        np.testing.assert_allclose(contrast(x, 1.0), x, atol=1e-12)

    def test_brightness_delta_zero(self, images):
        np.testing.assert_allclose(brightness(images[0], 0.0), images[0])

    def test_blur_neutral_kernels(self, images):
        x = images[0]
        np.testing.assert_allclose(gaussian_blur(x, 0.0), x)
        np.testing.assert_allclose(defocus_blur(x, 0.0), x)
        np.testing.assert_allclose(motion_blur(x, 1), x)

    def test_speckle_sigma_zero(self, images):
        np.testing.assert_allclose(speckle_noise(images[0], 0.0, rng_for(0, "t")), images[0])

    def test_impulse_fraction_zero(self, images):
        assert np.array_equal(impulse_noise(images[0], 0.0, rng_for(0, "t")), images[0])

    def test_pixelate_fraction_one(self, images):
        np.testing.assert_allclose(pixelate(images[0], 1.0), images[0])

    def test_shot_infinite_photons(self, images):
        np.testing.assert_allclose(shot_noise(images[0], np.inf, rng_for(0, "t")), images[0])

    def test_jpeg_neutral(self, images):
        np.testing.assert_allclose(jpeg_like(images[0], 0.0), images[0])


class TestContracts:
    def test_contrast_constant_image_fixed_point(self):
        x = np.full((3, 8, 8), 0.42)
        for s in SEVERITIES:
            out = apply_corruption(x, CorruptionSpec("contrast", s))
            np.testing.assert_allclose(out, x, atol=1e-12)

    def test_gaussian_noise_severity1_std(self):
        # Severity-1 sigma is 0.04; Monte Carlo per-pixel std on a mid-gray
        # image (no clipping interference at 0.5).
        x = np.full((3, 32, 32), 0.5)
        devs = []
        for k in range(80):
            out = apply_corruption(x, CorruptionSpec("gaussian_noise", 1, seed=k))
            devs.append(out - x)
        assert np.std(np.stack(devs)) == pytest.approx(0.04, rel=0.05)

    def test_shape_and_range_all(self, images):
        x = images[0]
        for name, _ in corruption_suite():
            for s in (1, 5):
                out = apply_corruption(x, CorruptionSpec(name, s, seed=3))
                assert out.shape == x.shape
                assert out.min() >= 0.0 and out.max() <= 1.0

    def test_seed_reproducibility(self, images):
        x = images[0]
        for name in ("gaussian_noise", "shot_noise", "impulse_noise", "fog"):
            spec = CorruptionSpec(name, 3, seed=11)
            np.testing.assert_array_equal(
                apply_corruption(x, spec), apply_corruption(x, spec)
            )

    def test_batch_streams_differ_per_image(self, images):
        spec = CorruptionSpec("gaussian_noise", 3, seed=5)
        out = apply_corruption_batch(images[:2], spec)
        d0, d1 = out[0] - images[0], out[1] - images[1]
        assert not np.allclose(d0, d1)

    def test_batch_deterministic(self, images):
        spec = CorruptionSpec("fog", 2, seed=9)
        np.testing.assert_array_equal(
            apply_corruption_batch(images[:3], spec),
            apply_corruption_batch(images[:3], spec),
        )

    def test_severity_monotonic_noise_blur(self, images):
        # E||C_s(X) - X|| nondecreasing in s for the noise and blur families.
        for name, family in corruption_suite():
            if family not in ("noise", "blur"):
                continue
            means = []
            for s in SEVERITIES:
                spec = CorruptionSpec(name, s, seed=21)
                deltas = apply_corruption_batch(images, spec) - images
                means.append(float(np.mean(np.linalg.norm(
                    deltas.reshape(len(images), -1), axis=1))))
            for lo, hi in zip(means, means[1:]):
                assert hi >= lo - 1e-9, (name, means)
