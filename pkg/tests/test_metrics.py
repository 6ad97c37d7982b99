import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from msmooth.image_io import DimensionMismatch
from msmooth.metrics import NoiseSpec, add_gaussian_noise, bad_pixel_rate, psnr, standard_normal


def test_psnr_examples():
    a = np.full((8, 8), 100, np.uint8)
    assert psnr(a, a) == 99.0
    assert psnr(a, a + 1) == pytest.approx(20 * np.log10(255), abs=1e-9)
    assert psnr(a, a + 1) == pytest.approx(48.13, abs=5e-3)
    assert psnr(np.zeros((3, 3), np.uint8), np.full((3, 3), 255, np.uint8)) == pytest.approx(0.0)


pairs = st.integers(1, 8).flatmap(
    lambda n: st.tuples(arrays(np.uint8, (n, n)), arrays(np.uint8, (n, n)))
)


@given(pairs)
def test_psnr_symmetric(ab):
    a, b = ab
    assert psnr(a, b) == psnr(b, a)


def test_psnr_decreases_with_error():
    a = np.full((4, 4), 128, np.uint8)
    values = [psnr(a, a + d) for d in (1, 2, 5, 20)]
    assert values == sorted(values, reverse=True)


def test_bad_pixel_examples():
    gt = np.full((5, 5), 60, np.uint8)
    assert bad_pixel_rate(gt, gt) == 0.0
    assert bad_pixel_rate(gt + 2, gt) == 1.0
    assert bad_pixel_rate(gt + 1, gt) == 0.0
    assert bad_pixel_rate(gt - 2, gt) == 1.0


@pytest.mark.parametrize("fn", [psnr, bad_pixel_rate])
def test_dimension_mismatch(fn):
    with pytest.raises(DimensionMismatch):
        fn(np.zeros((3, 3), np.uint8), np.zeros((3, 4), np.uint8))


def test_noise_spec_rejects_negative():
    with pytest.raises(ValueError):
        NoiseSpec(-0.1)


def test_zero_noise_is_identity(rng):
    src = rng.random((9, 9))
    np.testing.assert_array_equal(add_gaussian_noise(src, NoiseSpec(0.0, 3)), src)


def test_noise_is_deterministic():
    src = np.full((40, 30), 0.5)
    a = add_gaussian_noise(src, NoiseSpec(0.1, 7))
    np.testing.assert_array_equal(a, add_gaussian_noise(src, NoiseSpec(0.1, 7)))
    assert not np.array_equal(a, add_gaussian_noise(src, NoiseSpec(0.1, 8)))


def test_noise_statistics():
    out = add_gaussian_noise(np.full((256, 256), 0.5), NoiseSpec(0.1, 11))
    assert 0.095 <= out.std() <= 0.105
    assert abs(out.mean() - 0.5) < 0.002
    assert out.min() >= 0 and out.max() <= 1


def test_normals_are_prefix_stable():
    # Element i only depends on its counter position.
    long = standard_normal(5, (100,))
    np.testing.assert_array_equal(standard_normal(5, (10, 4)).ravel(), long[:40])


def test_normals_pinned_values():
    words = np.random.Philox(key=0).random_raw(2)
    u = ((words >> np.uint64(11)).astype(np.float64) + 1) * 2.0**-53
    z = np.sqrt(-2 * np.log(u[0])) * np.cos(2 * np.pi * u[1])
    assert standard_normal(0, (1,))[0] == z
