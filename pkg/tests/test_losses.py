import numpy as np
import pytest
from hypothesis import given, strategies as st

from msmooth.losses import LossKind, LossSpec, cost_image, influence, loss

KINDS = list(LossKind)


def test_table_values():
    assert loss(LossSpec("tl1", 0.2), 0.5) == pytest.approx(0.2)
    sigma = 0.13
    assert loss(LossSpec("tukey", sigma), sigma) == pytest.approx(1 / 3)
    assert loss(LossSpec("tukey", sigma), np.nextafter(sigma, 0)) == pytest.approx(1 / 3)
    assert loss(LossSpec("gr", sigma), 0.0) == -1.0
    assert loss(LossSpec("ngauss", sigma), 0.0) == 0.0
    assert loss(LossSpec("ngauss", 0.1), 0.064) == pytest.approx(1 - np.exp(-1))
    assert loss(LossSpec("l1", 0.1), -0.7) == pytest.approx(0.7)


def test_influence_values():
    assert influence(LossSpec("l1"), 0.3) == 1.0
    assert influence(LossSpec("tl1", 0.2), 0.5) == 0.0


@pytest.mark.parametrize("kind", KINDS)
def test_influence_finite_difference(kind):
    spec = LossSpec(kind, 0.15)
    h = 1e-6
    fd = (loss(spec, 0.07 + h) - loss(spec, 0.07 - h)) / (2 * h)
    assert influence(spec, 0.07) == pytest.approx(fd, abs=1e-4)


@pytest.mark.parametrize("kind", KINDS)
@given(x=st.floats(-2, 2), sigma=st.floats(0.01, 1))
def test_even(kind, x, sigma):
    spec = LossSpec(kind, sigma)
    assert loss(spec, x) == loss(spec, -x)


@pytest.mark.parametrize("kind", KINDS)
@given(a=st.floats(0, 2), b=st.floats(0, 2), sigma=st.floats(0.01, 1))
def test_monotone_in_magnitude(kind, a, b, sigma):
    spec = LossSpec(kind, sigma)
    lo, hi = sorted((a, b))
    assert loss(spec, lo) <= loss(spec, hi) + 1e-15


@pytest.mark.parametrize("kind", KINDS)
@given(x=st.floats(-2, 2).filter(lambda v: abs(v) > 1e-6), sigma=st.floats(0.01, 1))
def test_strict_minimum_at_zero(kind, x, sigma):
    spec = LossSpec(kind, sigma)
    assert loss(spec, 0.0) < loss(spec, x) or loss(spec, x) == loss(spec, 2 * sigma + 10)


@pytest.mark.parametrize("kind", [k for k in KINDS if k.redescending])
def test_redescending(kind):
    sigma = 0.1
    spec = LossSpec(kind, sigma)
    grid = np.linspace(1e-9, 10 * sigma, 20001)
    assert abs(influence(spec, 10 * sigma)) < 1e-2 * np.abs(influence(spec, grid)).max()


def test_cost_image():
    src = np.array([[0.2, 0.8]])
    np.testing.assert_allclose(cost_image(src, 0.5, LossSpec("l1")), [[0.3, 0.3]])
    flat = np.full((3, 3), 0.4)
    for kind in KINDS:
        expected = -1.0 if kind is LossKind.GEMAN_REYNOLDS else 0.0
        np.testing.assert_array_equal(cost_image(flat, 0.4, LossSpec(kind, 0.1)), expected)
