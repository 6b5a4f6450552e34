import numpy as np
import pytest

from vp1d.interpolation import lagrange3_sample, lagrange3_weights, shift_lines


def test_weights_partition_unity_and_nodes():
    theta = np.linspace(0, 1, 11)
    w = lagrange3_weights(theta)
    assert np.allclose(sum(w), 1.0)
    assert np.allclose([c[0] for c in w], [0, 1, 0, 0])


@pytest.mark.parametrize("method", ["lagrange3", "spline"])
def test_integer_shift_is_exact(method):
    rng = np.random.default_rng(1)
    a = rng.normal(size=(3, 40))
    b = shift_lines(a, np.array([2.0, -3.0, 0.0]), axis=1, lo=0.0, hi=0.0, method=method)
    assert np.allclose(b[0, 2:], a[0, :-2])
    assert np.allclose(b[1, :-3], a[1, 3:])
    assert np.allclose(b[2], a[2])
    assert np.allclose(b[0, :2], 0.0) and np.allclose(b[1, -3:], 0.0)


def test_cubic_reproduced_by_lagrange3():
    x = np.arange(30, dtype=float)
    p = lambda s: 0.1 * s**3 - s**2 + 2 * s - 5
    a = p(x)[None, :]
    d = 0.37
    b = shift_lines(a, d, axis=1, lo=p(-1.0), hi=p(30.0))
    interior = slice(3, 27)
    assert np.allclose(b[0, interior], p(x[interior] - d))


def test_axis_zero_matches_transposed_axis_one():
    rng = np.random.default_rng(2)
    a = rng.normal(size=(25, 6))
    d = rng.uniform(-2, 2, 6)
    lo, hi = rng.normal(size=6), rng.normal(size=6)
    b0 = shift_lines(a, d, axis=0, lo=lo, hi=hi)
    b1 = shift_lines(a.T, d, axis=1, lo=lo, hi=hi).T
    assert np.array_equal(b0, b1)


def test_boundary_values_fill_inflow():
    a = np.ones((2, 10))
    b = shift_lines(a, np.array([4.5, -4.5]), axis=1, lo=np.array([3.0, 0.0]), hi=np.array([0.0, 7.0]))
    assert np.allclose(b[0, :3], 3.0)
    assert np.allclose(b[1, -3:], 7.0)


def test_spline_smooth_shift_accurate():
    x = np.linspace(0, 2 * np.pi, 200, endpoint=False)
    dx = x[1] - x[0]
    a = np.sin(x)[None, :]
    b = shift_lines(a, 0.4, axis=1, lo=0.0, hi=0.0, method="spline")
    assert np.allclose(b[0, 20:-20], np.sin(x[20:-20] - 0.4 * dx), atol=1e-6)


def test_unknown_method():
    with pytest.raises(ValueError):
        shift_lines(np.zeros((2, 8)), 0.5, axis=1, method="quintic")


def test_sample_reproduces_cubic_at_fractional_index():
    x = np.arange(12, dtype=float)
    p = lambda s: s**3 - 4 * s + 1
    c = np.array([0.0, 0.5, 3.25, 10.75, 11.0])
    assert np.allclose(lagrange3_sample(p(x), c), p(c))
    stacked = np.vstack([p(x), 2 * p(x)])
    assert np.allclose(lagrange3_sample(stacked, c), np.vstack([p(c), 2 * p(c)]))
