import numpy as np
import pytest

from cbopt.rng import RngStream


def test_normal_moments():
    draws = RngStream(123, 0).standard_normal(10**6)
    assert abs(draws.mean()) < 0.01      # 3 / sqrt(1e6) = 0.003
    assert abs(draws.var() - 1.0) < 0.01


def test_same_stream_same_sequence():
    a = RngStream(42, 7).standard_normal(1000)
    b = RngStream(42, 7).standard_normal(1000)
    np.testing.assert_array_equal(a, b)
    assert RngStream(42, 7).standard_normal() == a[0]


def test_distinct_streams_uncorrelated():
    a = RngStream(5, 0).standard_normal(10**5)
    for sid in (1, 2, 1000):
        b = RngStream(5, sid).standard_normal(10**5)
        corr = np.corrcoef(a, b)[0, 1]
        assert abs(corr) < 0.02


def test_uniform_in_box_moments():
    pts = RngStream(9, 0).uniform_in_box([[0.0, 1.0]], size=10**5)
    assert abs(pts.mean() - 0.5) < 0.01


def test_uniform_in_box_bounds():
    eps = 1e-6
    pts = RngStream(0, 0).uniform_in_box([[2.0, 2.0 + eps]], size=1000)
    assert np.all((pts >= 2.0) & (pts < 2.0 + eps))


def test_uniform_reproducible_and_shaped():
    box = [[-1.0, 1.0], [0.0, 3.0]]
    p1 = RngStream(11, 3).uniform_in_box(box)
    p2 = RngStream(11, 3).uniform_in_box(box)
    np.testing.assert_array_equal(p1, p2)
    assert p1.shape == (2,)
    assert RngStream(11, 3).uniform_in_box(box, size=5).shape == (5, 2)


def test_degenerate_box_rejected():
    with pytest.raises(ValueError):
        RngStream(0, 0).uniform_in_box([[1.0, 1.0]])
    with pytest.raises(ValueError):
        RngStream(0, 0).uniform_in_box([[2.0, -2.0]])


def test_negative_seed_rejected():
    with pytest.raises(ValueError):
        RngStream(-1, 0)
    with pytest.raises(ValueError):
        RngStream(0, -2)
