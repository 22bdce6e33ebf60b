import numpy as np
import pytest

from vocalrisk import _yin_py
from vocalrisk.kernels import BACKEND, difference_matrix


def brute_difference(frames, max_lag, window):
    n, _ = frames.shape
    out = np.zeros((n, max_lag + 1))
    for i in range(n):
        for tau in range(max_lag + 1):
            for j in range(window):
                d = frames[i, j] - frames[i, j + tau]
                out[i, tau] += d * d
    return out


def test_matches_brute_force():
    rng = np.random.default_rng(0)
    frames = rng.standard_normal((4, 64))
    out = difference_matrix(frames, max_lag=20, window=40)
    np.testing.assert_allclose(out, brute_difference(frames, 20, 40), rtol=1e-12, atol=1e-12)


def test_backends_agree():
    rng = np.random.default_rng(1)
    frames = rng.standard_normal((8, 400))
    fallback = _yin_py.difference_matrix(frames, max_lag=120, window=250)
    selected = difference_matrix(frames, max_lag=120, window=250)
    np.testing.assert_allclose(selected, fallback, rtol=1e-9)


def test_window_bounds_checked():
    frames = np.zeros((1, 50))
    with pytest.raises(ValueError):
        difference_matrix(frames, max_lag=30, window=30)


def test_backend_reported():
    assert BACKEND in ("cython", "python")
