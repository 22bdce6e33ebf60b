"""Pure-numpy fallback for the pitch difference kernel.

Same contract as the compiled module in ``_yin_c.pyx``; the backend is
chosen at import time in ``kernels.py``.
"""

import numpy as np


def difference_matrix(frames: np.ndarray, max_lag: int, window: int) -> np.ndarray:
    """Squared-difference function per frame.

    out[i, tau] = sum_{j < window} (frames[i, j] - frames[i, j + tau])^2
    for tau in 0..max_lag. Requires window + max_lag <= frame length.
    """
    frames = np.ascontiguousarray(frames, dtype=np.float64)
    n, frame_len = frames.shape
    if window + max_lag > frame_len:
        raise ValueError("window + max_lag exceeds frame length")
    out = np.empty((n, max_lag + 1))
    base = frames[:, :window]
    for tau in range(max_lag + 1):
        diff = base - frames[:, tau : tau + window]
        out[:, tau] = np.einsum("ij,ij->i", diff, diff)
    return out
