"""Backend selection for the compiled pitch kernel.

Prefers the Cython extension when it was built; falls back to the
numpy implementation otherwise. ``BACKEND`` records which one is live.
"""

import numpy as np

try:
    from . import _yin_c as _impl

    BACKEND = "cython"
except ImportError:  # extension not built; pure install
    from . import _yin_py as _impl

    BACKEND = "python"


def difference_matrix(frames, max_lag: int, window: int) -> np.ndarray:
    frames = np.ascontiguousarray(frames, dtype=np.float64)
    return np.asarray(_impl.difference_matrix(frames, max_lag, window))
