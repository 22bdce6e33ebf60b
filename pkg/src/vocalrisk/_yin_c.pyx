# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled pitch difference kernel (hot inner loop of F0 detection)."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def difference_matrix(cnp.float64_t[:, ::1] frames, int max_lag, int window):
    """Squared-difference function per frame.

    out[i, tau] = sum_{j < window} (frames[i, j] - frames[i, j + tau])^2
    for tau in 0..max_lag. Requires window + max_lag <= frame length.
    """
    cdef int n = frames.shape[0]
    cdef int frame_len = frames.shape[1]
    if window + max_lag > frame_len:
        raise ValueError("window + max_lag exceeds frame length")
    out_arr = np.empty((n, max_lag + 1), dtype=np.float64)
    cdef cnp.float64_t[:, ::1] out = out_arr
    cdef int i, tau, j
    cdef double acc, d
    for i in range(n):
        for tau in range(max_lag + 1):
            acc = 0.0
            for j in range(window):
                d = frames[i, j] - frames[i, j + tau]
                acc += d * d
            out[i, tau] = acc
    return out_arr
