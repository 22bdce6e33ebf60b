"""Benchmark the pitch-detection difference kernel: compiled extension
vs the pure-numpy fallback.

Run with: python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from vocalrisk import kernels
from vocalrisk._yin_py import difference_matrix as py_difference_matrix

try:
    from vocalrisk._yin_c import difference_matrix as c_difference_matrix
except ImportError:
    c_difference_matrix = None


def bench(fn, frames, max_lag, window, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(frames, max_lag, window)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    rng = np.random.default_rng(0)
    print(f"active backend: {kernels.BACKEND}")
    # a 3 s utterance at 16 kHz: 40 ms frames, 10 ms hop, 55 Hz floor
    cases = [
        ("3 s utterance", 296, 640, 291),
        ("10 s utterance", 996, 640, 291),
        ("48 kHz frames", 296, 1920, 873),
    ]
    for label, n_frames, frame_len, max_lag in cases:
        frames = np.ascontiguousarray(rng.standard_normal((n_frames, frame_len)))
        window = frame_len - max_lag
        t_py = bench(py_difference_matrix, frames, max_lag, window)
        line = f"{label:<16} frames={n_frames}x{frame_len}  numpy {t_py * 1e3:8.1f} ms"
        if c_difference_matrix is not None:
            t_c = bench(c_difference_matrix, frames, max_lag, window)
            ref = py_difference_matrix(frames[:4], max_lag, window)
            got = c_difference_matrix(frames[:4], max_lag, window)
            assert np.allclose(ref, got, atol=1e-9), "backends disagree"
            line += f"  compiled {t_c * 1e3:8.1f} ms  speedup {t_py / t_c:5.2f}x"
        else:
            line += "  (compiled extension unavailable)"
        print(line)


if __name__ == "__main__":
    main()
