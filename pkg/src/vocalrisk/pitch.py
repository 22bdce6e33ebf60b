"""F0 tracking and voicing decisions.

Per-frame fundamental frequency from the cumulative-mean-normalized
difference function (normalized autocorrelation variant) with parabolic
refinement of the selected lag. The inner difference loop runs in the
compiled kernel when available.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio import FrameSequence
from .errors import ValidationError
from .kernels import difference_matrix

SEMITONE_REF_HZ = 27.5

# A dip this deep in the normalized difference function is taken as
# periodic without looking further (standard absolute-threshold search).
_ABS_THRESHOLD = 0.1


@dataclass(frozen=True)
class F0Contour:
    f0_hz: np.ndarray  # 0.0 marks unvoiced frames
    voicing_prob: np.ndarray
    times: np.ndarray  # frame centers, seconds
    voicing_threshold: float

    @property
    def voiced(self) -> np.ndarray:
        return self.f0_hz > 0

    @property
    def voiced_fraction(self) -> float:
        if len(self.f0_hz) == 0:
            return 0.0
        return float(np.mean(self.voiced))


def f0_semitones(f0_hz):
    """Pitch in semitones re 27.5 Hz: 12 * log2(f0 / 27.5)."""
    f0_hz = np.asarray(f0_hz, dtype=np.float64)
    if np.any(f0_hz <= 0):
        raise ValidationError("semitone conversion needs positive frequencies")
    return 12.0 * np.log2(f0_hz / SEMITONE_REF_HZ)


def detect_f0(
    frames: FrameSequence,
    fmin: float = 55.0,
    fmax: float = 650.0,
    voicing_threshold: float = 0.45,
) -> F0Contour:
    """Track F0 over a frame sequence (rectangular frames recommended).

    A frame is voiced when 1 - d'(tau*) >= voicing_threshold, where d'
    is the cumulative-mean-normalized difference function and tau* the
    selected period lag.
    """
    sr = frames.sample_rate
    if len(frames) == 0:
        raise ValidationError("empty frame sequence")
    if fmin < 55.0:
        raise ValidationError("fmin must be >= 55 Hz")
    if fmax > sr / 4.0:
        raise ValidationError("fmax must be <= Nyquist/2")
    if fmin >= fmax:
        raise ValidationError("need fmin < fmax")
    max_lag = int(sr / fmin)
    min_lag = max(2, int(np.ceil(sr / fmax)))
    frame_len = frames.frame_len
    window = frame_len - max_lag
    if window < min_lag:
        needed = (max_lag + min_lag) / sr
        raise ValidationError(
            f"frames too short for fmin={fmin} Hz; need at least {needed:.3f} s"
        )

    d = difference_matrix(frames.frames, max_lag, window)
    # cumulative-mean normalization: d'[tau] = d[tau] * tau / cumsum(d)[tau]
    cum = np.cumsum(d[:, 1:], axis=1)
    taus = np.arange(1, max_lag + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        dn = np.where(cum > 0, d[:, 1:] * taus / cum, 1.0)
    dn = np.concatenate([np.ones((len(frames), 1)), dn], axis=1)

    n = len(frames)
    f0 = np.zeros(n)
    prob = np.zeros(n)
    for i in range(n):
        row = dn[i]
        tau = _select_lag(row, min_lag, max_lag)
        value = row[tau]
        p = float(np.clip(1.0 - value, 0.0, 1.0))
        prob[i] = p
        if p >= voicing_threshold:
            tau_ref = _parabolic(row, tau, min_lag, max_lag)
            candidate = sr / tau_ref
            if fmin <= candidate <= fmax:
                f0[i] = candidate
            else:
                prob[i] = 0.0
    return F0Contour(
        f0_hz=f0,
        voicing_prob=prob,
        times=frames.center_times(),
        voicing_threshold=voicing_threshold,
    )


def _select_lag(row: np.ndarray, min_lag: int, max_lag: int) -> int:
    """First local minimum below the absolute threshold, else global min."""
    for tau in range(min_lag, max_lag):
        if row[tau] < _ABS_THRESHOLD and row[tau] <= row[tau + 1]:
            return tau
    return int(min_lag + np.argmin(row[min_lag : max_lag + 1]))


def _parabolic(row: np.ndarray, tau: int, min_lag: int, max_lag: int) -> float:
    if tau <= min_lag or tau >= max_lag:
        return float(tau)
    a, b, c = row[tau - 1], row[tau], row[tau + 1]
    denom = a - 2 * b + c
    if denom <= 0:
        return float(tau)
    shift = 0.5 * (a - c) / denom
    return tau + float(np.clip(shift, -0.5, 0.5))


def contour_slope(contour: F0Contour):
    """Whole-utterance linear F0 trend in Hz/s over voiced frames.

    Deliberately dynamic: random splicing scrambles it, which is exactly
    why the robustness report carries it as a control. Returns None with
    fewer than 3 voiced frames.
    """
    mask = contour.voiced
    if np.sum(mask) < 3:
        return None
    t = contour.times[mask]
    f = contour.f0_hz[mask]
    coeffs = np.polyfit(t, f, 1)
    return float(coeffs[0])
