"""Shared signal synthesis helpers and the desk corpus fixture."""

import numpy as np
import pytest
from scipy.signal import lfilter

from vocalrisk.audio import AudioBuffer, write_wav

SR = 16000


def sine(freq, dur=1.0, sr=SR, amp=0.5, phase=0.0):
    t = np.arange(int(round(dur * sr))) / sr
    return AudioBuffer(amp * np.sin(2 * np.pi * freq * t + phase), sr)


def pulse_train(f0, dur=1.0, sr=SR, amp=0.8, period_jitter=None, amp_pattern=None, pulse_width=9):
    """Smooth pulse train with optional per-period perturbations.

    Pulses are short Hann bumps (peak exactly at the pulse position) so
    the pitch tracker sees partial overlap at the one-period lag even
    when periods are perturbed.
    period_jitter: relative offsets applied cyclically to each period
    (e.g. [0.02, -0.02] alternates +-2%).
    amp_pattern: cyclic per-pulse amplitudes (relative to amp).
    """
    n = int(round(dur * sr))
    x = np.zeros(n)
    base = sr / f0
    pos = base
    i = 0
    while pos < n - 1:
        scale = amp * (amp_pattern[i % len(amp_pattern)] if amp_pattern else 1.0)
        x[int(round(pos))] = scale
        period = base * (1.0 + (period_jitter[i % len(period_jitter)] if period_jitter else 0.0))
        pos += period
        i += 1
    if pulse_width > 1:
        bump = np.hanning(pulse_width + 2)[1:-1]
        x = np.convolve(x, bump, mode="same")
    return AudioBuffer(np.clip(x, -1, 1), sr)


def resonator_coeffs(freq, bandwidth, sr=SR):
    """Two-pole resonator (formant-style) filter coefficients."""
    r = np.exp(-np.pi * bandwidth / sr)
    theta = 2 * np.pi * freq / sr
    return [1.0 - r], [1.0, -2 * r * np.cos(theta), r * r]


def speech_utterance(rng, sr=SR, dur=3.0, f0_base=None, f0_drift=None):
    """Synthetic speech-like utterance: vowel-like voiced stretches
    (filtered pulse train with drifting f0) alternating with
    fricative-like noise bursts."""
    if f0_base is None:
        f0_base = rng.uniform(110.0, 320.0)
    if f0_drift is None:
        f0_drift = rng.uniform(-25.0, 25.0)  # Hz per second
    n = int(round(dur * sr))
    x = np.zeros(n)
    f1 = rng.uniform(350.0, 750.0)
    f2 = rng.uniform(1100.0, 2000.0)
    tilt = rng.uniform(0.90, 0.975)  # one-pole lowpass pole for voiced tilt
    noise_tilt = rng.uniform(0.2, 0.6)  # high-pass mix for fricative noise
    noise_gain = rng.uniform(0.05, 0.12)

    pos = 0
    voiced = True
    while pos < n:
        seg_len = int(rng.uniform(0.35, 0.65) * sr)
        end = min(n, pos + seg_len)
        seg = np.zeros(end - pos)
        if voiced and end - pos > sr // 10:
            t0 = pos / sr
            p = 0.0
            while p < len(seg) - 1:
                f0 = f0_base + f0_drift * (t0 + p / sr) + 4.0 * np.sin(2 * np.pi * 5.0 * (t0 + p / sr))
                f0 = max(f0, 80.0)
                seg[int(p)] = 1.0
                p += sr / f0
            for freq, bw in ((f1, 90.0), (f2, 140.0)):
                b, a = resonator_coeffs(freq, bw, sr)
                seg = lfilter(b, a, seg)
            seg = lfilter([1.0 - tilt], [1.0, -tilt], seg)  # spectral tilt
            seg = seg / (np.max(np.abs(seg)) + 1e-12) * 0.45
            seg += 0.002 * rng.standard_normal(len(seg))
        else:
            noise = rng.standard_normal(len(seg))
            highpassed = np.diff(noise, prepend=0.0)
            seg = noise_gain * ((1 - noise_tilt) * noise + noise_tilt * highpassed)
        # short fade at the segment edges to avoid clicks
        fade = min(80, len(seg) // 4)
        if fade > 0:
            ramp = np.linspace(0.0, 1.0, fade)
            seg[:fade] *= ramp
            seg[-fade:] *= ramp[::-1]
        x[pos:end] = seg
        pos = end
        voiced = not voiced
    x = np.clip(x, -1.0, 1.0)
    return AudioBuffer(x, sr)


@pytest.fixture(scope="session")
def desk_corpus(tmp_path_factory):
    """32 synthetic speech-like WAVs with diverse pitch, tilt, and noise."""
    root = tmp_path_factory.mktemp("corpus")
    rng = np.random.default_rng(20240817)
    for i in range(32):
        buf = speech_utterance(rng, dur=rng.uniform(2.4, 3.4))
        write_wav(root / f"utt_{i:03d}.wav", buf, fmt="float32")
    return root
