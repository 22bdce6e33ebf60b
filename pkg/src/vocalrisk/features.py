"""Acoustic descriptors and their per-utterance functionals.

Frame-level measures (mel cepstra, harmonic amplitudes, band slopes,
band energy ratio, voice quality) summarized by arithmetic means over
the voiced or unvoiced frame mask, as appropriate per feature.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.fft import dct

from .audio import (
    AudioBuffer,
    Spectrum,
    frame_signal,
    magnitude_spectrum,
    next_pow2,
    to_db,
    power_db,
)
from .errors import ValidationError
from .pitch import F0Contour, detect_f0, f0_semitones

# Canonical per-recording functionals, in output column order.
FEATURE_NAMES = (
    "f0_hz_mean",
    "f0_semitone_mean",
    "mfcc1_mean",
    "mfcc2_mean",
    "mfcc3_mean",
    "mfcc4_mean",
    "logRelF0_H1_H2_mean",
    "slope_v0_500_mean",
    "slope_v500_1500_mean",
    "alpha_ratio_uv_mean",
    "jitter_local_mean",
    "shimmer_local_mean",
    "hnr_mean",
    "voiced_fraction",
    "duration_s",
)

# The subset the screening statistics report on (group-difference table).
CORE_FEATURES = (
    "f0_semitone_mean",
    "mfcc2_mean",
    "mfcc4_mean",
    "logRelF0_H1_H2_mean",
    "slope_v0_500_mean",
    "alpha_ratio_uv_mean",
    "f0_hz_mean",
)

ALPHA_LOW_BAND = (50.0, 1000.0)
ALPHA_HIGH_BAND = (1000.0, 5000.0)


@dataclass(frozen=True)
class MelConfig:
    n_filters: int = 26
    n_coefficients: int = 4
    fmin: float = 20.0
    fmax: float | None = None  # None -> min(8000, Nyquist)

    def resolve_fmax(self, nyquist: float) -> float:
        fmax = min(8000.0, nyquist) if self.fmax is None else self.fmax
        if fmax > nyquist:
            raise ValidationError(f"mel fmax {fmax} Hz exceeds Nyquist {nyquist} Hz")
        if self.fmin >= fmax:
            raise ValidationError("mel fmin must be below fmax")
        if self.n_coefficients > self.n_filters:
            raise ValidationError("cannot keep more cepstra than mel filters")
        return fmax


@dataclass(frozen=True)
class FeatureConfig:
    frame_length_s: float = 0.025
    hop_s: float = 0.010
    window_kind: str = "hann"
    f0_frame_length_s: float = 0.040
    f0_min_hz: float = 55.0
    f0_max_hz: float = 650.0
    voicing_threshold: float = 0.45
    mel: MelConfig = field(default_factory=MelConfig)
    min_duration_s: float = 1.0

    @classmethod
    def from_dict(cls, data: dict) -> "FeatureConfig":
        data = dict(data)
        mel = MelConfig(**data.pop("mel", {}))
        return cls(mel=mel, **data)


@dataclass(frozen=True)
class FeatureVector:
    """Named functional values for one recording; None marks a feature
    that could not be computed (e.g. voiced measures of unvoiced audio),
    with the reason recorded in flags."""

    values: dict
    flags: tuple = ()

    def __getitem__(self, name: str):
        return self.values[name]

    def as_row(self) -> list:
        return [self.values.get(name) for name in FEATURE_NAMES]


def mel_scale(hz):
    return 2595.0 * np.log10(1.0 + np.asarray(hz, dtype=np.float64) / 700.0)


def mel_to_hz(mel):
    return 700.0 * (10.0 ** (np.asarray(mel, dtype=np.float64) / 2595.0) - 1.0)


_FILTERBANK_CACHE: dict = {}


def mel_filterbank(frequencies: np.ndarray, config: MelConfig, nyquist: float) -> np.ndarray:
    """Triangular filters on the mel scale, rows normalized to unit area
    so a flat power spectrum yields equal band energies."""
    key = (len(frequencies), float(frequencies[-1]), config, nyquist)
    cached = _FILTERBANK_CACHE.get(key)
    if cached is not None:
        return cached
    fmax = config.resolve_fmax(nyquist)
    edges = mel_to_hz(np.linspace(mel_scale(config.fmin), mel_scale(fmax), config.n_filters + 2))
    weights = np.zeros((config.n_filters, len(frequencies)))
    for m in range(config.n_filters):
        lo, mid, hi = edges[m], edges[m + 1], edges[m + 2]
        up = (frequencies - lo) / (mid - lo)
        down = (hi - frequencies) / (hi - mid)
        weights[m] = np.maximum(0.0, np.minimum(up, down))
    sums = weights.sum(axis=1)
    if np.any(sums == 0):
        raise ValidationError("mel filterbank has empty filters; fft too coarse")
    weights = weights / sums[:, None]
    _FILTERBANK_CACHE[key] = weights
    return weights


def mfcc(spectrum: Spectrum, config: MelConfig) -> np.ndarray:
    """Cepstral coefficients 1..n: unit-area mel filterbank on the power
    spectrum, dB-compressed (floored at -120 dB), orthonormal DCT-II with
    coefficient 0 discarded."""
    weights = mel_filterbank(spectrum.frequencies, config, spectrum.nyquist)
    energies = weights @ (spectrum.magnitudes**2)
    log_e = power_db(energies)
    cepstra = dct(log_e, type=2, norm="ortho")
    return cepstra[1 : config.n_coefficients + 1]


def harmonic_amplitude(spectrum: Spectrum, f0: float, k: int) -> float:
    """dB amplitude of the k-th harmonic (k = 0 is the fundamental):
    highest spectral peak within +-f0/4 of (k + 1) * f0."""
    target = (k + 1) * f0
    if target + f0 / 4.0 >= spectrum.nyquist:
        raise ValidationError(f"harmonic {k} at {target:.0f} Hz is above Nyquist")
    in_window = np.abs(spectrum.frequencies - target) <= f0 / 4.0
    if not np.any(in_window):
        raise ValidationError("harmonic search window contains no spectral bins")
    idx = np.flatnonzero(in_window)
    peak = idx[np.argmax(spectrum.magnitudes[idx])]
    mag = _parabolic_peak_db(spectrum.magnitudes, peak)
    return float(mag)


def _parabolic_peak_db(mags: np.ndarray, k: int) -> float:
    """Refine a peak magnitude by fitting a parabola to the dB values of
    the peak bin and its neighbors."""
    db = to_db(mags)
    if k == 0 or k == len(mags) - 1:
        return db[k]
    a, b, c = db[k - 1], db[k], db[k + 1]
    denom = a - 2 * b + c
    if denom >= 0:
        return db[k]
    return b - (a - c) ** 2 / (8.0 * denom)


def log_rel_f0_h1_h2(spectrum: Spectrum, f0: float) -> float:
    """(H1_dB - H2_dB) - H0_dB with the fundamental's level measured
    relative to the spectrum's RMS, which makes the value gain-invariant."""
    h0 = harmonic_amplitude(spectrum, f0, 0)
    h1 = harmonic_amplitude(spectrum, f0, 1)
    h2 = harmonic_amplitude(spectrum, f0, 2)
    rms = np.sqrt(np.mean(spectrum.magnitudes**2))
    return (h1 - h2) - (h0 - float(to_db(rms)))


def spectral_slope_band(spectrum: Spectrum, lo_hz: float, hi_hz: float) -> float:
    """Least-squares slope of bin level (dB) against bin frequency (Hz)
    over the band [lo_hz, hi_hz]. The DC bin is excluded: its level has
    a different sampling distribution and drags the fit."""
    if hi_hz > spectrum.nyquist:
        raise ValidationError("band upper edge above Nyquist")
    mask = (spectrum.frequencies >= lo_hz) & (spectrum.frequencies <= hi_hz) & (
        spectrum.frequencies > 0
    )
    if np.sum(mask) < 4:
        raise ValidationError("fewer than 4 spectral bins in the band")
    x = spectrum.frequencies[mask]
    y = to_db(spectrum.magnitudes[mask])
    xc = x - x.mean()
    return float(np.dot(xc, y - y.mean()) / np.dot(xc, xc))


def alpha_ratio(spectrum: Spectrum) -> float:
    """10*log10 of high-band (1-5 kHz) to low-band (50-1000 Hz) power.

    Zero low-band power is an error; zero high-band power returns the
    -120 dB floor (callers flag it as band-empty).
    """
    if spectrum.nyquist < ALPHA_HIGH_BAND[1]:
        raise ValidationError("alpha ratio needs Nyquist >= 5 kHz")
    power = spectrum.magnitudes**2
    freqs = spectrum.frequencies
    low = power[(freqs >= ALPHA_LOW_BAND[0]) & (freqs < ALPHA_LOW_BAND[1])].sum()
    high = power[(freqs >= ALPHA_HIGH_BAND[0]) & (freqs <= ALPHA_HIGH_BAND[1])].sum()
    if low <= 0:
        raise ValidationError("zero low-band energy; alpha ratio undefined")
    if high <= 0:
        return -120.0
    return float(10.0 * np.log10(high / low))


def jitter_shimmer_hnr(buffer: AudioBuffer, contour: F0Contour):
    """Cycle-to-cycle voice quality from glottal cycles located via the
    F0 contour.

    jitter  = mean |T_i - T_{i-1}| / mean T   (period perturbation)
    shimmer = mean |A_i - A_{i-1}| / mean A   (amplitude perturbation)
    HNR     = mean over voiced frames of 10*log10(r / (1 - r)), r the
              normalized autocorrelation peak at the period lag.

    Returns (jitter, shimmer, hnr); all None when there are fewer than
    3 consecutive voiced periods.
    """
    sr = buffer.sample_rate
    x = buffer.samples
    periods = []
    amplitudes = []
    period_pairs = []  # (T_{i-1}, T_i) within a voiced run
    amp_pairs = []
    for run_start, run_end in _voiced_runs(contour):
        marks = _cycle_marks(x, sr, contour, run_start, run_end)
        if len(marks) < 2:
            continue
        ts = np.diff(marks).astype(np.float64)
        amps = np.abs(x[marks])
        periods.extend(ts)
        amplitudes.extend(amps[:-1])
        period_pairs.extend(zip(ts[:-1], ts[1:]))
        amp_pairs.extend(zip(amps[:-1], amps[1:]))
    if len(periods) < 3 or not period_pairs:
        return None, None, None
    mean_t = float(np.mean(periods))
    mean_a = float(np.mean(amplitudes))
    jitter = float(np.mean([abs(b - a) for a, b in period_pairs])) / mean_t
    shimmer = (
        float(np.mean([abs(b - a) for a, b in amp_pairs])) / mean_a if mean_a > 0 else None
    )
    hnr = _hnr(x, sr, contour)
    return jitter, shimmer, hnr


def _voiced_runs(contour: F0Contour):
    voiced = contour.voiced
    runs = []
    start = None
    for i, v in enumerate(voiced):
        if v and start is None:
            start = i
        elif not v and start is not None:
            runs.append((start, i - 1))
            start = None
    if start is not None:
        runs.append((start, len(voiced) - 1))
    return runs


def _cycle_marks(x, sr, contour, run_start, run_end):
    """Peak-pick one mark per glottal cycle across a voiced run."""
    n = len(x)
    t0 = contour.times[run_start]
    t1 = contour.times[run_end]
    period0 = int(round(sr / contour.f0_hz[run_start]))
    s = max(0, int(t0 * sr))
    e = min(n, int(t1 * sr) + 2 * period0)
    if e - s < 2 * period0:
        return []
    first = s + int(np.argmax(np.abs(x[s : s + period0])))
    marks = [first]
    while True:
        t = marks[-1] / sr
        frame = int(np.clip(np.searchsorted(contour.times, t), run_start, run_end))
        f0 = contour.f0_hz[frame]
        if f0 <= 0:
            f0 = contour.f0_hz[run_start]
        period = sr / f0
        lo = marks[-1] + int(round(0.7 * period))
        hi = marks[-1] + int(round(1.3 * period))
        if hi >= e or hi >= n:
            break
        nxt = lo + int(np.argmax(np.abs(x[lo:hi])))
        marks.append(nxt)
    return np.asarray(marks, dtype=np.intp)


def _hnr(x, sr, contour):
    """Mean per-voiced-frame harmonics-to-noise ratio in dB."""
    values = []
    n = len(x)
    for i in np.flatnonzero(contour.voiced):
        f0 = contour.f0_hz[i]
        lag = int(round(sr / f0))
        start = int(contour.times[i] * sr) - lag
        length = 2 * lag
        best = 0.0
        for tau in range(max(2, lag - 2), lag + 3):
            if start < 0 or start + tau + length > n:
                continue
            a = x[start : start + length]
            b = x[start + tau : start + tau + length]
            ea = np.dot(a, a)
            eb = np.dot(b, b)
            if ea <= 0 or eb <= 0:
                continue
            r = np.dot(a, b) / np.sqrt(ea * eb)
            best = max(best, r)
        if best > 0:
            r = float(np.clip(best, 1e-6, 1.0 - 1e-6))
            values.append(10.0 * np.log10(r / (1.0 - r)))
    if not values:
        return None
    return float(np.mean(values))


def extract_feature_vector(buffer: AudioBuffer, config: FeatureConfig | None = None) -> FeatureVector:
    """Compute every canonical functional for one recording."""
    if config is None:
        config = FeatureConfig()
    if buffer.duration_s < config.min_duration_s:
        raise ValidationError(
            f"recording too short: {buffer.duration_s:.3f} s < {config.min_duration_s} s"
        )
    sr = buffer.sample_rate
    flags = []
    values = {name: None for name in FEATURE_NAMES}
    values["duration_s"] = buffer.duration_s

    f0_frames = frame_signal(buffer, config.f0_frame_length_s, config.hop_s, "rectangular")
    contour = detect_f0(
        f0_frames, config.f0_min_hz, config.f0_max_hz, config.voicing_threshold
    )
    values["voiced_fraction"] = contour.voiced_fraction

    spec_frames = frame_signal(buffer, config.frame_length_s, config.hop_s, config.window_kind)
    fft_size = next_pow2(spec_frames.frame_len)
    spectra = [
        magnitude_spectrum(frame, fft_size, sr) for frame in spec_frames.frames
    ]
    # voicing and f0 per spectral frame, via the nearest contour frame
    spec_times = spec_frames.center_times()
    nearest = np.clip(
        np.searchsorted(contour.times, spec_times), 0, len(contour.times) - 1
    )
    frame_voiced = contour.voiced[nearest]
    frame_f0 = contour.f0_hz[nearest]

    if spectra:
        coeffs = np.array([mfcc(s, config.mel) for s in spectra])
        means = coeffs.mean(axis=0)
        for i in range(min(4, config.mel.n_coefficients)):
            values[f"mfcc{i + 1}_mean"] = float(means[i])

    voiced_idx = np.flatnonzero(frame_voiced)
    if contour.voiced_fraction == 0 or len(voiced_idx) == 0:
        flags.append("no-voiced-frames")
    else:
        f0_voiced = contour.f0_hz[contour.voiced]
        values["f0_hz_mean"] = float(np.mean(f0_voiced))
        values["f0_semitone_mean"] = float(np.mean(f0_semitones(f0_voiced)))

        rel_vals = []
        for i in voiced_idx:
            try:
                rel_vals.append(log_rel_f0_h1_h2(spectra[i], frame_f0[i]))
            except ValidationError:
                continue
        if rel_vals:
            values["logRelF0_H1_H2_mean"] = float(np.mean(rel_vals))
        else:
            flags.append("harmonics-unresolvable")

        values["slope_v0_500_mean"] = float(
            np.mean([spectral_slope_band(spectra[i], 0.0, 500.0) for i in voiced_idx])
        )
        values["slope_v500_1500_mean"] = float(
            np.mean([spectral_slope_band(spectra[i], 500.0, 1500.0) for i in voiced_idx])
        )

        jitter, shimmer, hnr = jitter_shimmer_hnr(buffer, contour)
        if jitter is None:
            flags.append("insufficient-voiced-periods")
        values["jitter_local_mean"] = jitter
        values["shimmer_local_mean"] = shimmer
        values["hnr_mean"] = hnr

    unvoiced_idx = np.flatnonzero(~frame_voiced)
    if len(unvoiced_idx) == 0:
        flags.append("no-unvoiced-frames")
    else:
        ratios = [alpha_ratio(spectra[i]) for i in unvoiced_idx]
        value = float(np.mean(ratios))
        if any(r == -120.0 for r in ratios):
            flags.append("alpha-band-empty")
        values["alpha_ratio_uv_mean"] = value

    return FeatureVector(values=values, flags=tuple(flags))
