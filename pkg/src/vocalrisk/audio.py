"""WAV I/O, framing, windowing and magnitude spectra.

All types are plain immutable containers around numpy arrays; every
operation is a pure function, so buffers can be shared freely across
parallel workers.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.io import wavfile
from scipy.signal.windows import gaussian as _gaussian_window

from .errors import AudioIOError, ValidationError

# Minimum rate that keeps the 1-5 kHz band of the alpha ratio below Nyquist.
MIN_SAMPLE_RATE = 11025

DB_FLOOR = -120.0
_MAG_FLOOR = 10.0 ** (DB_FLOOR / 20.0)

WINDOW_KINDS = ("rectangular", "hann", "hamming", "gaussian")


def to_db(magnitude):
    """20*log10(|magnitude|) with a floor at -120 dB (re 1.0)."""
    return 20.0 * np.log10(np.maximum(np.abs(magnitude), _MAG_FLOOR))


def power_db(power):
    """10*log10(power) with the same -120 dB floor convention."""
    return 10.0 * np.log10(np.maximum(power, _MAG_FLOOR**2))


@dataclass(frozen=True)
class AudioBuffer:
    """Mono PCM samples in [-1, 1] plus their sample rate."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)
        if self.sample_rate < MIN_SAMPLE_RATE:
            raise ValidationError(
                f"sample rate {self.sample_rate} Hz is below {MIN_SAMPLE_RATE} Hz; "
                "the alpha-ratio 1-5 kHz band needs at least 5 kHz below Nyquist"
            )
        if not np.all(np.isfinite(samples)):
            raise ValidationError("audio contains non-finite samples")

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass(frozen=True)
class FrameSequence:
    """Windowed, equally sized sample blocks cut from one buffer."""

    frames: np.ndarray  # shape (n_frames, frame_len)
    sample_rate: int
    frame_length_s: float
    hop_s: float
    window_kind: str

    def __len__(self):
        return self.frames.shape[0]

    @property
    def frame_len(self) -> int:
        return self.frames.shape[1]

    @property
    def hop(self) -> int:
        return int(round(self.hop_s * self.sample_rate))

    def center_times(self) -> np.ndarray:
        """Center time of each frame, in seconds."""
        starts = np.arange(len(self)) * self.hop
        return (starts + self.frame_len / 2.0) / self.sample_rate


@dataclass(frozen=True)
class Spectrum:
    """One-sided linear magnitude spectrum of a single frame."""

    magnitudes: np.ndarray
    frequencies: np.ndarray
    sample_rate: int

    @property
    def nyquist(self) -> float:
        return self.sample_rate / 2.0


def load_wav(path) -> AudioBuffer:
    """Read a PCM16 or float32 RIFF file into a mono buffer.

    Stereo is downmixed by channel average; int16 is scaled by 1/32768.
    Float samples outside [-1, 1] are clipped with a warning.
    """
    try:
        rate, data = wavfile.read(path)
    except FileNotFoundError:
        raise
    except (ValueError, EOFError) as exc:
        raise AudioIOError(f"cannot read {path}: {exc}") from exc
    if data.size == 0:
        raise AudioIOError(f"{path}: zero-length payload")
    if data.dtype == np.int16:
        samples = data.astype(np.float64) / 32768.0
    elif data.dtype in (np.float32, np.float64):
        samples = data.astype(np.float64)
    else:
        raise AudioIOError(
            f"{path}: unsupported encoding {data.dtype}; expected int16 or float32"
        )
    if samples.ndim == 2:
        if samples.shape[1] > 2:
            raise AudioIOError(f"{path}: {samples.shape[1]} channels; expected 1-2")
        samples = samples.mean(axis=1)
    if np.max(np.abs(samples)) > 1.0:
        warnings.warn(f"{path}: samples outside [-1, 1]; clipping", stacklevel=2)
        samples = np.clip(samples, -1.0, 1.0)
    return AudioBuffer(samples=samples, sample_rate=int(rate))


def write_wav(path, buffer: AudioBuffer, fmt: str = "float32") -> None:
    """Write a mono buffer as PCM16 or float32.

    PCM16 quantization is round(x * 32768), so load->write->load of a
    16-bit source is sample-exact.
    """
    if fmt == "pcm16":
        data = np.clip(np.round(buffer.samples * 32768.0), -32768, 32767).astype(np.int16)
    elif fmt == "float32":
        data = buffer.samples.astype(np.float32)
    else:
        raise ValidationError(f"unknown wav format {fmt!r}; use pcm16 or float32")
    wavfile.write(path, buffer.sample_rate, data)


def make_window(kind: str, length: int) -> np.ndarray:
    if kind == "rectangular":
        return np.ones(length)
    if kind == "hann":
        return np.hanning(length)
    if kind == "hamming":
        return np.hamming(length)
    if kind == "gaussian":
        return _gaussian_window(length, std=length / 6.0)
    raise ValidationError(f"unknown window kind {kind!r}; one of {WINDOW_KINDS}")


def frame_signal(
    buffer: AudioBuffer,
    frame_length_s: float,
    hop_s: float,
    window_kind: str = "hann",
) -> FrameSequence:
    """Cut the signal into windowed frames.

    Frame count is floor((N - L) / hop) + 1; a signal shorter than one
    frame yields an empty sequence.
    """
    if hop_s <= 0:
        raise ValidationError("hop must be positive")
    if hop_s > frame_length_s:
        raise ValidationError("hop must not exceed the frame length")
    sr = buffer.sample_rate
    frame_len = int(round(frame_length_s * sr))
    hop = int(round(hop_s * sr))
    n = len(buffer.samples)
    if n < frame_len:
        frames = np.empty((0, frame_len))
    else:
        n_frames = (n - frame_len) // hop + 1
        window = make_window(window_kind, frame_len)
        idx = np.arange(n_frames)[:, None] * hop + np.arange(frame_len)[None, :]
        frames = buffer.samples[idx] * window
    return FrameSequence(
        frames=frames,
        sample_rate=sr,
        frame_length_s=frame_length_s,
        hop_s=hop_s,
        window_kind=window_kind,
    )


def magnitude_spectrum(frame: np.ndarray, fft_size: int, sample_rate: int) -> Spectrum:
    """One-sided magnitude spectrum of a zero-padded frame."""
    frame = np.asarray(frame, dtype=np.float64)
    if fft_size < len(frame):
        raise ValidationError("fft_size must be >= frame length")
    if fft_size & (fft_size - 1) != 0 or fft_size <= 0:
        raise ValidationError(f"fft_size {fft_size} is not a power of two")
    mags = np.abs(np.fft.rfft(frame, n=fft_size))
    freqs = np.arange(fft_size // 2 + 1) * (sample_rate / fft_size)
    return Spectrum(magnitudes=mags, frequencies=freqs, sample_rate=sample_rate)


def next_pow2(n: int) -> int:
    p = 1
    while p < n:
        p *= 2
    return p
