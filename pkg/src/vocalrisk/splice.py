"""Random-splicing anonymizer.

Cuts a recording into segments of random length, shuffles them with a
seeded permutation, and reassembles with equal-power crossfades. The
shuffle obfuscates what was said while leaving frame-level spectral
statistics essentially untouched.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .audio import AudioBuffer, load_wav, write_wav
from .errors import ValidationError


@dataclass(frozen=True)
class SpliceConfig:
    seg_min_s: float = 0.6
    seg_max_s: float = 1.2
    crossfade_s: float = 0.010
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.seg_min_s <= self.seg_max_s:
            raise ValidationError("need 0 < seg_min_s <= seg_max_s")
        if self.crossfade_s < 0 or self.crossfade_s >= self.seg_min_s / 2:
            raise ValidationError("crossfade_s must be in [0, seg_min_s / 2)")


@dataclass(frozen=True)
class SplicePlan:
    """Auditable record of one cut-and-shuffle: where the cuts fell and
    which permutation was applied."""

    boundaries: tuple  # sample indices, first 0, last = signal length
    permutation: tuple
    config: SpliceConfig = field(default=SpliceConfig())

    @property
    def n_segments(self) -> int:
        return len(self.boundaries) - 1

    def to_json(self) -> str:
        return json.dumps(
            {
                "boundaries": list(self.boundaries),
                "permutation": list(self.permutation),
                "config": {
                    "seg_min_s": self.config.seg_min_s,
                    "seg_max_s": self.config.seg_max_s,
                    "crossfade_s": self.config.crossfade_s,
                    "seed": self.config.seed,
                },
            },
            indent=2,
        )


def plan_splice(buffer: AudioBuffer, config: SpliceConfig) -> SplicePlan:
    """Draw segment boundaries and a shuffle order from the seeded RNG.

    Segment lengths are uniform in [seg_min_s, seg_max_s]; the last
    segment absorbs whatever remainder is too short to stand alone.
    """
    sr = buffer.sample_rate
    n = len(buffer.samples)
    seg_min = int(round(config.seg_min_s * sr))
    seg_max = int(round(config.seg_max_s * sr))
    if n < seg_min:
        raise ValidationError("signal too short to splice")
    rng = np.random.default_rng(config.seed)
    boundaries = [0]
    pos = 0
    while True:
        length = int(round(rng.uniform(seg_min, seg_max)))
        if pos + length + seg_min > n:
            break  # last segment absorbs the remainder
        pos += length
        boundaries.append(pos)
    boundaries.append(n)
    n_seg = len(boundaries) - 1
    permutation = tuple(int(i) for i in rng.permutation(n_seg))
    return SplicePlan(boundaries=tuple(boundaries), permutation=permutation, config=config)


def apply_splice(buffer: AudioBuffer, plan: SplicePlan, crossfade_s: float | None = None) -> AudioBuffer:
    """Reassemble the planned segments in shuffled order.

    Adjacent segments are joined by an equal-power raised-cosine
    crossfade of ``crossfade_s`` seconds; with crossfade 0 the output is
    a pure concatenation.
    """
    if plan.boundaries[-1] != len(buffer.samples):
        raise ValidationError("splice plan does not match this buffer's length")
    if crossfade_s is None:
        crossfade_s = plan.config.crossfade_s
    sr = buffer.sample_rate
    bounds = plan.boundaries
    segments = [buffer.samples[bounds[i] : bounds[i + 1]] for i in plan.permutation]
    fade = int(round(crossfade_s * sr))
    if fade == 0 or len(segments) == 1:
        out = np.concatenate(segments)
        return AudioBuffer(samples=out, sample_rate=sr)
    # equal-power gains: cos^2 + sin^2 = 1 over the overlap
    t = (np.arange(fade) + 0.5) / fade
    fade_out = np.cos(t * np.pi / 2.0)
    fade_in = np.sin(t * np.pi / 2.0)
    out = segments[0].copy()
    for seg in segments[1:]:
        out[-fade:] = out[-fade:] * fade_out + seg[:fade] * fade_in
        out = np.concatenate([out, seg[fade:]])
    return AudioBuffer(samples=out, sample_rate=sr)


def splice_file(in_path, out_path, config: SpliceConfig, plan_out=None) -> SplicePlan:
    """load -> plan -> apply -> write; returns the plan for audit logging."""
    buffer = load_wav(in_path)
    plan = plan_splice(buffer, config)
    spliced = apply_splice(buffer, plan)
    write_wav(out_path, spliced, fmt="float32")
    if plan_out is not None:
        with open(plan_out, "w") as fh:
            fh.write(plan.to_json())
    return plan
