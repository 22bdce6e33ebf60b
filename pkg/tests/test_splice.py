import json

import numpy as np
import pytest

from vocalrisk.audio import AudioBuffer, load_wav
from vocalrisk.errors import ValidationError
from vocalrisk.splice import SpliceConfig, SplicePlan, apply_splice, plan_splice, splice_file

from conftest import SR, speech_utterance


def noise_buffer(dur=10.0, seed=0):
    rng = np.random.default_rng(seed)
    return AudioBuffer(0.5 * rng.uniform(-1, 1, int(dur * SR)), SR)


def test_too_short_to_splice():
    buf = noise_buffer(0.8)
    with pytest.raises(ValidationError, match="too short"):
        plan_splice(buf, SpliceConfig(seg_min_s=1.0, seg_max_s=1.0))


def test_exact_length_single_segment():
    buf = noise_buffer(1.0)
    plan = plan_splice(buf, SpliceConfig(seg_min_s=1.0, seg_max_s=1.0, crossfade_s=0.0))
    assert plan.n_segments == 1
    assert plan.permutation == (0,)
    assert plan.boundaries == (0, SR)


def test_plan_deterministic_and_segment_count_bounds():
    buf = noise_buffer(10.0)
    config = SpliceConfig(seed=42)
    plan1 = plan_splice(buf, config)
    plan2 = plan_splice(buf, config)
    assert plan1 == plan2
    assert 9 <= plan1.n_segments <= 16
    # boundaries strictly increasing, spanning the whole signal
    bounds = np.array(plan1.boundaries)
    assert bounds[0] == 0 and bounds[-1] == len(buf.samples)
    assert np.all(np.diff(bounds) > 0)
    assert sorted(plan1.permutation) == list(range(plan1.n_segments))


def test_identity_permutation_zero_crossfade_is_identity():
    buf = noise_buffer(3.0)
    plan = plan_splice(buf, SpliceConfig(seed=7))
    identity = SplicePlan(boundaries=plan.boundaries, permutation=tuple(range(plan.n_segments)), config=plan.config)
    out = apply_splice(buf, identity, crossfade_s=0.0)
    np.testing.assert_array_equal(out.samples, buf.samples)


def test_two_segment_swap_exact():
    buf = noise_buffer(2.0)
    n = len(buf.samples)
    plan = SplicePlan(boundaries=(0, n // 2, n), permutation=(1, 0))
    out = apply_splice(buf, plan, crossfade_s=0.0)
    expected = np.concatenate([buf.samples[n // 2 :], buf.samples[: n // 2]])
    np.testing.assert_array_equal(out.samples, expected)


def test_sample_multiset_preserved_outside_crossfades():
    buf = noise_buffer(5.0, seed=3)
    config = SpliceConfig(seed=5)
    plan = plan_splice(buf, config)
    out = apply_splice(buf, plan)
    fade = int(round(config.crossfade_s * SR))
    # samples never involved in a crossfade: strip fade-length windows at
    # every original segment edge and every output junction
    original = []
    for i in range(plan.n_segments):
        seg = buf.samples[plan.boundaries[i] : plan.boundaries[i + 1]]
        original.append(seg[fade:-fade])
    out_kept = []
    pos = 0
    for k, seg_idx in enumerate(plan.permutation):
        length = plan.boundaries[seg_idx + 1] - plan.boundaries[seg_idx]
        if k > 0:
            length -= fade  # junction consumed fade samples
        out_kept.append(out.samples[pos + fade : pos + length - fade])
        pos += length
    hist_in, edges = np.histogram(np.concatenate(original), bins=50, range=(-0.5, 0.5))
    hist_out, _ = np.histogram(np.concatenate(out_kept), bins=50, range=(-0.5, 0.5))
    # histogram oracle: identical multisets up to the few samples that sit
    # inside shifted window boundaries
    assert np.sum(np.abs(hist_in - hist_out)) <= 4 * plan.n_segments * fade


def test_determinism_end_to_end():
    buf = noise_buffer(6.0, seed=9)
    config = SpliceConfig(seed=11)
    out1 = apply_splice(buf, plan_splice(buf, config))
    out2 = apply_splice(buf, plan_splice(buf, config))
    np.testing.assert_array_equal(out1.samples, out2.samples)


def test_output_duration_bounds():
    buf = noise_buffer(8.0)
    config = SpliceConfig(seed=1)
    plan = plan_splice(buf, config)
    out = apply_splice(buf, plan)
    n = len(buf.samples)
    fade = int(round(config.crossfade_s * SR))
    assert n - plan.n_segments * fade <= len(out.samples) <= n


def test_rms_energy_preserved():
    rng = np.random.default_rng(12)
    buf = speech_utterance(rng, dur=5.0)
    plan = plan_splice(buf, SpliceConfig(seed=2))
    assert plan.n_segments >= 5
    out = apply_splice(buf, plan)
    rms_in = np.sqrt(np.mean(buf.samples**2))
    rms_out = np.sqrt(np.mean(out.samples**2))
    assert rms_out == pytest.approx(rms_in, rel=0.01)


def test_permutation_property_zero_crossfade():
    buf = noise_buffer(4.0, seed=5)
    plan = plan_splice(buf, SpliceConfig(seed=3, crossfade_s=0.0))
    out = apply_splice(buf, plan, crossfade_s=0.0)
    pos = 0
    for seg_idx in plan.permutation:
        seg = buf.samples[plan.boundaries[seg_idx] : plan.boundaries[seg_idx + 1]]
        np.testing.assert_array_equal(out.samples[pos : pos + len(seg)], seg)
        pos += len(seg)


def test_plan_buffer_mismatch_rejected():
    buf = noise_buffer(2.0)
    plan = SplicePlan(boundaries=(0, 100, 200), permutation=(1, 0))
    with pytest.raises(ValidationError, match="does not match"):
        apply_splice(buf, plan)


def test_bad_config_rejected():
    with pytest.raises(ValidationError):
        SpliceConfig(seg_min_s=2.0, seg_max_s=1.0)
    with pytest.raises(ValidationError):
        SpliceConfig(seg_min_s=0.6, crossfade_s=0.4)


def test_splice_file_round_trip(tmp_path):
    from vocalrisk.audio import write_wav

    buf = noise_buffer(3.0, seed=8)
    src = tmp_path / "in.wav"
    dst = tmp_path / "out.wav"
    plan_path = tmp_path / "plan.json"
    write_wav(src, buf, fmt="float32")
    plan = splice_file(src, dst, SpliceConfig(seed=4), plan_out=plan_path)
    out = load_wav(dst)
    assert len(out.samples) <= len(buf.samples)
    data = json.loads(plan_path.read_text())
    assert data["permutation"] == list(plan.permutation)
    assert data["boundaries"] == list(plan.boundaries)
    assert data["config"]["seed"] == 4
