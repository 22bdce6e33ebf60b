import csv
import json

import numpy as np
import pytest

from conftest import speech_utterance
from vocalrisk.audio import load_wav, write_wav
from vocalrisk.cli import main
from vocalrisk.features import FEATURE_NAMES
from vocalrisk.pipeline import EMOTION_COLUMNS, MANIFEST_COLUMNS


@pytest.fixture(scope="module")
def clip(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli_audio")
    rng = np.random.default_rng(7)
    path = root / "clip.wav"
    write_wav(path, speech_utterance(rng, dur=2.2), fmt="float32")
    return path


def test_splice_round_trip(tmp_path, clip, capsys):
    out = tmp_path / "anon.wav"
    plan = tmp_path / "plan.json"
    code = main(
        [
            "splice",
            "--in", str(clip),
            "--out", str(out),
            "--seed", "11",
            "--plan-out", str(plan),
        ]
    )
    assert code == 0
    assert "segments" in capsys.readouterr().out
    spliced = load_wav(out)
    original = load_wav(clip)
    assert abs(len(spliced.samples) - len(original.samples)) < original.sample_rate // 10
    data = json.loads(plan.read_text())
    assert len(data["permutation"]) == len(data["boundaries"]) - 1


def test_splice_same_seed_identical(tmp_path, clip):
    outs = [tmp_path / "a.wav", tmp_path / "b.wav"]
    for out in outs:
        assert main(["splice", "--in", str(clip), "--out", str(out), "--seed", "3"]) == 0
    np.testing.assert_array_equal(load_wav(outs[0]).samples, load_wav(outs[1]).samples)


def test_extract_writes_feature_csv(tmp_path, clip):
    out = tmp_path / "features.csv"
    assert main(["extract", "--in", str(clip), "--out", str(out)]) == 0
    with open(out) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["path", *FEATURE_NAMES, "flags"]
    assert len(rows) == 2
    assert rows[1][0] == str(clip)


def test_extract_directory_sorted(tmp_path, clip):
    adir = tmp_path / "corpus"
    adir.mkdir()
    rng = np.random.default_rng(13)
    for name in ("b.wav", "a.wav"):
        write_wav(adir / name, speech_utterance(rng, dur=1.3), fmt="float32")
    out = tmp_path / "features.csv"
    assert main(["extract", "--in", str(adir), "--out", str(out)]) == 0
    with open(out) as fh:
        rows = list(csv.reader(fh))
    assert [r[0].endswith("a.wav") for r in rows[1:]] == [True, False]


def test_missing_input_gives_io_exit_code(tmp_path):
    code = main(
        ["splice", "--in", str(tmp_path / "nope.wav"), "--out", str(tmp_path / "o.wav")]
    )
    assert code == 2


def test_bad_parameters_give_validation_exit_code(tmp_path, clip):
    code = main(
        [
            "splice",
            "--in", str(clip),
            "--out", str(tmp_path / "o.wav"),
            "--seg-min", "2.0",
            "--seg-max", "1.0",
        ]
    )
    assert code == 1


def test_degenerate_statistics_exit_code(tmp_path, clip, capsys):
    # single-group cohort: screening cannot run
    rows = []
    for pid in ("p1", "p2"):
        row = {
            "participant_id": pid,
            "gender": "f",
            "country": "uk",
            "phq8": 2,
            "gad7": 3,
            "wemwbs": 50,
            "audio_path": str(clip),
        }
        row.update({c: 3 for c in EMOTION_COLUMNS})
        rows.append(row)
    manifest = tmp_path / "m.csv"
    with open(manifest, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(MANIFEST_COLUMNS))
        writer.writeheader()
        writer.writerows(rows)
    code = main(["screen", "--manifest", str(manifest), "--out", str(tmp_path / "r.json")])
    assert code == 3
    assert "statistics error" in capsys.readouterr().err


def test_robustness_writes_json(tmp_path, capsys):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    rng = np.random.default_rng(21)
    for i in range(10):
        write_wav(corpus / f"u{i}.wav", speech_utterance(rng, dur=1.4), fmt="float32")
    out = tmp_path / "report.json"
    code = main(["robustness", "--corpus", str(corpus), "--out", str(out), "--seed", "5"])
    assert code == 0
    data = json.loads(out.read_text())
    assert data["corpus_size"] == 10
    printed = capsys.readouterr().out
    assert "ccc=" in printed


def test_config_toml_overrides(tmp_path, clip):
    config = tmp_path / "features.toml"
    config.write_text("f0_min_hz = 80.0\nf0_max_hz = 400.0\n\n[mel]\nn_filters = 20\n")
    out = tmp_path / "features.csv"
    code = main(["extract", "--in", str(clip), "--out", str(out), "--config", str(config)])
    assert code == 0
