import json

import numpy as np
import pytest

from vocalrisk.errors import DegenerateDataError, ValidationError
from vocalrisk.robustness import CONTROL_FEATURE, ccc, pearson, robustness_report
from vocalrisk.splice import SpliceConfig
from vocalrisk.features import CORE_FEATURES


# ---------------------------------------------------------------------------
# concordance coefficient

def test_self_concordance():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(50)
    assert ccc(x, x) == pytest.approx(1.0, abs=1e-12)


def test_shift_closed_form():
    # ccc(x, x + c) = 2 var / (2 var + c^2); direct-computation oracle
    rng = np.random.default_rng(1)
    x = rng.standard_normal(100000)
    x = (x - x.mean()) / x.std()  # var exactly 1
    value = ccc(x, x + 1.0)
    assert value == pytest.approx(2.0 / 3.0, abs=1e-12)
    # independent direct computation from the definition
    y = x + 1.0
    direct = 2 * np.mean((x - x.mean()) * (y - y.mean())) / (
        x.var() + y.var() + (x.mean() - y.mean()) ** 2
    )
    assert value == pytest.approx(direct, abs=1e-15)


def test_perfect_anticoncordance():
    x = np.array([-2.0, -1.0, 0.0, 1.0, 2.0]) + 5.0
    y = -x + 2 * np.mean(x)
    assert ccc(x, y) == pytest.approx(-1.0, abs=1e-12)


def test_scale_and_shift_covariance():
    rng = np.random.default_rng(2)
    x = rng.standard_normal(200)
    y = 0.8 * x + 0.3 * rng.standard_normal(200)
    base = ccc(x, y)
    assert ccc(3.7 * x, 3.7 * y) == pytest.approx(base, abs=1e-12)
    assert ccc(-2.0 * x, -2.0 * y) == pytest.approx(base, abs=1e-12)
    assert ccc(x + 11.0, y + 11.0) == pytest.approx(base, abs=1e-12)


def test_mean_shift_penalty_monotone():
    rng = np.random.default_rng(3)
    x = rng.standard_normal(500)
    values = [ccc(x, x + c) for c in (0.0, 0.5, 1.0, 2.0)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_ccc_bounded_by_pearson():
    rng = np.random.default_rng(4)
    x = rng.standard_normal(300)
    y = 0.5 * x + rng.standard_normal(300) + 0.7
    assert abs(ccc(x, y)) <= abs(pearson(x, y)) + 1e-12


def test_length_mismatch_rejected():
    with pytest.raises(ValidationError):
        ccc(np.zeros(5), np.zeros(6))


def test_constant_inputs_rejected():
    with pytest.raises(DegenerateDataError):
        ccc(np.full(10, 2.0), np.full(10, 2.0))


# ---------------------------------------------------------------------------
# corpus report

def test_identity_splice_gives_perfect_agreement(desk_corpus):
    # segments longer than every file: single segment, identity shuffle
    config = SpliceConfig(seg_min_s=2.0, seg_max_s=60.0, crossfade_s=0.0)
    report = robustness_report(desk_corpus, splice_config=config, master_seed=3)
    # every file shorter than any possible second segment -> one segment
    for name in CORE_FEATURES:
        assert report.features[name].ccc == pytest.approx(1.0, abs=1e-9)


def test_report_deterministic(desk_corpus):
    a = robustness_report(desk_corpus, master_seed=7)
    b = robustness_report(desk_corpus, master_seed=7)
    assert a.to_json() == b.to_json()


def test_report_serializes(desk_corpus):
    report = robustness_report(desk_corpus, master_seed=5)
    data = json.loads(report.to_json())
    assert data["corpus_size"] == 32
    assert data["threshold"] == 0.95
    assert set(CORE_FEATURES) <= set(data["features"])
    assert CONTROL_FEATURE in data["features"]


def test_small_corpus_rejected(tmp_path):
    with pytest.raises(ValidationError, match="at least 10"):
        robustness_report(tmp_path)


def test_unreadable_files_skipped(desk_corpus, tmp_path):
    import shutil

    corpus = tmp_path / "corpus"
    corpus.mkdir()
    for path in sorted(desk_corpus.glob("*.wav"))[:12]:
        shutil.copy(path, corpus / path.name)
    (corpus / "broken.wav").write_bytes(b"RIFFgarbage")
    with pytest.warns(UserWarning, match="skipping broken.wav"):
        report = robustness_report(corpus, master_seed=1)
    assert report.corpus_size == 12
    assert report.skipped == ("broken.wav",)
