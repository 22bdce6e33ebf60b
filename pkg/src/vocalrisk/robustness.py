"""Splice-robustness protocol.

Extracts features on original and randomly spliced versions of a corpus
and scores per-feature agreement with the concordance correlation
coefficient (CCC). A feature passes when CCC meets the threshold; a
deliberately dynamic control (whole-utterance F0 trend) is carried in
the report to show what splicing destroys.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .audio import load_wav, frame_signal
from .errors import DegenerateDataError, ValidationError
from .features import CORE_FEATURES, FEATURE_NAMES, FeatureConfig, extract_feature_vector
from .pitch import contour_slope, detect_f0
from .splice import SpliceConfig, apply_splice, plan_splice

CONTROL_FEATURE = "f0_trend_hz_per_s"

# Per-recording functionals compared in the report: everything except
# bookkeeping, plus the dynamic control.
REPORT_FEATURES = tuple(n for n in FEATURE_NAMES if n != "duration_s") + (CONTROL_FEATURE,)


def ccc(x, y) -> float:
    """Concordance correlation coefficient with population (1/n) moments:

        2*cov(x, y) / (var(x) + var(y) + (mean(x) - mean(y))^2)
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValidationError("ccc needs two equal-length 1-d series")
    if len(x) < 2:
        raise ValidationError("ccc needs at least 2 observations")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValidationError("ccc inputs must be finite")
    mx, my = x.mean(), y.mean()
    vx, vy = x.var(), y.var()
    denom = vx + vy + (mx - my) ** 2
    if denom == 0:
        raise DegenerateDataError("ccc undefined: both series constant and equal")
    cov = np.mean((x - mx) * (y - my))
    return float(2.0 * cov / denom)


def pearson(x, y) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    sx, sy = x.std(), y.std()
    if sx == 0 or sy == 0:
        return float("nan")
    return float(np.mean((x - x.mean()) * (y - y.mean())) / (sx * sy))


@dataclass(frozen=True)
class FeatureAgreement:
    name: str
    ccc: float
    pearson_r: float
    mean_difference: float
    n: int
    passed: bool


@dataclass(frozen=True)
class CccReport:
    features: dict  # name -> FeatureAgreement
    threshold: float
    corpus_size: int
    skipped: tuple = ()
    config: dict = field(default_factory=dict)

    def all_core_passed(self) -> bool:
        return all(self.features[name].passed for name in CORE_FEATURES)

    def to_json(self) -> str:
        return json.dumps(
            {
                "threshold": self.threshold,
                "corpus_size": self.corpus_size,
                "skipped": list(self.skipped),
                "config": self.config,
                "features": {
                    name: {
                        "ccc": agreement.ccc,
                        "pearson_r": agreement.pearson_r,
                        "mean_difference": agreement.mean_difference,
                        "n": agreement.n,
                        "passed": agreement.passed,
                    }
                    for name, agreement in self.features.items()
                },
            },
            indent=2,
            sort_keys=True,
        )


def _values_for(path, feature_config: FeatureConfig, splice_config: SpliceConfig | None):
    buffer = load_wav(path)
    if splice_config is not None:
        plan = plan_splice(buffer, splice_config)
        buffer = apply_splice(buffer, plan)
    vector = extract_feature_vector(buffer, feature_config)
    values = dict(vector.values)
    frames = frame_signal(buffer, feature_config.f0_frame_length_s, feature_config.hop_s, "rectangular")
    contour = detect_f0(
        frames, feature_config.f0_min_hz, feature_config.f0_max_hz, feature_config.voicing_threshold
    )
    values[CONTROL_FEATURE] = contour_slope(contour)
    return values


def robustness_report(
    corpus_dir,
    splice_config: SpliceConfig | None = None,
    feature_config: FeatureConfig | None = None,
    threshold: float = 0.95,
    master_seed: int = 0,
) -> CccReport:
    """Compare features on original vs spliced versions of every WAV in
    a directory; each file gets a fresh splice seed derived from the
    master seed."""
    if splice_config is None:
        splice_config = SpliceConfig()
    if feature_config is None:
        feature_config = FeatureConfig()
    paths = sorted(Path(corpus_dir).glob("*.wav"))
    seeds = np.random.SeedSequence(master_seed).generate_state(max(len(paths), 1))
    originals = []
    spliced = []
    skipped = []
    for path, seed in zip(paths, seeds):
        per_file = SpliceConfig(
            seg_min_s=splice_config.seg_min_s,
            seg_max_s=splice_config.seg_max_s,
            crossfade_s=splice_config.crossfade_s,
            seed=int(seed),
        )
        try:
            originals.append(_values_for(path, feature_config, None))
            spliced.append(_values_for(path, feature_config, per_file))
        except Exception as exc:  # skip-and-warn contract for unreadable files
            warnings.warn(f"skipping {path.name}: {exc}", stacklevel=2)
            skipped.append(path.name)
    if len(originals) < 10:
        raise ValidationError(
            f"only {len(originals)} usable recordings in {corpus_dir}; need at least 10"
        )

    agreements = {}
    for name in REPORT_FEATURES:
        pairs = [
            (o[name], s[name])
            for o, s in zip(originals, spliced)
            if o.get(name) is not None and s.get(name) is not None
        ]
        if len(pairs) < 2:
            continue
        x = np.array([p[0] for p in pairs])
        y = np.array([p[1] for p in pairs])
        try:
            value = ccc(x, y)
        except DegenerateDataError:
            continue
        agreements[name] = FeatureAgreement(
            name=name,
            ccc=value,
            pearson_r=pearson(x, y),
            mean_difference=float(np.mean(y - x)),
            n=len(pairs),
            passed=value >= threshold,
        )
    return CccReport(
        features=agreements,
        threshold=threshold,
        corpus_size=len(originals),
        skipped=tuple(skipped),
        config={
            "seg_min_s": splice_config.seg_min_s,
            "seg_max_s": splice_config.seg_max_s,
            "crossfade_s": splice_config.crossfade_s,
            "master_seed": master_seed,
        },
    )
