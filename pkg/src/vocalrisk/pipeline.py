"""Cohort ingestion, per-participant aggregation, and orchestration of
the full screening chain (covariate-adjusted tests, discriminant
analysis, stepwise emotion selection) plus the cross-corpus grid."""

from __future__ import annotations

import csv
import json
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .audio import load_wav
from .errors import DegenerateDataError, ValidationError
from .features import FEATURE_NAMES, FeatureConfig, extract_feature_vector
from .splice import SpliceConfig, apply_splice, plan_splice
from .stats import (
    AncovaRow,
    DiscriminantResult,
    StepwiseTrace,
    ancova_feature,
    benjamini_hochberg,
    fit_lda,
    stepwise_lda,
    svm_predict,
    train_linear_svm,
)

DISCLAIMER = "screening research only; not a clinical diagnostic output"

RISK_CUTOFF = 10  # phq8 >= cutoff marks the high-risk group

EMOTION_COLUMNS = (
    "int_anxiety",
    "int_sadness",
    "int_shame",
    "int_amusement",
    "int_joy",
    "int_pleasure",
    "int_7",
    "int_8",
    "int_9",
    "int_10",
    "int_11",
    "int_12",
)

MANIFEST_COLUMNS = (
    "participant_id",
    "gender",
    "country",
    "phq8",
    "gad7",
    "wemwbs",
    *EMOTION_COLUMNS,
    "audio_path",
)

SCORE_RANGES = {"phq8": (0, 24), "gad7": (0, 21), "wemwbs": (14, 70)}

# per-recording functionals that enter the statistics (bookkeeping excluded)
ANALYSIS_FEATURES = tuple(n for n in FEATURE_NAMES if n != "duration_s")


@dataclass(frozen=True)
class ParticipantRecord:
    participant_id: str
    gender: str
    country: str
    phq8: int
    gad7: int
    wemwbs: int
    emotion_intensities: dict  # column -> float | None
    recordings: tuple

    @property
    def high_risk(self) -> bool:
        return self.phq8 >= RISK_CUTOFF


@dataclass(frozen=True)
class CohortRow:
    participant_id: str
    high_risk: bool
    gender: str
    country: str
    gad7: int
    wemwbs: int
    emotion_intensities: dict
    features: dict  # feature name -> float | None
    n_recordings: int


@dataclass(frozen=True)
class CohortTable:
    rows: tuple

    def __len__(self):
        return len(self.rows)

    def feature_column(self, name):
        return [row.features.get(name) for row in self.rows]


@dataclass(frozen=True)
class ScreeningConfig:
    significance: float = 0.05
    covariates: tuple = ("gad7", "wemwbs")
    categorical_covariates: tuple = ("gender", "country")
    p_enter: float = 0.05
    p_remove: float = 0.10
    ridge: float | None = None


@dataclass(frozen=True)
class AnalysisReport:
    ancova: tuple  # AncovaRow, one per feature
    bh_adjusted: dict  # feature -> FDR-adjusted p (supplementary, non-standard column)
    significant_features: tuple
    discriminant: DiscriminantResult | None
    stepwise: StepwiseTrace | None
    config: dict
    warnings: tuple
    n_low: int
    n_high: int
    disclaimer: str = DISCLAIMER


# ---------------------------------------------------------------------------
# manifest loading

def _parse_int(text, name, row_num, lo, hi):
    try:
        value = int(text)
    except (TypeError, ValueError):
        raise ValidationError(f"row {row_num}: {name}={text!r} is not an integer")
    if not lo <= value <= hi:
        raise ValidationError(f"row {row_num}: {name}={value} outside range {lo}-{hi}")
    return value


def load_manifest(csv_path) -> list:
    """Read the cohort CSV (one row per recording) into participant
    records, grouping repeated rows by participant_id."""
    with open(csv_path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValidationError(f"{csv_path}: empty manifest")
        missing = [c for c in MANIFEST_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise ValidationError(f"{csv_path}: missing columns {missing}")
        grouped: dict[str, dict] = {}
        for row_num, row in enumerate(reader, start=2):
            pid = row["participant_id"].strip()
            if not pid:
                raise ValidationError(f"row {row_num}: empty participant_id")
            phq8 = _parse_int(row["phq8"], "phq8", row_num, *SCORE_RANGES["phq8"])
            gad7 = _parse_int(row["gad7"], "gad7", row_num, *SCORE_RANGES["gad7"])
            wemwbs = _parse_int(row["wemwbs"], "wemwbs", row_num, *SCORE_RANGES["wemwbs"])
            emotions = {}
            for col in EMOTION_COLUMNS:
                text = (row[col] or "").strip()
                if text == "":
                    emotions[col] = None
                else:
                    try:
                        value = float(text)
                    except ValueError:
                        raise ValidationError(f"row {row_num}: {col}={text!r} is not a number")
                    if not 0 <= value <= 7:
                        raise ValidationError(f"row {row_num}: {col}={value} outside range 0-7")
                    emotions[col] = value
            demographics = (row["gender"].strip(), row["country"].strip(), phq8, gad7, wemwbs)
            entry = grouped.get(pid)
            if entry is None:
                grouped[pid] = {
                    "demographics": demographics,
                    "emotions": [emotions],
                    "recordings": [row["audio_path"].strip()],
                }
            else:
                if entry["demographics"] != demographics:
                    raise ValidationError(
                        f"row {row_num}: participant {pid} has conflicting demographics"
                    )
                entry["emotions"].append(emotions)
                entry["recordings"].append(row["audio_path"].strip())
    records = []
    for pid, entry in grouped.items():
        gender, country, phq8, gad7, wemwbs = entry["demographics"]
        # average repeated emotion reports, ignoring missing entries
        averaged = {}
        for col in EMOTION_COLUMNS:
            present = [e[col] for e in entry["emotions"] if e[col] is not None]
            averaged[col] = float(np.mean(present)) if present else None
        records.append(
            ParticipantRecord(
                participant_id=pid,
                gender=gender,
                country=country,
                phq8=phq8,
                gad7=gad7,
                wemwbs=wemwbs,
                emotion_intensities=averaged,
                recordings=tuple(entry["recordings"]),
            )
        )
    return records


# ---------------------------------------------------------------------------
# feature extraction and aggregation

def _extract_one(args):
    path, feature_config, splice_config, seed = args
    buffer = load_wav(path)
    if splice_config is not None:
        per_file = SpliceConfig(
            seg_min_s=splice_config.seg_min_s,
            seg_max_s=splice_config.seg_max_s,
            crossfade_s=splice_config.crossfade_s,
            seed=seed,
        )
        buffer = apply_splice(buffer, plan_splice(buffer, per_file))
    return extract_feature_vector(buffer, feature_config).values


def build_cohort(
    records,
    feature_config: FeatureConfig | None = None,
    splice_config: SpliceConfig | None = None,
    jobs: int = 1,
    master_seed: int = 0,
    collected_warnings: list | None = None,
) -> CohortTable:
    """Extract features for every recording, average per participant,
    and attach the risk label. Participants with no extractable
    recording are excluded with a warning."""
    if feature_config is None:
        feature_config = FeatureConfig()
    tasks = []
    owners = []
    for ri, record in enumerate(records):
        for k, path in enumerate(record.recordings):
            seed = int(np.random.SeedSequence([master_seed, ri, k]).generate_state(1)[0])
            tasks.append((path, feature_config, splice_config, seed))
            owners.append(record.participant_id)

    results: dict[str, list] = {r.participant_id: [] for r in records}
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = []
            for task in tasks:
                outcomes.append(pool.submit(_extract_one, task))
            raw = []
            for fut, task in zip(outcomes, tasks):
                try:
                    raw.append(fut.result())
                except Exception as exc:  # per-file failures skip with warning
                    raw.append(exc)
    else:
        raw = []
        for task in tasks:
            try:
                raw.append(_extract_one(task))
            except Exception as exc:
                raw.append(exc)

    for owner, task, outcome in zip(owners, tasks, raw):
        if isinstance(outcome, Exception):
            message = f"skipping recording {task[0]} of {owner}: {outcome}"
            warnings.warn(message, stacklevel=2)
            if collected_warnings is not None:
                collected_warnings.append(message)
        else:
            results[owner].append(outcome)

    rows = []
    for record in records:
        vectors = results[record.participant_id]
        if not vectors:
            message = f"excluding participant {record.participant_id}: no extractable recording"
            warnings.warn(message, stacklevel=2)
            if collected_warnings is not None:
                collected_warnings.append(message)
            continue
        averaged = {}
        for name in FEATURE_NAMES:
            present = [v[name] for v in vectors if v.get(name) is not None]
            averaged[name] = float(np.mean(present)) if present else None
        rows.append(
            CohortRow(
                participant_id=record.participant_id,
                high_risk=record.high_risk,
                gender=record.gender,
                country=record.country,
                gad7=record.gad7,
                wemwbs=record.wemwbs,
                emotion_intensities=record.emotion_intensities,
                features=averaged,
                n_recordings=len(vectors),
            )
        )
    return CohortTable(rows=tuple(rows))


# ---------------------------------------------------------------------------
# screening chain

def run_screening(cohort: CohortTable, config: ScreeningConfig | None = None) -> AnalysisReport:
    """Covariate-adjusted group test per feature, discriminant analysis
    on the significant set, stepwise selection over the emotion
    intensities."""
    if config is None:
        config = ScreeningConfig()
    rows = cohort.rows
    n_high = sum(r.high_risk for r in rows)
    n_low = len(rows) - n_high
    if n_low < 2 or n_high < 2:
        raise DegenerateDataError(
            f"need at least 2 participants per risk group (low={n_low}, high={n_high})"
        )
    notes: list[str] = []

    ancova_rows: list[AncovaRow] = []
    for name in ANALYSIS_FEATURES:
        cases = [r for r in rows if r.features.get(name) is not None]
        y = [r.features[name] for r in cases]
        group = [1 if r.high_risk else 0 for r in cases]
        if sum(group) < 2 or len(group) - sum(group) < 2:
            notes.append(f"skipping {name}: too few complete cases per group")
            continue
        if np.var(y) == 0:
            notes.append(f"skipping {name}: constant across the cohort")
            continue
        categorical = {c: [getattr(r, c) for r in cases] for c in config.categorical_covariates}
        continuous = {c: [getattr(r, c) for r in cases] for c in config.covariates}
        try:
            ancova_rows.append(ancova_feature(y, group, categorical, continuous, feature_name=name))
        except DegenerateDataError as exc:
            notes.append(f"skipping {name}: {exc}")

    bh = {}
    if ancova_rows:
        adjusted = benjamini_hochberg([row.p_value for row in ancova_rows])
        bh = {row.feature: float(a) for row, a in zip(ancova_rows, adjusted)}

    significant = tuple(
        row.feature for row in ancova_rows if row.p_value <= config.significance
    )

    discriminant = None
    if significant:
        cases = [
            r for r in rows if all(r.features.get(name) is not None for name in significant)
        ]
        X = np.array([[r.features[name] for name in significant] for r in cases])
        labels = np.array([1 if r.high_risk else 0 for r in cases])
        if np.sum(labels == 0) >= 2 and np.sum(labels == 1) >= 2:
            discriminant = fit_lda(X, labels, ridge=config.ridge, variables=significant)
        else:
            notes.append("discriminant analysis skipped: too few complete cases per group")

    stepwise = None
    emotion_cases = [
        r
        for r in rows
        if all(r.emotion_intensities.get(c) is not None for c in EMOTION_COLUMNS)
    ]
    if len(emotion_cases) >= 4:
        Xe = np.array(
            [[r.emotion_intensities[c] for c in EMOTION_COLUMNS] for r in emotion_cases]
        )
        keep = [j for j in range(Xe.shape[1]) if np.var(Xe[:, j]) > 0]
        labels_e = np.array([1 if r.high_risk else 0 for r in emotion_cases])
        if keep and len(set(labels_e.tolist())) == 2:
            stepwise = stepwise_lda(
                Xe[:, keep],
                labels_e,
                variables=tuple(EMOTION_COLUMNS[j] for j in keep),
                p_enter=config.p_enter,
                p_remove=config.p_remove,
            )
        else:
            notes.append("stepwise selection skipped: constant intensities or single group")
    else:
        notes.append("stepwise selection skipped: too few complete emotion reports")

    return AnalysisReport(
        ancova=tuple(ancova_rows),
        bh_adjusted=bh,
        significant_features=significant,
        discriminant=discriminant,
        stepwise=stepwise,
        config={
            "significance": config.significance,
            "covariates": list(config.covariates),
            "categorical_covariates": list(config.categorical_covariates),
            "p_enter": config.p_enter,
            "p_remove": config.p_remove,
            "ridge": config.ridge,
        },
        warnings=tuple(notes),
        n_low=n_low,
        n_high=n_high,
    )


# ---------------------------------------------------------------------------
# cross-corpus grid

CROSSDB_LABELS = ("angry", "happy", "neutral", "sad")


def _load_corpus(manifest_path, feature_config):
    """Corpus manifest: CSV with label,audio_path[,split]."""
    entries = []
    with open(manifest_path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"label", "audio_path"} <= set(reader.fieldnames):
            raise ValidationError(f"{manifest_path}: needs columns label,audio_path[,split]")
        has_split = "split" in reader.fieldnames
        for row_num, row in enumerate(reader, start=2):
            label = row["label"].strip()
            if label not in CROSSDB_LABELS:
                raise ValidationError(
                    f"{manifest_path} row {row_num}: label {label!r} not in {CROSSDB_LABELS}"
                )
            split = row["split"].strip() if has_split and row.get("split") else ""
            entries.append((label, row["audio_path"].strip(), split))
    vectors = []
    labels = []
    splits = []
    per_class_count: dict[str, int] = {}
    for label, path, split in entries:
        values = extract_feature_vector(load_wav(path), feature_config).values
        vectors.append(values)
        labels.append(label)
        if not split:
            # deterministic alternating split within each class
            k = per_class_count.get(label, 0)
            split = "train" if k % 2 == 0 else "test"
            per_class_count[label] = k + 1
        splits.append(split)
    return vectors, labels, splits


def run_crossdb(manifest_paths, feature_config: FeatureConfig | None = None, cost: float = 0.1) -> dict:
    """N x N accuracy grid: train on the row corpus, test on the column
    corpus; the diagonal uses the corpus's own train/test splits."""
    if feature_config is None:
        feature_config = FeatureConfig()
    if len(manifest_paths) < 2:
        raise ValidationError("cross-corpus grid needs at least 2 corpora")
    corpora = []
    label_sets = []
    for path in manifest_paths:
        vectors, labels, splits = _load_corpus(path, feature_config)
        corpora.append((vectors, labels, splits))
        label_sets.append(frozenset(labels))
    if len(set(label_sets)) != 1:
        raise ValidationError(f"label sets differ across corpora: {sorted(map(sorted, label_sets))}")

    # features usable everywhere: finite in every recording of every corpus
    usable = [
        name
        for name in ANALYSIS_FEATURES
        if all(v.get(name) is not None for vectors, _, _ in corpora for v in vectors)
    ]
    if not usable:
        raise DegenerateDataError("no feature is complete across all corpora")

    def matrix(vectors, indices):
        return np.array([[vectors[i][name] for name in usable] for i in indices])

    names = [Path(p).stem for p in manifest_paths]
    n = len(corpora)
    grid = np.zeros((n, n))
    for i, (vec_i, lab_i, split_i) in enumerate(corpora):
        for j, (vec_j, lab_j, split_j) in enumerate(corpora):
            if i == j:
                train_idx = [k for k, s in enumerate(split_i) if s == "train"]
                test_idx = [k for k, s in enumerate(split_i) if s == "test"]
            else:
                train_idx = list(range(len(vec_i)))
                test_idx = None
            model = train_linear_svm(
                matrix(vec_i, train_idx), np.array([lab_i[k] for k in train_idx]), cost=cost
            )
            if i == j:
                X_test = matrix(vec_i, test_idx)
                y_test = np.array([lab_i[k] for k in test_idx])
            else:
                X_test = matrix(vec_j, list(range(len(vec_j))))
                y_test = np.array(lab_j)
            grid[i, j] = float(np.mean(svm_predict(model, X_test) == y_test))
    return {
        "corpora": names,
        "features": usable,
        "cost": cost,
        "accuracy": grid.tolist(),
        "disclaimer": DISCLAIMER,
    }


# ---------------------------------------------------------------------------
# report serialization

def report_to_dict(report: AnalysisReport) -> dict:
    data = {
        "disclaimer": report.disclaimer,
        "n_low": report.n_low,
        "n_high": report.n_high,
        "config": report.config,
        "warnings": list(report.warnings),
        "ancova": [
            {
                "feature": row.feature,
                "adjusted_mean_low": row.adjusted_mean_low,
                "adjusted_mean_high": row.adjusted_mean_high,
                "f": row.f_statistic,
                "df1": row.df1,
                "df2": row.df2,
                "p": row.p_value,
                "partial_eta_sq": row.partial_eta_sq,
                "bh_adjusted_p": report.bh_adjusted.get(row.feature),
                "n": row.n,
            }
            for row in report.ancova
        ],
        "significant_features": list(report.significant_features),
        "discriminant": None,
        "stepwise": None,
    }
    if report.discriminant is not None:
        d = report.discriminant
        data["discriminant"] = {
            "variables": list(d.variables),
            "structure_matrix": d.structure_matrix,
            "wilks_lambda": d.wilks_lambda,
            "lambda_p_value": d.lambda_p_value,
            "resubstitution_accuracy": d.resubstitution_accuracy,
            "loo_accuracy": d.loo_accuracy,
            "centroids": list(d.centroids),
            "ridge_used": d.ridge_used,
        }
    if report.stepwise is not None:
        s = report.stepwise
        data["stepwise"] = {
            "events": [
                {"action": e.action, "variable": e.variable, "f": e.f_statistic, "p": e.p_value}
                for e in s.events
            ],
            "selected": list(s.selected),
            "removal_significance": s.removal_significance,
        }
    return data


def render_text(report: AnalysisReport) -> str:
    """Aligned human-readable rendering; p and eta^2 to 3 decimals,
    means to 2."""
    lines = [DISCLAIMER, "", f"groups: low={report.n_low} high={report.n_high}", ""]
    header = f"{'feature':<24}{'low':>10}{'high':>10}{'p':>8}{'eta^2':>8}"
    lines.append(header)
    lines.append("-" * len(header))
    for row in report.ancova:
        lines.append(
            f"{row.feature:<24}{row.adjusted_mean_low:>10.2f}{row.adjusted_mean_high:>10.2f}"
            f"{row.p_value:>8.3f}{row.partial_eta_sq:>8.3f}"
        )
    if report.discriminant is not None:
        d = report.discriminant
        lines.append("")
        lines.append("discriminant analysis (structure matrix):")
        for name, value in sorted(d.structure_matrix.items(), key=lambda kv: -abs(kv[1])):
            lines.append(f"  {name:<24}{value:>8.3f}")
        lines.append(
            f"  wilks_lambda={d.wilks_lambda:.3f} p={d.lambda_p_value:.3f} "
            f"accuracy={d.resubstitution_accuracy:.1%} loo={d.loo_accuracy:.1%}"
        )
    if report.stepwise is not None:
        lines.append("")
        lines.append("stepwise emotion-intensity selection:")
        for e in report.stepwise.events:
            lines.append(f"  {e.action:<7}{e.variable:<16}F={e.f_statistic:.2f} p={e.p_value:.3f}")
        for name, p in report.stepwise.removal_significance.items():
            lines.append(f"  retained {name}: sig. of F to remove {p:.3f}")
    for note in report.warnings:
        lines.append(f"warning: {note}")
    return "\n".join(lines) + "\n"


def emit_report(report: AnalysisReport, path, fmt: str = "json") -> None:
    path = Path(path)
    if fmt == "json":
        path.write_text(json.dumps(report_to_dict(report), indent=2, sort_keys=True))
    elif fmt == "text":
        path.write_text(render_text(report))
    else:
        raise ValidationError(f"unknown report format {fmt!r}; use json or text")
