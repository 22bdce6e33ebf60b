"""Command line interface.

Subcommands: splice, extract, robustness, screen, crossdb.
Exit codes: 0 success, 1 validation error, 2 I/O error,
3 degenerate-statistics error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

from .audio import load_wav
from .errors import AudioIOError, DegenerateDataError, ValidationError
from .features import FEATURE_NAMES, FeatureConfig, extract_feature_vector
from .pipeline import (
    ScreeningConfig,
    build_cohort,
    emit_report,
    load_manifest,
    run_crossdb,
    run_screening,
)
from .robustness import robustness_report
from .splice import SpliceConfig, splice_file


def _feature_config(path) -> FeatureConfig:
    if path is None:
        return FeatureConfig()
    try:
        import tomllib
    except ModuleNotFoundError:  # Python < 3.11
        import tomli as tomllib

    with open(path, "rb") as fh:
        return FeatureConfig.from_dict(tomllib.load(fh))


def _add_common(parser):
    parser.add_argument("--seed", type=int, default=0, help="master random seed")
    parser.add_argument("--jobs", type=int, default=1, help="parallel extraction workers")
    parser.add_argument("--config", default=None, help="feature config TOML")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vocalrisk")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("splice", help="anonymize one recording by random splicing")
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--out", dest="out_path", required=True)
    p.add_argument("--seg-min", type=float, default=0.6)
    p.add_argument("--seg-max", type=float, default=1.2)
    p.add_argument("--crossfade", type=float, default=0.01)
    p.add_argument("--plan-out", default=None, help="write the splice plan as JSON")
    _add_common(p)

    p = sub.add_parser("extract", help="extract features from a wav file or directory")
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--out", dest="out_path", required=True, help="output CSV")
    _add_common(p)

    p = sub.add_parser("robustness", help="splice-robustness report over a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--threshold", type=float, default=0.95)
    p.add_argument("--out", dest="out_path", required=True, help="output JSON")
    p.add_argument("--seg-min", type=float, default=0.6)
    p.add_argument("--seg-max", type=float, default=1.2)
    p.add_argument("--crossfade", type=float, default=0.01)
    _add_common(p)

    p = sub.add_parser("screen", help="full screening chain over a cohort manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", dest="out_path", required=True, help="output JSON report")
    p.add_argument("--text-out", default=None, help="also write a text rendering")
    p.add_argument("--splice", action="store_true", help="splice recordings before extraction")
    p.add_argument("--significance", type=float, default=0.05)
    p.add_argument("--ridge", type=float, default=None)
    _add_common(p)

    p = sub.add_parser("crossdb", help="cross-corpus classification grid")
    p.add_argument("--manifests", nargs="+", required=True, help="corpus CSVs (label,audio_path[,split])")
    p.add_argument("--out", dest="out_path", required=True, help="output JSON")
    p.add_argument("--cost", type=float, default=0.1, help="SVM misclassification cost")
    _add_common(p)

    return parser


def _cmd_splice(args) -> None:
    config = SpliceConfig(
        seg_min_s=args.seg_min,
        seg_max_s=args.seg_max,
        crossfade_s=args.crossfade,
        seed=args.seed,
    )
    plan = splice_file(args.in_path, args.out_path, config, plan_out=args.plan_out)
    print(f"spliced {args.in_path} -> {args.out_path} ({plan.n_segments} segments)")


def _cmd_extract(args) -> None:
    config = _feature_config(args.config)
    target = Path(args.in_path)
    paths = sorted(target.glob("*.wav")) if target.is_dir() else [target]
    if not paths:
        raise ValidationError(f"no wav files under {target}")
    with open(args.out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["path", *FEATURE_NAMES, "flags"])
        for path in paths:
            vector = extract_feature_vector(load_wav(path), config)
            writer.writerow([str(path), *vector.as_row(), ";".join(vector.flags)])
    print(f"wrote {args.out_path} ({len(paths)} recordings)")


def _cmd_robustness(args) -> None:
    splice_config = SpliceConfig(
        seg_min_s=args.seg_min, seg_max_s=args.seg_max, crossfade_s=args.crossfade
    )
    report = robustness_report(
        args.corpus,
        splice_config=splice_config,
        feature_config=_feature_config(args.config),
        threshold=args.threshold,
        master_seed=args.seed,
    )
    Path(args.out_path).write_text(report.to_json())
    for name, agreement in report.features.items():
        status = "pass" if agreement.passed else "FAIL"
        print(f"{status}  {name:<24} ccc={agreement.ccc:.4f}")


def _cmd_screen(args) -> None:
    records = load_manifest(args.manifest)
    splice_config = SpliceConfig(seed=args.seed) if args.splice else None
    cohort_warnings: list = []
    cohort = build_cohort(
        records,
        feature_config=_feature_config(args.config),
        splice_config=splice_config,
        jobs=args.jobs,
        master_seed=args.seed,
        collected_warnings=cohort_warnings,
    )
    config = ScreeningConfig(significance=args.significance, ridge=args.ridge)
    report = run_screening(cohort, config)
    if cohort_warnings:
        report = replace(report, warnings=tuple(cohort_warnings) + report.warnings)
    emit_report(report, args.out_path, fmt="json")
    if args.text_out:
        emit_report(report, args.text_out, fmt="text")
    print(f"wrote {args.out_path}")


def _cmd_crossdb(args) -> None:
    result = run_crossdb(args.manifests, feature_config=_feature_config(args.config), cost=args.cost)
    Path(args.out_path).write_text(json.dumps(result, indent=2, sort_keys=True))
    print(f"wrote {args.out_path}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "splice": _cmd_splice,
        "extract": _cmd_extract,
        "robustness": _cmd_robustness,
        "screen": _cmd_screen,
        "crossdb": _cmd_crossdb,
    }
    try:
        handlers[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (AudioIOError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2
    except DegenerateDataError as exc:
        print(f"statistics error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
