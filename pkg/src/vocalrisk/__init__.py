"""Vocal biomarker toolkit: splice anonymization, acoustic descriptors,
splice-robustness validation, and cohort screening statistics."""

from .audio import AudioBuffer, FrameSequence, Spectrum, frame_signal, load_wav, magnitude_spectrum, write_wav
from .features import (
    CORE_FEATURES,
    FEATURE_NAMES,
    FeatureConfig,
    FeatureVector,
    MelConfig,
    extract_feature_vector,
)
from .kernels import BACKEND as KERNEL_BACKEND
from .pitch import F0Contour, detect_f0, f0_semitones
from .robustness import CccReport, ccc, robustness_report
from .splice import SpliceConfig, SplicePlan, apply_splice, plan_splice, splice_file
from .stats import fit_lda, stepwise_lda, train_linear_svm, svm_predict, ancova_feature, f_cdf
from .pipeline import (
    CohortTable,
    ParticipantRecord,
    ScreeningConfig,
    build_cohort,
    load_manifest,
    run_crossdb,
    run_screening,
)

__version__ = "0.1.0"
