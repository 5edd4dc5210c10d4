"""Touchpad-gesture continuous authentication.

Pipeline: decode multi-touch event logs into gesture samples, type them
(tap, forward, backward, downward), extract force-model features, fit
per-user statistics, and accept or reject blocks of test gestures with a
distribution-free concentration-bound classifier. An evaluation harness
reproduces randomized TPR/FPR trials, rho sweeps with interpolated EER,
per-feature frequencies, and behavioural-evolution scenarios.
"""

from glanceauth.backend import BACKEND
from glanceauth.chebyshev import (
    BlockDecision,
    ConstantFeatureWarning,
    DecisionConfig,
    GestureModel,
    SeriesStat,
    UnitaryStat,
    UserModel,
    chebyshev_threshold,
    classify_block,
    decision_boundary,
    f_series,
    f_unitary,
    fit_series,
    fit_unitary,
    g_vote,
    lookup_rho,
    train_user_model,
)
from glanceauth.errors import (
    ConfigError,
    FeatureError,
    GlanceAuthError,
    IntegrityError,
    ModelError,
    ParseError,
    StoreError,
    TrainingError,
    VersionError,
)
from glanceauth.evaluate import (
    Dataset,
    EvolutionConfig,
    TrialConfig,
    TrialReport,
    compute_aer,
    compute_eer,
    roc_sweep,
    run_evolution,
    run_fpr_trials,
    run_report,
    run_tpr_trials,
)
from glanceauth.events import (
    RawEvent,
    RawSample,
    Reading,
    SampleAssembler,
    assemble_samples,
    format_event_line,
    parse_event_line,
    read_event_log,
)
from glanceauth.features import (
    ExtractConfig,
    FeatureSet,
    ResampleConfig,
    extract_features,
    extract_swipe,
    extract_tap,
    feature_ids,
    force_magnitude,
    resample_series,
)
from glanceauth.gestures import (
    GestureSample,
    GestureType,
    TypingConfig,
    classify_gesture,
    parse_combination,
)
from glanceauth.store import (
    load_dataset,
    load_model,
    load_samples,
    save_dataset,
    save_model,
    save_samples,
)
from glanceauth.synth import SynthConfig, synth_generate

__version__ = "0.1.0"
