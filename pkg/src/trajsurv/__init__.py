"""Enrolment-spell reconstruction and dual-outcome survival analysis.

The pipeline turns event-level administrative records into per-student
histories, splits them into enrolment spells under an inactivity-gap rule,
types the transitions between spells, and fits right-censored Kaplan-Meier
curves for two outcomes: time to definitive dropout and time to the first
major switch.  A seedable synthetic-cohort generator with closed-form
survival oracles backs the test suite.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .estimator import (
    LogRankResult,
    SurvivalCurve,
    SurvivalSummary,
    chi_square_sf,
    greenwood_ci,
    km_fit,
    log_rank,
    median_survival,
    summarize,
    survival_at,
)
from .ingest import (
    EntryPeriod,
    EventKind,
    EventRecord,
    RecordError,
    SkipEntry,
    StudentHistory,
    ValidationError,
    assign_entry_period,
    build_histories,
    parse_events,
)
from .outcomes import (
    OutcomeDataset,
    SubjectRecord,
    SubjectStatus,
    build_dropout_record,
    build_switch_record,
    stratify,
)
from .pipeline import AnalysisResult, run_pipeline
from .synth import CohortSpec, HazardSpec, generate_cohort, sample_piecewise_exp, true_survival
from .trajectory import (
    GapConfig,
    Spell,
    Transition,
    TransitionKind,
    build_spells,
    classify_transitions,
    first_major_switch,
)

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "__version__",
    "AnalysisResult",
    "CohortSpec",
    "EntryPeriod",
    "EventKind",
    "EventRecord",
    "GapConfig",
    "HazardSpec",
    "LogRankResult",
    "OutcomeDataset",
    "RecordError",
    "SkipEntry",
    "Spell",
    "StudentHistory",
    "SubjectRecord",
    "SubjectStatus",
    "SurvivalCurve",
    "SurvivalSummary",
    "Transition",
    "TransitionKind",
    "ValidationError",
    "assign_entry_period",
    "build_dropout_record",
    "build_histories",
    "build_spells",
    "build_switch_record",
    "chi_square_sf",
    "classify_transitions",
    "first_major_switch",
    "generate_cohort",
    "greenwood_ci",
    "km_fit",
    "log_rank",
    "median_survival",
    "parse_events",
    "run_pipeline",
    "sample_piecewise_exp",
    "stratify",
    "summarize",
    "survival_at",
    "true_survival",
]
