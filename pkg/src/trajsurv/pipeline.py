"""End-to-end analysis: histories -> spells -> outcomes -> fitted curves.

Shared by the CLI ``analyze`` command and the sensitivity protocols, which
re-run it under varied configurations.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date

import numpy as np

from .estimator import LogRankResult, SurvivalCurve, SurvivalSummary, km_fit, log_rank, summarize
from .ingest import StudentHistory, ValidationError
from .outcomes import OutcomeDataset, academic_year_origin, build_outcome_datasets, stratify
from .trajectory import GapConfig, Spell, Transition, build_spells, classify_transitions

ORIGIN_EXACT = "exact_date"
ORIGIN_ACADEMIC_YEAR = "academic_year"

DEFAULT_PROBES_DROPOUT = (1.0, 3.0, 5.0, 8.0)
DEFAULT_PROBES_SWITCH = (0.5, 1.0, 2.0, 3.0)


@dataclass(frozen=True)
class OutcomeFit:
    dataset: OutcomeDataset
    curve: SurvivalCurve
    summary: SurvivalSummary
    strata_curves: dict[str, SurvivalCurve]
    strata_summaries: dict[str, SurvivalSummary]
    logrank: LogRankResult | None


@dataclass(frozen=True)
class AnalysisResult:
    window_years: float
    observation_end: date
    origin: str
    boundary_month: int
    histories: tuple[StudentHistory, ...]
    spells_by_student: dict[str, list[Spell]]
    transitions_by_student: dict[str, list[Transition]]
    transitions: tuple[Transition, ...]
    dropout: OutcomeFit
    switch: OutcomeFit


def _fit_outcome(dataset: OutcomeDataset, probes: tuple[float, ...]) -> OutcomeFit:
    curve = km_fit(dataset.records)
    strata = stratify(dataset, "entry_period")
    strata_curves = {label: km_fit(part.records) for label, part in strata.items()}
    logrank = None
    if len(strata) >= 2:
        logrank = log_rank({label: part.records for label, part in strata.items()})
    return OutcomeFit(
        dataset=dataset,
        curve=curve,
        summary=summarize(curve, probes),
        strata_curves=strata_curves,
        strata_summaries={label: summarize(c, probes) for label, c in strata_curves.items()},
        logrank=logrank,
    )


def run_pipeline(
    histories: list[StudentHistory],
    config: GapConfig,
    origin: str = ORIGIN_EXACT,
    boundary_month: int = 1,
    probes_dropout: tuple[float, ...] = DEFAULT_PROBES_DROPOUT,
    probes_switch: tuple[float, ...] = DEFAULT_PROBES_SWITCH,
) -> AnalysisResult:
    """Run the full pipeline over already-built histories.

    The observation end must not precede any event date, otherwise trailing
    inactivity would be computed against a horizon inside the data.
    """
    if origin not in (ORIGIN_EXACT, ORIGIN_ACADEMIC_YEAR):
        raise ValueError(f"unknown time origin {origin!r}")
    if not histories:
        raise ValidationError("no usable student histories")
    latest = max(event.date for history in histories for event in history.events)
    if config.observation_end < latest:
        raise ValidationError(
            f"observation end {config.observation_end.isoformat()} precedes the latest event {latest.isoformat()}"
        )

    spells_by: dict[str, list[Spell]] = {}
    transitions_by: dict[str, list[Transition]] = {}
    all_transitions: list[Transition] = []
    for history in histories:
        spells = build_spells(history, config)
        transitions = classify_transitions(spells)
        spells_by[history.student_id] = spells
        transitions_by[history.student_id] = transitions
        all_transitions.extend(transitions)

    origin_for = None
    if origin == ORIGIN_ACADEMIC_YEAR:
        origin_for = lambda history: academic_year_origin(history, boundary_month)  # noqa: E731

    dataset_a, dataset_b = build_outcome_datasets(histories, spells_by, transitions_by, config, origin_for)
    return AnalysisResult(
        window_years=config.inactivity_window_years,
        observation_end=config.observation_end,
        origin=origin,
        boundary_month=boundary_month,
        histories=tuple(histories),
        spells_by_student=spells_by,
        transitions_by_student=transitions_by,
        transitions=tuple(all_transitions),
        dropout=_fit_outcome(dataset_a, tuple(float(p) for p in probes_dropout)),
        switch=_fit_outcome(dataset_b, tuple(float(p) for p in probes_switch)),
    )


def curve_sup_distance(a: SurvivalCurve, b: SurvivalCurve) -> float:
    """Supremum distance between two fitted step functions.

    Evaluated over the union of both curves' event times (right-continuous
    steps change value nowhere else).
    """
    grid = np.union1d(a.times, b.times)
    if grid.size == 0:
        return 0.0

    def values_on(curve: SurvivalCurve) -> np.ndarray:
        if curve.times.size == 0:
            return np.ones_like(grid)
        idx = np.searchsorted(curve.times, grid, side="right") - 1
        return np.where(idx >= 0, curve.survival[np.maximum(idx, 0)], 1.0)

    return float(np.max(np.abs(values_on(a) - values_on(b))))
