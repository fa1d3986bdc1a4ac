"""Robustness protocols.

Three checks, each re-running the full pipeline under a definitional
variation and comparing medians and event counts against the baseline run:
alternative inactivity windows, an academic-year time origin, and exclusion
of the most recent entrants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .ingest import StudentHistory
from .pipeline import (
    ORIGIN_ACADEMIC_YEAR,
    ORIGIN_EXACT,
    AnalysisResult,
    curve_sup_distance,
    run_pipeline,
)
from .trajectory import GapConfig

DEFAULT_WINDOWS = (1.0, 2.0, 3.0)
DEFAULT_MEDIAN_STABILITY_YEARS = 0.25


@dataclass(frozen=True)
class VariantSpec:
    """One pipeline configuration to compare against the baseline."""

    name: str
    inactivity_window_years: float
    time_origin: str = ORIGIN_EXACT
    exclude_last_k_entry_years: int = 0

    def __post_init__(self) -> None:
        if self.inactivity_window_years <= 0:
            raise ValueError("inactivity window must be positive")
        if self.exclude_last_k_entry_years < 0:
            raise ValueError("exclusion depth must be non-negative")


@dataclass(frozen=True)
class VariantRow:
    variant: str
    outcome: str
    stratum: str
    n_total: int
    n_events: int
    n_censored: int
    median: float
    delta_median: float | None
    delta_events: int | None
    stable: bool | None
    sup_distance: float | None


@dataclass(frozen=True)
class StabilityReport:
    baseline: str
    rows: tuple[VariantRow, ...]


def _median_delta(variant: float, baseline: float) -> float:
    if math.isinf(variant) and math.isinf(baseline):
        return 0.0
    if math.isinf(variant):
        return math.inf
    if math.isinf(baseline):
        return -math.inf
    return variant - baseline


def drop_recent_entrants(histories: list[StudentHistory], k: int) -> list[StudentHistory]:
    """Remove students entering in the last ``k`` calendar years of the data."""
    if k <= 0:
        return histories
    cutoff = max(h.entry_year for h in histories) - k
    return [h for h in histories if h.entry_year <= cutoff]


def run_variants(
    histories: list[StudentHistory],
    config: GapConfig,
    variants: list[VariantSpec],
    baseline: VariantSpec,
    median_stability_years: float = DEFAULT_MEDIAN_STABILITY_YEARS,
    boundary_month: int = 1,
) -> StabilityReport:
    """Execute the baseline plus every variant and tabulate the deltas."""
    ordered = [baseline] + [v for v in variants if v.name != baseline.name]
    results: dict[str, AnalysisResult] = {}
    for spec in ordered:
        subset = drop_recent_entrants(histories, spec.exclude_last_k_entry_years)
        results[spec.name] = run_pipeline(
            subset,
            GapConfig(observation_end=config.observation_end, inactivity_window_years=spec.inactivity_window_years),
            origin=spec.time_origin,
            boundary_month=boundary_month,
        )

    base = results[baseline.name]
    rows: list[VariantRow] = []
    for spec in ordered:
        result = results[spec.name]
        for fit, base_fit in ((result.dropout, base.dropout), (result.switch, base.switch)):
            outcome = fit.dataset.outcome_id
            labelled = [("Global", fit.summary, fit.curve)]
            labelled += [
                (label, fit.strata_summaries[label], fit.strata_curves[label])
                for label in sorted(fit.strata_summaries)
            ]
            for stratum, summary, curve in labelled:
                if stratum == "Global":
                    base_summary, base_curve = base_fit.summary, base_fit.curve
                elif stratum in base_fit.strata_summaries:
                    base_summary, base_curve = base_fit.strata_summaries[stratum], base_fit.strata_curves[stratum]
                else:
                    base_summary = base_curve = None
                delta_median = delta_events = stable = sup = None
                if base_summary is not None:
                    delta_median = _median_delta(summary.median_survival, base_summary.median_survival)
                    delta_events = summary.n_events - base_summary.n_events
                    stable = abs(delta_median) < median_stability_years
                    sup = curve_sup_distance(curve, base_curve)
                rows.append(
                    VariantRow(
                        variant=spec.name,
                        outcome=outcome,
                        stratum=stratum,
                        n_total=summary.n_total,
                        n_events=summary.n_events,
                        n_censored=summary.n_censored,
                        median=summary.median_survival,
                        delta_median=delta_median,
                        delta_events=delta_events,
                        stable=stable,
                        sup_distance=sup,
                    )
                )
    return StabilityReport(baseline=baseline.name, rows=tuple(rows))


def run_window_variants(
    histories: list[StudentHistory],
    config: GapConfig,
    windows: tuple[float, ...] = DEFAULT_WINDOWS,
    **kwargs,
) -> StabilityReport:
    """Re-run the pipeline with alternative inactivity windows."""
    base_window = config.inactivity_window_years
    all_windows = sorted(set(float(w) for w in windows) | {base_window})
    variants = [VariantSpec(name=f"window={w:g}y", inactivity_window_years=w) for w in all_windows]
    baseline = VariantSpec(name=f"window={base_window:g}y", inactivity_window_years=base_window)
    return run_variants(histories, config, variants, baseline, **kwargs)


def run_origin_variant(
    histories: list[StudentHistory],
    config: GapConfig,
    boundary_month: int = 1,
    **kwargs,
) -> StabilityReport:
    """Swap the exact enrolment date for the academic-year start as time origin."""
    w = config.inactivity_window_years
    baseline = VariantSpec(name="origin=exact_date", inactivity_window_years=w)
    variant = VariantSpec(name="origin=academic_year", inactivity_window_years=w, time_origin=ORIGIN_ACADEMIC_YEAR)
    return run_variants(histories, config, [baseline, variant], baseline, boundary_month=boundary_month, **kwargs)


def exclude_late_entrants(
    histories: list[StudentHistory],
    config: GapConfig,
    k: int = 3,
    **kwargs,
) -> StabilityReport:
    """Drop entrants from the last ``k`` calendar years and compare."""
    w = config.inactivity_window_years
    baseline = VariantSpec(name="exclude_last=0", inactivity_window_years=w)
    variant = VariantSpec(name=f"exclude_last={k}", inactivity_window_years=w, exclude_last_k_entry_years=k)
    return run_variants(histories, config, [baseline, variant], baseline, **kwargs)
