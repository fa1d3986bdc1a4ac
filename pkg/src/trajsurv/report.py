"""Report emission: mobility tables, survival summaries, narrative, exports.

Every table verifies its own accounting identities before anything is
written; an inconsistent report is never emitted.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .estimator import LogRankResult, SurvivalCurve, greenwood_ci
from .pipeline import AnalysisResult, OutcomeFit
from .sensitivity import StabilityReport
from .trajectory import Transition, TransitionKind

PERIOD_LABELS = {
    "P1": "P1 (1980-1989)",
    "P2": "P2 (1990-1999)",
    "P3": "P3 (2000-2009)",
    "P4": "P4 (2010+)",
}

OUTCOME_TITLES = {
    "A": "Outcome A: time to definitive dropout",
    "B": "Outcome B: time to first major switch",
}


class ReportConsistencyError(RuntimeError):
    """A table failed its accounting identities; nothing was written."""


# --------------------------------------------------------------------------
# mobility table


@dataclass(frozen=True)
class MobilityRow:
    year: int
    major_switch: int
    plan_change_same_title: int
    reentry_same_plan: int
    total: int


@dataclass(frozen=True)
class MobilityTable:
    rows: tuple[MobilityRow, ...]


def mobility_table(transitions: Iterable[Transition]) -> MobilityTable:
    """Count transitions per calendar year of their date, one row per year."""
    counts: dict[int, dict[TransitionKind, int]] = {}
    for tr in transitions:
        per_year = counts.setdefault(tr.date.year, {kind: 0 for kind in TransitionKind})
        per_year[tr.kind] += 1
    rows = []
    for year in sorted(counts):
        c = counts[year]
        rows.append(
            MobilityRow(
                year=year,
                major_switch=c[TransitionKind.MAJOR_SWITCH],
                plan_change_same_title=c[TransitionKind.PLAN_CHANGE_SAME_TITLE],
                reentry_same_plan=c[TransitionKind.REENTRY_SAME_PLAN],
                total=sum(c.values()),
            )
        )
    return MobilityTable(rows=tuple(rows))


def _period_of_year(year: int) -> str:
    if year < 1980:
        return "pre-1980"
    if year <= 1989:
        return PERIOD_LABELS["P1"]
    if year <= 1999:
        return PERIOD_LABELS["P2"]
    if year <= 2009:
        return PERIOD_LABELS["P3"]
    return PERIOD_LABELS["P4"]


def mobility_by_period(table: MobilityTable) -> MobilityTable:
    """Roll yearly rows up into the structural periods (keyed by a pseudo-year).

    The rollup keeps the row schema; ``year`` is replaced by the period's
    first year and the label is carried by the text/CSV renderers.
    """
    merged: dict[str, list[int]] = {}
    for row in table.rows:
        label = _period_of_year(row.year)
        bucket = merged.setdefault(label, [0, 0, 0, 0])
        bucket[0] += row.major_switch
        bucket[1] += row.plan_change_same_title
        bucket[2] += row.reentry_same_plan
        bucket[3] += row.total
    rows = []
    order = {"pre-1980": 0, **{label: i + 1 for i, label in enumerate(PERIOD_LABELS.values())}}
    for label in sorted(merged, key=lambda lab: order[lab]):
        ms, pc, re_, tot = merged[label]
        rows.append(MobilityRow(year=_period_first_year(label), major_switch=ms,
                                plan_change_same_title=pc, reentry_same_plan=re_, total=tot))
    return MobilityTable(rows=tuple(rows))


def _period_first_year(label: str) -> int:
    return {
        "pre-1980": 0,
        PERIOD_LABELS["P1"]: 1980,
        PERIOD_LABELS["P2"]: 1990,
        PERIOD_LABELS["P3"]: 2000,
        PERIOD_LABELS["P4"]: 2010,
    }[label]


def verify_mobility(table: MobilityTable) -> None:
    for row in table.rows:
        parts = row.major_switch + row.plan_change_same_title + row.reentry_same_plan
        if parts != row.total or min(row.major_switch, row.plan_change_same_title, row.reentry_same_plan) < 0:
            raise ReportConsistencyError(
                f"mobility row {row.year}: kind counts {parts} do not add up to total {row.total}"
            )


_MOBILITY_HEADER = ["transition_year", "major_switch", "plan_change_same_title", "reentry_same_plan", "total"]


def write_mobility_csv(table: MobilityTable, path: str | Path, by_period: bool = False) -> None:
    verify_mobility(table)
    header = list(_MOBILITY_HEADER)
    if by_period:
        header[0] = "period"
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in table.rows:
            key = _period_of_year(row.year) if by_period else row.year
            writer.writerow([key, row.major_switch, row.plan_change_same_title, row.reentry_same_plan, row.total])


# --------------------------------------------------------------------------
# survival summary table


@dataclass(frozen=True)
class SummaryRow:
    outcome: str
    stratum: str
    stratum_value: str
    n_total: int
    n_events: int
    n_censored: int
    median: float
    probes: tuple[float, ...] = ()
    probe_values: tuple[float, ...] = ()


def format_median(median: float) -> str:
    return "inf" if math.isinf(median) else f"{median:.2f}"


def percent(part: int, total: int) -> str:
    if total <= 0:
        return "-"
    return f"{100.0 * part / total:.1f}%"


def summary_rows(fit: OutcomeFit) -> list[SummaryRow]:
    """One Global row plus one row per entry period, ready for rendering.

    A run whose cohort spans a single period keeps just the Global row; a
    lone stratum would duplicate it.
    """
    outcome = fit.dataset.outcome_id
    probes = tuple(sorted(fit.summary.probe_survival))
    rows = [
        SummaryRow(
            outcome=outcome,
            stratum="Global",
            stratum_value="All",
            n_total=fit.summary.n_total,
            n_events=fit.summary.n_events,
            n_censored=fit.summary.n_censored,
            median=fit.summary.median_survival,
            probes=probes,
            probe_values=tuple(fit.summary.probe_survival[p] for p in probes),
        )
    ]
    if len(fit.strata_summaries) <= 1:
        return rows
    for label in sorted(fit.strata_summaries):
        summary = fit.strata_summaries[label]
        rows.append(
            SummaryRow(
                outcome=outcome,
                stratum="Entry Period",
                stratum_value=PERIOD_LABELS.get(label, label),
                n_total=summary.n_total,
                n_events=summary.n_events,
                n_censored=summary.n_censored,
                median=summary.median_survival,
                probes=probes,
                probe_values=tuple(summary.probe_survival[p] for p in probes),
            )
        )
    return rows


def verify_summary_rows(rows: Sequence[SummaryRow]) -> None:
    """Accounting identities: per-row counts add up; strata sum to Global."""
    for row in rows:
        if row.n_events + row.n_censored != row.n_total or min(row.n_events, row.n_censored) < 0:
            raise ReportConsistencyError(
                f"summary row {row.outcome}/{row.stratum_value}: "
                f"{row.n_events} events + {row.n_censored} censored != {row.n_total} total"
            )
    for outcome in sorted({row.outcome for row in rows}):
        global_rows = [r for r in rows if r.outcome == outcome and r.stratum == "Global"]
        strata = [r for r in rows if r.outcome == outcome and r.stratum != "Global"]
        if not global_rows or not strata:
            continue
        g = global_rows[0]
        for attribute in ("n_total", "n_events", "n_censored"):
            total = sum(getattr(r, attribute) for r in strata)
            if total != getattr(g, attribute):
                raise ReportConsistencyError(
                    f"outcome {outcome}: strata {attribute} sum {total} != global {getattr(g, attribute)}"
                )


def _probe_headers(probes: tuple[float, ...]) -> list[str]:
    return [f"survival_at_{p:g}y" for p in probes]


def write_summary_csv(rows: Sequence[SummaryRow], path: str | Path) -> None:
    verify_summary_rows(rows)
    probes = rows[0].probes if rows else ()
    header = ["outcome", "stratum", "stratum_value", "n_total", "n_events", "n_censored", "median_survival_time"]
    header += _probe_headers(probes)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            cells = [row.outcome, row.stratum, row.stratum_value, row.n_total, row.n_events,
                     row.n_censored, format_median(row.median)]
            cells += [f"{v:.6f}" for v in row.probe_values]
            writer.writerow(cells)


def read_summary_csv(path: str | Path) -> list[SummaryRow]:
    rows: list[SummaryRow] = []
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        probe_cols = [c for c in (reader.fieldnames or []) if c.startswith("survival_at_")]
        probes = tuple(float(c[len("survival_at_"):-1]) for c in probe_cols)
        for raw in reader:
            median = math.inf if raw["median_survival_time"] == "inf" else float(raw["median_survival_time"])
            rows.append(
                SummaryRow(
                    outcome=raw["outcome"],
                    stratum=raw["stratum"],
                    stratum_value=raw["stratum_value"],
                    n_total=int(raw["n_total"]),
                    n_events=int(raw["n_events"]),
                    n_censored=int(raw["n_censored"]),
                    median=median,
                    probes=probes,
                    probe_values=tuple(float(raw[c]) for c in probe_cols),
                )
            )
    return rows


def write_summary_json(rows: Sequence[SummaryRow], path: str | Path) -> None:
    verify_summary_rows(rows)
    payload = []
    for row in rows:
        payload.append(
            {
                "outcome": row.outcome,
                "stratum": row.stratum,
                "stratum_value": row.stratum_value,
                "n_total": row.n_total,
                "n_events": row.n_events,
                "n_censored": row.n_censored,
                "median_survival_time": _json_safe(row.median),
                "probe_survival": {f"{p:g}": v for p, v in zip(row.probes, row.probe_values)},
            }
        )
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


def write_mobility_json(table: MobilityTable, path: str | Path, by_period: bool = False) -> None:
    verify_mobility(table)
    payload = []
    for row in table.rows:
        key = _period_of_year(row.year) if by_period else row.year
        payload.append(
            {
                ("period" if by_period else "transition_year"): key,
                "major_switch": row.major_switch,
                "plan_change_same_title": row.plan_change_same_title,
                "reentry_same_plan": row.reentry_same_plan,
                "total": row.total,
            }
        )
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


def _format_aligned(header: list[str], body: list[list[str]]) -> str:
    widths = [len(h) for h in header]
    for row in body:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(header)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for row in body:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
    return "\n".join(lines)


def render_summary_text(rows: Sequence[SummaryRow]) -> str:
    """Aligned table with the per-stratum median delta against the Global row."""
    verify_summary_rows(rows)
    blocks: list[str] = []
    for outcome in sorted({row.outcome for row in rows}):
        group = [r for r in rows if r.outcome == outcome]
        global_median = next((r.median for r in group if r.stratum == "Global"), math.inf)
        probes = group[0].probes
        header = ["outcome", "stratum", "stratum_value", "n_total", "n_events", "n_censored",
                  "median_survival_time", "median_delta_vs_global"] + _probe_headers(probes)
        body = []
        for row in group:
            if row.stratum == "Global":
                delta = ""
            else:
                delta = format_median(row.median - global_median) if (
                    math.isfinite(row.median) and math.isfinite(global_median)
                ) else ("0.00" if math.isinf(row.median) and math.isinf(global_median) else "inf")
            body.append(
                [row.outcome, row.stratum, row.stratum_value, str(row.n_total), str(row.n_events),
                 str(row.n_censored), format_median(row.median), delta]
                + [f"{v:.4f}" for v in row.probe_values]
            )
        blocks.append(OUTCOME_TITLES.get(outcome, outcome) + "\n" + _format_aligned(header, body))
    return "\n\n".join(blocks) + "\n"


def render_narrative(
    rows: Sequence[SummaryRow],
    logrank: Mapping[str, LogRankResult | None] | None = None,
) -> str:
    """Plain-language summary: counts, event/censor shares, medians, deltas.

    Effect sizes (median differences) lead; log-rank p-values trail each
    block as secondary information.
    """
    verify_summary_rows(rows)
    lines: list[str] = []
    outcomes = sorted({row.outcome for row in rows})
    for outcome in outcomes:
        group = [r for r in rows if r.outcome == outcome]
        g = next((r for r in group if r.stratum == "Global"), None)
        lines.append(OUTCOME_TITLES.get(outcome, f"Outcome {outcome}"))
        for row in group:
            label = "Global" if row.stratum == "Global" else row.stratum_value
            delta = ""
            if row.stratum != "Global" and g is not None:
                if math.isfinite(row.median) and math.isfinite(g.median):
                    delta = f"; median delta vs global {row.median - g.median:+.2f}y"
            lines.append(
                f"  {label}: {row.n_total} students; "
                f"{row.n_events} events ({percent(row.n_events, row.n_total)}); "
                f"{row.n_censored} censored ({percent(row.n_censored, row.n_total)}); "
                f"median {format_median(row.median)}{delta}"
            )
        result = (logrank or {}).get(outcome)
        if result is not None:
            lines.append(
                f"  [secondary] log-rank across entry periods: statistic={result.statistic:.4f}, "
                f"df={result.df}, p={result.p_value:.6g}"
            )
        lines.append("")
    totals = {o: next((r.n_total for r in rows if r.outcome == o and r.stratum == "Global"), None) for o in outcomes}
    distinct = {t for t in totals.values() if t is not None}
    if len(distinct) > 1:
        pairs = ", ".join(f"{o}={totals[o]}" for o in outcomes if totals[o] is not None)
        lines.append(f"note: outcome denominators differ ({pairs}); a single-cohort run produces equal denominators.")
        lines.append("")
    return "\n".join(lines)


# --------------------------------------------------------------------------
# curve and stability exports


def write_curve_csv(curve: SurvivalCurve, path: str | Path, level: float = 0.95) -> None:
    lower, upper = greenwood_ci(curve, level)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["time", "n_risk", "n_events", "n_censored", "survival", "ci_lower", "ci_upper"])
        for i in range(curve.times.shape[0]):
            writer.writerow(
                [
                    f"{curve.times[i]:.6f}",
                    int(curve.n_risk[i]),
                    int(curve.n_event[i]),
                    int(curve.n_censored[i]),
                    f"{curve.survival[i]:.6f}",
                    f"{lower[i]:.6f}",
                    f"{upper[i]:.6f}",
                ]
            )


def read_curve_csv(path: str | Path) -> dict[str, list[float]]:
    columns: dict[str, list[float]] = {"time": [], "survival": [], "ci_lower": [], "ci_upper": []}
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        for row in reader:
            for key in columns:
                columns[key].append(float(row[key]))
    return columns


def _json_safe(value):
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return value


def write_stability_jsonl(report: StabilityReport, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for row in report.rows:
            payload = {
                "variant": row.variant,
                "baseline": report.baseline,
                "outcome": row.outcome,
                "stratum": row.stratum,
                "n_total": row.n_total,
                "n_events": row.n_events,
                "n_censored": row.n_censored,
                "median": _json_safe(row.median),
                "delta_median": _json_safe(row.delta_median),
                "delta_events": row.delta_events,
                "stable": row.stable,
                "sup_distance": _json_safe(row.sup_distance),
            }
            handle.write(json.dumps(payload, sort_keys=True))
            handle.write("\n")


def write_logrank_json(results: Mapping[str, LogRankResult | None], path: str | Path) -> None:
    payload = {}
    for outcome in sorted(results):
        result = results[outcome]
        payload[outcome] = None if result is None else {
            "statistic": result.statistic,
            "df": result.df,
            "p_value": result.p_value,
        }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


def sha256_of(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(
    path: str | Path,
    command: str,
    config: Mapping[str, object],
    counts: Mapping[str, object],
    input_path: str | None = None,
    input_sha256: str | None = None,
    outputs: Sequence[str] = (),
) -> None:
    """Audit record of a run: configuration, input hash, and counts.

    Deliberately contains no timestamps so repeated runs stay bit-identical.
    """
    payload = {
        "command": command,
        "config": dict(config),
        "counts": dict(counts),
        "input": None if input_path is None else {"path": input_path, "sha256": input_sha256},
        "outputs": sorted(outputs),
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


def analysis_counts(result: AnalysisResult) -> dict[str, object]:
    return {
        "histories": len(result.histories),
        "spells": sum(len(s) for s in result.spells_by_student.values()),
        "transitions": len(result.transitions),
        "outcome_a": {
            "n_total": result.dropout.dataset.n_total,
            "n_events": result.dropout.dataset.n_events,
            "n_censored": result.dropout.dataset.n_censored,
        },
        "outcome_b": {
            "n_total": result.switch.dataset.n_total,
            "n_events": result.switch.dataset.n_events,
            "n_censored": result.switch.dataset.n_censored,
        },
    }
