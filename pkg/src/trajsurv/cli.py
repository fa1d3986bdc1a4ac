"""Command-line front end.

Subcommands: ``ingest`` (validate and emit histories), ``analyze`` (full
pipeline to tables, curves, and figures), ``sensitivity`` (robustness
variants), ``simulate`` (synthetic cohort), ``report`` (re-render saved
outputs).  Exit codes: 0 success, 1 validation/data errors, 2 usage errors.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from datetime import date
from pathlib import Path

from . import figures, ingest, report, synth
from .ingest import ValidationError
from .outcomes import write_subjects_csv
from .pipeline import (
    DEFAULT_PROBES_DROPOUT,
    DEFAULT_PROBES_SWITCH,
    ORIGIN_ACADEMIC_YEAR,
    ORIGIN_EXACT,
    AnalysisResult,
    run_pipeline,
)
from .report import ReportConsistencyError
from .sensitivity import (
    DEFAULT_WINDOWS,
    drop_recent_entrants,
    exclude_late_entrants,
    run_origin_variant,
    run_window_variants,
)
from .trajectory import GapConfig, write_spells_csv, write_transitions_csv

_ORIGIN_FLAGS = {"exact": ORIGIN_EXACT, "academic-year": ORIGIN_ACADEMIC_YEAR}


def _parse_probes(text: str) -> tuple[float, ...]:
    values = tuple(float(part) for part in text.split(",") if part.strip())
    if not values or any(v < 0 for v in values):
        raise argparse.ArgumentTypeError("probes must be a comma-separated list of non-negative years")
    return values


def _parse_windows(text: str) -> tuple[float, ...]:
    values = tuple(float(part) for part in text.split(",") if part.strip())
    if not values or any(v <= 0 for v in values):
        raise argparse.ArgumentTypeError("windows must be a comma-separated list of positive years")
    return values


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--window", type=float, default=2.0, metavar="YEARS",
                        help="inactivity window in years (default: 2)")
    parser.add_argument("--obs-end", type=date.fromisoformat, default=None, metavar="DATE",
                        help="end of observation (default: latest event date in the input)")
    parser.add_argument("--out", type=Path, default=Path("out"), metavar="DIR",
                        help="output directory (default: ./out)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trajsurv", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="validate an event CSV and emit per-student histories")
    p_ingest.add_argument("input", type=Path)
    p_ingest.add_argument("--out", type=Path, default=Path("out"), metavar="DIR")
    p_ingest.set_defaults(func=_cmd_ingest)

    p_analyze = sub.add_parser("analyze", help="run the full pipeline and write tables, curves, figures")
    p_analyze.add_argument("input", type=Path)
    _add_common_flags(p_analyze)
    p_analyze.add_argument("--origin", choices=sorted(_ORIGIN_FLAGS), default="exact",
                           help="time origin for durations (default: exact)")
    p_analyze.add_argument("--boundary-month", type=int, default=1, choices=range(1, 13), metavar="M",
                           help="first month of the academic year (default: 1)")
    p_analyze.add_argument("--exclude-last", type=int, default=0, metavar="K",
                           help="drop entrants from the last K calendar years (default: 0)")
    p_analyze.add_argument("--probes", type=_parse_probes, default=None, metavar="LIST",
                           help="probe times in years for both outcomes (default: 1,3,5,8 and 0.5,1,2,3)")
    p_analyze.add_argument("--format", choices=("csv", "json"), default="csv",
                           help="machine-readable table format (default: csv)")
    p_analyze.set_defaults(func=_cmd_analyze)

    p_sens = sub.add_parser("sensitivity", help="run the robustness variant suite")
    p_sens.add_argument("input", type=Path)
    _add_common_flags(p_sens)
    p_sens.add_argument("--windows", type=_parse_windows, default=DEFAULT_WINDOWS, metavar="LIST",
                        help="inactivity windows to compare (default: 1,2,3)")
    p_sens.add_argument("--boundary-month", type=int, default=1, choices=range(1, 13), metavar="M")
    p_sens.add_argument("--exclude-last", type=int, default=3, metavar="K",
                        help="exclusion depth for the late-entrant check (default: 3)")
    p_sens.set_defaults(func=_cmd_sensitivity)

    p_sim = sub.add_parser("simulate", help="generate a synthetic cohort CSV")
    p_sim.add_argument("--config", type=Path, default=None, metavar="FILE",
                       help="JSON/TOML cohort spec (defaults used when omitted)")
    p_sim.add_argument("--seed", type=int, default=None, metavar="U64")
    p_sim.add_argument("--obs-end", type=date.fromisoformat, default=None, metavar="DATE")
    p_sim.add_argument("--out", type=Path, default=Path("cohort.csv"), metavar="FILE")
    p_sim.set_defaults(func=_cmd_simulate)

    p_report = sub.add_parser("report", help="re-render figures/tables from saved curve or summary files")
    p_report.add_argument("curves", nargs="*", type=Path, help="curve CSV files to plot together")
    p_report.add_argument("--summary", action="append", type=Path, default=[], metavar="FILE",
                          help="summary CSV to re-render as text and narrative")
    p_report.add_argument("--title", default="", help="figure title")
    p_report.add_argument("--out", type=Path, default=Path("out"), metavar="DIR")
    p_report.set_defaults(func=_cmd_report)
    return parser


def _load_input(path: Path):
    records, errors = ingest.read_events_csv(path)
    histories, skipped = ingest.build_histories(records)
    return records, errors, histories, skipped


def _resolve_obs_end(flag_value, records):
    if flag_value is not None:
        return flag_value
    if not records:
        raise ValidationError("input contains no valid event records")
    return max(record.date for record in records)


def _cmd_ingest(args) -> int:
    records, errors, histories, skipped = _load_input(args.input)
    args.out.mkdir(parents=True, exist_ok=True)
    ingest.write_histories_csv(histories, args.out / "histories.csv")
    ingest.write_jsonl(errors, args.out / "errors.jsonl")
    ingest.write_jsonl(skipped, args.out / "skips.jsonl")
    print(
        f"rows={len(records) + len(errors)} events={len(records)} errors={len(errors)} "
        f"histories={len(histories)} skipped={len(skipped)}"
    )
    if not histories:
        print("error: no usable student histories", file=sys.stderr)
        return 1
    return 0


def _write_analysis(args, result: AnalysisResult, records, errors, skipped) -> list[str]:
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    written: list[str] = []

    def emit(name: str, writer, *wargs) -> None:
        writer(*wargs, out / name)
        written.append(name)

    all_spells = [s for h in result.histories for s in result.spells_by_student[h.student_id]]
    emit("spells.csv", write_spells_csv, all_spells)
    emit("transitions.csv", write_transitions_csv, result.transitions)
    emit("outcome_a_subjects.csv", write_subjects_csv, result.dropout.dataset)
    emit("outcome_b_subjects.csv", write_subjects_csv, result.switch.dataset)
    ingest.write_jsonl(errors, out / "errors.jsonl")
    written.append("errors.jsonl")
    ingest.write_jsonl(skipped, out / "skips.jsonl")
    written.append("skips.jsonl")

    table = report.mobility_table(result.transitions)
    if args.format == "json":
        report.write_mobility_json(table, out / "mobility_by_year.json")
        written.append("mobility_by_year.json")
        report.write_mobility_json(report.mobility_by_period(table), out / "mobility_by_period.json", by_period=True)
        written.append("mobility_by_period.json")
    else:
        report.write_mobility_csv(table, out / "mobility_by_year.csv")
        written.append("mobility_by_year.csv")
        report.write_mobility_csv(report.mobility_by_period(table), out / "mobility_by_period.csv", by_period=True)
        written.append("mobility_by_period.csv")

    rows_a = report.summary_rows(result.dropout)
    rows_b = report.summary_rows(result.switch)
    if args.format == "json":
        report.write_summary_json(rows_a, out / "summary_outcome_a.json")
        report.write_summary_json(rows_b, out / "summary_outcome_b.json")
        written += ["summary_outcome_a.json", "summary_outcome_b.json"]
    else:
        report.write_summary_csv(rows_a, out / "summary_outcome_a.csv")
        report.write_summary_csv(rows_b, out / "summary_outcome_b.csv")
        written += ["summary_outcome_a.csv", "summary_outcome_b.csv"]
    (out / "summary.txt").write_text(report.render_summary_text(rows_a + rows_b), encoding="utf-8")
    written.append("summary.txt")
    logrank = {"A": result.dropout.logrank, "B": result.switch.logrank}
    (out / "narrative.txt").write_text(report.render_narrative(rows_a + rows_b, logrank), encoding="utf-8")
    written.append("narrative.txt")
    report.write_logrank_json(logrank, out / "logrank.json")
    written.append("logrank.json")

    for fit, tag in ((result.dropout, "a"), (result.switch, "b")):
        emit(f"curve_{tag}_global.csv", report.write_curve_csv, fit.curve)
        for label in sorted(fit.strata_curves):
            emit(f"curve_{tag}_{label}.csv", report.write_curve_csv, fit.strata_curves[label])
        title = report.OUTCOME_TITLES[fit.dataset.outcome_id]
        svg = figures.render_svg([figures.curve_series("All", fit.curve)], title=title)
        (out / f"fig_outcome_{tag}_global.svg").write_text(svg, encoding="utf-8")
        written.append(f"fig_outcome_{tag}_global.svg")
        series = [
            figures.curve_series(report.PERIOD_LABELS.get(label, label), fit.strata_curves[label])
            for label in sorted(fit.strata_curves)
        ]
        svg = figures.render_svg(series, title=f"{title}, by entry period")
        (out / f"fig_outcome_{tag}_by_period.svg").write_text(svg, encoding="utf-8")
        written.append(f"fig_outcome_{tag}_by_period.svg")
    return written


def _cmd_analyze(args) -> int:
    records, errors, histories, skipped = _load_input(args.input)
    obs_end = _resolve_obs_end(args.obs_end, records)
    histories = drop_recent_entrants(histories, args.exclude_last) if histories else histories
    probes_a = args.probes if args.probes is not None else DEFAULT_PROBES_DROPOUT
    probes_b = args.probes if args.probes is not None else DEFAULT_PROBES_SWITCH
    result = run_pipeline(
        histories,
        GapConfig(observation_end=obs_end, inactivity_window_years=args.window),
        origin=_ORIGIN_FLAGS[args.origin],
        boundary_month=args.boundary_month,
        probes_dropout=probes_a,
        probes_switch=probes_b,
    )
    written = _write_analysis(args, result, records, errors, skipped)
    counts = {"rows": len(records) + len(errors), "record_errors": len(errors), "skipped": len(skipped)}
    counts.update(report.analysis_counts(result))
    report.write_manifest(
        args.out / "run_manifest.json",
        command="analyze",
        config={
            "window_years": args.window,
            "observation_end": obs_end.isoformat(),
            "origin": _ORIGIN_FLAGS[args.origin],
            "boundary_month": args.boundary_month,
            "exclude_last": args.exclude_last,
            "probes_outcome_a": list(probes_a),
            "probes_outcome_b": list(probes_b),
            "format": args.format,
        },
        counts=counts,
        input_path=str(args.input),
        input_sha256=report.sha256_of(args.input),
        outputs=written + ["run_manifest.json"],
    )
    print(
        f"histories={len(histories)} transitions={len(result.transitions)} "
        f"A: {result.dropout.dataset.n_events}/{result.dropout.dataset.n_total} events, "
        f"B: {result.switch.dataset.n_events}/{result.switch.dataset.n_total} events "
        f"-> {args.out}"
    )
    return 0


def _cmd_sensitivity(args) -> int:
    records, errors, histories, skipped = _load_input(args.input)
    obs_end = _resolve_obs_end(args.obs_end, records)
    config = GapConfig(observation_end=obs_end, inactivity_window_years=args.window)
    args.out.mkdir(parents=True, exist_ok=True)
    protocols = {
        "stability_windows.jsonl": run_window_variants(histories, config, windows=args.windows),
        "stability_origin.jsonl": run_origin_variant(histories, config, boundary_month=args.boundary_month),
        "stability_exclusion.jsonl": exclude_late_entrants(histories, config, k=args.exclude_last),
    }
    for name, stability in protocols.items():
        report.write_stability_jsonl(stability, args.out / name)
        unstable = [r for r in stability.rows if r.stable is False]
        print(f"{name}: {len(stability.rows)} rows, {len(unstable)} unstable vs {stability.baseline}")
    return 0


def _cmd_simulate(args) -> int:
    spec = synth.load_cohort_spec(args.config) if args.config else synth.DEFAULT_COHORT
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.obs_end is not None:
        overrides["observation_end"] = args.obs_end
    if overrides:
        spec = replace(spec, **overrides)
    events = synth.generate_cohort(spec)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    ingest.write_events_csv(events, args.out)
    print(f"students={spec.n_students} events={len(events)} seed={spec.seed} -> {args.out}")
    return 0


def _cmd_report(args) -> int:
    if not args.curves and not args.summary:
        print("error: nothing to render; pass curve CSVs and/or --summary files", file=sys.stderr)
        return 1
    args.out.mkdir(parents=True, exist_ok=True)
    if args.curves:
        series = []
        for path in args.curves:
            data = report.read_curve_csv(path)
            series.append(
                figures.CurveSeries(
                    label=path.stem,
                    times=data["time"],
                    survival=data["survival"],
                    lower=data["ci_lower"],
                    upper=data["ci_upper"],
                )
            )
        svg = figures.render_svg(series, title=args.title)
        (args.out / "figure.svg").write_text(svg, encoding="utf-8")
        print(f"figure.svg: {len(series)} curve(s) -> {args.out}")
    if args.summary:
        rows = []
        for path in args.summary:
            rows.extend(report.read_summary_csv(path))
        (args.out / "summary.txt").write_text(report.render_summary_text(rows), encoding="utf-8")
        (args.out / "narrative.txt").write_text(report.render_narrative(rows), encoding="utf-8")
        print(f"summary.txt + narrative.txt: {len(rows)} rows -> {args.out}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, ReportConsistencyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
