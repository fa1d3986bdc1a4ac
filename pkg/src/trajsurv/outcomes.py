"""Right-censored subject records for the two study outcomes.

Outcome "A" is time to definitive dropout: the clock stops at the last
recorded event when the trailing inactivity exceeds the window, is censored
at graduation, and is otherwise censored at the end of observation.  Outcome
"B" is time to the first switch into a different major, censored at
graduation, at the last event for non-switching dropouts (switching is
unobservable after disengagement), or at the end of observation.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import date
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from .ingest import StudentHistory
from .trajectory import GapConfig, Spell, Transition, first_major_switch, years_between

OUTCOME_DROPOUT = "A"
OUTCOME_SWITCH = "B"


class SubjectStatus(str, Enum):
    EVENT = "event"
    CENSORED = "censored"


@dataclass(frozen=True)
class SubjectRecord:
    """One subject's (duration, status, stratum) triple for the estimator."""

    student_id: str
    duration_years: float
    status: SubjectStatus
    stratum: str

    def __post_init__(self) -> None:
        if not (math.isfinite(self.duration_years) and self.duration_years >= 0.0):
            raise ValueError(f"duration must be finite and non-negative, got {self.duration_years!r}")

    @property
    def is_event(self) -> bool:
        return self.status is SubjectStatus.EVENT


@dataclass(frozen=True)
class OutcomeDataset:
    outcome_id: str
    records: tuple[SubjectRecord, ...]

    @property
    def n_total(self) -> int:
        return len(self.records)

    @property
    def n_events(self) -> int:
        return sum(1 for r in self.records if r.is_event)

    @property
    def n_censored(self) -> int:
        return self.n_total - self.n_events


def academic_year_origin(history: StudentHistory, boundary_month: int = 1) -> date:
    """Start of the academic year containing the first enrolment."""
    enrolled = history.first_enrolment_date
    candidate = date(enrolled.year, boundary_month, 1)
    if candidate > enrolled:
        candidate = date(enrolled.year - 1, boundary_month, 1)
    return candidate


def _duration(origin: date, end: date) -> float:
    return max(0.0, years_between(origin, end))


def build_dropout_record(
    history: StudentHistory,
    spells: Sequence[Spell],
    config: GapConfig,
    origin: date | None = None,
) -> SubjectRecord:
    """Classify one student for the time-to-definitive-dropout outcome."""
    start = origin if origin is not None else history.first_enrolment_date
    last_event_date = spells[-1].end_date if spells else history.events[-1].date
    if history.graduated_on is not None:
        status, end = SubjectStatus.CENSORED, history.graduated_on
    elif (config.observation_end - last_event_date).days > config.window_days:
        status, end = SubjectStatus.EVENT, last_event_date
    else:
        status, end = SubjectStatus.CENSORED, config.observation_end
    return SubjectRecord(history.student_id, _duration(start, end), status, history.entry_period.value)


def build_switch_record(
    history: StudentHistory,
    transitions: Sequence[Transition],
    config: GapConfig,
    origin: date | None = None,
) -> SubjectRecord:
    """Classify one student for the time-to-first-major-switch outcome."""
    start = origin if origin is not None else history.first_enrolment_date
    switch = first_major_switch(transitions)
    if switch is not None:
        status, end = SubjectStatus.EVENT, switch
    elif history.graduated_on is not None:
        status, end = SubjectStatus.CENSORED, history.graduated_on
    else:
        last_event_date = history.events[-1].date
        if (config.observation_end - last_event_date).days > config.window_days:
            status, end = SubjectStatus.CENSORED, last_event_date
        else:
            status, end = SubjectStatus.CENSORED, config.observation_end
    return SubjectRecord(history.student_id, _duration(start, end), status, history.entry_period.value)


def build_outcome_datasets(
    histories: Sequence[StudentHistory],
    spells_by_student: Mapping[str, Sequence[Spell]],
    transitions_by_student: Mapping[str, Sequence[Transition]],
    config: GapConfig,
    origin_for: Callable[[StudentHistory], date] | None = None,
) -> tuple[OutcomeDataset, OutcomeDataset]:
    """Build both outcome datasets over one cohort (equal denominators)."""
    dropout: list[SubjectRecord] = []
    switch: list[SubjectRecord] = []
    for history in histories:
        origin = origin_for(history) if origin_for is not None else None
        dropout.append(build_dropout_record(history, spells_by_student[history.student_id], config, origin))
        switch.append(build_switch_record(history, transitions_by_student[history.student_id], config, origin))
    return (
        OutcomeDataset(OUTCOME_DROPOUT, tuple(dropout)),
        OutcomeDataset(OUTCOME_SWITCH, tuple(switch)),
    )


def stratify(dataset: OutcomeDataset, key: str = "entry_period") -> dict[str, OutcomeDataset]:
    """Partition a dataset by stratum label; ``key="none"`` keeps one stratum."""
    if key == "none":
        return {"All": dataset}
    if key != "entry_period":
        raise ValueError(f"unknown stratification key {key!r}")
    buckets: dict[str, list[SubjectRecord]] = {}
    for record in dataset.records:
        buckets.setdefault(record.stratum, []).append(record)
    return {label: OutcomeDataset(dataset.outcome_id, tuple(buckets[label])) for label in sorted(buckets)}


def write_subjects_csv(dataset: OutcomeDataset, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["student_id", "duration_years", "status", "stratum"])
        for rec in dataset.records:
            writer.writerow([rec.student_id, f"{rec.duration_years:.6f}", rec.status.value, rec.stratum])


def read_subjects_csv(path: str | Path, outcome_id: str) -> OutcomeDataset:
    records: list[SubjectRecord] = []
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        for row in reader:
            records.append(
                SubjectRecord(
                    student_id=row["student_id"],
                    duration_years=float(row["duration_years"]),
                    status=SubjectStatus(row["status"]),
                    stratum=row["stratum"],
                )
            )
    return OutcomeDataset(outcome_id, tuple(records))
