"""Event-record ingestion.

Parses event-level CSV rows, groups them into per-student ordered histories,
and derives the baseline covariates (first major, entry year, entry period)
from the first enrolment only, so nothing observed later can leak into them.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass
from datetime import date
from enum import Enum
from pathlib import Path
from typing import IO, Iterable

logger = logging.getLogger(__name__)

EVENT_HEADER = ("student_id", "date", "kind", "major_code", "plan_code")


class ValidationError(ValueError):
    """Input data violates a contract that cannot be skipped row-by-row."""


class EventKind(str, Enum):
    ENROLMENT = "enrolment"
    EXAM = "exam"
    STATUS_UPDATE = "status_update"
    PLAN_CHANGE = "plan_change"
    GRADUATION = "graduation"


class EntryPeriod(str, Enum):
    P1 = "P1"
    P2 = "P2"
    P3 = "P3"
    P4 = "P4"


@dataclass(frozen=True)
class EventRecord:
    """One administrative event for one student on one date.

    ``seq`` is the 0-based ordinal of the source data row and breaks ties
    between same-day events, making the event order total and deterministic.
    """

    student_id: str
    date: date
    kind: EventKind
    major_code: str
    plan_code: str
    seq: int


@dataclass(frozen=True)
class RecordError:
    """A malformed source row, kept so every input row stays accounted for."""

    row: int
    reason: str
    student_id: str | None = None

    def to_json(self) -> dict:
        entry: dict = {"row": self.row, "reason": self.reason}
        if self.student_id:
            entry["student_id"] = self.student_id
        return entry


@dataclass(frozen=True)
class SkipEntry:
    """A student excluded from history building, with the reason."""

    student_id: str
    reason: str

    def to_json(self) -> dict:
        return {"student_id": self.student_id, "reason": self.reason}


@dataclass(frozen=True)
class StudentHistory:
    student_id: str
    events: tuple[EventRecord, ...]
    first_enrolment_date: date
    entry_year: int
    entry_period: EntryPeriod
    first_major: str
    graduated_on: date | None = None


def assign_entry_period(entry_year: int) -> EntryPeriod:
    """Map an entry year onto the four regulatory periods.

    P1 covers 1980-1989, P2 1990-1999, P3 2000-2009, P4 everything from 2010
    on.  Years before 1980 predate the periodisation and are rejected.
    """
    if entry_year < 1980:
        raise ValidationError(f"entry year {entry_year} precedes the 1980 start of the periodisation")
    if entry_year <= 1989:
        return EntryPeriod.P1
    if entry_year <= 1999:
        return EntryPeriod.P2
    if entry_year <= 2009:
        return EntryPeriod.P3
    return EntryPeriod.P4


def parse_events(source: IO[str] | IO[bytes] | Iterable[str]) -> tuple[list[EventRecord], list[RecordError]]:
    """Parse CSV rows into event records, collecting malformed rows as errors.

    The header must start with ``student_id,date,kind,major_code,plan_code``;
    extra columns are ignored with a warning.  Every data row ends up either
    as an :class:`EventRecord` or a :class:`RecordError`, never dropped.
    ``row`` in errors and ``seq`` in records are the same 0-based data-row
    ordinal.
    """
    if hasattr(source, "read") and isinstance(source.read(0), bytes):  # type: ignore[union-attr]
        source = io.TextIOWrapper(source, encoding="utf-8")  # type: ignore[arg-type]
    reader = csv.reader(source)  # type: ignore[arg-type]
    try:
        header = next(reader)
    except StopIteration:
        raise ValidationError("source is empty: missing header row") from None
    header = [h.strip() for h in header]
    if tuple(header[: len(EVENT_HEADER)]) != EVENT_HEADER:
        raise ValidationError(
            f"unexpected header {','.join(header)!r}; expected it to start with {','.join(EVENT_HEADER)!r}"
        )
    if len(header) > len(EVENT_HEADER):
        logger.warning("ignoring extra columns: %s", ", ".join(header[len(EVENT_HEADER):]))

    records: list[EventRecord] = []
    errors: list[RecordError] = []
    for seq, row in enumerate(reader):
        if len(row) < len(EVENT_HEADER):
            errors.append(RecordError(seq, f"expected at least {len(EVENT_HEADER)} fields, got {len(row)}"))
            continue
        student_id, raw_date, raw_kind, major, plan = (cell.strip() for cell in row[: len(EVENT_HEADER)])
        if not student_id:
            errors.append(RecordError(seq, "empty student_id"))
            continue
        try:
            when = date.fromisoformat(raw_date)
        except ValueError:
            errors.append(RecordError(seq, f"invalid date {raw_date!r}", student_id))
            continue
        try:
            kind = EventKind(raw_kind)
        except ValueError:
            errors.append(RecordError(seq, f"unknown kind {raw_kind!r}", student_id))
            continue
        if kind is not EventKind.GRADUATION and (not major or not plan):
            errors.append(RecordError(seq, f"missing major/plan code for kind {kind.value}", student_id))
            continue
        records.append(EventRecord(student_id, when, kind, major, plan, seq))
    return records, errors


def build_histories(events: Iterable[EventRecord]) -> tuple[list[StudentHistory], list[SkipEntry]]:
    """Group events into per-student histories sorted by (date, seq).

    Students without any enrolment event, or entering before 1980, go to the
    skip list instead of raising, so a single bad student never aborts a run.
    Histories come back in stable student_id order.
    """
    by_student: dict[str, list[EventRecord]] = {}
    for event in events:
        by_student.setdefault(event.student_id, []).append(event)

    histories: list[StudentHistory] = []
    skipped: list[SkipEntry] = []
    for student_id in sorted(by_student):
        ordered = sorted(by_student[student_id], key=lambda e: (e.date, e.seq))
        first_enrolment = next((e for e in ordered if e.kind is EventKind.ENROLMENT), None)
        if first_enrolment is None:
            skipped.append(SkipEntry(student_id, "no enrolment event"))
            continue
        entry_year = first_enrolment.date.year
        try:
            period = assign_entry_period(entry_year)
        except ValidationError as exc:
            skipped.append(SkipEntry(student_id, str(exc)))
            continue
        graduated = next((e.date for e in ordered if e.kind is EventKind.GRADUATION), None)
        histories.append(
            StudentHistory(
                student_id=student_id,
                events=tuple(ordered),
                first_enrolment_date=first_enrolment.date,
                entry_year=entry_year,
                entry_period=period,
                first_major=first_enrolment.major_code,
                graduated_on=graduated,
            )
        )
    return histories, skipped


def read_events_csv(path: str | Path) -> tuple[list[EventRecord], list[RecordError]]:
    with open(path, encoding="utf-8", newline="") as handle:
        return parse_events(handle)


def write_events_csv(records: Iterable[EventRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(EVENT_HEADER)
        for rec in records:
            writer.writerow([rec.student_id, rec.date.isoformat(), rec.kind.value, rec.major_code, rec.plan_code])


def write_jsonl(entries: Iterable[RecordError] | Iterable[SkipEntry], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for entry in entries:
            handle.write(json.dumps(entry.to_json(), sort_keys=True))
            handle.write("\n")


def write_histories_csv(histories: Iterable[StudentHistory], path: str | Path) -> None:
    """Baseline table: one row per student, first-enrolment covariates only."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(
            ["student_id", "first_enrolment", "entry_year", "entry_period", "first_major", "n_events", "graduated_on"]
        )
        for h in histories:
            writer.writerow(
                [
                    h.student_id,
                    h.first_enrolment_date.isoformat(),
                    h.entry_year,
                    h.entry_period.value,
                    h.first_major,
                    len(h.events),
                    h.graduated_on.isoformat() if h.graduated_on else "",
                ]
            )
