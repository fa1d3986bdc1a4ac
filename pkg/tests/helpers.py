"""Shared fixtures-in-plain-functions for the test suite."""

from __future__ import annotations

from datetime import date

from trajsurv.ingest import EventKind, EventRecord, StudentHistory, build_histories
from trajsurv.outcomes import SubjectRecord, SubjectStatus


def ev(student: str, iso: str, kind: str = "exam", major: str = "CIV", plan: str = "1985", seq: int = 0) -> EventRecord:
    return EventRecord(student, date.fromisoformat(iso), EventKind(kind), major, plan, seq)


def evs(student: str, *rows) -> list[EventRecord]:
    """Build a student's events from (iso_date, kind[, major[, plan]]) tuples; seq follows order."""
    out = []
    for seq, row in enumerate(rows):
        iso, kind = row[0], row[1]
        major = row[2] if len(row) > 2 else "CIV"
        plan = row[3] if len(row) > 3 else "1985"
        out.append(ev(student, iso, kind, major, plan, seq))
    return out


def history_of(*rows, student: str = "s1") -> StudentHistory:
    histories, skipped = build_histories(evs(student, *rows))
    assert not skipped, skipped
    assert len(histories) == 1
    return histories[0]


def subj(duration: float, event: bool, stratum: str = "P1", sid: str = "s") -> SubjectRecord:
    return SubjectRecord(sid, float(duration), SubjectStatus.EVENT if event else SubjectStatus.CENSORED, stratum)


def subjects(pairs, stratum: str = "P1") -> list[SubjectRecord]:
    return [subj(d, bool(e), stratum, sid=f"s{i}") for i, (d, e) in enumerate(pairs)]


HAND_CURVE_PAIRS = [(1, 1), (2, 0), (3, 1), (4, 1), (5, 0)]
