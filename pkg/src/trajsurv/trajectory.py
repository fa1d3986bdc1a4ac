"""Spell reconstruction and transition typing.

A spell is a contiguous run of activity in one major-plan combination; it
closes when the codes change, when the gap to the next event exceeds the
configured inactivity window, or when the student graduates.  Consecutive
spells are compared pairwise to yield exactly one typed transition each.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import date
from enum import Enum
from pathlib import Path
from typing import Iterable

from .ingest import EventKind, StudentHistory

DAYS_PER_YEAR = 365.25


def years_between(start: date, end: date) -> float:
    """Elapsed time in years, day precision over a 365.25-day year."""
    return (end - start).days / DAYS_PER_YEAR


class TransitionKind(str, Enum):
    MAJOR_SWITCH = "major_switch"
    PLAN_CHANGE_SAME_TITLE = "plan_change_same_title"
    REENTRY_SAME_PLAN = "reentry_same_plan"


@dataclass(frozen=True)
class GapConfig:
    """Inactivity window (in years) and the end of the observation period."""

    observation_end: date
    inactivity_window_years: float = 2.0

    def __post_init__(self) -> None:
        if self.inactivity_window_years <= 0:
            raise ValueError("inactivity window must be positive")

    @property
    def window_days(self) -> float:
        return self.inactivity_window_years * DAYS_PER_YEAR


@dataclass(frozen=True)
class Spell:
    student_id: str
    major_code: str
    plan_code: str
    start_date: date
    end_date: date
    index: int
    event_count: int


@dataclass(frozen=True)
class Transition:
    student_id: str
    kind: TransitionKind
    date: date
    from_major: str
    from_plan: str
    to_major: str
    to_plan: str


def build_spells(history: StudentHistory, config: GapConfig) -> list[Spell]:
    """Scan a history once and split it into ordered spells.

    The current spell extends while the next event carries the same
    major-plan codes and follows within the inactivity window (strictly:
    a gap must *exceed* the window to split).  Graduation events never open
    a spell: they inherit the open spell's codes, extend it to the
    graduation date, and close it.
    """
    spells: list[Spell] = []
    current: dict | None = None

    def close() -> None:
        nonlocal current
        if current is not None:
            spells.append(Spell(index=len(spells), **current))
            current = None

    previous_date: date | None = None
    for event in history.events:
        if event.kind is EventKind.GRADUATION and current is not None:
            current["end_date"] = event.date
            current["event_count"] += 1
            close()
            previous_date = event.date
            continue
        codes = (event.major_code, event.plan_code)
        if current is not None:
            gap_exceeded = previous_date is not None and (event.date - previous_date).days > config.window_days
            if codes != (current["major_code"], current["plan_code"]) or gap_exceeded:
                close()
        if current is None:
            current = {
                "student_id": history.student_id,
                "major_code": event.major_code,
                "plan_code": event.plan_code,
                "start_date": event.date,
                "end_date": event.date,
                "event_count": 1,
            }
        else:
            current["end_date"] = event.date
            current["event_count"] += 1
        previous_date = event.date
        if event.kind is EventKind.GRADUATION:
            close()
    close()
    return spells


def classify_transitions(spells: list[Spell]) -> list[Transition]:
    """Type each consecutive spell pair; exactly one kind matches every pair."""
    transitions: list[Transition] = []
    for left, right in zip(spells, spells[1:]):
        if left.major_code != right.major_code:
            kind = TransitionKind.MAJOR_SWITCH
        elif left.plan_code != right.plan_code:
            kind = TransitionKind.PLAN_CHANGE_SAME_TITLE
        else:
            kind = TransitionKind.REENTRY_SAME_PLAN
        transitions.append(
            Transition(
                student_id=left.student_id,
                kind=kind,
                date=right.start_date,
                from_major=left.major_code,
                from_plan=left.plan_code,
                to_major=right.major_code,
                to_plan=right.plan_code,
            )
        )
    return transitions


def first_major_switch(transitions: Iterable[Transition]) -> date | None:
    """Date of the earliest switch to a different major, if any."""
    for transition in transitions:
        if transition.kind is TransitionKind.MAJOR_SWITCH:
            return transition.date
    return None


def write_spells_csv(spells: Iterable[Spell], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["student_id", "index", "major", "plan", "start", "end", "events"])
        for spell in spells:
            writer.writerow(
                [
                    spell.student_id,
                    spell.index,
                    spell.major_code,
                    spell.plan_code,
                    spell.start_date.isoformat(),
                    spell.end_date.isoformat(),
                    spell.event_count,
                ]
            )


def write_transitions_csv(transitions: Iterable[Transition], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["student_id", "kind", "date", "from_major", "from_plan", "to_major", "to_plan"])
        for tr in transitions:
            writer.writerow(
                [
                    tr.student_id,
                    tr.kind.value,
                    tr.date.isoformat(),
                    tr.from_major,
                    tr.from_plan,
                    tr.to_major,
                    tr.to_plan,
                ]
            )
