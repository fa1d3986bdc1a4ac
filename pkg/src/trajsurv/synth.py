"""Seedable synthetic cohort generation with piecewise-constant hazards.

Each student draws latent dropout, switch, and graduation times from
configurable hazards; regular enrolment/exam activity is emitted until the
earliest latent time or the end of observation.  The closed-form survival
function of any hazard is exposed as an oracle, so estimator output can be
checked against the generating truth.

Reproducibility contract: all randomness comes from numpy's PCG64 bit
generator, seeded per student via ``SeedSequence((seed, student_index))``,
with a fixed draw order (entry year, day of year, first major, dropout /
switch / graduation uniforms, switch target).  Identical specs therefore
yield byte-identical cohorts, and per-student streams are independent, so
parallel generation would match serial output.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from . import _kernels
from .ingest import EventKind, EventRecord
from .trajectory import DAYS_PER_YEAR

_GRID_KINDS = (EventKind.ENROLMENT, EventKind.EXAM)


@dataclass(frozen=True)
class HazardSpec:
    """Piecewise-constant hazard: ordered (start_time, rate) segments.

    The first segment must start at 0 and the last extends to infinity.
    """

    segments: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if not self.segments:
            raise ValueError("hazard needs at least one segment")
        starts = [s for s, _ in self.segments]
        rates = [r for _, r in self.segments]
        if starts[0] != 0.0:
            raise ValueError("first hazard segment must start at time 0")
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValueError("hazard segment start times must be strictly increasing")
        if any(r < 0 for r in rates):
            raise ValueError("hazard rates must be non-negative")

    @classmethod
    def constant(cls, rate: float) -> "HazardSpec":
        return cls(((0.0, rate),))

    @property
    def starts(self) -> np.ndarray:
        return np.asarray([s for s, _ in self.segments], dtype=np.float64)

    @property
    def rates(self) -> np.ndarray:
        return np.asarray([r for _, r in self.segments], dtype=np.float64)


def sample_piecewise_exp(hazard: HazardSpec, u: float) -> float:
    """Inverse-transform sample: the time where the cumulative hazard reaches -ln(u).

    Returns ``inf`` when the total hazard mass runs out before that level.
    """
    if not 0.0 < u < 1.0:
        raise ValueError("uniform draw must lie strictly inside (0, 1)")
    return _latent_sample(hazard, u)


def true_survival(hazard: HazardSpec, t: float) -> float:
    """Closed-form survival probability exp(-integrated hazard) at time ``t``."""
    if not (math.isfinite(t) and t >= 0.0):
        raise ValueError("time must be finite and non-negative")
    lam = float(_kernels.piecewise_cumhaz(hazard.starts, hazard.rates, np.asarray([t], dtype=np.float64))[0])
    return math.exp(-lam)


@dataclass(frozen=True)
class CohortSpec:
    """Generator configuration; entry years are inclusive on both ends."""

    n_students: int
    entry_year_start: int
    entry_year_end: int
    dropout: HazardSpec
    switch: HazardSpec
    graduation: HazardSpec
    observation_end: date
    seed: int
    events_per_year: int = 2
    majors: tuple[str, ...] = ("CIV", "IND", "MEC", "ELE")
    plan_code: str = "1995"

    def __post_init__(self) -> None:
        if self.n_students <= 0:
            raise ValueError("cohort size must be positive")
        if self.events_per_year < 1:
            raise ValueError("events_per_year must be at least 1")
        if self.entry_year_end < self.entry_year_start:
            raise ValueError("entry year range is inverted")
        if len(self.majors) < 2:
            raise ValueError("need at least two majors so switches have a destination")
        if self.observation_end < date(self.entry_year_end, 12, 31):
            raise ValueError("observation_end must cover the whole entry window")


@dataclass(frozen=True)
class StudentLatents:
    """Latent draws for one student (the generator's bookkeeping truth)."""

    student_id: str
    entry_date: date
    first_major: str
    dropout_years: float
    switch_years: float
    graduation_years: float
    switch_major: str


def _open_unit(rng: np.random.Generator) -> float:
    u = float(rng.random())
    while u == 0.0:
        u = float(rng.random())
    return u


def _latent_sample(hazard: HazardSpec, u: float) -> float:
    target = np.asarray([-math.log(u)], dtype=np.float64)
    return float(_kernels.piecewise_inverse(hazard.starts, hazard.rates, target)[0])


def latent_times(spec: CohortSpec, index: int) -> StudentLatents:
    """Deterministic latent draws for student ``index`` under the seeding contract."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((spec.seed, index))))
    year = spec.entry_year_start + int(rng.integers(spec.entry_year_end - spec.entry_year_start + 1))
    day_of_year = int(rng.integers(365))
    major_idx = int(rng.integers(len(spec.majors)))
    u_drop = _open_unit(rng)
    u_switch = _open_unit(rng)
    u_grad = _open_unit(rng)
    switch_offset = int(rng.integers(len(spec.majors) - 1))
    switch_idx = (major_idx + 1 + switch_offset) % len(spec.majors)
    return StudentLatents(
        student_id=f"s{index:06d}",
        entry_date=date(year, 1, 1) + timedelta(days=day_of_year),
        first_major=spec.majors[major_idx],
        dropout_years=_latent_sample(spec.dropout, u_drop),
        switch_years=_latent_sample(spec.switch, u_switch),
        graduation_years=_latent_sample(spec.graduation, u_grad),
        switch_major=spec.majors[switch_idx],
    )


def terminal_cause(spec: CohortSpec, lat: StudentLatents) -> str:
    """Which of dropout / graduation / censoring ends this trajectory."""
    horizon_years = (spec.observation_end - lat.entry_date).days / DAYS_PER_YEAR
    causes = [
        (lat.dropout_years, "dropout"),
        (lat.graduation_years, "graduation"),
        (horizon_years, "censored"),
    ]
    return min(causes, key=lambda pair: pair[0])[1]


def _emit_student(spec: CohortSpec, lat: StudentLatents) -> list[tuple[int, EventKind, str, str]]:
    horizon_days = (spec.observation_end - lat.entry_date).days
    horizon_years = horizon_days / DAYS_PER_YEAR
    cause = terminal_cause(spec, lat)
    terminal_years = min(lat.dropout_years, lat.graduation_years, horizon_years)
    terminal_days = round(terminal_years * DAYS_PER_YEAR)

    switched = lat.switch_years < terminal_years
    switch_days = round(lat.switch_years * DAYS_PER_YEAR) if switched else None

    def major_at(day: int) -> str:
        if switch_days is not None and day >= switch_days:
            return lat.switch_major
        return lat.first_major

    rows: list[tuple[int, EventKind, str, str]] = [(0, EventKind.ENROLMENT, major_at(0), spec.plan_code)]
    k = 1
    while True:
        off = round(k * DAYS_PER_YEAR / spec.events_per_year)
        if cause == "censored":
            if off > horizon_days:
                break
        elif off >= terminal_days:
            break
        kind = _GRID_KINDS[0] if k % spec.events_per_year == 0 else _GRID_KINDS[1]
        rows.append((off, kind, major_at(off), spec.plan_code))
        k += 1
    if switch_days is not None:
        rows.append((switch_days, EventKind.ENROLMENT, lat.switch_major, spec.plan_code))
    if cause == "dropout":
        rows.append((terminal_days, EventKind.EXAM, major_at(terminal_days), spec.plan_code))
    elif cause == "graduation":
        rows.append((terminal_days, EventKind.GRADUATION, "", ""))
    rows.sort(key=lambda r: r[0])
    return rows


def generate_cohort(spec: CohortSpec) -> list[EventRecord]:
    """Emit the full cohort's event records, ordered by student then date.

    Regular activity lands on the ``1/events_per_year`` grid; the moment of
    dropout or graduation is additionally recorded as the final event at its
    exact (day-rounded) latent time, so fitted durations track the generating
    hazards instead of being quantised down to the activity grid.  A switch
    is recorded as an enrolment in the destination major at its latent time.
    """
    records: list[EventRecord] = []
    seq = 0
    for index in range(spec.n_students):
        lat = latent_times(spec, index)
        for off, kind, major, plan in _emit_student(spec, lat):
            records.append(
                EventRecord(
                    student_id=lat.student_id,
                    date=lat.entry_date + timedelta(days=off),
                    kind=kind,
                    major_code=major,
                    plan_code=plan,
                    seq=seq,
                )
            )
            seq += 1
    return records


def _hazard_from_config(value) -> HazardSpec:
    if isinstance(value, (int, float)):
        return HazardSpec.constant(float(value))
    return HazardSpec(tuple((float(s), float(r)) for s, r in value))


DEFAULT_COHORT = CohortSpec(
    n_students=1000,
    entry_year_start=2000,
    entry_year_end=2015,
    dropout=HazardSpec(((0.0, 0.10), (4.0, 0.18))),
    switch=HazardSpec(((0.0, 0.12), (2.0, 0.02))),
    graduation=HazardSpec(((0.0, 0.0), (5.0, 0.15))),
    observation_end=date(2019, 12, 31),
    seed=0,
)


def load_cohort_spec(path: str | Path) -> CohortSpec:
    """Read a cohort spec from a JSON or TOML config file.

    Unset fields fall back to the documented defaults.  Hazards may be given
    either as a single rate or as a list of [start_years, rate] pairs.
    """
    path = Path(path)
    if path.suffix.lower() == ".toml":
        try:
            import tomllib  # Python >= 3.11
        except ImportError as exc:
            raise ValueError("TOML configs need Python 3.11+; use JSON instead") from exc
        with open(path, "rb") as handle:
            raw = tomllib.load(handle)
    else:
        with open(path, encoding="utf-8") as handle:
            raw = json.load(handle)
    kwargs: dict = {}
    for key in ("n_students", "entry_year_start", "entry_year_end", "events_per_year", "seed"):
        if key in raw:
            kwargs[key] = int(raw[key])
    for key in ("dropout", "switch", "graduation"):
        if key in raw:
            kwargs[key] = _hazard_from_config(raw[key])
    if "observation_end" in raw:
        kwargs["observation_end"] = date.fromisoformat(str(raw["observation_end"]))
    if "majors" in raw:
        kwargs["majors"] = tuple(str(m) for m in raw["majors"])
    if "plan_code" in raw:
        kwargs["plan_code"] = str(raw["plan_code"])
    return replace(DEFAULT_COHORT, **kwargs)
