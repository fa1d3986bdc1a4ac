"""Pure-numpy kernel implementations (fallback when the compiled core is absent)."""

from __future__ import annotations

import numpy as np

BACKEND = "pure"


def km_counts(durations, events):
    """Aggregate sorted subject data into per-event-time risk-set counts.

    ``durations`` must be sorted ascending; ``events`` is 1 for an observed
    event, 0 for a censoring.  Returns ``(times, n_risk, n_event, n_censored,
    n_censored_before_first)`` where ``n_censored[i]`` counts censorings with
    duration in ``[times[i], times[i+1])`` (censored subjects leave the risk
    set after their time) and the trailing interval is unbounded.
    """
    durations = np.ascontiguousarray(durations, dtype=np.float64)
    events = np.ascontiguousarray(events, dtype=np.int64)
    n = durations.shape[0]
    first = np.flatnonzero(np.r_[True, durations[1:] != durations[:-1]])
    d_per = np.add.reduceat(events, first)
    c_per = np.diff(np.append(first, n)) - d_per
    at_risk = n - first

    rows = d_per > 0
    times = durations[first[rows]]
    n_risk = at_risk[rows]
    n_event = d_per[rows]

    n_censored = np.zeros(times.shape[0], dtype=np.int64)
    has_c = c_per > 0
    row_idx = np.searchsorted(times, durations[first[has_c]], side="right") - 1
    before = row_idx < 0
    n_censored_before_first = int(c_per[has_c][before].sum())
    np.add.at(n_censored, row_idx[~before], c_per[has_c][~before])
    return times, n_risk, n_event, n_censored, n_censored_before_first


def logrank_counts(durations, events, groups, n_groups):
    """Observed/expected event counts and covariance for the K-group log-rank test.

    Inputs sorted ascending by duration; ``groups`` holds 0-based group
    indices.  Returns ``(observed, expected, covariance)`` accumulated over
    the pooled distinct event times under the hypergeometric null.
    """
    durations = np.ascontiguousarray(durations, dtype=np.float64)
    events = np.ascontiguousarray(events, dtype=np.int64)
    groups = np.ascontiguousarray(groups, dtype=np.int64)
    k = int(n_groups)

    new_run = np.r_[True, durations[1:] != durations[:-1]]
    t_idx = np.cumsum(new_run) - 1
    m = int(t_idx[-1]) + 1

    removed = np.zeros((m, k), dtype=np.int64)
    np.add.at(removed, (t_idx, groups), 1)
    d_tg = np.zeros((m, k), dtype=np.int64)
    ev = events == 1
    np.add.at(d_tg, (t_idx[ev], groups[ev]), 1)

    sizes = np.bincount(groups, minlength=k)
    n_tg = sizes[None, :] - (np.cumsum(removed, axis=0) - removed)

    d_t = d_tg.sum(axis=1)
    rows = d_t > 0
    d_tg = d_tg[rows].astype(np.float64)
    n_tg = n_tg[rows].astype(np.float64)
    d_t = d_t[rows].astype(np.float64)
    n_t = n_tg.sum(axis=1)

    observed = d_tg.sum(axis=0)
    p_tg = n_tg / n_t[:, None]
    expected = (p_tg * d_t[:, None]).sum(axis=0)

    f_t = np.where(n_t > 1, d_t * (n_t - d_t) / np.maximum(n_t - 1, 1.0), 0.0)
    cov = np.einsum("t,tg,th->gh", -f_t, p_tg, p_tg)
    np.fill_diagonal(cov, np.einsum("t,tg->g", f_t, p_tg * (1.0 - p_tg)))
    return observed, expected, cov


def piecewise_inverse(starts, rates, targets):
    """Invert a piecewise-linear cumulative hazard at the given targets.

    ``targets`` are cumulative-hazard levels (``-log u``); returns the times
    where the hazard integral reaches each level, ``inf`` where the remaining
    hazard mass is insufficient.
    """
    starts = np.ascontiguousarray(starts, dtype=np.float64)
    rates = np.ascontiguousarray(rates, dtype=np.float64)
    targets = np.ascontiguousarray(targets, dtype=np.float64)
    cum = np.concatenate(([0.0], np.cumsum(rates[:-1] * np.diff(starts))))
    idx = np.maximum(np.searchsorted(cum, targets, side="left") - 1, 0)
    rate = rates[idx]
    with np.errstate(divide="ignore", invalid="ignore"):
        hit = starts[idx] + (targets - cum[idx]) / rate
    out = np.where(rate > 0.0, hit, np.inf)
    return np.where(targets <= 0.0, starts[0], out)


def piecewise_cumhaz(starts, rates, times):
    """Evaluate the piecewise-linear cumulative hazard at the given times."""
    starts = np.ascontiguousarray(starts, dtype=np.float64)
    rates = np.ascontiguousarray(rates, dtype=np.float64)
    times = np.ascontiguousarray(times, dtype=np.float64)
    cum = np.concatenate(([0.0], np.cumsum(rates[:-1] * np.diff(starts))))
    idx = np.maximum(np.searchsorted(starts, times, side="right") - 1, 0)
    return cum[idx] + rates[idx] * (times - starts[idx])
