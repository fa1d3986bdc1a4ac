# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: risk-set counting, log-rank accumulation, hazard inversion."""

import numpy as np

from libc.math cimport INFINITY

BACKEND = "compiled"


cdef inline Py_ssize_t _lower_bound(double[::1] a, double v) noexcept:
    cdef Py_ssize_t lo = 0, hi = a.shape[0], mid
    while lo < hi:
        mid = (lo + hi) // 2
        if a[mid] < v:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef inline Py_ssize_t _upper_bound(double[::1] a, double v) noexcept:
    cdef Py_ssize_t lo = 0, hi = a.shape[0], mid
    while lo < hi:
        mid = (lo + hi) // 2
        if a[mid] <= v:
            lo = mid + 1
        else:
            hi = mid
    return lo


def km_counts(durations, events):
    """Per-event-time risk-set counts; see the pure backend for the contract."""
    cdef double[::1] dur = np.ascontiguousarray(durations, dtype=np.float64)
    cdef long long[::1] ev = np.ascontiguousarray(events, dtype=np.int64)
    cdef Py_ssize_t n = dur.shape[0]
    times_arr = np.empty(n, dtype=np.float64)
    n_risk_arr = np.empty(n, dtype=np.int64)
    n_event_arr = np.empty(n, dtype=np.int64)
    n_cens_arr = np.zeros(n, dtype=np.int64)
    cdef double[::1] times = times_arr
    cdef long long[::1] n_risk = n_risk_arr
    cdef long long[::1] n_event = n_event_arr
    cdef long long[::1] n_cens = n_cens_arr
    cdef Py_ssize_t i = 0, j
    cdef Py_ssize_t k = 0
    cdef long long before_first = 0
    cdef long long d, c
    while i < n:
        j = i
        d = 0
        while j < n and dur[j] == dur[i]:
            d += ev[j]
            j += 1
        c = (j - i) - d
        if d > 0:
            times[k] = dur[i]
            n_risk[k] = n - i
            n_event[k] = d
            n_cens[k] = c
            k += 1
        elif k == 0:
            before_first += c
        else:
            n_cens[k - 1] += c
        i = j
    return (times_arr[:k].copy(), n_risk_arr[:k].copy(), n_event_arr[:k].copy(),
            n_cens_arr[:k].copy(), int(before_first))


def logrank_counts(durations, events, groups, n_groups):
    """Observed/expected/covariance accumulation; see the pure backend for the contract."""
    cdef double[::1] dur = np.ascontiguousarray(durations, dtype=np.float64)
    cdef long long[::1] ev = np.ascontiguousarray(events, dtype=np.int64)
    cdef long long[::1] grp = np.ascontiguousarray(groups, dtype=np.int64)
    cdef Py_ssize_t n = dur.shape[0]
    cdef Py_ssize_t k = n_groups
    obs_arr = np.zeros(k, dtype=np.float64)
    exp_arr = np.zeros(k, dtype=np.float64)
    cov_arr = np.zeros((k, k), dtype=np.float64)
    at_arr = np.zeros(k, dtype=np.int64)
    dg_arr = np.zeros(k, dtype=np.int64)
    rem_arr = np.zeros(k, dtype=np.int64)
    cdef double[::1] obs = obs_arr
    cdef double[::1] exp = exp_arr
    cdef double[:, ::1] cov = cov_arr
    cdef long long[::1] at = at_arr
    cdef long long[::1] dg = dg_arr
    cdef long long[::1] rem = rem_arr
    cdef Py_ssize_t i = 0, j, g, h
    cdef double dt, nt, f, pg
    for i in range(n):
        at[grp[i]] += 1
    i = 0
    while i < n:
        j = i
        for g in range(k):
            dg[g] = 0
            rem[g] = 0
        while j < n and dur[j] == dur[i]:
            if ev[j] == 1:
                dg[grp[j]] += 1
            rem[grp[j]] += 1
            j += 1
        dt = 0.0
        nt = 0.0
        for g in range(k):
            dt += dg[g]
            nt += at[g]
        if dt > 0.0:
            for g in range(k):
                pg = at[g] / nt
                obs[g] += dg[g]
                exp[g] += dt * pg
            if nt > 1.0:
                f = dt * (nt - dt) / (nt - 1.0)
                for g in range(k):
                    pg = at[g] / nt
                    cov[g, g] += f * pg * (1.0 - pg)
                    for h in range(k):
                        if h != g:
                            cov[g, h] -= f * pg * (at[h] / nt)
        for g in range(k):
            at[g] -= rem[g]
        i = j
    return obs_arr, exp_arr, cov_arr


def piecewise_inverse(starts, rates, targets):
    """Invert the piecewise-linear cumulative hazard; see the pure backend."""
    cdef double[::1] st = np.ascontiguousarray(starts, dtype=np.float64)
    cdef double[::1] rt = np.ascontiguousarray(rates, dtype=np.float64)
    cdef double[::1] tg = np.ascontiguousarray(targets, dtype=np.float64)
    cdef Py_ssize_t m = st.shape[0], n = tg.shape[0], i, kk
    cum_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] cum = cum_arr
    cum[0] = 0.0
    for i in range(1, m):
        cum[i] = cum[i - 1] + rt[i - 1] * (st[i] - st[i - 1])
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    for i in range(n):
        if tg[i] <= 0.0:
            out[i] = st[0]
            continue
        kk = _lower_bound(cum, tg[i]) - 1
        if kk < 0:
            kk = 0
        if rt[kk] > 0.0:
            out[i] = st[kk] + (tg[i] - cum[kk]) / rt[kk]
        else:
            out[i] = INFINITY
    return out_arr


def piecewise_cumhaz(starts, rates, times):
    """Evaluate the piecewise-linear cumulative hazard; see the pure backend."""
    cdef double[::1] st = np.ascontiguousarray(starts, dtype=np.float64)
    cdef double[::1] rt = np.ascontiguousarray(rates, dtype=np.float64)
    cdef double[::1] ts = np.ascontiguousarray(times, dtype=np.float64)
    cdef Py_ssize_t m = st.shape[0], n = ts.shape[0], i, kk
    cum_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] cum = cum_arr
    cum[0] = 0.0
    for i in range(1, m):
        cum[i] = cum[i - 1] + rt[i - 1] * (st[i] - st[i - 1])
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    for i in range(n):
        kk = _upper_bound(st, ts[i]) - 1
        if kk < 0:
            kk = 0
        out[i] = cum[kk] + rt[kk] * (ts[i] - st[kk])
    return out_arr
