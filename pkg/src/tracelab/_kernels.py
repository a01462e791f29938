"""Inner loops over spectra and step functions.

Each kernel has a numba ``@njit`` body and a pure-numpy twin with the same
signature.  The numba path is used when numba imports cleanly and the
environment variable ``TRACELAB_NUMBA`` is not set to ``0``; ``BACKEND``
names the active path.  Eigensolves are not here: they go through LAPACK
(``numpy.linalg``) on both paths.
"""
import os

import numpy as np

SIG_DIGITS = 12
# below this the rounding scale would overflow; such values share key 0
TINY = 1e-290


# ---------------------------------------------------------------------------
# pure numpy
# ---------------------------------------------------------------------------

def _round_sig_np(values):
    out = np.zeros_like(values)
    nz = np.abs(values) >= TINY
    v = values[nz]
    e = np.floor(np.log10(np.abs(v)))
    scale = 10.0 ** (SIG_DIGITS - 1 - e)
    out[nz] = np.round(v * scale) / scale
    return out


def canonical_steps_np(values, lengths):
    order = np.argsort(-values, kind="stable")
    v = values[order]
    ln = lengths[order]
    if v.size == 0:
        return v, ln
    key = _round_sig_np(v)
    starts = np.flatnonzero(np.r_[True, key[1:] != key[:-1]])
    return v[starts].copy(), np.add.reduceat(ln, starts)


def weighted_sum_np(fvalues, lengths):
    return float(np.dot(fvalues, lengths))


def distribution_np(values, lengths, lams):
    mask = values[None, :] > lams[:, None]
    return (mask * lengths[None, :]).sum(axis=1)


def mu_eval_np(values, lengths, ts):
    cum = np.cumsum(lengths)
    idx = np.searchsorted(cum, ts, side="right")
    padded = np.r_[values, 0.0]
    return padded[np.minimum(idx, values.size)]


def mu_inf_np(values, lengths, ts):
    cand = np.r_[0.0, values]
    dist = distribution_np(values, lengths, cand)
    ok = dist[None, :] <= ts[:, None]
    big = np.where(ok, cand[None, :], np.inf)
    return big.min(axis=1)


# ---------------------------------------------------------------------------
# numba
# ---------------------------------------------------------------------------

try:
    from numba import njit
    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False

if HAS_NUMBA:

    @njit(cache=True)
    def _round_sig_nb(x):
        if abs(x) < TINY:
            return 0.0
        e = np.floor(np.log10(abs(x)))
        scale = 10.0 ** (SIG_DIGITS - 1 - e)
        return np.round(x * scale) / scale

    @njit(cache=True)
    def canonical_steps_nb(values, lengths):
        order = np.argsort(-values, kind="mergesort")
        k = values.size
        out_v = np.empty(k)
        out_l = np.empty(k)
        m = 0
        prev = np.nan
        for i in range(k):
            v = values[order[i]]
            key = _round_sig_nb(v)
            if m > 0 and key == prev:
                out_l[m - 1] += lengths[order[i]]
            else:
                out_v[m] = v
                out_l[m] = lengths[order[i]]
                prev = key
                m += 1
        return out_v[:m].copy(), out_l[:m].copy()

    @njit(cache=True)
    def weighted_sum_nb(fvalues, lengths):
        s = 0.0
        for i in range(fvalues.size):
            s += fvalues[i] * lengths[i]
        return s

    @njit(cache=True)
    def distribution_nb(values, lengths, lams):
        out = np.zeros(lams.size)
        for j in range(lams.size):
            s = 0.0
            for i in range(values.size):
                if values[i] > lams[j]:
                    s += lengths[i]
            out[j] = s
        return out

    @njit(cache=True)
    def mu_eval_nb(values, lengths, ts):
        cum = np.cumsum(lengths)
        out = np.zeros(ts.size)
        for j in range(ts.size):
            idx = np.searchsorted(cum, ts[j], side="right")
            if idx < values.size:
                out[j] = values[idx]
        return out

    @njit(cache=True)
    def mu_inf_nb(values, lengths, ts):
        k = values.size
        cand = np.empty(k + 1)
        cand[0] = 0.0
        cand[1:] = values
        dist = distribution_nb(values, lengths, cand)
        out = np.empty(ts.size)
        for j in range(ts.size):
            best = np.inf
            for i in range(k + 1):
                if dist[i] <= ts[j] and cand[i] < best:
                    best = cand[i]
            out[j] = best
        return out


def _use_numba():
    return HAS_NUMBA and os.environ.get("TRACELAB_NUMBA", "1") != "0"


if _use_numba():
    BACKEND = "numba"
    canonical_steps = canonical_steps_nb
    weighted_sum = weighted_sum_nb
    distribution = distribution_nb
    mu_eval = mu_eval_nb
    mu_inf = mu_inf_nb
else:
    BACKEND = "numpy"
    canonical_steps = canonical_steps_np
    weighted_sum = weighted_sum_np
    distribution = distribution_np
    mu_eval = mu_eval_np
    mu_inf = mu_inf_np
