"""Numpy fallback kernels.

Semantics contract shared with _native: log-domain arithmetic where -inf is
zero mass, logaddexp folds run left to right, and every array is float64.
The two backends agree to floating-point roundoff; parity is tested.
"""

from __future__ import annotations

import math

import numpy as np

NEG_INF = -math.inf


def renewal_logrec(head_log, T, has_tail, tail_u, tail_r):
    """Log-domain renewal recursion Psi_t = sum_s a_s Psi_{t-s}, Psi_0 = 1.

    head_log[i] is ln a_{i+1}; the optional tail contributes
    ln a_s = tail_u + tail_r * s for every s > s0, folded in exactly through
    the running accumulator G_t = a_{s0+1} Psi_{t-s0-1} + e^{tail_r} G_{t-1}.
    """
    head = [float(x) for x in head_log]
    s0 = len(head)
    out = np.full(T + 1, NEG_INF, dtype=np.float64)
    out[0] = 0.0
    lng = NEG_INF
    lae = math.log1p
    vals = out  # local alias, plain python loop
    for t in range(1, T + 1):
        acc = NEG_INF
        for s in range(1, min(t, s0) + 1):
            w = head[s - 1]
            prev = vals[t - s]
            if w != NEG_INF and prev != NEG_INF:
                x = w + prev
                if acc == NEG_INF:
                    acc = x
                elif x == acc:
                    acc = x + 0.6931471805599453
                elif x > acc:
                    acc = x + lae(math.exp(acc - x))
                else:
                    acc = acc + lae(math.exp(x - acc))
        if has_tail and t >= s0 + 1:
            first = tail_u + tail_r * (s0 + 1)
            prev = vals[t - s0 - 1]
            term = first + prev if prev != NEG_INF else NEG_INF
            carried = tail_r + lng if lng != NEG_INF else NEG_INF
            if term == NEG_INF:
                lng = carried
            elif carried == NEG_INF:
                lng = term
            elif term == carried:
                lng = term + 0.6931471805599453
            elif term > carried:
                lng = term + lae(math.exp(carried - term))
            else:
                lng = carried + lae(math.exp(term - carried))
            if lng != NEG_INF:
                if acc == NEG_INF:
                    acc = lng
                elif lng == acc:
                    acc = lng + 0.6931471805599453
                elif lng > acc:
                    acc = lng + lae(math.exp(acc - lng))
                else:
                    acc = acc + lae(math.exp(lng - acc))
        vals[t] = acc
    return out


def free_log_conv(ln_zc, ln_surv):
    """out[t] = logsumexp(ln_surv[t], ln_zc[tau] + ln_surv[t-tau] for tau=1..t)."""
    ln_zc = np.asarray(ln_zc, dtype=np.float64)
    ln_surv = np.asarray(ln_surv, dtype=np.float64)
    T = ln_zc.shape[0] - 1
    out = np.empty(T + 1, dtype=np.float64)
    out[0] = ln_surv[0]
    for t in range(1, T + 1):
        terms = ln_zc[1 : t + 1] + ln_surv[t - 1 :: -1][:t]
        acc = np.logaddexp.reduce(terms, initial=ln_surv[t])
        out[t] = acc
    return out


def shift_logaddexp_1d(acc, src, shift, const):
    """In place: acc[i] = logaddexp(acc[i], src[i - shift] + const)."""
    n = acc.shape[0]
    lo = max(shift, 0)
    hi = min(n, n + shift)
    if lo >= hi:
        return
    np.logaddexp(acc[lo:hi], src[lo - shift : hi - shift] + const, out=acc[lo:hi])


def shift_logaddexp_2d(acc, src, si, sj, const):
    n, m = acc.shape
    ilo, ihi = max(si, 0), min(n, n + si)
    jlo, jhi = max(sj, 0), min(m, m + sj)
    if ilo >= ihi or jlo >= jhi:
        return
    np.logaddexp(
        acc[ilo:ihi, jlo:jhi],
        src[ilo - si : ihi - si, jlo - sj : jhi - sj] + const,
        out=acc[ilo:ihi, jlo:jhi],
    )


def logsumexp_arr(x):
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.size == 0:
        return NEG_INF
    m = float(np.max(x))
    if m == NEG_INF:
        return NEG_INF
    return m + math.log(float(np.sum(np.exp(x - m))))
