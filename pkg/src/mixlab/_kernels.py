"""Event-consuming inner loops shared by all simulation drivers.

Each kernel advances a state (or a coupled pair/triple) through a chunk of
pre-drawn events.  An event is a triple ``(dts[j], sites[j], marks[j])``:
a unit-rate exponential waiting time (scaled by ``inv_rate`` = 1/(N-1) to
realize the global rate-(N-1) clock), a 0-based update location in
``[0, N-2]``, and a uniform mark in ``[0, 1)``.  Kernels never draw
randomness themselves; the driver refills chunks from numpy Generators, so
the numba path and the pure-Python fallback walk identical trajectories.

Chunk protocol: a kernel consumes events while the next event time stays
within ``t_limit``; it returns the updated cursor and clock together with a
status code.  An event whose time exceeds ``t_limit`` is left unconsumed and
will fire at the same absolute time on the next call, which makes
trajectories independent of where the driver pauses for observations.

Height-path convention at location ``i`` (1-based path coordinate): when the
two neighbors agree the coordinate is resampled, to ``zeta[i-1]+1`` (the "+"
resolution) when ``mark >= 1-p`` and to ``zeta[i-1]-1`` otherwise; on a slope
the event is a no-op but still consumes its stream entries, keeping coupled
members aligned.
"""

import numpy as np

from ._accel import maybe_jit

# status codes returned by every kernel
NEED_REFILL = 0
REACHED_LIMIT = 1
COALESCED = 2
NEED_REFILL_AUX = 3

_jit = maybe_jit(cache=True, nogil=True)


@_jit
def run_heights(zeta, p, t_now, t_limit, inv_rate, dts, sites, marks, j):
    """Advance one height path; returns (cursor, clock, status)."""
    n = dts.shape[0]
    thr = 1.0 - p
    while True:
        if j >= n:
            return j, t_now, NEED_REFILL
        t_next = t_now + dts[j] * inv_rate
        if t_next > t_limit:
            return j, t_now, REACHED_LIMIT
        i = sites[j] + 1
        lo = zeta[i - 1]
        if lo == zeta[i + 1]:
            if marks[j] >= thr:
                zeta[i] = lo + 1
            else:
                zeta[i] = lo - 1
        t_now = t_next
        j += 1


@_jit
def run_perm(sig, p, t_now, t_limit, inv_rate, dts, sites, marks, j):
    """Advance one permutation (adjacent sort/unsort updates)."""
    n = dts.shape[0]
    thr = 1.0 - p
    while True:
        if j >= n:
            return j, t_now, NEED_REFILL
        t_next = t_now + dts[j] * inv_rate
        if t_next > t_limit:
            return j, t_now, REACHED_LIMIT
        i = sites[j]
        a = sig[i]
        b = sig[i + 1]
        if marks[j] >= thr:
            if a > b:
                sig[i] = b
                sig[i + 1] = a
        else:
            if a < b:
                sig[i] = b
                sig[i + 1] = a
        t_now = t_next
        j += 1


@_jit
def run_simplex(x, nright, t_now, t_limit, inv_rate, dts, sites, marks, j):
    """Advance one simplex configuration; ``nright`` is the pinned value x_N = N."""
    n = dts.shape[0]
    m = x.shape[0]
    while True:
        if j >= n:
            return j, t_now, NEED_REFILL
        t_next = t_now + dts[j] * inv_rate
        if t_next > t_limit:
            return j, t_now, REACHED_LIMIT
        i = sites[j]
        left = x[i - 1] if i > 0 else 0.0
        right = x[i + 1] if i + 1 < m else nright
        u = marks[j]
        x[i] = u * right + (1.0 - u) * left
        t_now = t_next
        j += 1


@_jit
def run_ensemble_heights(Z, p, t_now, t_limit, inv_rate, dts, sites, marks, j):
    """Advance every row of Z under the shared event stream (grand coupling)."""
    n = dts.shape[0]
    rows = Z.shape[0]
    thr = 1.0 - p
    while True:
        if j >= n:
            return j, t_now, NEED_REFILL
        t_next = t_now + dts[j] * inv_rate
        if t_next > t_limit:
            return j, t_now, REACHED_LIMIT
        i = sites[j] + 1
        up = marks[j] >= thr
        for r in range(rows):
            lo = Z[r, i - 1]
            if lo == Z[r, i + 1]:
                if up:
                    Z[r, i] = lo + 1
                else:
                    Z[r, i] = lo - 1
        t_now = t_next
        j += 1


@_jit
def run_ensemble_perm(S, p, t_now, t_limit, inv_rate, dts, sites, marks, j):
    n = dts.shape[0]
    rows = S.shape[0]
    thr = 1.0 - p
    while True:
        if j >= n:
            return j, t_now, NEED_REFILL
        t_next = t_now + dts[j] * inv_rate
        if t_next > t_limit:
            return j, t_now, REACHED_LIMIT
        i = sites[j]
        asc = marks[j] >= thr
        for r in range(rows):
            a = S[r, i]
            b = S[r, i + 1]
            if asc:
                if a > b:
                    S[r, i] = b
                    S[r, i + 1] = a
            else:
                if a < b:
                    S[r, i] = b
                    S[r, i + 1] = a
        t_now = t_next
        j += 1


@_jit
def run_ensemble_simplex(X, nright, t_now, t_limit, inv_rate, dts, sites, marks, j):
    n = dts.shape[0]
    rows = X.shape[0]
    m = X.shape[1]
    while True:
        if j >= n:
            return j, t_now, NEED_REFILL
        t_next = t_now + dts[j] * inv_rate
        if t_next > t_limit:
            return j, t_now, REACHED_LIMIT
        i = sites[j]
        u = marks[j]
        for r in range(rows):
            left = X[r, i - 1] if i > 0 else 0.0
            right = X[r, i + 1] if i + 1 < m else nright
            X[r, i] = u * right + (1.0 - u) * left
        t_now = t_next
        j += 1


@_jit
def run_pair_heights(z1, z2, p, refined, stop_on_meet, t_now, t_limit, inv_rate,
                     dts, sites, marks, aux, aj, j, gap):
    """Advance a pair of height paths, tracking the gap sum(|z2 - z1|).

    For an ordered pair z1 <= z2 the gap is the area between the paths; the
    graphical coupling preserves order, so it never picks up sign changes.

    In refined mode (refined != 0) the second chain consumes marks from
    ``aux`` wherever the pair is strictly ordered at the event's coordinate,
    except in the facing-corner case (gap exactly 2, lower chain at a local
    minimum, upper chain at a local maximum) where only the shared mark keeps
    the pair ordered -- and in fact coalesces the coordinate.

    Returns (cursor, aux cursor, clock, gap, tau, status); tau is the
    coalescence time when status == COALESCED, else -1.
    """
    n = dts.shape[0]
    na = aux.shape[0]
    thr = 1.0 - p
    while True:
        if j >= n:
            return j, aj, t_now, gap, -1.0, NEED_REFILL
        t_next = t_now + dts[j] * inv_rate
        if t_next > t_limit:
            return j, aj, t_now, gap, -1.0, REACHED_LIMIT
        i = sites[j] + 1
        u = marks[j]
        old1 = z1[i]
        old2 = z2[i]
        use_shared = True
        if refined != 0 and old2 > old1:
            facing = (old2 - old1 == 2
                      and z1[i - 1] == z1[i + 1] and z1[i - 1] == old1 + 1
                      and z2[i - 1] == z2[i + 1] and z2[i - 1] == old2 - 1)
            if not facing:
                if aj >= na:
                    # event j not consumed; re-entered with a fresh aux chunk
                    return j, aj, t_now, gap, -1.0, NEED_REFILL_AUX
                use_shared = False
        lo1 = z1[i - 1]
        if lo1 == z1[i + 1]:
            if u >= thr:
                z1[i] = lo1 + 1
            else:
                z1[i] = lo1 - 1
        if use_shared:
            v = u
        else:
            v = aux[aj]
            aj += 1
        lo2 = z2[i - 1]
        if lo2 == z2[i + 1]:
            if v >= thr:
                z2[i] = lo2 + 1
            else:
                z2[i] = lo2 - 1
        d_old = old2 - old1
        if d_old < 0:
            d_old = -d_old
        d_new = z2[i] - z1[i]
        if d_new < 0:
            d_new = -d_new
        gap += d_new - d_old
        t_now = t_next
        j += 1
        if gap == 0 and stop_on_meet != 0:
            return j, aj, t_now, gap, t_now, COALESCED


@_jit
def run_triple_heights(zb, zt, zp, p, t_now, t_limit, inv_rate,
                       dts, sites, marks, j, gap_bt, gap_pt, tau2):
    """Grand coupling of (bottom, top, intermediate) height paths.

    Tracks sum(zt - zb) and sum(zt - zp); returns when the outer pair meets
    (the inner pair necessarily met first).  Returns
    (cursor, clock, gap_bt, gap_pt, tau1, tau2, status).
    """
    n = dts.shape[0]
    thr = 1.0 - p
    while True:
        if j >= n:
            return j, t_now, gap_bt, gap_pt, -1.0, tau2, NEED_REFILL
        t_next = t_now + dts[j] * inv_rate
        if t_next > t_limit:
            return j, t_now, gap_bt, gap_pt, -1.0, tau2, REACHED_LIMIT
        i = sites[j] + 1
        up = marks[j] >= thr
        ob = zb[i]
        ot = zt[i]
        op = zp[i]
        lo = zb[i - 1]
        if lo == zb[i + 1]:
            zb[i] = lo + 1 if up else lo - 1
        lo = zt[i - 1]
        if lo == zt[i + 1]:
            zt[i] = lo + 1 if up else lo - 1
        lo = zp[i - 1]
        if lo == zp[i + 1]:
            zp[i] = lo + 1 if up else lo - 1
        dt_top = zt[i] - ot
        gap_bt += dt_top - (zb[i] - ob)
        gap_pt += dt_top - (zp[i] - op)
        t_now = t_next
        j += 1
        if gap_pt == 0 and tau2 < 0.0:
            tau2 = t_now
        if gap_bt == 0:
            return j, t_now, gap_bt, gap_pt, t_now, tau2, COALESCED


@_jit
def run_pair_perm(s1, s2, p, stop_on_meet, t_now, t_limit, inv_rate,
                  dts, sites, marks, j, ndiff):
    """Grand coupling of two permutations; ndiff counts differing positions.

    Returns (cursor, clock, ndiff, tau, status).
    """
    n = dts.shape[0]
    thr = 1.0 - p
    while True:
        if j >= n:
            return j, t_now, ndiff, -1.0, NEED_REFILL
        t_next = t_now + dts[j] * inv_rate
        if t_next > t_limit:
            return j, t_now, ndiff, -1.0, REACHED_LIMIT
        i = sites[j]
        asc = marks[j] >= thr
        d0 = 0
        if s1[i] != s2[i]:
            d0 += 1
        if s1[i + 1] != s2[i + 1]:
            d0 += 1
        a = s1[i]
        b = s1[i + 1]
        if asc:
            if a > b:
                s1[i] = b
                s1[i + 1] = a
        else:
            if a < b:
                s1[i] = b
                s1[i + 1] = a
        a = s2[i]
        b = s2[i + 1]
        if asc:
            if a > b:
                s2[i] = b
                s2[i + 1] = a
        else:
            if a < b:
                s2[i] = b
                s2[i + 1] = a
        d1 = 0
        if s1[i] != s2[i]:
            d1 += 1
        if s1[i + 1] != s2[i + 1]:
            d1 += 1
        ndiff += d1 - d0
        t_now = t_next
        j += 1
        if ndiff == 0 and stop_on_meet != 0:
            return j, t_now, ndiff, t_now, COALESCED
