# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled event loop for the forwarder simulator.

Statement-for-statement twin of ``_kernel_py.simulate``: same splitmix64
stream, same float expressions in the same order, so outputs are
bit-identical to the pure-Python backend. See that module for the
semantics; this file only exists to make million-event runs cheap.
"""

import numpy as np

from libc.math cimport log, INFINITY

ctypedef unsigned long long u64

cdef double TWO53_INV = 1.0 / 9007199254740992.0
cdef u64 GOLDEN = 0x9E3779B97F4A7C15
cdef u64 MIX1 = 0xBF58476D1CE4E5B9
cdef u64 MIX2 = 0x94D049BB133111EB


cdef inline double _expo(u64 *state, double rate) noexcept nogil:
    cdef u64 z
    state[0] = state[0] + GOLDEN
    z = state[0]
    z = (z ^ (z >> 30)) * MIX1
    z = (z ^ (z >> 27)) * MIX2
    z = z ^ (z >> 31)
    return -log(1.0 - <double>(z >> 11) * TWO53_INV) / rate


def simulate(int mech, int preemptive,
             double lambda_hat, double lam, double mu_hat, double mu,
             double horizon, double warmup_time, int n_batches, object seed,
             trans_post, trans_app, trans_loc):
    """Same contract as ``_kernel_py.simulate``."""
    cdef long long[:, ::1] tp = np.ascontiguousarray(trans_post, dtype=np.int64)
    cdef double[:, :, :, ::1] ta = np.ascontiguousarray(trans_app, dtype=np.float64)
    cdef double[:, :, :, ::1] tl = np.ascontiguousarray(trans_loc, dtype=np.float64)

    batch_app_area = np.zeros(n_batches)
    batch_loc_area = np.zeros(n_batches)
    batch_state_time = np.zeros((n_batches, 5))
    batch_arrivals = np.zeros(n_batches, dtype=np.int64)
    batch_delivered = np.zeros(n_batches, dtype=np.int64)
    counts = np.zeros(8, dtype=np.int64)
    violation = np.array([0, -1, -1, -1], dtype=np.int64)

    cdef double[::1] app_area = batch_app_area
    cdef double[::1] loc_area = batch_loc_area
    cdef double[:, ::1] state_time = batch_state_time
    cdef long long[::1] arrivals = batch_arrivals
    cdef long long[::1] delivered_b = batch_delivered
    cdef long long[::1] cnt = counts
    cdef long long[::1] viol = violation

    cdef u64 rng_state = <u64>(int(seed) & 0xFFFFFFFFFFFFFFFF)

    cdef long long mobile = 0, fib_ver = 0, writer_ver = 0, snap = 0
    cdef double fib_ts = 0.0, writer_ts = 0.0, reader_ts = 0.0, delivered_ts = 0.0
    cdef int wbusy = 0, wpend = 0, rbusy = 0, rpend = 0

    cdef double t = 0.0
    cdef int s = 0
    cdef double t_loc = _expo(&rng_state, lambda_hat)
    cdef double t_app = _expo(&rng_state, lam)
    cdef double t_w = INFINITY
    cdef double t_r = INFINITY

    cdef double batch_len = (horizon - warmup_time) / n_batches
    cdef int bi = 0
    cdef double batch_end = warmup_time + batch_len

    cdef double te, a, dt, x0, x1, h0, h1, nx0, nx1, nh0, nh1
    cdef int ev, stop, inwin, checked, s1, ok, was_delivered

    while True:
        te = t_loc
        ev = 0
        if t_app < te:
            te = t_app
            ev = 1
        if t_w < te:
            te = t_w
            ev = 2
        if t_r < te:
            te = t_r
            ev = 3
        stop = te >= horizon
        if stop:
            te = horizon

        if te > warmup_time:
            a = t if t > warmup_time else warmup_time
            while te > batch_end and bi < n_batches - 1:
                dt = batch_end - a
                if dt > 0.0:
                    app_area[bi] += dt * ((a - delivered_ts) + (batch_end - delivered_ts)) * 0.5
                    loc_area[bi] += dt * ((a - fib_ts) + (batch_end - fib_ts)) * 0.5
                    state_time[bi, s] += dt
                bi += 1
                a = batch_end
                batch_end = warmup_time + (bi + 1.0) * batch_len
            dt = te - a
            if dt > 0.0:
                app_area[bi] += dt * ((a - delivered_ts) + (te - delivered_ts)) * 0.5
                loc_area[bi] += dt * ((a - fib_ts) + (te - fib_ts)) * 0.5
                state_time[bi, s] += dt
        t = te
        if stop:
            break
        inwin = t >= warmup_time

        x0 = t - reader_ts
        x1 = t - delivered_ts
        h0 = t - writer_ts
        h1 = t - fib_ts
        checked = 1

        if ev == 0:
            t_loc = t + _expo(&rng_state, lambda_hat)
            if inwin:
                cnt[0] += 1
            mobile += 1
            writer_ver = mobile
            writer_ts = t
            if mech == 1 and rbusy:
                if wpend and inwin:
                    cnt[5] += 1
                wpend = 1
            elif wbusy:
                if inwin:
                    cnt[5] += 1
                t_w = t + _expo(&rng_state, mu_hat)
            else:
                wbusy = 1
                t_w = t + _expo(&rng_state, mu_hat)
        elif ev == 1:
            t_app = t + _expo(&rng_state, lam)
            if inwin:
                cnt[1] += 1
                arrivals[bi] += 1
            if rbusy:
                if preemptive:
                    reader_ts = t
                    if inwin:
                        cnt[6] += 1
                else:
                    checked = 0
                    if inwin:
                        cnt[7] += 1
            elif mech == 1 and wbusy:
                if rpend:
                    if preemptive:
                        reader_ts = t
                        if inwin:
                            cnt[6] += 1
                    else:
                        checked = 0
                        if inwin:
                            cnt[7] += 1
                else:
                    rpend = 1
                    reader_ts = t
            else:
                rbusy = 1
                reader_ts = t
                snap = fib_ver
                t_r = t + _expo(&rng_state, mu)
        elif ev == 2:
            if inwin:
                cnt[2] += 1
            fib_ver = writer_ver
            fib_ts = writer_ts
            wbusy = 0
            t_w = INFINITY
            if mech == 1 and rpend:
                rpend = 0
                rbusy = 1
                t_r = t + _expo(&rng_state, mu)
        else:
            if inwin:
                cnt[3] += 1
            was_delivered = (snap == mobile) if mech == 0 else (fib_ver == mobile)
            if was_delivered:
                delivered_ts = reader_ts
                if inwin:
                    cnt[4] += 1
                    delivered_b[bi] += 1
            rbusy = 0
            t_r = INFINITY
            if mech == 1 and wpend:
                wpend = 0
                wbusy = 1
                t_w = t + _expo(&rng_state, mu_hat)

        if mech == 0:
            if wbusy:
                s1 = 2 if rbusy else 1
            elif rbusy:
                s1 = 3 if snap == mobile else 4
            else:
                s1 = 0
        else:
            if wbusy:
                s1 = 2 if rpend else 1
            elif rbusy:
                s1 = 4 if wpend else 3
            else:
                s1 = 0

        if checked:
            ok = tp[ev, s] == s1
            if ok:
                nx0 = t - reader_ts
                nx1 = t - delivered_ts
                nh0 = t - writer_ts
                nh1 = t - fib_ts
                ok = (nx0 == x0 * ta[ev, s, 0, 0] + x1 * ta[ev, s, 1, 0]
                      and nx1 == x0 * ta[ev, s, 0, 1] + x1 * ta[ev, s, 1, 1]
                      and nh0 == h0 * tl[ev, s, 0, 0] + h1 * tl[ev, s, 1, 0]
                      and nh1 == h0 * tl[ev, s, 0, 1] + h1 * tl[ev, s, 1, 1])
            if not ok:
                viol[0] = 1
                viol[1] = s
                viol[2] = ev
                viol[3] = s1
                break
        s = s1

    return {
        "batch_app_area": batch_app_area,
        "batch_loc_area": batch_loc_area,
        "batch_state_time": batch_state_time,
        "batch_arrivals": batch_arrivals,
        "batch_delivered": batch_delivered,
        "counts": counts,
        "violation": violation,
    }
