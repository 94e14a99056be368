"""Pure-Python event loop for the forwarder simulator.

This is the fallback backend and the reference for the compiled one: the
two consume the same splitmix64 stream in the same order and perform the
same float operations, so their outputs are bit-identical.

Mechanics simulated per event (mech 0 = RCU, 1 = RWL):

* location arrival: bumps the terminal's address version and hands the
  writer a fresh payload. A write in progress restarts with a fresh
  service draw; under RWL with the read lock held the payload queues
  (displacing any older queued one) until the read completes.
* app arrival: starts a read when allowed. RCU reads start immediately
  and pin a snapshot of the table; RWL reads queue behind an active or
  queued write (write-preferring). Arrivals finding the reader occupied
  replace the held payload when preemption is on and are discarded
  otherwise.
* write completion: publishes version and timestamp to the table; under
  RWL a queued read then starts.
* read completion: delivers iff the address used (RCU: snapshot; RWL:
  live table) still matches the terminal; under RWL a queued write then
  starts.

Every non-discarded event is checked against the model's transition
table: the (pre-state, event, post-state) triple must be listed, and the
observed age changes must equal the row's reset maps applied to the
pre-event ages. The first mismatch aborts the run and is reported in the
``violation`` output.

Between events both tracked ages grow at unit rate, so their time
integrals are accumulated exactly (trapezoids) into equal-length batches
covering the post-warmup window.
"""

from __future__ import annotations

import math

import numpy as np

INF = math.inf
_MASK = 0xFFFFFFFFFFFFFFFF
_TWO53_INV = 1.0 / 9007199254740992.0  # 2^-53

# event codes
EV_LOC_ARRIVAL = 0
EV_APP_ARRIVAL = 1
EV_WRITE_DONE = 2
EV_READ_DONE = 3

EVENT_NAMES = ("loc_arrival", "app_arrival", "write_completion", "read_completion")


def simulate(mech: int, preemptive: int,
             lambda_hat: float, lam: float, mu_hat: float, mu: float,
             horizon: float, warmup_time: float, n_batches: int, seed: int,
             trans_post, trans_app, trans_loc) -> dict:
    """Run one simulation; see the module docstring for the semantics.

    ``trans_post[ev][pre]`` is the table's destination state (-1 when the
    table has no such row) and ``trans_app``/``trans_loc`` hold the
    corresponding 2x2 reset maps, shaped (4, 5, 2, 2).
    """
    tp = [[int(x) for x in row] for row in np.asarray(trans_post)]
    ta = _flatten_maps(trans_app)
    tl = _flatten_maps(trans_loc)

    batch_app_area = np.zeros(n_batches)
    batch_loc_area = np.zeros(n_batches)
    batch_state_time = np.zeros((n_batches, 5))
    batch_arrivals = np.zeros(n_batches, dtype=np.int64)
    batch_delivered = np.zeros(n_batches, dtype=np.int64)
    counts = np.zeros(8, dtype=np.int64)
    violation = np.array([0, -1, -1, -1], dtype=np.int64)

    rng_state = seed & _MASK

    def expo(rate: float) -> float:
        nonlocal rng_state
        rng_state = (rng_state + 0x9E3779B97F4A7C15) & _MASK
        z = rng_state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        z ^= z >> 31
        return -math.log(1.0 - (z >> 11) * _TWO53_INV) / rate

    # forwarder state
    mobile = 0            # current terminal address version
    fib_ver = 0           # version stored in the table
    fib_ts = 0.0          # generation time of the stored location update
    wbusy = 0             # write in progress
    wpend = 0             # location payload queued behind a read lock (RWL)
    writer_ver = 0        # freshest location version at the writer
    writer_ts = 0.0
    rbusy = 0             # read in progress
    rpend = 0             # app payload queued behind the write lock (RWL)
    snap = 0              # table version pinned at read start (RCU)
    reader_ts = 0.0       # freshest app payload timestamp at the reader
    delivered_ts = 0.0    # timestamp of the freshest delivered app update

    t = 0.0
    s = 0  # current discrete state
    t_loc = expo(lambda_hat)
    t_app = expo(lam)
    t_w = INF
    t_r = INF

    batch_len = (horizon - warmup_time) / n_batches
    bi = 0
    batch_end = warmup_time + batch_len

    while True:
        # next event: fixed comparison order keeps ties deterministic
        te = t_loc
        ev = EV_LOC_ARRIVAL
        if t_app < te:
            te = t_app
            ev = EV_APP_ARRIVAL
        if t_w < te:
            te = t_w
            ev = EV_WRITE_DONE
        if t_r < te:
            te = t_r
            ev = EV_READ_DONE
        stop = te >= horizon
        if stop:
            te = horizon

        # integrate ages and occupancy over [t, te), split across batches
        if te > warmup_time:
            a = t if t > warmup_time else warmup_time
            while te > batch_end and bi < n_batches - 1:
                dt = batch_end - a
                if dt > 0.0:
                    batch_app_area[bi] += dt * ((a - delivered_ts) + (batch_end - delivered_ts)) * 0.5
                    batch_loc_area[bi] += dt * ((a - fib_ts) + (batch_end - fib_ts)) * 0.5
                    batch_state_time[bi, s] += dt
                bi += 1
                a = batch_end
                batch_end = warmup_time + (bi + 1.0) * batch_len
            dt = te - a
            if dt > 0.0:
                batch_app_area[bi] += dt * ((a - delivered_ts) + (te - delivered_ts)) * 0.5
                batch_loc_area[bi] += dt * ((a - fib_ts) + (te - fib_ts)) * 0.5
                batch_state_time[bi, s] += dt
        t = te
        if stop:
            break
        inwin = t >= warmup_time

        # ages before the event, for the reset-map check
        x0 = t - reader_ts
        x1 = t - delivered_ts
        h0 = t - writer_ts
        h1 = t - fib_ts
        checked = True

        if ev == EV_LOC_ARRIVAL:
            t_loc = t + expo(lambda_hat)
            if inwin:
                counts[0] += 1
            mobile += 1
            writer_ver = mobile
            writer_ts = t
            if mech == 1 and rbusy:
                if wpend and inwin:
                    counts[5] += 1
                wpend = 1
            elif wbusy:
                if inwin:
                    counts[5] += 1
                t_w = t + expo(mu_hat)  # preempted write restarts afresh
            else:
                wbusy = 1
                t_w = t + expo(mu_hat)
        elif ev == EV_APP_ARRIVAL:
            t_app = t + expo(lam)
            if inwin:
                counts[1] += 1
                batch_arrivals[bi] += 1
            if rbusy:
                if preemptive:
                    reader_ts = t
                    if inwin:
                        counts[6] += 1
                else:
                    checked = False
                    if inwin:
                        counts[7] += 1
            elif mech == 1 and wbusy:
                if rpend:
                    if preemptive:
                        reader_ts = t
                        if inwin:
                            counts[6] += 1
                    else:
                        checked = False
                        if inwin:
                            counts[7] += 1
                else:
                    rpend = 1
                    reader_ts = t
            else:
                rbusy = 1
                reader_ts = t
                snap = fib_ver
                t_r = t + expo(mu)
        elif ev == EV_WRITE_DONE:
            if inwin:
                counts[2] += 1
            fib_ver = writer_ver
            fib_ts = writer_ts
            wbusy = 0
            t_w = INF
            if mech == 1 and rpend:
                rpend = 0
                rbusy = 1
                t_r = t + expo(mu)
        else:  # EV_READ_DONE
            if inwin:
                counts[3] += 1
            delivered = (snap == mobile) if mech == 0 else (fib_ver == mobile)
            if delivered:
                delivered_ts = reader_ts
                if inwin:
                    counts[4] += 1
                    batch_delivered[bi] += 1
            rbusy = 0
            t_r = INF
            if mech == 1 and wpend:
                wpend = 0
                wbusy = 1
                t_w = t + expo(mu_hat)

        # classify the post-event state
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
            # the observed move and its age resets must match the table
            am = ta[ev][s]
            lm = tl[ev][s]
            ok = tp[ev][s] == s1
            if ok:
                nx0 = t - reader_ts
                nx1 = t - delivered_ts
                nh0 = t - writer_ts
                nh1 = t - fib_ts
                ok = (nx0 == x0 * am[0] + x1 * am[2]
                      and nx1 == x0 * am[1] + x1 * am[3]
                      and nh0 == h0 * lm[0] + h1 * lm[2]
                      and nh1 == h0 * lm[1] + h1 * lm[3])
            if not ok:
                violation[0] = 1
                violation[1] = s
                violation[2] = ev
                violation[3] = s1
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


def _flatten_maps(maps) -> list:
    """(4, 5, 2, 2) array -> [ev][pre] = (a00, a01, a10, a11)."""
    arr = np.asarray(maps, dtype=float)
    return [[(float(arr[e, q, 0, 0]), float(arr[e, q, 0, 1]),
              float(arr[e, q, 1, 0]), float(arr[e, q, 1, 1]))
             for q in range(arr.shape[1])]
            for e in range(arr.shape[0])]
