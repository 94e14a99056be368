"""Driver that runs a kernel and turns raw accumulators into a SimResult."""

from __future__ import annotations

import math

import numpy as np
from scipy import stats as _stats

from ..errors import StructuralViolation
from ..models import NUM_STATES, build_model
from ..rates import RateSymbol
from ..shs import ShsModel, stationary_distribution
from . import backend_module, resolve_backend
from ._kernel_py import EVENT_NAMES
from .config import EVENT_COUNT_KEYS, SimConfig, SimResult

_EVENT_INDEX = {
    RateSymbol.LAMBDA_HAT: 0,
    RateSymbol.LAMBDA: 1,
    RateSymbol.MU_HAT: 2,
    RateSymbol.MU: 3,
}


def kernel_tables(model: ShsModel) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Transition table in the kernel's (event, pre-state) layout.

    Requires at most one row per (rate symbol, source state) pair, which
    holds for every shipped model; a destination of -1 marks a pair with
    no row.
    """
    post = np.full((4, model.num_states), -1, dtype=np.int64)
    app = np.zeros((4, model.num_states, 2, 2))
    loc = np.zeros((4, model.num_states, 2, 2))
    for t in model.transitions:
        e = _EVENT_INDEX[t.rate_symbol]
        if post[e, t.src] != -1:
            raise ValueError(f"model {model.name!r} has two rows for "
                             f"({t.rate_symbol.value}, state {t.src}); the simulator "
                             f"needs deterministic event outcomes")
        post[e, t.src] = t.dst
        app[e, t.src] = t.reset_app.bits
        loc[e, t.src] = t.reset_loc.bits
    return post, app, loc


def _batch_stats(means: np.ndarray, tcrit: float) -> tuple[float, float]:
    se = float(np.std(means, ddof=1) / math.sqrt(len(means)))
    return se, tcrit * se


def run_sim(config: SimConfig, model: ShsModel | None = None,
            backend: str | None = None) -> SimResult:
    """Simulate one configuration and aggregate its statistics.

    ``model`` overrides the transition table used for the structural
    check (the dynamics always follow ``config.kind``); this is how a
    corrupted table is shown to be caught. ``backend`` picks the kernel
    ("compiled" or "python"); the default prefers the compiled one.
    """
    if model is None:
        model = build_model(config.kind)
    backend = resolve_backend(backend)
    kernel = backend_module(backend)
    post, app, loc = kernel_tables(model)

    p = config.params
    mech = 0 if config.kind.label.startswith("rcu") else 1
    raw = kernel.simulate(mech, 1 if config.kind.preemptive else 0,
                          p.lambda_hat, p.lam, p.mu_hat, p.mu,
                          config.horizon, config.warmup_time,
                          config.batches, config.seed, post, app, loc)

    flag, pre, ev, dst = (int(x) for x in raw["violation"])
    if flag:
        raise StructuralViolation(
            f"simulated move {pre} --{EVENT_NAMES[ev]}--> {dst} does not match the "
            f"transition table of model {model.name!r}")

    duration = config.horizon - config.warmup_time
    batch_len = duration / config.batches
    tcrit = float(_stats.t.ppf(0.975, config.batches - 1))

    app_means = raw["batch_app_area"] / batch_len
    loc_means = raw["batch_loc_area"] / batch_len
    se_app, ci_app = _batch_stats(app_means, tcrit)
    se_loc, ci_loc = _batch_stats(loc_means, tcrit)

    occ_fracs = raw["batch_state_time"] / batch_len
    occupancy = tuple(float(x) for x in raw["batch_state_time"].sum(axis=0) / duration)
    se_occ = []
    ci_occ = []
    for q in range(NUM_STATES):
        se, ci = _batch_stats(occ_fracs[:, q], tcrit)
        se_occ.append(se)
        ci_occ.append(ci)

    arrivals = raw["batch_arrivals"]
    delivered = raw["batch_delivered"]
    total_arrivals = int(arrivals.sum())
    if total_arrivals > 0:
        delivery = float(delivered.sum() / total_arrivals)
    else:
        delivery = math.nan
    if int(arrivals.min()) > 0:
        se_del, ci_del = _batch_stats(delivered / arrivals, tcrit)
    else:
        se_del = ci_del = math.nan

    counts = raw["counts"]
    return SimResult(
        config=config,
        backend=backend,
        avg_age_app=float(raw["batch_app_area"].sum() / duration),
        avg_age_location=float(raw["batch_loc_area"].sum() / duration),
        delivery_fraction=delivery,
        occupancy=occupancy,
        ci_app=ci_app, ci_location=ci_loc, ci_delivery=ci_del,
        ci_occupancy=tuple(ci_occ),
        se_app=se_app, se_location=se_loc, se_delivery=se_del,
        se_occupancy=tuple(se_occ),
        event_counts={key: int(counts[i]) for i, key in enumerate(EVENT_COUNT_KEYS)})


def occupancy_check(config: SimConfig, backend: str | None = None) -> float:
    """Largest gap between simulated state occupancy and the analytic
    stationary distribution."""
    model = build_model(config.kind)
    result = run_sim(config, model=model, backend=backend)
    pi = stationary_distribution(model, config.params).pi
    return float(np.max(np.abs(np.asarray(result.occupancy) - pi)))
