#!/usr/bin/env python3
"""Compare the compiled simulation kernel against the pure-Python twin.

Runs the same configurations through both backends, checks the outputs
are bit-identical, and reports events/second plus the speedup.

    python benchmarks/bench_backends.py [--horizon 2e5] [--seed 0]
"""

from __future__ import annotations

import argparse
import dataclasses
import time

from fibage import RCU_PREEMPTIVE, RWL_PREEMPTIVE, RateParams, SimConfig, run_sim
from fibage.sim import available_backends

CASES = [
    ("rcu-p rho=0.05 beta=10 sigma=10", RCU_PREEMPTIVE,
     RateParams.from_normalized(0.05, 10.0, 10.0)),
    ("rwl-p rho=0.05 beta=10 sigma=1", RWL_PREEMPTIVE,
     RateParams.from_normalized(0.05, 10.0, 1.0)),
    ("rcu-p rho=1 beta=1 sigma=1", RCU_PREEMPTIVE,
     RateParams.from_normalized(1.0, 1.0, 1.0)),
]


def run_case(name, kind, params, horizon, seed):
    cfg = SimConfig(kind=kind, params=params, horizon=horizon, seed=seed)
    timings = {}
    results = {}
    for backend in available_backends():
        started = time.perf_counter()
        results[backend] = run_sim(cfg, backend=backend)
        timings[backend] = time.perf_counter() - started

    events = sum(results[next(iter(results))].event_counts.values())
    print(f"{name}  ({events:,} events in window)")
    for backend, elapsed in timings.items():
        print(f"  {backend:8s} {elapsed:8.3f} s   {events / elapsed / 1e6:8.2f} M events/s")
    if len(results) == 2:
        a = dataclasses.replace(results["compiled"], backend="x")
        b = dataclasses.replace(results["python"], backend="x")
        identical = a == b
        print(f"  bit-identical outputs: {identical}   "
              f"speedup {timings['python'] / timings['compiled']:.0f}x")
        if not identical:
            raise SystemExit("backend outputs diverged")
    print()


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--horizon", type=float, default=2e5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    backends = available_backends()
    print(f"available backends: {', '.join(backends)}\n")
    if "compiled" not in backends:
        print("compiled kernel missing; run `python setup.py build_ext --inplace` "
              "to benchmark it\n")
    for name, kind, params in CASES:
        run_case(name, kind, params, args.horizon, args.seed)


if __name__ == "__main__":
    main()
