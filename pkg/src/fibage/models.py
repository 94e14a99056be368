"""The four concrete forwarder models and their closed-form cross-checks.

The shared-memory table is synchronized either by RCU (lock-less readers,
writers publish a copy) or by a write-preferring readers-writer lock.
Each mechanism comes in a preemptive flavor (a fresher app update replaces
the one held by the reader) and a non-preemptive one (such arrivals are
discarded). All four share the same five discrete states:

    0  idle
    1  write in progress, reader idle
    2  write in progress, reader occupied
       (RCU: a read of a stale address is under way; RWL: a read request
       is queued behind the write lock)
    3  read of a current address in progress, writer idle
    4  reader occupied with a stale address while the writer has finished
       (RCU grace period) or is queued behind the read lock (RWL)

The transition tables below are static data, one row per transition, and
are asserted row-by-row by the test suite; the non-preemptive variants
drop the reader-preemption self-loops (ids 10-12) and change nothing
else. Closed-form stationary distributions and delivery probabilities are
provided for the preemptive chains as independent checks on the numeric
path (the non-preemptive chains differ only by self-loops, which leave
the stationary distribution untouched).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import SingularSystem, Unsupported
from .rates import RateParams, RateSymbol
from .shs import (AgeBalanceSolution, IDENTITY, ResetMap, ShsModel, StationaryDistribution,
                  Transition, solve_age_balance, stationary_distribution)

#: Zeroes the first age component: a fresh update reaches the handler.
FRESH = ResetMap(((0, 0), (0, 1)))

#: Copies the first component into the second: the handled update is
#: committed (written to the store, or delivered to the monitor).
COMMIT = ResetMap(((1, 1), (0, 0)))

#: Reader-preemption self-loops removed in the non-preemptive variants.
PREEMPTION_IDS = frozenset({10, 11, 12})

NUM_STATES = 5


class Mechanism(enum.Enum):
    RCU = "rcu"
    RWL = "rwl"


@dataclass(frozen=True)
class PrimitiveKind:
    """A synchronization mechanism plus the reader-preemption flag."""

    mechanism: Mechanism
    preemptive: bool = True

    @property
    def label(self) -> str:
        return self.mechanism.value + ("-p" if self.preemptive else "-np")

    @classmethod
    def parse(cls, text: str) -> "PrimitiveKind":
        """Accepts rcu / rwl with optional -p / -np suffix."""
        token = text.strip().lower()
        preemptive = True
        if token.endswith("-np"):
            preemptive = False
            token = token[:-3]
        elif token.endswith("-p"):
            token = token[:-2]
        try:
            return cls(Mechanism(token), preemptive)
        except ValueError:
            raise ValueError(f"unknown model kind {text!r}; expected rcu, rwl, "
                             f"rcu-np or rwl-np") from None


RCU_PREEMPTIVE = PrimitiveKind(Mechanism.RCU, True)
RCU_NON_PREEMPTIVE = PrimitiveKind(Mechanism.RCU, False)
RWL_PREEMPTIVE = PrimitiveKind(Mechanism.RWL, True)
RWL_NON_PREEMPTIVE = PrimitiveKind(Mechanism.RWL, False)

ALL_KINDS = (RCU_PREEMPTIVE, RCU_NON_PREEMPTIVE, RWL_PREEMPTIVE, RWL_NON_PREEMPTIVE)

_LH = RateSymbol.LAMBDA_HAT
_L = RateSymbol.LAMBDA
_MH = RateSymbol.MU_HAT
_M = RateSymbol.MU

# Rows: (id, src, dst, rate symbol, location reset, app reset).
# ids 1-5: location update arrives (restarting any write in progress);
# 6-7: write completes; 8-12: app update arrives; 13+: read completes
# (13 delivers, the rest return a stale address and the update is lost).
_RCU_ROWS = (
    (1, 0, 1, _LH, FRESH, IDENTITY),
    (2, 1, 1, _LH, FRESH, IDENTITY),
    (3, 2, 2, _LH, FRESH, IDENTITY),
    (4, 3, 2, _LH, FRESH, IDENTITY),
    (5, 4, 2, _LH, FRESH, IDENTITY),
    (6, 1, 0, _MH, COMMIT, IDENTITY),
    (7, 2, 4, _MH, COMMIT, IDENTITY),
    (8, 0, 3, _L, IDENTITY, FRESH),
    (9, 1, 2, _L, IDENTITY, FRESH),
    (10, 2, 2, _L, IDENTITY, FRESH),
    (11, 3, 3, _L, IDENTITY, FRESH),
    (12, 4, 4, _L, IDENTITY, FRESH),
    (13, 3, 0, _M, IDENTITY, COMMIT),
    (14, 4, 0, _M, IDENTITY, IDENTITY),
    (15, 2, 1, _M, IDENTITY, IDENTITY),
)

_RWL_ROWS = (
    (1, 0, 1, _LH, FRESH, IDENTITY),
    (2, 1, 1, _LH, FRESH, IDENTITY),
    (3, 2, 2, _LH, FRESH, IDENTITY),
    (4, 3, 4, _LH, FRESH, IDENTITY),
    (5, 4, 4, _LH, FRESH, IDENTITY),
    (6, 1, 0, _MH, COMMIT, IDENTITY),
    (7, 2, 3, _MH, COMMIT, IDENTITY),
    (8, 0, 3, _L, IDENTITY, FRESH),
    (9, 1, 2, _L, IDENTITY, FRESH),
    (10, 2, 2, _L, IDENTITY, FRESH),
    (11, 3, 3, _L, IDENTITY, FRESH),
    (12, 4, 4, _L, IDENTITY, FRESH),
    (13, 3, 0, _M, IDENTITY, COMMIT),
    (14, 4, 1, _M, IDENTITY, IDENTITY),
)


def build_model(kind: PrimitiveKind) -> ShsModel:
    """The five-state chain for a mechanism/preemption combination."""
    rows = _RCU_ROWS if kind.mechanism is Mechanism.RCU else _RWL_ROWS
    if not kind.preemptive:
        rows = tuple(r for r in rows if r[0] not in PREEMPTION_IDS)
    transitions = tuple(
        Transition(id=i, src=s, dst=d, rate_symbol=sym, reset_loc=loc, reset_app=app)
        for (i, s, d, sym, loc, app) in rows)
    return ShsModel(name=kind.label, num_states=NUM_STATES, transitions=transitions)


def serialize_model(model: ShsModel) -> str:
    """Plain-text table: id, src, dst, rate symbol, app bits, location bits."""
    lines = [f"{t.id} {t.src} {t.dst} {t.rate_symbol.value} "
             f"{t.reset_app.as_bit_string()} {t.reset_loc.as_bit_string()}"
             for t in model.transitions]
    return "\n".join(lines) + "\n"


def _stationary_from_weights(model: ShsModel, params: RateParams,
                             weights: np.ndarray, total: float) -> StationaryDistribution:
    pi = weights / total
    residual = float(np.max(np.abs(model.generator(params).T @ pi)))
    return StationaryDistribution(pi=pi, residual=residual)


def rcu_stationary_closed_form(params: RateParams) -> StationaryDistribution:
    """Exact stationary distribution of the RCU chain."""
    rho, beta, sigma = params.rho_hat, params.beta, params.sigma
    weights = np.array([
        sigma,
        rho * sigma,
        beta * rho,
        beta * sigma / (rho + sigma),
        beta * rho / (rho + sigma),
    ])
    total = (1.0 + rho) * (beta + sigma)
    return _stationary_from_weights(build_model(RCU_PREEMPTIVE), params, weights, total)


def rwl_stationary_closed_form(params: RateParams) -> StationaryDistribution:
    """Exact stationary distribution of the RWL chain."""
    rho, beta, sigma = params.rho_hat, params.beta, params.sigma
    weights = np.array([
        sigma * (rho + sigma + beta * sigma),
        rho * sigma * (beta + rho + sigma),
        beta * rho * sigma * (beta + rho + sigma),
        beta * sigma * (1.0 + beta + rho),
        beta * rho * (1.0 + beta + rho),
    ])
    total = (beta * rho * (1.0 + beta + rho)
             + sigma * (1.0 + beta) * (1.0 + rho) * (sigma + beta + rho))
    return _stationary_from_weights(build_model(RWL_PREEMPTIVE), params, weights, total)


def stationary_closed_form(kind: PrimitiveKind, params: RateParams) -> StationaryDistribution:
    """Closed form for either mechanism.

    Valid for the non-preemptive variants too: they differ from the
    preemptive chains only by self-loops, which do not move probability.
    """
    if kind.mechanism is Mechanism.RCU:
        return rcu_stationary_closed_form(params)
    return rwl_stationary_closed_form(params)


@dataclass(frozen=True)
class DeliveryProbability:
    """Probability that an arriving app update is eventually delivered."""

    value: float
    kind: PrimitiveKind


def delivery_probability(kind: PrimitiveKind, params: RateParams) -> DeliveryProbability:
    """Closed-form delivery probability, defined for preemptive chains only.

    An update arriving in state 0 or 3 survives if its read completes
    before any further arrival, i.e. with probability mu/(lambda*+mu).
    Under the lock, updates queued behind a write (states 1 and 2) still
    reach a fresh table if the write finishes before a fresher app update
    replaces them, contributing the extra mu_hat/(mu_hat+lam) factor.
    """
    if not kind.preemptive:
        raise Unsupported("delivery probability has closed form only for the "
                          "preemptive variants; use the simulator instead")
    pi = stationary_closed_form(kind, params).pi
    read_wins = params.mu / (params.lambda_star + params.mu)
    if kind.mechanism is Mechanism.RCU:
        value = (pi[0] + pi[3]) * read_wins
    else:
        write_wins = params.mu_hat / (params.mu_hat + params.lam)
        value = (pi[0] + (pi[1] + pi[2]) * write_wins + pi[3]) * read_wins
    return DeliveryProbability(value=float(value), kind=kind)


@dataclass(frozen=True)
class AnalysisResult:
    """Full analytic output for one kind at one parameter point."""

    kind: PrimitiveKind
    params: RateParams
    pi: StationaryDistribution
    age_location: AgeBalanceSolution
    age_app: AgeBalanceSolution
    delivery: DeliveryProbability | None

    @property
    def avg_age_app(self) -> float:
        return self.age_app.average_age

    @property
    def avg_age_location(self) -> float:
        return self.age_location.average_age


#: Agreement required between closed-form and numeric stationary solves.
CLOSED_FORM_TOL = 1e-9


def analyze(kind: PrimitiveKind, params: RateParams) -> AnalysisResult:
    """Build the model, solve both age streams, evaluate delivery.

    The numeric stationary distribution is cross-checked against the
    closed form on every call; disagreement indicates a corrupted table
    and is reported as SingularSystem rather than silently used.
    """
    model = build_model(kind)
    pi = stationary_distribution(model, params)
    closed = stationary_closed_form(kind, params)
    gap = float(np.max(np.abs(pi.pi - closed.pi)))
    if gap > CLOSED_FORM_TOL:
        raise SingularSystem(
            f"numeric stationary distribution disagrees with closed form for "
            f"{kind.label} (max diff {gap:.3e})")
    delivery = delivery_probability(kind, params) if kind.preemptive else None
    return AnalysisResult(
        kind=kind, params=params, pi=pi,
        age_location=solve_age_balance(model, params, pi, "location"),
        age_app=solve_age_balance(model, params, pi, "app"),
        delivery=delivery)
