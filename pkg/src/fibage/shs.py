"""Generic engine for piecewise-linear age processes on a finite CTMC.

A model is a finite continuous-time Markov chain plus, per transition, a
pair of 2x2 binary reset maps acting on two age vectors (one for each
tracked update stream). Between transitions every age component grows at
unit rate; a transition l from state q to q' applies x' = x . A_l.

Two solves are provided:

* ``stationary_distribution`` -- dense linear solve of the global balance
  equations with the normalization row appended.
* ``solve_age_balance`` -- dense linear solve of the age fixed-point
  equations: for each state q_bar,

      v_bar[q_bar] * (total rate out of q_bar, self-loops included)
          = pi[q_bar] * (1, 1)
            + sum over transitions l entering q_bar (self-loops included)
              of rate_l * v_bar[source(l)] . A_l

  The time-average age of a stream is the sum over states of the second
  component of v_bar.

State counts are tiny (five states for the shipped models, ten unknowns
per age stream), so everything uses dense factorizations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NegativeFixedPoint, NonErgodic, SingularSystem
from .rates import RateParams, RateSymbol

#: Max permitted global-balance violation for a stationary distribution.
BALANCE_TOL = 1e-10

#: Max permitted age-balance residual, relative to (1 + max |v_bar|).
AGE_RESIDUAL_TOL = 1e-10

#: Entries of v_bar below this are treated as genuinely negative.
NEGATIVITY_TOL = -1e-9

_Bits = tuple[tuple[int, int], tuple[int, int]]


@dataclass(frozen=True)
class ResetMap:
    """A 2x2 binary matrix applied as a row-vector product, x' = x . A."""

    bits: _Bits

    @classmethod
    def identity(cls) -> "ResetMap":
        return cls(((1, 0), (0, 1)))

    def apply(self, x: tuple[float, float]) -> tuple[float, float]:
        a, b = self.bits
        return (x[0] * a[0] + x[1] * b[0], x[0] * a[1] + x[1] * b[1])

    @property
    def is_identity(self) -> bool:
        return self.bits == ((1, 0), (0, 1))

    @property
    def is_binary(self) -> bool:
        return all(entry in (0, 1) for row in self.bits for entry in row)

    def as_bit_string(self) -> str:
        """Row-major bits, e.g. ``1001`` for the identity."""
        return "".join(str(entry) for row in self.bits for entry in row)


IDENTITY = ResetMap.identity()


@dataclass(frozen=True)
class Transition:
    """One directed edge of the chain with its rate symbol and reset maps.

    ``reset_app`` acts on the app-update age vector, ``reset_loc`` on the
    location-update age vector. In a well-formed model at most one of the
    two differs from the identity: a single event never changes both
    streams.
    """

    id: int
    src: int
    dst: int
    rate_symbol: RateSymbol
    reset_app: ResetMap = IDENTITY
    reset_loc: ResetMap = IDENTITY

    def reset_for(self, process: str) -> ResetMap:
        if process == "app":
            return self.reset_app
        if process == "location":
            return self.reset_loc
        raise ValueError(f"unknown age process {process!r}")


@dataclass(frozen=True)
class ShsModel:
    """A named chain: state count plus an ordered transition list."""

    name: str
    num_states: int
    transitions: tuple[Transition, ...]

    def rates(self, params: RateParams) -> np.ndarray:
        """Numeric rate of each transition, in table order."""
        return np.array([params.rate(t.rate_symbol) for t in self.transitions])

    def generator(self, params: RateParams) -> np.ndarray:
        """Generator matrix Q. Self-loops cancel and are omitted."""
        n = self.num_states
        q = np.zeros((n, n))
        for t, r in zip(self.transitions, self.rates(params)):
            if t.src != t.dst:
                q[t.src, t.dst] += r
                q[t.src, t.src] -= r
        return q


@dataclass(frozen=True)
class StationaryDistribution:
    """Probability vector over discrete states with its balance residual."""

    pi: np.ndarray
    residual: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "pi", np.asarray(self.pi, dtype=float))


@dataclass(frozen=True)
class AgeBalanceSolution:
    """Fixed points of one age stream and the resulting average age."""

    process: str
    v_bar: np.ndarray
    average_age: float
    residual: float = field(default=0.0)


def _check_indices(model: ShsModel) -> None:
    for t in model.transitions:
        if not (0 <= t.src < model.num_states and 0 <= t.dst < model.num_states):
            raise ValueError(f"transition {t.id} references state outside "
                             f"0..{model.num_states - 1}: {t.src}->{t.dst}")


def _strongly_connected(model: ShsModel) -> bool:
    n = model.num_states
    edges = {(t.src, t.dst) for t in model.transitions if t.src != t.dst}
    fwd: list[list[int]] = [[] for _ in range(n)]
    rev: list[list[int]] = [[] for _ in range(n)]
    for s, d in edges:
        fwd[s].append(d)
        rev[d].append(s)

    def reaches_all(adj: list[list[int]]) -> bool:
        seen = {0}
        stack = [0]
        while stack:
            for nxt in adj[stack.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return len(seen) == n

    return reaches_all(fwd) and reaches_all(rev)


def stationary_distribution(model: ShsModel, params: RateParams) -> StationaryDistribution:
    """Solve the global balance equations of the chain.

    Raises NonErgodic when the state graph (self-loops excluded) is not
    strongly connected; positive rates are already guaranteed by
    RateParams. Raises SingularSystem when the solve fails or returns a
    vector violating the stationarity tolerances.
    """
    _check_indices(model)
    if not _strongly_connected(model):
        raise NonErgodic(f"model {model.name!r} is not strongly connected")

    q = model.generator(params)
    n = model.num_states
    m = q.T.copy()
    m[-1, :] = 1.0  # replace one redundant balance row with normalization
    b = np.zeros(n)
    b[-1] = 1.0
    try:
        pi = np.linalg.solve(m, b)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"stationary solve failed for {model.name!r}: {exc}") from exc

    residual = float(np.max(np.abs(q.T @ pi)))
    if residual >= BALANCE_TOL or np.min(pi) < -1e-12 or abs(pi.sum() - 1.0) > 1e-12:
        raise SingularSystem(
            f"stationary solution for {model.name!r} violates tolerances "
            f"(residual={residual:.3e}, min={pi.min():.3e}, sum={pi.sum()!r})")
    return StationaryDistribution(pi=pi, residual=residual)


def solve_age_balance(model: ShsModel, params: RateParams,
                      pi: StationaryDistribution, process: str) -> AgeBalanceSolution:
    """Solve the age fixed-point equations for one stream.

    ``process`` selects which reset maps act: ``"location"`` for the
    stream written to the store, ``"app"`` for the stream read from it.
    The 2N unknowns (two age components per state) form one dense linear
    system; self-loops contribute to both the outgoing-rate sum on the
    left and the incoming sum on the right, where their reset maps act.
    """
    n = model.num_states
    rates = model.rates(params)

    out_rate = np.zeros(n)
    for t, r in zip(model.transitions, rates):
        out_rate[t.src] += r

    m = np.zeros((2 * n, 2 * n))
    b = np.zeros(2 * n)
    for q in range(n):
        m[2 * q, 2 * q] = out_rate[q]
        m[2 * q + 1, 2 * q + 1] = out_rate[q]
        b[2 * q] = pi.pi[q]
        b[2 * q + 1] = pi.pi[q]
    for t, r in zip(model.transitions, rates):
        bits = t.reset_for(process).bits
        for i in range(2):
            for j in range(2):
                m[2 * t.dst + j, 2 * t.src + i] -= r * bits[i][j]

    try:
        v = np.linalg.solve(m, b)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"age balance solve failed for {model.name!r}: {exc}") from exc

    scale = 1.0 + float(np.max(np.abs(v)))
    residual = float(np.max(np.abs(m @ v - b)))
    if not np.isfinite(v).all() or residual >= AGE_RESIDUAL_TOL * scale:
        raise SingularSystem(
            f"age balance residual {residual:.3e} exceeds tolerance for {model.name!r}")
    if float(np.min(v)) < NEGATIVITY_TOL:
        raise NegativeFixedPoint(
            f"age balance for {model.name!r}/{process} has negative entry "
            f"{float(np.min(v)):.3e}; model or parameters are suspect")

    v_bar = v.reshape(n, 2)
    return AgeBalanceSolution(process=process, v_bar=v_bar,
                              average_age=float(v_bar[:, 1].sum()),
                              residual=residual)


def average_age(solution: AgeBalanceSolution) -> float:
    """Sum of the second age component across states."""
    return float(solution.v_bar[:, 1].sum())


def validate_model(model: ShsModel) -> list[str]:
    """Diagnostics for malformed models; an empty list means valid.

    Checks duplicate transition ids, out-of-range states, non-binary
    reset maps, transitions that reset both streams at once, and strong
    connectivity. Reporting rather than raising keeps this usable on
    deliberately broken models in tests.
    """
    diagnostics: list[str] = []

    seen: set[int] = set()
    for t in model.transitions:
        if t.id in seen:
            diagnostics.append(f"duplicate transition id {t.id}")
        seen.add(t.id)
        if not (0 <= t.src < model.num_states and 0 <= t.dst < model.num_states):
            diagnostics.append(f"transition {t.id} references state outside range: "
                               f"{t.src}->{t.dst}")
        for label, rmap in (("app", t.reset_app), ("location", t.reset_loc)):
            if not rmap.is_binary:
                diagnostics.append(f"transition {t.id} has non-binary {label} reset map "
                                   f"{rmap.bits}")
        if not t.reset_app.is_identity and not t.reset_loc.is_identity:
            diagnostics.append(f"transition {t.id} resets both age streams; "
                               f"at most one reset map may differ from identity")

    if not any(d.startswith("transition") and "outside range" in d for d in diagnostics):
        if not _strongly_connected(model):
            diagnostics.append("state graph is not strongly connected "
                               "(self-loops excluded)")
    return diagnostics
