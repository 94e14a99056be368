"""Simulation run configuration and results.

A run is a pure function of its config: one seeded random stream is
consumed in event order, so identical configs produce bit-identical
results. Results carry batch-means statistics: the measurement window
(after warmup) is split into ``batches`` equal spans, and the 95%
half-widths reported in ``ci_*`` use the Student-t quantile on the batch
means; ``se_*`` are the corresponding standard errors, convenient for
k-sigma acceptance checks.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from ..errors import InvalidConfig
from ..models import PrimitiveKind
from ..rates import RateParams

EVENT_COUNT_KEYS = (
    "loc_arrivals", "app_arrivals", "write_completions", "read_completions",
    "deliveries", "write_preemptions", "read_preemptions", "app_discards",
)


@dataclass(frozen=True)
class SimConfig:
    kind: PrimitiveKind
    params: RateParams
    horizon: float
    warmup_fraction: float = 0.1
    seed: int = 0
    batches: int = 20

    def __post_init__(self) -> None:
        if not (self.horizon > 0.0 and math.isfinite(self.horizon)):
            raise InvalidConfig(f"horizon must be positive and finite, got {self.horizon!r}")
        if not (0.0 <= self.warmup_fraction < 1.0):
            raise InvalidConfig(f"warmup_fraction must lie in [0, 1), "
                                f"got {self.warmup_fraction!r}")
        if self.batches < 2:
            raise InvalidConfig(f"need at least 2 batches, got {self.batches!r}")

    @property
    def warmup_time(self) -> float:
        return self.warmup_fraction * self.horizon


@dataclass(frozen=True)
class SimResult:
    """Time-averaged ages, delivery fraction and occupancy with CIs."""

    config: SimConfig
    backend: str
    avg_age_app: float
    avg_age_location: float
    delivery_fraction: float
    occupancy: tuple[float, ...]
    ci_app: float
    ci_location: float
    ci_delivery: float
    ci_occupancy: tuple[float, ...]
    se_app: float
    se_location: float
    se_delivery: float
    se_occupancy: tuple[float, ...]
    event_counts: dict[str, int] = field(default_factory=dict)

    def to_json(self, indent: int | None = None) -> str:
        """Stable-schema JSON; field names documented in the README."""
        cfg = self.config
        doc = {
            "kind": cfg.kind.label,
            "rates": {
                "lambda_hat": cfg.params.lambda_hat,
                "lambda": cfg.params.lam,
                "mu_hat": cfg.params.mu_hat,
                "mu": cfg.params.mu,
            },
            "horizon": cfg.horizon,
            "warmup_fraction": cfg.warmup_fraction,
            "seed": cfg.seed,
            "batches": cfg.batches,
            "backend": self.backend,
            "avg_age_app": self.avg_age_app,
            "avg_age_location": self.avg_age_location,
            "delivery_fraction": self.delivery_fraction,
            "occupancy": list(self.occupancy),
            "ci_app": self.ci_app,
            "ci_location": self.ci_location,
            "ci_delivery": self.ci_delivery,
            "ci_occupancy": list(self.ci_occupancy),
            "se_app": self.se_app,
            "se_location": self.se_location,
            "se_delivery": self.se_delivery,
            "se_occupancy": list(self.se_occupancy),
            "event_counts": dict(self.event_counts),
        }
        return json.dumps(doc, indent=indent)


def sim_result_from_json(text: str) -> SimResult:
    doc = json.loads(text)
    config = SimConfig(
        kind=PrimitiveKind.parse(doc["kind"]),
        params=RateParams(lambda_hat=doc["rates"]["lambda_hat"],
                          lam=doc["rates"]["lambda"],
                          mu_hat=doc["rates"]["mu_hat"],
                          mu=doc["rates"]["mu"]),
        horizon=doc["horizon"],
        warmup_fraction=doc["warmup_fraction"],
        seed=doc["seed"],
        batches=doc["batches"])
    return SimResult(
        config=config,
        backend=doc["backend"],
        avg_age_app=doc["avg_age_app"],
        avg_age_location=doc["avg_age_location"],
        delivery_fraction=doc["delivery_fraction"],
        occupancy=tuple(doc["occupancy"]),
        ci_app=doc["ci_app"],
        ci_location=doc["ci_location"],
        ci_delivery=doc["ci_delivery"],
        ci_occupancy=tuple(doc["ci_occupancy"]),
        se_app=doc["se_app"],
        se_location=doc["se_location"],
        se_delivery=doc["se_delivery"],
        se_occupancy=tuple(doc["se_occupancy"]),
        event_counts={k: int(v) for k, v in doc["event_counts"].items()})
