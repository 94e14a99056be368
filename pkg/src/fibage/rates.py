"""Event rates of the forwarder model and their normalized forms.

Four exponential rates drive everything: location updates arrive at the
writer at rate ``lambda_hat``, app updates arrive at the reader at rate
``lam``, writes complete at rate ``mu_hat`` and reads at rate ``mu``.
Normalizing by the write speed gives the dimensionless triple
(rho_hat, beta, sigma) used throughout the analysis; ages are then
measured in units of the mean write time.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import NonErgodic


class RateSymbol(enum.Enum):
    """Which of the four base rates a transition fires at."""

    LAMBDA_HAT = "lambda_hat"
    LAMBDA = "lambda"
    MU_HAT = "mu_hat"
    MU = "mu"


@dataclass(frozen=True)
class RateParams:
    """The four base rates. All must be strictly positive.

    Zero rates make the discrete chain non-ergodic (states become
    unreachable), so they are rejected at construction.
    """

    lambda_hat: float  # location-update arrival rate
    lam: float         # app-update arrival rate
    mu_hat: float      # write speed
    mu: float          # read speed

    def __post_init__(self) -> None:
        for name in ("lambda_hat", "lam", "mu_hat", "mu"):
            value = getattr(self, name)
            if not (value > 0.0):
                raise NonErgodic(f"rate {name} must be strictly positive, got {value!r}")

    @classmethod
    def from_normalized(cls, rho_hat: float, beta: float, sigma: float,
                        mu_hat: float = 1.0) -> "RateParams":
        """Build from the normalized triple at a given write speed."""
        return cls(lambda_hat=rho_hat * mu_hat, lam=beta * mu_hat,
                   mu_hat=mu_hat, mu=sigma * mu_hat)

    @property
    def rho_hat(self) -> float:
        """Offered load of location updates, lambda_hat / mu_hat."""
        return self.lambda_hat / self.mu_hat

    @property
    def beta(self) -> float:
        """Normalized app-update arrival rate, lam / mu_hat."""
        return self.lam / self.mu_hat

    @property
    def sigma(self) -> float:
        """Normalized read speed, mu / mu_hat."""
        return self.mu / self.mu_hat

    @property
    def lambda_star(self) -> float:
        """Total arrival rate, lam + lambda_hat."""
        return self.lam + self.lambda_hat

    @property
    def mu_star(self) -> float:
        """Total service rate, mu + mu_hat."""
        return self.mu + self.mu_hat

    def rate(self, symbol: RateSymbol) -> float:
        """Numeric value of a rate symbol."""
        return {
            RateSymbol.LAMBDA_HAT: self.lambda_hat,
            RateSymbol.LAMBDA: self.lam,
            RateSymbol.MU_HAT: self.mu_hat,
            RateSymbol.MU: self.mu,
        }[symbol]

    def scaled(self, factor: float) -> "RateParams":
        """All four rates multiplied by ``factor`` (a time rescaling)."""
        return RateParams(self.lambda_hat * factor, self.lam * factor,
                          self.mu_hat * factor, self.mu * factor)
