"""Domain model for the two-population exponential experiment.

Holds the unknown population state, the sufficient-statistic reduction of
the raw samples, the natural selection rule (pick the population with the
larger sample minimum for the best target, smaller for the worst), and the
random location parameter the selected population carries.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence


class Target(enum.Enum):
    """Which population the selection rule is after."""

    BEST = "best"
    WORST = "worst"


class DomainError(ValueError):
    """Input is outside the domain an operation is defined on."""


@dataclass(frozen=True)
class PopulationParams:
    """Unknown state: guarantee times mu1, mu2 and common scale sigma."""

    mu1: float
    mu2: float
    sigma: float = 1.0

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    @property
    def theta1(self) -> float:
        """Smaller guarantee time (worst population)."""
        return min(self.mu1, self.mu2)

    @property
    def theta2(self) -> float:
        """Larger guarantee time (best population)."""
        return max(self.mu1, self.mu2)


@dataclass(frozen=True)
class SufficientStatistic:
    """Observed triple (x1, x2, s) plus the per-population sample size n.

    x1, x2 are the sample minima, s the pooled sum of deviations from the
    minima. All estimators consume the data only through this statistic.
    """

    x1: float
    x2: float
    s: float
    n: int

    def __post_init__(self):
        if self.s < 0:
            raise ValueError(f"s must be nonnegative, got {self.s}")
        if self.n < 2:
            raise ValueError(f"n must be at least 2, got {self.n}")

    @property
    def z1(self) -> float:
        return min(self.x1, self.x2)

    @property
    def z2(self) -> float:
        return max(self.x1, self.x2)

    @property
    def w(self) -> float:
        """Scaled gap (z2 - z1) / s; undefined when s = 0."""
        if self.s == 0:
            raise DomainError("w = (z2 - z1)/s is undefined when s = 0")
        return (self.z2 - self.z1) / self.s

    @property
    def delta(self) -> float:
        """n times the gap between the two sample minima."""
        return self.n * (self.z2 - self.z1)


@dataclass(frozen=True)
class SelectionOutcome:
    """Result of applying the natural selection rule."""

    selected: int
    target: Target

    def __post_init__(self):
        if self.selected not in (1, 2):
            raise ValueError(f"selected index must be 1 or 2, got {self.selected}")


def reduce_samples(
    samples_pop1: Sequence[float], samples_pop2: Sequence[float]
) -> SufficientStatistic:
    """Reduce two equal-size samples to the sufficient statistic (x1, x2, s, n)."""
    n = len(samples_pop1)
    if len(samples_pop2) != n:
        raise DomainError(
            f"samples must have equal length, got {n} and {len(samples_pop2)}"
        )
    if n < 2:
        raise DomainError(f"need at least 2 observations per population, got {n}")
    x1 = min(samples_pop1)
    x2 = min(samples_pop2)
    s = sum(v - x1 for v in samples_pop1) + sum(v - x2 for v in samples_pop2)
    return SufficientStatistic(x1=x1, x2=x2, s=float(s), n=n)


def select(stat: SufficientStatistic, target: Target) -> SelectionOutcome:
    """Natural selection rule; a tie (x1 == x2) goes to population 1."""
    if stat.x1 == stat.x2:
        selected = 1
    elif target is Target.BEST:
        selected = 1 if stat.x1 > stat.x2 else 2
    else:
        selected = 1 if stat.x1 < stat.x2 else 2
    return SelectionOutcome(selected=selected, target=target)


def realized_target(params: PopulationParams, outcome: SelectionOutcome) -> float:
    """Location parameter of the population the rule actually selected."""
    return params.mu1 if outcome.selected == 1 else params.mu2


def normalized_gap(params: PopulationParams, n: int) -> float:
    """Normalized gap mu = n (theta2 - theta1) / sigma; the only parameter
    the scaled risk of an equivariant estimator depends on."""
    if n < 2:
        raise DomainError(f"n must be at least 2, got {n}")
    return n * (params.theta2 - params.theta1) / params.sigma
