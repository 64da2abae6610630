"""Monte Carlo risk engine.

Estimates scaled risk and bias of any estimator by simulation, runs paired
common-random-number domination comparisons, and validates the analytic
conditional-risk minimizer by kernel-localized conditional Monte Carlo.

Reproducibility contract: replicate blocks are addressed by (seed, grid
index), so a given McConfig always produces bit-identical results no matter
how many workers evaluate the grid. Within a block, replicate r always
consumes row r of the uniform draw matrix.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .estimators import EstimatorSpec, evaluate_arrays
from .model import DomainError, Target
from .risk import RiskPoint, psi_mu
from .special import exponential_from_uniform, substream

WORKERS_ENV = "SELEXP_WORKERS"


@dataclass(frozen=True)
class McConfig:
    """Simulation protocol: replicate count, substream seed, sample size,
    gap grid, and the (risk-irrelevant) location/scale anchors."""

    n: int
    seed: int = 0
    replicates: int = 20000
    mu_grid: Sequence[float] = field(default_factory=lambda: (0.0,))
    sigma: float = 1.0
    theta1: float = 0.0

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError(f"replicates must be >= 1, got {self.replicates}")
        if self.n < 2:
            raise ValueError(f"n must be at least 2, got {self.n}")
        if self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if any(m < 0 for m in self.mu_grid):
            raise ValueError("mu_grid values must be nonnegative")


@dataclass(frozen=True)
class McRiskResult:
    points: List[RiskPoint]
    estimator: EstimatorSpec
    config: McConfig


@dataclass(frozen=True)
class DominationPoint:
    mu: float
    mean_diff: float
    se: float
    verdict: str  # challenger_better | base_better | inconclusive


@dataclass(frozen=True)
class DominationReport:
    base: EstimatorSpec
    challenger: EstimatorSpec
    config: McConfig
    points: List[DominationPoint]

    @property
    def dominates(self) -> bool:
        """Challenger dominates: never worse, better somewhere."""
        return all(p.verdict != "base_better" for p in self.points) and any(
            p.verdict == "challenger_better" for p in self.points
        )


def _worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _simulate_block(
    config: McConfig, grid_index: int, mu: float, target: Target
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Draw one replicate block: (z1, z2, s, realized target parameter).

    Column layout of the uniform matrix: 0 -> population-1 minimum,
    1 -> population-2 minimum, 2.. -> the 2(n-1) exponential summands of s.
    """
    n, sigma = config.n, config.sigma
    theta1 = config.theta1
    theta2 = theta1 + mu * sigma / n
    rng = substream(config.seed, grid_index)
    u = rng.random((config.replicates, 2 * n))
    x1 = exponential_from_uniform(u[:, 0], theta1, sigma / n)
    x2 = exponential_from_uniform(u[:, 1], theta2, sigma / n)
    s = exponential_from_uniform(u[:, 2:], 0.0, sigma).sum(axis=1)
    z1 = np.minimum(x1, x2)
    z2 = np.maximum(x1, x2)
    if target is Target.BEST:
        realized = np.where(x1 >= x2, theta1, theta2)
    else:
        realized = np.where(x1 <= x2, theta1, theta2)
    return z1, z2, s, realized


def _grid_map(config: McConfig, fn) -> list:
    """Evaluate fn(grid_index, mu) over the grid, optionally in parallel;
    results keep grid order so output is independent of worker count."""
    jobs = list(enumerate(config.mu_grid))
    workers = _worker_count()
    if workers == 1 or len(jobs) == 1:
        return [fn(g, mu) for g, mu in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda gm: fn(*gm), jobs))


def estimate_risk(spec: EstimatorSpec, config: McConfig) -> McRiskResult:
    """Monte Carlo scaled mean squared error at every grid gap."""

    def one(g: int, mu: float) -> RiskPoint:
        z1, z2, s, realized = _simulate_block(config, g, mu, spec.target)
        est = evaluate_arrays(spec, config.n, z1, z2, s)
        sq = ((est - realized) / config.sigma) ** 2
        se = sq.std(ddof=1) / np.sqrt(config.replicates) if config.replicates > 1 else None
        return RiskPoint(mu=mu, n=config.n, value=float(sq.mean()), se=se)

    return McRiskResult(points=_grid_map(config, one), estimator=spec, config=config)


def estimate_bias(
    spec: EstimatorSpec, config: McConfig
) -> List[Tuple[float, float, float]]:
    """Monte Carlo scaled bias; returns (mu, bias, se) per grid gap."""

    def one(g: int, mu: float) -> Tuple[float, float, float]:
        z1, z2, s, realized = _simulate_block(config, g, mu, spec.target)
        est = evaluate_arrays(spec, config.n, z1, z2, s)
        err = (est - realized) / config.sigma
        se = err.std(ddof=1) / np.sqrt(config.replicates)
        return (mu, float(err.mean()), float(se))

    return _grid_map(config, one)


def compare_domination(
    base: EstimatorSpec, challenger: EstimatorSpec, config: McConfig
) -> DominationReport:
    """Paired (common-random-number) risk comparison on the gap grid.

    Per gap, the challenger is called better when the mean paired loss
    difference is below zero by more than 3 paired standard errors;
    symmetric for the base; inconclusive inside the noise band.
    """
    if base.target is not challenger.target:
        raise DomainError("base and challenger must share a target")

    def one(g: int, mu: float) -> DominationPoint:
        z1, z2, s, realized = _simulate_block(config, g, mu, base.target)
        sq_base = ((evaluate_arrays(base, config.n, z1, z2, s) - realized) / config.sigma) ** 2
        sq_chal = ((evaluate_arrays(challenger, config.n, z1, z2, s) - realized) / config.sigma) ** 2
        diff = sq_chal - sq_base
        mean = float(diff.mean())
        se = float(diff.std(ddof=1) / np.sqrt(config.replicates))
        if mean < -3.0 * se and se > 0:
            verdict = "challenger_better"
        elif mean > 3.0 * se and se > 0:
            verdict = "base_better"
        else:
            verdict = "inconclusive"
        return DominationPoint(mu=mu, mean_diff=mean, se=se, verdict=verdict)

    return DominationReport(
        base=base, challenger=challenger, config=config, points=_grid_map(config, one)
    )


class ConditionalHitsError(RuntimeError):
    """Too few replicates landed near the conditioning value of W."""


def validate_psi(
    w: float,
    mu: float,
    n: int,
    target: Target,
    seed: int = 0,
    budget: int = 400_000,
    min_hits: int = 2000,
    h0: float = 0.02,
) -> Tuple[float, float, float]:
    """Check the analytic conditional-risk minimizer against conditional MC.

    Simulates (anchor error, s/sigma, W) triples, localizes at |W - w| <= h
    with h doubled from h0 until at least min_hits replicates land in the
    window, and forms the ratio of conditional means that defines the
    minimizer. Returns (analytic, empirical, rough se of the empirical
    ratio). A diagnostic, not a proof: the kernel window biases the
    estimate by O(h).
    """
    if w <= 0:
        raise DomainError(f"w must be positive, got {w}")
    config = McConfig(n=n, seed=seed, replicates=budget, mu_grid=(mu,))
    z1, z2, s, realized = _simulate_block(config, 0, mu, target)
    u_anchor = z1 - realized  # sigma = 1 in the probe config
    v = s
    wobs = (z2 - z1) / s

    h = h0
    hits = np.abs(wobs - w) <= h
    while hits.sum() < min_hits and h < max(1.0, 4 * w):
        h *= 2.0
        hits = np.abs(wobs - w) <= h
    count = int(hits.sum())
    if count < min_hits:
        raise ConditionalHitsError(
            f"only {count} replicates within |W - {w}| <= {h}; "
            f"increase the budget (currently {budget})"
        )
    uv = u_anchor[hits] * v[hits]
    v2 = v[hits] ** 2
    empirical = float(uv.mean() / v2.mean())
    se = float(uv.std(ddof=1) / np.sqrt(count) / v2.mean())
    analytic = psi_mu(w, mu, n, target)
    return analytic, empirical, se
