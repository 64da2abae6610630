"""Closed-form risk analysis for the linear estimator class.

Scaled bias and mean squared error of z2 - c*s (best target) and z1 - c*s
(worst target), the risk-minimizing coefficient as a function of the
normalized gap, the admissible coefficient intervals, the restricted
minimax coefficient, and the conditional-risk minimizer psi_mu(w) with its
envelopes over the gap parameter for both targets.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from .estimators import constants
from .model import DomainError, Target
from .special import Bracket, find_root, integrate, upper_reg_gamma

# Beyond this gap the psi_mu quadrature integrands reach e^(2*mu) territory;
# the proven large-gap limits are used instead.
MU_QUADRATURE_LIMIT = 40.0


class _UnboundedType:
    """Marker for an envelope with no finite bound. Every real compares
    below it; arithmetic with it is deliberately undefined."""

    def __gt__(self, other):
        return not isinstance(other, _UnboundedType)

    def __ge__(self, other):
        return True

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return isinstance(other, _UnboundedType)

    def __repr__(self):
        return "UNBOUNDED"


UNBOUNDED = _UnboundedType()

EnvelopeBound = Union[float, _UnboundedType]


@dataclass(frozen=True)
class RiskPoint:
    """Scaled mean squared error at one (mu, n); se present only for
    Monte Carlo values."""

    mu: float
    n: int
    value: float
    se: Optional[float] = None


@dataclass(frozen=True)
class AdmissibleInterval:
    """Coefficient interval whose linear rules are admissible in-class."""

    lo: float
    hi: float
    target: Target


def _check(mu: float, n: int) -> None:
    if mu < 0:
        raise DomainError(f"mu must be nonnegative, got {mu}")
    if n < 2:
        raise DomainError(f"n must be at least 2, got {n}")


def moment_u(mu, n: int, order: int, target: Target):
    """First or second moment of the scaled anchor error.

    Best: U = (z2 - realized target)/sigma. Worst: U1 = (z1 - realized
    target)/sigma. Accepts scalar or array mu.
    """
    mu_arr = np.asarray(mu, dtype=float)
    _check(float(np.min(mu_arr)), n)
    e = np.exp(-mu_arr)
    if order == 1:
        best = ((mu_arr + 1.0) / 2.0 * e + 1.0) / n
        if target is Target.BEST:
            out = best
        else:
            out = (1.0 - (mu_arr + 1.0) / 2.0 * e) / n
    elif order == 2:
        q = (mu_arr * mu_arr + 3.0 * mu_arr + 3.0) / 2.0
        if target is Target.BEST:
            out = (q * e + 2.0) / (n * n)
        else:
            out = (2.0 - q * e) / (n * n)
    else:
        raise DomainError(f"order must be 1 or 2, got {order}")
    return out if isinstance(mu, np.ndarray) else float(out)


def risk_value(c, mu, n: int, target: Target):
    """Scaled MSE of the linear rule with coefficient c; scalar or array."""
    m1 = moment_u(np.asarray(mu, dtype=float), n, 1, target)
    m2 = moment_u(np.asarray(mu, dtype=float), n, 2, target)
    c = np.asarray(c, dtype=float)
    out = m2 - 4.0 * (n - 1) * m1 * c + 2.0 * (n - 1) * (2 * n - 1) * c * c
    return out if out.ndim else float(out)


def risk_linear(c: float, mu: float, n: int, target: Target) -> RiskPoint:
    """Closed-form risk of the linear rule, packaged as a RiskPoint."""
    return RiskPoint(mu=mu, n=n, value=risk_value(c, mu, n, target))


def bias_linear(c: float, mu: float, n: int, target: Target) -> float:
    """Scaled bias of the linear rule with coefficient c."""
    return moment_u(mu, n, 1, target) - 2.0 * (n - 1) * c


def cstar(mu, n: int, target: Target):
    """Coefficient minimizing the risk at a fixed normalized gap."""
    m1 = moment_u(mu, n, 1, target)
    return m1 * n / (n * (2 * n - 1))


def admissible_interval(n: int, target: Target) -> AdmissibleInterval:
    """Closure of the range of cstar over all gaps: [k2, k3] for the best
    target, [k0, k2] for the worst."""
    k = constants(n)
    if target is Target.BEST:
        return AdmissibleInterval(lo=k.k2, hi=k.k3, target=target)
    return AdmissibleInterval(lo=k.k0, hi=k.k2, target=target)


def sup_risk_linear(c: float, n: int, target: Target) -> float:
    """Supremum over the gap of the linear rule's risk, for coefficients in
    the admissible interval (where the closed forms below are valid)."""
    if target is Target.BEST:
        mu0 = 4 * n * (n - 1) * c - 1.0
        return (
            math.exp(-mu0) * (4 * n * (n - 1) * c + 1.0) / (2 * n * n)
            + 2 * (n - 1) * (2 * n - 1) * c * c
            - 4 * (n - 1) * c / n
            + 2.0 / (n * n)
        )
    return 2 * (n - 1) * (2 * n - 1) * c * c - 4 * (n - 1) * c / n + 2.0 / (n * n)


def minimax_root_expression(r: float, n: int) -> float:
    """Stationarity expression whose root in [k2, k3] gives the restricted
    minimax coefficient for the best target."""
    return (
        4 * (n - 1) * (2 * n - 1) * r
        - 8 * (n - 1) ** 2 * r * math.exp(-(4 * n * (n - 1) * r - 1.0))
        - 4 * (n - 1) / n
    )


@functools.lru_cache(maxsize=None)
def minimax_c(n: int, target: Target) -> float:
    """Restricted minimax coefficient within the linear class.

    Best target: the root of the stationarity expression inside [k2, k3];
    the endpoint derivative signs guarantee the bracket. Worst target: k2.
    The bracket tolerance is tightened well below the documented 1e-12 so
    the expression itself evaluates to ~1e-12 at the returned root.
    """
    if n < 2:
        raise DomainError(f"n must be at least 2, got {n}")
    k = constants(n)
    if target is Target.WORST:
        return k.k2
    return find_root(
        lambda r: minimax_root_expression(r, n),
        Bracket(k.k2, k.k3),
        tol=1e-15,
    )


# --- conditional-risk minimizer psi_mu(w) and its envelopes ----------------


def _integrate_scaled(f, a: float, b: float, tol: float = 1e-10) -> float:
    """Adaptive quadrature with the absolute tolerance scaled by a crude
    magnitude estimate, so integrands of size e^(2*mu) still converge."""
    if b <= a:
        return 0.0
    probe = max(abs(f(a)), abs(f(0.5 * (a + b))), abs(f(b)), 1.0)
    return integrate(f, a, b, tol=tol * probe * (b - a) + tol)


def _k_best(mu: float, w: float, n: int) -> float:
    """Gap-dependent factor of psi_mu for the best target."""
    if mu > MU_QUADRATURE_LIMIT:
        if w >= 1.0 / n:
            return -4.0 * n * n * w / (1.0 + n * w)
        return math.inf
    rate = (1.0 + n * w) / w

    i1 = _integrate_scaled(
        lambda u: u * math.exp(2 * n * u) * upper_reg_gamma(2 * n, rate * u),
        0.0,
        mu / n,
    )
    i2 = _integrate_scaled(
        lambda u: math.exp(2 * n * u) * upper_reg_gamma(2 * n + 1, rate * u),
        0.0,
        mu / n,
    )
    return (1.0 + mu - 2.0 * n * n * i1) / (1.0 + n * i2)


def _xi_worst(mu: float, w: float, n: int) -> float:
    """Gap-dependent factor of psi_mu for the worst target."""
    a = (1.0 + n * w) / (n * w)
    if mu > MU_QUADRATURE_LIMIT:
        return 0.0 if a <= 2.0 else math.inf
    m = 2 * n
    ga = _integrate_scaled(
        lambda t: math.exp(2 * t) * upper_reg_gamma(m, a * t), 0.0, mu
    )
    gt = _integrate_scaled(
        lambda t: t * math.exp(2 * t) * upper_reg_gamma(m, a * t), 0.0, mu
    )
    gc = _integrate_scaled(
        lambda t: math.exp(2 * t) * upper_reg_gamma(m + 1, a * t), 0.0, mu
    )
    return (1.0 + mu * (1.0 + 2.0 * ga) - 2.0 * gt) / (1.0 + gc)


def psi_mu(w: float, mu: float, n: int, target: Target) -> float:
    """Value of psi minimizing the conditional risk given W = w at gap mu.

    Returns +inf in the regime (w < 1/n, large gap) where the minimizer
    grows without bound.
    """
    if w <= 0:
        raise DomainError(f"w must be positive, got {w}")
    _check(mu, n)
    factor = (1.0 + n * w) / (4.0 * n * n)
    if target is Target.BEST:
        return factor * _k_best(mu, w, n)
    return factor * _xi_worst(mu, w, n)


def psi_envelopes(
    w: float, n: int, target: Target
) -> Tuple[EnvelopeBound, EnvelopeBound]:
    """(lower, upper) envelope of psi_mu over all gaps.

    An UNBOUNDED marker stands in wherever no finite bound exists. For the
    best target the lower value is the proven lower bound -w rather than
    the exact infimum.
    """
    if w <= 0:
        raise DomainError(f"w must be positive, got {w}")
    if n < 2:
        raise DomainError(f"n must be at least 2, got {n}")
    cap = (1.0 + n * w) / (4.0 * n * n)
    if target is Target.BEST:
        upper = UNBOUNDED if w < 1.0 / n else cap
        return (-w, upper)
    if w < 1.0 / n:
        return (cap, UNBOUNDED)
    return (0.0, cap)
