"""Estimators of the selected population's guarantee time.

Families covered, for both the best-population and worst-population targets:
the linear class z2 - c*s (resp. z1 - c*s), the UMVUE, the generalized Bayes
rule (identical to the linear rule at the natural-constant coefficient), the
restricted minimax linear rule, and the "improved" transform that truncates
an equivariant estimator onto the band where its conditional risk cannot be
beaten pointwise.

Every family is affine and permutation equivariant: it can be written as
z1 - s * psi(w) with w = (z2 - z1)/s, which is what the improvement
transform exploits.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import DomainError, SufficientStatistic, Target

_FAMILIES = ("linear", "umvue", "gbayes", "minimax", "improved")


class SpecParseError(ValueError):
    """Estimator spec string does not match the grammar."""


@dataclass(frozen=True)
class EstimatorConstants:
    """The four natural coefficients, all functions of n alone."""

    k0: float
    k1: float
    k2: float
    k3: float


def constants(n: int) -> EstimatorConstants:
    """Natural linear coefficients for sample size n (per population)."""
    if n < 2:
        raise DomainError(f"n must be at least 2, got {n}")
    return EstimatorConstants(
        k0=1.0 / (2 * n * (2 * n - 1)),
        k1=1.0 / (2 * n * (n - 1)),
        k2=1.0 / (n * (2 * n - 1)),
        k3=3.0 / (2 * n * (2 * n - 1)),
    )


@dataclass(frozen=True)
class EstimatorSpec:
    """Tagged choice of one estimator: target plus family (plus parameters).

    family is one of 'linear' (requires c), 'umvue', 'gbayes', 'minimax',
    'improved' (requires base, itself not improved).
    """

    target: Target
    family: str
    c: Optional[float] = None
    base: Optional["EstimatorSpec"] = None

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise SpecParseError(f"unknown family {self.family!r}; expected one of {_FAMILIES}")
        if self.family == "linear" and self.c is None:
            raise SpecParseError("linear family requires a coefficient c")
        if self.family == "improved":
            if self.base is None:
                raise SpecParseError("improved family requires a base spec")
            if self.base.family == "improved":
                raise DomainError("improved of improved is not allowed")
            if self.base.target is not self.target:
                raise SpecParseError("improved base must share the target")

    def canonical(self) -> str:
        """Canonical string form, the inverse of parse_spec."""
        return f"{self.target.value}:{_family_str(self)}"


def _family_str(spec: EstimatorSpec) -> str:
    if spec.family == "linear":
        return f"linear:c={spec.c:g}"
    if spec.family == "improved":
        return f"improved({_family_str(spec.base)})"
    return spec.family


_GRAMMAR = (
    "spec := <target> ':' <family>; target := 'best' | 'worst'; "
    "family := 'linear:c=' <float> | 'umvue' | 'gbayes' | 'minimax' "
    "| 'improved(' <family> ')'"
)


def parse_spec(text: str) -> EstimatorSpec:
    """Parse a spec string such as 'best:umvue' or 'worst:improved(linear:c=0)'."""
    head, sep, rest = text.strip().partition(":")
    if not sep:
        raise SpecParseError(f"missing ':' in {text!r}; grammar: {_GRAMMAR}")
    try:
        target = Target(head.lower())
    except ValueError:
        raise SpecParseError(f"unknown target {head!r}; grammar: {_GRAMMAR}") from None
    return _parse_family(rest.strip(), target, text)


def _parse_family(text: str, target: Target, full: str) -> EstimatorSpec:
    if text in ("umvue", "gbayes", "minimax"):
        return EstimatorSpec(target=target, family=text)
    m = re.fullmatch(r"linear:c=([-+0-9.eE]+)", text)
    if m:
        try:
            c = float(m.group(1))
        except ValueError:
            raise SpecParseError(f"bad coefficient in {full!r}; grammar: {_GRAMMAR}") from None
        return EstimatorSpec(target=target, family="linear", c=c)
    m = re.fullmatch(r"improved\((.+)\)", text)
    if m:
        base = _parse_family(m.group(1).strip(), target, full)
        return EstimatorSpec(target=target, family="improved", base=base)
    raise SpecParseError(f"cannot parse {full!r}; grammar: {_GRAMMAR}")


def is_affine_permutation_equivariant(spec: EstimatorSpec) -> bool:
    """All implemented families have the form z1 - s * psi(w)."""
    return spec.family in _FAMILIES


def resolve_coefficient(spec: EstimatorSpec, n: int) -> float:
    """Linear coefficient for families that are linear rules in disguise."""
    k = constants(n)
    if spec.family == "linear":
        return spec.c
    if spec.family == "gbayes":
        return k.k2
    if spec.family == "minimax":
        if spec.target is Target.BEST:
            from .risk import minimax_c

            return minimax_c(n, Target.BEST)
        return k.k2
    raise DomainError(f"family {spec.family!r} is not a linear rule")


def evaluate_arrays(
    spec: EstimatorSpec,
    n: int,
    z1: np.ndarray,
    z2: np.ndarray,
    s: np.ndarray,
) -> np.ndarray:
    """Vectorized evaluation on ordered statistics (z1 <= z2 elementwise)."""
    z1 = np.asarray(z1, dtype=float)
    z2 = np.asarray(z2, dtype=float)
    s = np.asarray(s, dtype=float)

    if spec.family in ("linear", "gbayes", "minimax"):
        c = resolve_coefficient(spec, n)
        anchor = z2 if spec.target is Target.BEST else z1
        return anchor - c * s

    if np.any(s <= 0):
        raise DomainError(f"family {spec.family!r} requires s > 0")

    if spec.family == "umvue":
        k1 = 1.0 / (2 * n * (n - 1))
        r = np.minimum(n * (z2 - z1) / s, 1.0)
        with np.errstate(divide="ignore"):
            tail = np.where(r < 1.0, np.exp((2 * n - 2) * np.log1p(-r)), 0.0)
        if spec.target is Target.BEST:
            return z2 - k1 * s - k1 * s * tail
        return z1 - k1 * s + k1 * s * tail

    # improved: truncate the base rule's psi(w) onto the no-improvement band
    base_val = evaluate_arrays(spec.base, n, z1, z2, s)
    w = (z2 - z1) / s
    psi = (z1 - base_val) / s
    cap = (1.0 + n * w) / (4.0 * n * n)
    if spec.target is Target.BEST:
        out = np.where(psi < -w, z2, base_val)
        high = (w >= 1.0 / n) & (psi > cap) & ~(psi < -w)
        return np.where(high, z1 - cap * s, out)
    lower = np.where(w < 1.0 / n, cap, 0.0)
    out = np.where(psi < lower, z1 - lower * s, base_val)
    high = (w >= 1.0 / n) & (psi > cap)
    return np.where(high, z1 - cap * s, out)


def evaluate(spec: EstimatorSpec, stat: SufficientStatistic) -> float:
    """Evaluate one estimator on one sufficient statistic."""
    return float(
        evaluate_arrays(
            spec,
            stat.n,
            np.array([stat.z1]),
            np.array([stat.z2]),
            np.array([stat.s]),
        )[0]
    )
