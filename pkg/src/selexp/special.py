"""Numerical kernel: regularized upper incomplete gamma, reproducible
exponential/gamma sampling, adaptive quadrature and bracketed root finding.

Every other module funnels its special-function, sampling, integration and
root-solving needs through here so that numeric policy (tolerances, overflow
handling, RNG substream derivation) lives in one place.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special as _sp


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to converge within the subdivision budget."""


class BracketError(ValueError):
    """Root bracket endpoints do not straddle a sign change."""


@dataclass(frozen=True)
class Bracket:
    """Interval [lo, hi] expected to straddle a root."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"bracket requires lo < hi, got [{self.lo}, {self.hi}]")


def upper_reg_gamma(alpha: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(alpha, x) = int_x^inf e^-t t^(a-1)/Gamma(a) dt.

    For integer alpha this equals the Poisson tail e^-x * sum_{j<alpha} x^j/j!.
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if x < 0:
        raise ValueError(f"x must be nonnegative, got {x}")
    return float(_sp.gammaincc(alpha, x))


def upper_reg_gamma_arr(alpha: float, x: np.ndarray) -> np.ndarray:
    """Vectorized Q(alpha, x) for array arguments (alpha fixed)."""
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    return _sp.gammaincc(alpha, x)


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-10,
    max_depth: int = 60,
) -> float:
    """Adaptive Simpson quadrature of f over [a, b] to absolute tolerance tol.

    Raises QuadratureError if the recursion exceeds max_depth levels without
    the local error estimate falling below its share of the tolerance.
    """
    if a > b:
        raise ValueError(f"require a <= b, got a={a}, b={b}")
    if a == b:
        return 0.0

    def simpson(lo, flo, hi, fhi, fmid):
        return (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)

    def recurse(lo, flo, hi, fhi, fmid, whole, eps, depth):
        mid = 0.5 * (lo + hi)
        lmid = 0.5 * (lo + mid)
        rmid = 0.5 * (mid + hi)
        flm = f(lmid)
        frm = f(rmid)
        left = simpson(lo, flo, mid, fmid, flm)
        right = simpson(mid, fmid, hi, fhi, frm)
        err = left + right - whole
        if abs(err) <= 15.0 * eps:
            return left + right + err / 15.0
        if depth >= max_depth:
            raise QuadratureError(
                f"adaptive Simpson did not converge on [{lo}, {hi}] "
                f"within {max_depth} subdivision levels"
            )
        half = 0.5 * eps
        return recurse(lo, flo, mid, fmid, flm, left, half, depth + 1) + recurse(
            mid, fmid, hi, fhi, frm, right, half, depth + 1
        )

    fa, fb = f(a), f(b)
    fm = f(0.5 * (a + b))
    whole = simpson(a, fa, b, fb, fm)
    return recurse(a, fa, b, fb, fm, whole, tol, 0)


def find_root(
    f: Callable[[float], float],
    bracket: Bracket,
    tol: float = 1e-12,
) -> float:
    """Locate the root of f inside bracket to bracket-width tolerance tol.

    Bisection safeguarded with secant steps: a secant proposal is accepted
    only when it falls strictly inside the current bracket, otherwise the
    step falls back to bisection. Deterministic for a given (f, bracket).
    """
    lo, hi = bracket.lo, bracket.hi
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if math.copysign(1.0, flo) == math.copysign(1.0, fhi):
        raise BracketError(
            f"f({lo})={flo} and f({hi})={fhi} have the same sign"
        )
    while hi - lo > tol:
        x = None
        if fhi != flo:
            secant = (lo * fhi - hi * flo) / (fhi - flo)
            if lo < secant < hi:
                x = secant
        if x is None or min(x - lo, hi - x) < 0.01 * (hi - lo):
            x = 0.5 * (lo + hi)
        fx = f(x)
        if fx == 0.0:
            return x
        if math.copysign(1.0, fx) == math.copysign(1.0, flo):
            lo, flo = x, fx
        else:
            hi, fhi = x, fx
    return 0.5 * (lo + hi)


# --- reproducible sampling -------------------------------------------------
#
# Substreams are derived counter-style from (seed, *key) via Philox, so any
# task can regenerate its block of uniforms independent of execution order,
# thread count or platform. Exponential and gamma variates are produced by
# inverse transform from these uniforms (a gamma with integer shape is a sum
# of unit exponentials), never by distribution-specific samplers, so the
# draw sequence is stable across numpy versions.


def substream(seed: int, *key: int) -> np.random.Generator:
    """Deterministic RNG substream for a (seed, key...) address."""
    counter = [k % (1 << 64) for k in key] + [0] * (4 - len(key))
    if len(counter) > 4:
        raise ValueError("at most 4 key components are supported")
    return np.random.Generator(np.random.Philox(key=seed % (1 << 64), counter=counter))


def exponential_from_uniform(u, location=0.0, scale=1.0):
    """Inverse-transform Exp(location, scale) variate from uniform u in [0, 1)."""
    return location - scale * np.log1p(-np.asarray(u, dtype=float))


def sample_exponential(rng: np.random.Generator, location: float, scale: float, size=None):
    """Draw Exp(location, scale) variates by inverse transform."""
    if scale <= 0:
        raise ValueError(f"scale must be positive, got {scale}")
    return exponential_from_uniform(rng.random(size), location, scale)


def sample_gamma_int(rng: np.random.Generator, shape: int, scale: float, size=None):
    """Draw Gamma(shape, scale) with integer shape as a sum of exponentials."""
    if shape < 1 or shape != int(shape):
        raise ValueError(f"shape must be a positive integer, got {shape}")
    if scale <= 0:
        raise ValueError(f"scale must be positive, got {scale}")
    n = (shape,) if size is None else (np.prod(size, dtype=int), shape)
    draws = exponential_from_uniform(rng.random(n), 0.0, scale)
    total = draws.sum(axis=-1)
    if size is None:
        return float(total)
    return total.reshape(size)
