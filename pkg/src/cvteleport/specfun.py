"""Scalar special functions used by the free-space transmittance model.

Self-contained implementations (no scipy dependency in the library):
modified Bessel functions I0, I1 plus their exponentially scaled variants,
and the principal branch of the Lambert W function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# Power series below this |x|, asymptotic expansion above.  The series has
# all-positive terms (no cancellation) but gets slow for large arguments;
# the asymptotic tail reaches ~1e-13 relative error already at x = 15.
_SERIES_CUTOFF = 15.0
_SERIES_MAX_TERMS = 200
_ASYM_MAX_TERMS = 60

_HALLEY_MAX_ITER = 50
_HALLEY_STEP_TOL = 1e-14


@dataclass(frozen=True)
class SpecFunResult:
    """Value of an iteratively computed function plus its convergence flag."""

    value: float
    converged: bool


def _check_finite(x: float) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"argument must be finite, got {x!r}")
    return x


def _i0_series(x: float) -> float:
    # I0(x) = sum_k (x^2/4)^k / (k!)^2
    q = 0.25 * x * x
    term = 1.0
    total = 1.0
    for k in range(1, _SERIES_MAX_TERMS):
        term *= q / (k * k)
        total += term
        if term < total * 1e-17:
            break
    return total

def _i1_series(x: float) -> float:
    # I1(x) = (x/2) sum_k (x^2/4)^k / (k! (k+1)!)
    q = 0.25 * x * x
    term = 1.0
    total = 1.0
    for k in range(1, _SERIES_MAX_TERMS):
        term *= q / (k * (k + 1))
        total += term
        if term < total * 1e-17:
            break
    return 0.5 * x * total


def _i_asymptotic_scaled(x: float, mu: float) -> float:
    # exp(-x) I_nu(x) ~ (2 pi x)^(-1/2) sum_k t_k  with  mu = 4 nu^2,
    # t_{k+1} = t_k ((2k+1)^2 - mu) / (8 x (k+1)); truncated at the
    # smallest term (the series is asymptotic, not convergent).
    term = 1.0
    total = 1.0
    for k in range(_ASYM_MAX_TERMS):
        nxt = term * ((2 * k + 1) ** 2 - mu) / (8.0 * x * (k + 1))
        if abs(nxt) >= abs(term):
            break
        total += nxt
        term = nxt
        if abs(nxt) < abs(total) * 1e-17:
            break
    return total / math.sqrt(2.0 * math.pi * x)


def _unscale(scaled: float, x: float) -> float:
    # scaled * exp(x) without overflowing the intermediate exp for x > 709.
    if x > 350.0:
        half = math.exp(0.5 * x)
        value = (scaled * half) * half
    else:
        value = scaled * math.exp(x)
    if math.isinf(value):
        raise OverflowError(f"modified Bessel function overflows at x = {x}")
    return value


def bessel_i0_scaled(x: float) -> float:
    """exp(-|x|) I0(x); even in x and bounded by 1."""
    x = abs(_check_finite(x))
    if x < _SERIES_CUTOFF:
        return math.exp(-x) * _i0_series(x)
    return _i_asymptotic_scaled(x, mu=0.0)


def bessel_i1_scaled(x: float) -> float:
    """exp(-|x|) I1(x); odd in x."""
    x = _check_finite(x)
    ax = abs(x)
    if ax < _SERIES_CUTOFF:
        value = math.exp(-ax) * _i1_series(ax)
    else:
        value = _i_asymptotic_scaled(ax, mu=4.0)
    return math.copysign(value, x)


def bessel_i0(x: float) -> float:
    """Modified Bessel function I0(x).

    Raises OverflowError once the value leaves the double range
    (|x| greater than about 713).
    """
    x = abs(_check_finite(x))
    if x < _SERIES_CUTOFF:
        return _i0_series(x)
    return _unscale(_i_asymptotic_scaled(x, mu=0.0), x)


def bessel_i1(x: float) -> float:
    """Modified Bessel function I1(x); odd in x. Overflow as for I0."""
    x = _check_finite(x)
    ax = abs(x)
    if ax < _SERIES_CUTOFF:
        value = _i1_series(ax)
    else:
        value = _unscale(_i_asymptotic_scaled(ax, mu=4.0), ax)
    return math.copysign(value, x)


def lambert_w0_result(x: float) -> SpecFunResult:
    """Principal-branch Lambert W on x >= 0, with convergence flag.

    Halley iteration started from ln(1+x); for huge arguments the start is
    switched to ln x - ln ln x so the first w*exp(w) stays representable.
    """
    x = _check_finite(x)
    if x < 0.0:
        raise ValueError(f"lambert_w0 requires x >= 0, got {x}")
    if x == 0.0:
        return SpecFunResult(0.0, True)
    if x > 1e300:
        lx = math.log(x)
        w = lx - math.log(lx)
    else:
        w = math.log1p(x)
    for _ in range(_HALLEY_MAX_ITER):
        ew = math.exp(w)
        f = w * ew - x
        denom = ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0)
        step = f / denom
        w -= step
        if abs(step) <= _HALLEY_STEP_TOL * max(abs(w), 1e-300):
            return SpecFunResult(w, True)
    return SpecFunResult(w, False)


def lambert_w0(x: float) -> float:
    """w >= 0 with w * exp(w) = x, for x >= 0."""
    result = lambert_w0_result(x)
    if not result.converged:
        raise ArithmeticError(f"lambert_w0 failed to converge for x = {x}")
    return result.value
