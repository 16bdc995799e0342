"""Deterministic numerical primitives used by all solvers.

Everything the design machinery needs reduces to the standard normal
family (density, distribution function, quantile), one-dimensional
definite integration, and bracketed root finding. The heavy lifting is
delegated to scipy's kernels; this module adds the package's argument
validation, error conventions, and truncation handling for infinite
integration limits.

All functions are pure and hold no mutable state, so they are safe to
call from any number of threads.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import ndtr, ndtri

from .errors import BracketingError, ConvergenceError, InvalidParameterError

_SQRT_2PI = math.sqrt(2.0 * math.pi)

# QUADPACK refuses relative tolerances below ~50 machine epsilons; pin
# epsrel at that floor so absolute_tolerance alone governs convergence.
_EPSREL_FLOOR = 50 * math.ulp(1.0)


def require_probability(value: float, name: str, allow_zero: bool = False) -> float:
    """Validate that ``value`` is a probability in (0, 1).

    Exact zero is admitted only where an operation explicitly allows it
    (interim spending levels); one is never admitted.
    """
    value = float(value)
    above = value > 0.0 or (allow_zero and value == 0.0)
    if not (above and value < 1.0):
        bounds = "[0, 1)" if allow_zero else "(0, 1)"
        raise InvalidParameterError(f"{name} must lie in {bounds}, got {value!r}")
    return value


@dataclass(frozen=True)
class QuadratureSettings:
    """Tolerances and truncation policy for adaptive quadrature.

    ``truncation_sigmas`` controls where infinite integration limits are
    cut off, in standard deviations of the Gaussian factor dominating
    the integrand. At 8.5 sigmas the discarded tail mass is below 1e-17,
    safely under every tolerance quoted in this package.
    """

    absolute_tolerance: float = 1e-9
    max_subdivisions: int = 200
    truncation_sigmas: float = 8.5

    def __post_init__(self):
        if not self.absolute_tolerance > 0.0:
            raise InvalidParameterError("absolute_tolerance must be positive")
        if self.max_subdivisions < 1:
            raise InvalidParameterError("max_subdivisions must be at least 1")
        if self.truncation_sigmas < 6.0:
            raise InvalidParameterError(
                "truncation_sigmas below 6 would discard non-negligible tail mass"
            )


DEFAULT_QUADRATURE = QuadratureSettings()


def normal_pdf(x: float, mean: float = 0.0, sd: float = 1.0) -> float:
    """Density of N(mean, sd^2) at ``x``."""
    if not sd > 0.0:
        raise InvalidParameterError(f"sd must be positive, got {sd!r}")
    z = (x - mean) / sd
    return math.exp(-0.5 * z * z) / (sd * _SQRT_2PI)


class CdfValue(float):
    """A probability that also remembers its complement.

    Instances behave exactly like the plain float P(X <= x) in every
    arithmetic, comparison, and serialization context. The extra
    ``upper_tail`` attribute carries 1 - P(X <= x) at full relative
    precision. Floats near one are spaced about 1.1e-16 apart, so a
    bare float value in the upper tail pins down its quantile only to
    roughly 1e-8; keeping the complement alongside lets
    ``normal_quantile`` invert through the well-conditioned side and
    makes quantile-of-cdf compositions accurate across the whole range.
    """

    __slots__ = ("upper_tail",)

    def __new__(cls, value: float, upper_tail: float):
        self = super().__new__(cls, value)
        self.upper_tail = upper_tail
        return self

    def __getnewargs__(self):
        return (float(self), self.upper_tail)


def normal_cdf(x: float, mean: float = 0.0, sd: float = 1.0) -> CdfValue:
    """P(X <= x) for X ~ N(mean, sd^2).

    Absolute error is below 1e-12 across the usable range; beyond the
    underflow range the result saturates to exactly 0.0 or 1.0.
    Infinite ``x`` is accepted and maps to the exact boundary value.
    The result is an ordinary float enriched with the upper tail mass
    (see CdfValue).
    """
    if not sd > 0.0:
        raise InvalidParameterError(f"sd must be positive, got {sd!r}")
    z = (x - mean) / sd
    return CdfValue(float(ndtr(z)), float(ndtr(-z)))


def normal_quantile(p: float) -> float:
    """Standard normal quantile: the z with normal_cdf(z) = p.

    Accurate to well under 1e-10 in z across (0, 1). When ``p`` is a
    CdfValue from normal_cdf and lies above one half, the inversion
    runs through the carried upper tail, whose relative precision is
    intact, so round trips recover z to near machine accuracy even
    deep in the right tail.
    """
    require_probability(p, "p")
    upper = getattr(p, "upper_tail", None)
    if upper is not None and p > 0.5 and 0.0 < upper < 1.0:
        return float(-ndtri(upper))
    return float(ndtri(float(p)))


def integrate(
    f: Callable[[float], float],
    lower: float,
    upper: float,
    settings: QuadratureSettings = DEFAULT_QUADRATURE,
    proxy_mean: float | None = None,
    proxy_sd: float | None = None,
) -> float:
    """Definite integral of ``f`` over (lower, upper) within absolute tolerance.

    Infinite endpoints are truncated at ``proxy_mean`` plus or minus
    ``settings.truncation_sigmas * proxy_sd`` when the caller supplies
    the location and scale of the integrand's dominating Gaussian
    factor; without a proxy the infinite range is handed to the
    integrator's own transformation.

    Raises ConvergenceError, carrying the best available estimate, if
    the subdivision budget runs out first.
    """
    if not lower < upper:
        raise InvalidParameterError(
            f"integration bounds must satisfy lower < upper, got ({lower!r}, {upper!r})"
        )
    if proxy_mean is not None and proxy_sd is not None:
        if not proxy_sd > 0.0:
            raise InvalidParameterError(f"proxy_sd must be positive, got {proxy_sd!r}")
        half_width = settings.truncation_sigmas * proxy_sd
        if math.isinf(lower):
            lower = proxy_mean - half_width
        if math.isinf(upper):
            upper = proxy_mean + half_width
        if not lower < upper:
            return 0.0
    out = quad(
        f,
        lower,
        upper,
        epsabs=settings.absolute_tolerance,
        epsrel=_EPSREL_FLOOR,
        limit=settings.max_subdivisions,
        full_output=True,
    )
    if len(out) > 3:  # a fourth element is QUADPACK's warning message
        raise ConvergenceError(
            f"quadrature did not reach tolerance {settings.absolute_tolerance:g} "
            f"within {settings.max_subdivisions} subdivisions: {out[3].strip()}",
            best_estimate=float(out[0]),
        )
    return float(out[0])


def find_root(
    g: Callable[[float], float],
    bracket_lo: float,
    bracket_hi: float,
    tolerance: float,
) -> float:
    """Root of a continuous ``g`` inside a sign-changing bracket.

    Brent's method: bisection with secant and inverse-quadratic
    acceleration, so convergence is guaranteed whenever the bracket
    straddles a sign change. The returned point is within ``tolerance``
    of the exact root.
    """
    if not tolerance > 0.0:
        raise InvalidParameterError(f"tolerance must be positive, got {tolerance!r}")
    if not bracket_lo < bracket_hi:
        raise InvalidParameterError(
            f"bracket must satisfy lo < hi, got ({bracket_lo!r}, {bracket_hi!r})"
        )
    g_lo = g(bracket_lo)
    g_hi = g(bracket_hi)
    if g_lo == 0.0:
        return float(bracket_lo)
    if g_hi == 0.0:
        return float(bracket_hi)
    if math.copysign(1.0, g_lo) == math.copysign(1.0, g_hi):
        raise BracketingError(
            f"no sign change over [{bracket_lo!r}, {bracket_hi!r}]: "
            f"g(lo)={g_lo!r}, g(hi)={g_hi!r}"
        )
    # generous iteration cap: flat roots (zero derivative) can push Brent
    # far past its usual dozen steps before the bracket shrinks to xtol
    root, info = brentq(
        g, bracket_lo, bracket_hi, xtol=tolerance, maxiter=1000,
        full_output=True, disp=False,
    )
    if not info.converged:
        raise ConvergenceError(
            f"root bracketing did not shrink to {tolerance:g} within "
            f"{info.iterations} iterations",
            best_estimate=float(root),
        )
    return float(root)
