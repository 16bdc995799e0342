"""Fixed (no-interim) three-outcome design for time-to-event trials.

A randomized two-arm trial with proportional hazards is summarized by
the log hazard ratio theta = log(HR) of the experimental arm against
control, tested between two simple hypotheses

    H0: theta = theta0 = log(hr0)      (insufficient activity)
    H1: theta = theta1 = log(hr1)      (target activity, hr1 < hr0)

After d events, the normalized log-rank estimator theta_hat is
approximately N(theta, (1+r)^2 / (r d)) under an r:1
experimental:control allocation. A three-outcome rule splits the real
line with two boundaries on the log-HR scale:

    theta_hat < boundary_lower   reject H0 (efficacy signal)
    theta_hat > boundary_upper   reject H1 (no-go)
    otherwise                    inconclusive gray zone

The solver finds the minimum d together with boundaries meeting four
operating targets: false positive rate alpha and correct negative rate
eta evaluated under H0, false negative rate beta and power pi evaluated
under H1. Two event-count expressions arise, one from the (alpha, pi)
pair and one from the (beta, eta) pair; after any integer rounding the
smaller side is re-tightened (beta decreased or pi increased) so both
counts agree, and alpha and eta are preserved exactly throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import (
    HypothesisOrderingError,
    InfeasibleGrayZoneError,
    InvalidParameterError,
)
from .numerics import normal_cdf, normal_quantile, require_probability

REJECT_H0 = "reject_H0"
REJECT_H1 = "reject_H1"
INCONCLUSIVE = "inconclusive"

# two boundaries closer than this (log-HR scale) collapse to a classical
# two-outcome accept/reject rule
_TWO_OUTCOME_TOL = 1e-9


@dataclass(frozen=True)
class DesignSpec:
    """Hypotheses, error targets, and allocation for a three-outcome design.

    ``hr0`` and ``hr1`` are hazard ratios (experimental over control)
    under the null and alternative; ``rand_ratio_r`` is the r in an r:1
    experimental:control randomization.
    """

    hr0: float
    hr1: float
    alpha: float
    beta: float
    pi: float
    eta: float
    rand_ratio_r: float = 1.0

    @property
    def theta0(self) -> float:
        return math.log(self.hr0)

    @property
    def theta1(self) -> float:
        return math.log(self.hr1)


@dataclass(frozen=True)
class FixedDesign:
    """Solved fixed design: event count, boundaries, achieved rates.

    ``n_events_d`` is integral when the spec was solved with rounding
    and fractional otherwise. ``two_outcome_equivalent`` flags the
    degenerate case where both boundaries coincide and the gray zone
    vanishes.
    """

    n_events_d: float
    boundary_lower_loghr: float
    boundary_upper_loghr: float
    boundary_lower_hr: float
    boundary_upper_hr: float
    achieved_alpha: float
    achieved_beta: float
    achieved_pi: float
    achieved_eta: float
    spec: DesignSpec
    two_outcome_equivalent: bool


def validate_spec(spec: DesignSpec) -> DesignSpec:
    """Check every DesignSpec invariant, returning the spec unchanged.

    Raises HypothesisOrderingError when hr1 >= hr0,
    InfeasibleGrayZoneError when alpha+eta or beta+pi exceeds 1, and
    InvalidParameterError for any rate or ratio outside its domain.
    """
    for name in ("hr0", "hr1"):
        value = getattr(spec, name)
        if not (isinstance(value, (int, float)) and value > 0.0 and math.isfinite(value)):
            raise InvalidParameterError(f"{name} must be a positive real, got {value!r}")
    for name in ("alpha", "beta", "pi", "eta"):
        require_probability(getattr(spec, name), name)
    if not spec.rand_ratio_r > 0.0:
        raise InvalidParameterError(
            f"rand_ratio_r must be positive, got {spec.rand_ratio_r!r}"
        )
    if not spec.hr1 < spec.hr0:
        raise HypothesisOrderingError(
            f"hr1 must be less than hr0, got hr1={spec.hr1!r} >= hr0={spec.hr0!r}"
        )
    if spec.alpha + spec.eta > 1.0:
        raise InfeasibleGrayZoneError(
            f"alpha + eta = {spec.alpha + spec.eta:g} exceeds 1; "
            "the gray zone would carry negative probability under H0"
        )
    if spec.beta + spec.pi > 1.0:
        raise InfeasibleGrayZoneError(
            f"beta + pi = {spec.beta + spec.pi:g} exceeds 1; "
            "the gray zone would carry negative probability under H1"
        )
    return spec


def raw_event_counts(spec: DesignSpec) -> tuple[float, float]:
    """Unrounded event counts from the two constraint pairs.

    Returns ``(d_lower, d_upper)``: the count driven by the (alpha, pi)
    pair, which travels with the lower boundary, and the count driven by
    the (beta, eta) pair, which travels with the upper boundary. For a
    symmetric spec (alpha=beta, pi=eta) the two coincide.
    """
    validate_spec(spec)
    delta = spec.theta0 - spec.theta1
    factor = (1.0 + spec.rand_ratio_r) ** 2 / spec.rand_ratio_r
    z_alpha = normal_quantile(spec.alpha)
    z_beta = normal_quantile(spec.beta)
    z_pi = normal_quantile(spec.pi)
    z_eta = normal_quantile(spec.eta)
    d_lower = ((z_pi - z_alpha) / delta) ** 2 * factor
    d_upper = ((z_eta - z_beta) / delta) ** 2 * factor
    return d_lower, d_upper


def _lower_boundary(z_pi: float, z_alpha: float, theta0: float, theta1: float) -> float:
    return (z_pi * theta0 - z_alpha * theta1) / (z_pi - z_alpha)


def _upper_boundary(z_eta: float, z_beta: float, theta0: float, theta1: float) -> float:
    return (z_eta * theta1 - z_beta * theta0) / (z_eta - z_beta)


def solve_fixed_design(spec: DesignSpec, round_events: bool = True) -> FixedDesign:
    """Minimum event count and boundaries for a fixed three-outcome design.

    With ``round_events`` each raw count is ceiled to an integer and its
    companion z-score and boundary are recomputed at the integer count.
    The two counts are then balanced: whichever side requires fewer
    events is re-tightened at the larger count (decreasing beta when the
    lower side dominates, increasing pi when the upper side dominates),
    so a single d serves both constraint pairs. alpha and eta are never
    adjusted; balancing is applied to fractional counts as well so that
    both constraints bind in the unrounded solution too.
    """
    validate_spec(spec)
    theta0, theta1 = spec.theta0, spec.theta1
    delta = theta0 - theta1
    r = spec.rand_ratio_r

    def z_gap(d):
        # z-score separation implied by d events: sqrt(d r) (theta0-theta1) / (1+r)
        return math.sqrt(d * r) * delta / (1.0 + r)

    z_alpha = normal_quantile(spec.alpha)
    z_beta = normal_quantile(spec.beta)
    z_pi = normal_quantile(spec.pi)
    z_eta = normal_quantile(spec.eta)
    d_lower, d_upper = raw_event_counts(spec)
    bound_lower = _lower_boundary(z_pi, z_alpha, theta0, theta1)
    bound_upper = _upper_boundary(z_eta, z_beta, theta0, theta1)

    if round_events:
        d_lower = math.ceil(d_lower)
        z_pi = z_alpha + z_gap(d_lower)
        bound_lower = _lower_boundary(z_pi, z_alpha, theta0, theta1)
        d_upper = math.ceil(d_upper)
        z_beta = z_eta - z_gap(d_upper)
        bound_upper = _upper_boundary(z_eta, z_beta, theta0, theta1)

    if d_lower > d_upper:
        z_beta = z_eta - z_gap(d_lower)
        bound_upper = _upper_boundary(z_eta, z_beta, theta0, theta1)
    elif d_upper > d_lower:
        z_pi = z_alpha + z_gap(d_upper)
        bound_lower = _lower_boundary(z_pi, z_alpha, theta0, theta1)
    n_events = max(d_lower, d_upper)

    if bound_lower > bound_upper:
        # alpha + eta = 1 collapses the gray zone: both boundaries are then
        # algebraically equal but evaluated through different float paths,
        # which can cross by an ulp; snap so the ordering stays exact
        bound_upper = bound_lower

    return FixedDesign(
        n_events_d=int(n_events) if round_events else n_events,
        boundary_lower_loghr=bound_lower,
        boundary_upper_loghr=bound_upper,
        boundary_lower_hr=math.exp(bound_lower),
        boundary_upper_hr=math.exp(bound_upper),
        achieved_alpha=spec.alpha,
        achieved_beta=normal_cdf(z_beta),
        achieved_pi=normal_cdf(z_pi),
        achieved_eta=spec.eta,
        spec=spec,
        two_outcome_equivalent=abs(bound_upper - bound_lower) <= _TWO_OUTCOME_TOL,
    )


def boundaries_at(spec: DesignSpec, n_events: float) -> tuple[float, float]:
    """Boundaries binding alpha and beta exactly at a prescribed event count.

    Useful for comparing against designs whose event count was fixed by
    other considerations: the lower boundary makes the false positive
    rate exactly alpha and the upper makes the false negative rate
    exactly beta, leaving pi and eta to land where the count puts them.
    """
    validate_spec(spec)
    if not n_events > 0.0:
        raise InvalidParameterError(f"n_events must be positive, got {n_events!r}")
    sd = (1.0 + spec.rand_ratio_r) / math.sqrt(spec.rand_ratio_r * n_events)
    lower = spec.theta0 + normal_quantile(spec.alpha) * sd
    upper = spec.theta1 - normal_quantile(spec.beta) * sd
    return lower, upper


def classify_outcome(design: FixedDesign, theta_hat: float) -> str:
    """Map an estimate to reject_H0, reject_H1, or inconclusive."""
    if math.isnan(theta_hat):
        raise InvalidParameterError("theta_hat must not be NaN")
    if theta_hat < design.boundary_lower_loghr:
        return REJECT_H0
    if theta_hat > design.boundary_upper_loghr:
        return REJECT_H1
    return INCONCLUSIVE
