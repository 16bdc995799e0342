"""One-interim group-sequential extension of the fixed design.

The trial is analyzed twice: after d1 events and, if it continues,
after d = d1 + d2 events. Writing theta_hat_1 for the normalized
log-rank estimator over the first d1 events and theta_hat_2 over the
next d2, the two increments are modeled as independent normals

    theta_hat_k ~ N(theta, (1+r)^2 / (r d_k)),

and the final analysis uses the information-weighted combination
theta_hat = (d1/d) theta_hat_1 + (d2/d) theta_hat_2, which recovers the
fixed-design estimator over all d events.

Interim boundaries spend alpha1 of the false positive rate and beta1 of
the false negative rate in closed form. The final boundaries absorb the
remainder: with A(theta) the probability of continuing past the interim
and then rejecting H0, and B(theta) the mirror image for rejecting H1,
they solve

    A(theta0) = alpha - alpha1        (final lower boundary)
    B(theta1) = beta  - beta1         (final upper boundary)

by bracketed root finding around one-dimensional quadrature. The
minimum total event count is then the smallest integer d whose
study-wise power pi(d) and correct-negative rate eta(d) meet their
targets, located by an upward scan from the fixed-design count.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .design import DesignSpec, solve_fixed_design, validate_spec
from .errors import BracketingError, InfeasibilityError, InvalidParameterError
from .numerics import (
    QuadratureSettings,
    find_root,
    integrate,
    normal_cdf,
    normal_pdf,
    normal_quantile,
    require_probability,
)

# the A/B integrals feed differences against spending targets solved to
# 1e-10, so integrate them well below that
GS_QUADRATURE = QuadratureSettings(absolute_tolerance=1e-11, max_subdivisions=200)

_ROOT_TOLERANCE = 1e-10
_BRACKET_SIGMAS = 10.0
_SEARCH_CAP_FACTOR = 100


@dataclass(frozen=True)
class GSSpec:
    """Fixed-design targets plus interim timing and spending levels.

    ``info_fraction_t1`` is the fraction of total events observed at the
    interim; ``alpha1`` and ``beta1`` are the portions of alpha and beta
    spent there. A spending level of zero disables the corresponding
    interim decision.
    """

    base: DesignSpec
    info_fraction_t1: float
    alpha1: float = 0.0
    beta1: float = 0.0


@dataclass(frozen=True)
class GSDesign:
    """Solved one-interim design.

    Interim boundaries are -inf/+inf when the corresponding spending
    level is zero, meaning the interim cannot reject in that direction.
    """

    d_total: int
    d1_interim: int
    d2_post: int
    interim_lower_loghr: float
    interim_upper_loghr: float
    final_lower_loghr: float
    final_upper_loghr: float
    achieved_pi: float
    achieved_eta: float
    spec: GSSpec

    @property
    def final_lower_hr(self) -> float:
        return math.exp(self.final_lower_loghr)

    @property
    def final_upper_hr(self) -> float:
        return math.exp(self.final_upper_loghr)

    @property
    def interim_lower_hr(self) -> float:
        return math.exp(self.interim_lower_loghr)

    @property
    def interim_upper_hr(self) -> float:
        return math.exp(self.interim_upper_loghr)


def validate_gs_spec(spec: GSSpec) -> GSSpec:
    """Check GSSpec invariants, returning the spec unchanged."""
    validate_spec(spec.base)
    t1 = spec.info_fraction_t1
    if not (isinstance(t1, (int, float)) and 0.0 < t1 < 1.0):
        raise InvalidParameterError(
            f"info_fraction_t1 must lie strictly between 0 and 1, got {t1!r}"
        )
    require_probability(spec.alpha1, "alpha1", allow_zero=True)
    require_probability(spec.beta1, "beta1", allow_zero=True)
    if not spec.alpha1 < spec.base.alpha:
        raise InvalidParameterError(
            f"interim spending alpha1={spec.alpha1!r} must be below alpha={spec.base.alpha!r}"
        )
    if not spec.beta1 < spec.base.beta:
        raise InvalidParameterError(
            f"interim spending beta1={spec.beta1!r} must be below beta={spec.base.beta!r}"
        )
    return spec


def round_half_up(x: float) -> int:
    """Round to the nearest integer, ties away from zero for positive x."""
    return int(math.floor(x + 0.5))


def _sd(spec: GSSpec, d: float) -> float:
    r = spec.base.rand_ratio_r
    return (1.0 + r) / math.sqrt(r * d)


def interim_boundaries(spec: GSSpec, d1: int) -> tuple[float, float]:
    """Interim decision boundaries at d1 events.

    The lower (efficacy) boundary places probability alpha1 below it
    under H0; the upper (futility) boundary places beta1 above it under
    H1. Zero spending pushes the boundary to the corresponding infinity.
    """
    validate_gs_spec(spec)
    if d1 < 1:
        raise InvalidParameterError(f"d1 must be at least 1, got {d1!r}")
    sd1 = _sd(spec, d1)
    if spec.alpha1 == 0.0:
        lower = -math.inf
    else:
        lower = spec.base.theta0 + normal_quantile(spec.alpha1) * sd1
    if spec.beta1 == 0.0:
        upper = math.inf
    else:
        upper = spec.base.theta1 - normal_quantile(spec.beta1) * sd1
    return lower, upper


def _continuation_integral(
    theta: float,
    d: int,
    d1: int,
    interim: tuple[float, float],
    integrand_tail,
    spec: GSSpec,
    settings: QuadratureSettings,
) -> float:
    """Integrate f1(x | theta) * tail(x) over the interim continuation region."""
    if not d > d1 >= 1:
        raise InvalidParameterError(f"need d > d1 >= 1, got d={d!r}, d1={d1!r}")
    sd1 = _sd(spec, d1)
    lo = max(interim[0], theta - settings.truncation_sigmas * sd1)
    hi = min(interim[1], theta + settings.truncation_sigmas * sd1)
    if not hi > lo:
        return 0.0

    def f(x):
        return normal_pdf(x, theta, sd1) * integrand_tail(x)

    value = integrate(f, lo, hi, settings)
    return min(max(value, 0.0), 1.0)


def continue_and_reject_H0_prob(
    theta: float,
    d: int,
    d1: int,
    interim: tuple[float, float],
    final_lower: float,
    spec: GSSpec,
    settings: QuadratureSettings = GS_QUADRATURE,
) -> float:
    """P(continue past the interim, then theta_hat < final_lower | theta).

    The combined estimator falls below the final lower boundary exactly
    when theta_hat_2 < (d * final_lower - d1 * theta_hat_1) / d2, so the
    probability is the integral of the interim density times that
    conditional tail over the continuation region.
    """
    if final_lower == -math.inf:
        return 0.0
    d2 = d - d1
    sd2 = _sd(spec, d2) if d2 >= 1 else None

    def tail(x):
        return normal_cdf((d * final_lower - d1 * x) / d2, theta, sd2)

    return _continuation_integral(theta, d, d1, interim, tail, spec, settings)


def continue_and_reject_H1_prob(
    theta: float,
    d: int,
    d1: int,
    interim: tuple[float, float],
    final_upper: float,
    spec: GSSpec,
    settings: QuadratureSettings = GS_QUADRATURE,
) -> float:
    """P(continue past the interim, then theta_hat > final_upper | theta)."""
    if final_upper == math.inf:
        return 0.0
    d2 = d - d1
    sd2 = _sd(spec, d2) if d2 >= 1 else None

    def tail(x):
        # survival of the conditional threshold, exact by normal symmetry
        return normal_cdf(theta - (d * final_upper - d1 * x) / d2, 0.0, sd2)

    return _continuation_integral(theta, d, d1, interim, tail, spec, settings)


def split_events(spec: GSSpec, d: int) -> tuple[int, int]:
    """Interim/post split of d total events at the spec's information fraction."""
    validate_gs_spec(spec)
    d1 = round_half_up(spec.info_fraction_t1 * d)
    d2 = d - d1
    if d1 < 1 or d2 < 1:
        raise InvalidParameterError(
            f"d={d!r} at info fraction {spec.info_fraction_t1!r} leaves an "
            f"empty analysis stage (d1={d1}, d2={d2})"
        )
    return d1, d2


def solve_final_boundaries(
    spec: GSSpec,
    d: int,
    settings: QuadratureSettings = GS_QUADRATURE,
) -> tuple[float, float]:
    """Final boundaries spending the remaining alpha and beta at d events.

    A(theta0) is strictly increasing in the lower boundary and B(theta1)
    strictly decreasing in the upper, so each equation is solved by
    bracketed root finding over a bracket of 10 standard deviations
    around the hypothesis interval. A target unreachable inside the
    bracket (spending already exhausted by the interim under the
    hypothesis) raises InfeasibilityError.
    """
    d1, _ = split_events(spec, d)
    interim = interim_boundaries(spec, d1)
    base = spec.base
    width = _BRACKET_SIGMAS * _sd(spec, d)
    bracket_lo = base.theta1 - width
    bracket_hi = base.theta0 + width

    def low_gap(b):
        return (
            continue_and_reject_H0_prob(base.theta0, d, d1, interim, b, spec, settings)
            - (base.alpha - spec.alpha1)
        )

    def up_gap(b):
        return (
            continue_and_reject_H1_prob(base.theta1, d, d1, interim, b, spec, settings)
            - (base.beta - spec.beta1)
        )

    try:
        final_lower = find_root(low_gap, bracket_lo, bracket_hi, _ROOT_TOLERANCE)
        final_upper = find_root(up_gap, bracket_lo, bracket_hi, _ROOT_TOLERANCE)
    except BracketingError as exc:
        raise InfeasibilityError(
            f"no final boundary solves the spending targets at d={d}: {exc}"
        ) from exc
    return final_lower, final_upper


def design_at(
    spec: GSSpec,
    d: int,
    settings: QuadratureSettings = GS_QUADRATURE,
) -> GSDesign:
    """Full design evaluated at a prescribed total event count d.

    achieved_pi and achieved_eta are the study-wise rates at this d:
    the interim contribution plus the continue-then-reject integral.
    """
    d1, d2 = split_events(spec, d)
    interim = interim_boundaries(spec, d1)
    final_lower, final_upper = solve_final_boundaries(spec, d, settings)
    base = spec.base
    sd1 = _sd(spec, d1)

    if interim[0] == -math.inf:
        p_stop_efficacy_h1 = 0.0
    else:
        p_stop_efficacy_h1 = normal_cdf(interim[0], base.theta1, sd1)
    if interim[1] == math.inf:
        p_stop_futility_h0 = 0.0
    else:
        p_stop_futility_h0 = normal_cdf(base.theta0 - interim[1], 0.0, sd1)

    pi_d = p_stop_efficacy_h1 + continue_and_reject_H0_prob(
        base.theta1, d, d1, interim, final_lower, spec, settings
    )
    eta_d = p_stop_futility_h0 + continue_and_reject_H1_prob(
        base.theta0, d, d1, interim, final_upper, spec, settings
    )
    return GSDesign(
        d_total=d,
        d1_interim=d1,
        d2_post=d2,
        interim_lower_loghr=interim[0],
        interim_upper_loghr=interim[1],
        final_lower_loghr=final_lower,
        final_upper_loghr=final_upper,
        achieved_pi=pi_d,
        achieved_eta=eta_d,
        spec=spec,
    )


def _smallest_valid_d(spec: GSSpec) -> int:
    d = 2
    while True:
        d1 = round_half_up(spec.info_fraction_t1 * d)
        if d1 >= 1 and d - d1 >= 1:
            return d
        d += 1


def continuation_probs(spec: GSSpec, d: int) -> tuple[float, float]:
    """P(no interim stop | theta0) and P(no interim stop | theta1) at d.

    Closed form: the interim boundaries standardize to constants plus a
    (theta1 - theta0)/sd1 term, so both probabilities are decreasing in
    d whenever the corresponding spending level is positive.
    """
    d1, _ = split_events(spec, d)
    sd1 = _sd(spec, d1)
    base = spec.base
    delta = base.theta1 - base.theta0
    if spec.beta1 == 0.0:
        below_futility_h0 = 1.0
    else:
        below_futility_h0 = normal_cdf(delta / sd1 - normal_quantile(spec.beta1))
    p_continue_h0 = below_futility_h0 - spec.alpha1
    if spec.alpha1 == 0.0:
        below_efficacy_h1 = 0.0
    else:
        below_efficacy_h1 = normal_cdf(-delta / sd1 + normal_quantile(spec.alpha1))
    p_continue_h1 = (1.0 - spec.beta1) - below_efficacy_h1
    return p_continue_h0, p_continue_h1


def _spending_solvable(spec: GSSpec, d: int) -> bool:
    """Whether final boundaries can spend the remaining alpha and beta at d.

    The continue-then-reject probability under either hypothesis is
    capped by the probability of continuing at all, so the remaining
    spend must fit strictly under that cap for a finite boundary to
    exist.
    """
    p_continue_h0, p_continue_h1 = continuation_probs(spec, d)
    return (
        p_continue_h0 > spec.base.alpha - spec.alpha1
        and p_continue_h1 > spec.base.beta - spec.beta1
    )


def solve_gs_design(
    spec: GSSpec,
    settings: QuadratureSettings = GS_QUADRATURE,
) -> GSDesign:
    """Minimum-d one-interim design meeting the pi and eta targets.

    Candidates are scanned upward from just below the fixed-design
    event count, so the first design meeting both targets is minimal by
    construction. The scan stops early once the interim boundaries eat
    so much probability that the remaining spending targets have no
    solution (continuation_probs is decreasing in d, so that state is
    permanent), and in any case at 100 times the fixed-design count.
    Raises InfeasibilityError when the scan exhausts the range.
    """
    validate_gs_spec(spec)
    base = spec.base
    fixed = solve_fixed_design(base, round_events=True)
    d_fixed = int(fixed.n_events_d)
    lo = max(d_fixed - 2, _smallest_valid_d(spec))
    hi = _SEARCH_CAP_FACTOR * d_fixed

    for d in range(lo, hi + 1):
        if not _spending_solvable(spec, d):
            raise InfeasibilityError(
                f"from d={d} onward the interim stopping rule leaves less "
                "probability of continuing than the remaining spending "
                "targets require; the plan is infeasible"
            )
        candidate = design_at(spec, d, settings)
        if candidate.achieved_pi >= base.pi and candidate.achieved_eta >= base.eta:
            return candidate
    raise InfeasibilityError(
        f"no total event count up to {hi} (100x the fixed design's {d_fixed}) "
        "meets the power and correct-negative targets"
    )
