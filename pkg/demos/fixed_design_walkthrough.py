"""
Designing a fixed three-outcome survival trial
==============================================

A walkthrough of the single-look design: pick the hazard ratios that
define the null and alternative hypotheses, pick the four operating
characteristics, and solve for the number of events and the pair of
decision boundaries on the log hazard ratio scale.
"""

import math

from tte3 import DesignSpec, classify_outcome, solve_fixed_design
from tte3.design import raw_event_counts

# The null says the experimental arm is no better than control
# (hazard ratio 1.0), the alternative says it clearly is (0.65).
# alpha and beta bound the false rejection rates, pi and eta are the
# minimum probabilities of reaching the matching correct conclusion.
spec = DesignSpec(hr0=1.0, hr1=0.65, alpha=0.15, beta=0.15, pi=0.75, eta=0.75)

# Each boundary comes with its own fractional event requirement; the
# design has to honor the larger of the two.
d_lower, d_upper = raw_event_counts(spec)
print(f"events required by the lower boundary pair: {d_lower:.3f}")
print(f"events required by the upper boundary pair: {d_upper:.3f}")

design = solve_fixed_design(spec)
print(f"\nplanned number of events: {design.n_events_d}")
print(f"reject H0 (declare activity)  if hr_hat < {design.boundary_lower_hr:.4f}")
print(f"reject H1 (declare futility)  if hr_hat > {design.boundary_upper_hr:.4f}")
print("anything in between is inconclusive")

# Rounding up to a whole number of events can only help: alpha and eta
# stay exactly on target while beta shrinks and pi grows.
print(f"\nachieved alpha = {design.achieved_alpha:.4f} (target {spec.alpha})")
print(f"achieved beta  = {design.achieved_beta:.4f} (target {spec.beta})")
print(f"achieved pi    = {design.achieved_pi:.4f} (target {spec.pi})")
print(f"achieved eta   = {design.achieved_eta:.4f} (target {spec.eta})")

# Classify a few hypothetical analysis results.
for hr_hat in (0.70, 0.80, 0.90):
    outcome = classify_outcome(design, math.log(hr_hat))
    print(f"observed hr_hat {hr_hat:.2f} -> {outcome}")

# A quick text sketch of the two sampling densities and the gray zone.
sd = (1.0 + spec.rand_ratio_r) / math.sqrt(spec.rand_ratio_r * design.n_events_d)
print("\n          theta      H1 density   H0 density")
steps = 13
lo = spec.theta1 - 2.0 * sd
hi = spec.theta0 + 2.0 * sd
for k in range(steps):
    theta = lo + (hi - lo) * k / (steps - 1)
    f0 = math.exp(-0.5 * ((theta - spec.theta0) / sd) ** 2) / (sd * math.sqrt(2 * math.pi))
    f1 = math.exp(-0.5 * ((theta - spec.theta1) / sd) ** 2) / (sd * math.sqrt(2 * math.pi))
    marker = " <- gray zone" if design.boundary_lower_loghr <= theta <= design.boundary_upper_loghr else ""
    print(f"  {theta:+.3f}  {'#' * round(f1 * 12):<22s} {'#' * round(f0 * 12):<22s}{marker}")

# Unequal randomization costs events: with twice as many patients on
# the experimental arm the same operating characteristics need more
# information.
two_to_one = solve_fixed_design(
    DesignSpec(hr0=1.0, hr1=0.65, alpha=0.15, beta=0.15, pi=0.75, eta=0.75,
               rand_ratio_r=2.0)
)
print(f"\n2:1 randomization raises the event count to {two_to_one.n_events_d}")

# When eta = 1 - alpha and pi = 1 - beta the gray zone closes and the
# procedure reduces to an ordinary two-outcome test.
collapsed = solve_fixed_design(
    DesignSpec(hr0=1.0, hr1=0.65, alpha=0.15, beta=0.15, pi=0.85, eta=0.85)
)
print(f"two-outcome equivalent: {collapsed.two_outcome_equivalent}, "
      f"single boundary at hr {collapsed.boundary_lower_hr:.4f} "
      f"with {collapsed.n_events_d} events")
