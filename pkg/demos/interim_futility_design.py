"""
Adding an interim futility look
===============================

The group-sequential variant splits the analysis into an interim look
after a fraction of the information and a final look, spending part of
the error budget early in exchange for the chance to stop a hopeless
trial at the halfway point.
"""

import math

from tte3 import DesignSpec, GSSpec, normal_cdf, solve_fixed_design, solve_gs_design
from tte3.sequential import (
    continue_and_reject_H0_prob,
    continue_and_reject_H1_prob,
    interim_boundaries,
)

base = DesignSpec(hr0=1.0, hr1=0.65, alpha=0.15, beta=0.15, pi=0.75, eta=0.75)

# Look once at half the information and spend beta1 = 0.05 of the
# false negative budget on a futility boundary there.  alpha1 = 0 means
# no early efficacy claim, so the interim can only stop for futility.
gs = GSSpec(base=base, info_fraction_t1=0.5, alpha1=0.0, beta1=0.05)
design = solve_gs_design(gs)

print(f"total events {design.d_total}, interim after {design.d1_interim}, "
      f"final stage adds {design.d2_post}")
print(f"stop for futility at the interim if hr_hat > {design.interim_upper_hr:.4f}")
print(f"(no efficacy stop: interim lower boundary is {design.interim_lower_loghr})")
print(f"final: reject H0 if hr_hat < {design.final_lower_hr:.4f}, "
      f"reject H1 if hr_hat > {design.final_upper_hr:.4f}")

# The interim look is not free; the fixed design needs fewer events.
fixed = solve_fixed_design(base)
print(f"\nfixed design would need {fixed.n_events_d} events "
      f"({design.d_total - fixed.n_events_d} fewer)")

# The cost buys an early exit: under the null the trial now stops at
# the interim with substantial probability.
sd1 = (1.0 + base.rand_ratio_r) / math.sqrt(base.rand_ratio_r * design.d1_interim)
p_stop_h0 = 1.0 - normal_cdf(design.interim_upper_loghr, base.theta0, sd1)
print(f"P(stop early | H0) = {p_stop_h0:.4f}")
print(f"P(stop early | H1) = {gs.beta1:.4f} by construction")

# The final boundaries are calibrated so the continuation paths spend
# exactly the remaining error budget.
interim = interim_boundaries(gs, design.d1_interim)
spent_alpha = continue_and_reject_H0_prob(
    base.theta0, design.d_total, design.d1_interim, interim,
    design.final_lower_loghr, gs,
)
spent_beta = continue_and_reject_H1_prob(
    base.theta1, design.d_total, design.d1_interim, interim,
    design.final_upper_loghr, gs,
)
print(f"\nalpha spent after continuing: {spent_alpha:.6f} "
      f"(budget {base.alpha - gs.alpha1:.2f})")
print(f"beta spent after continuing:  {spent_beta:.6f} "
      f"(budget {base.beta - gs.beta1:.2f})")

# Setting both interim fractions to zero disables the look and the
# solution collapses back to the single-look design.
degenerate = solve_gs_design(GSSpec(base=base, info_fraction_t1=0.5))
print(f"\nzero spending recovers d_total = {degenerate.d_total} "
      f"(fixed design {fixed.n_events_d})")
