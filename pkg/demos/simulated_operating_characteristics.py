"""
Checking a design by simulating whole trials
============================================

The design math works on a normal approximation to the log hazard
ratio estimate.  The simulator generates patient-level exponential
survival data, runs the log-rank analysis at the planned event counts,
and applies the decision rule, so agreement between the two is a
genuine end-to-end check.
"""

import math

from tte3 import (
    DesignSpec,
    GSSpec,
    SimScenario,
    simulate_trial,
    solve_fixed_design,
    solve_gs_design,
    theta_hat_sampling_check,
)

base = DesignSpec(hr0=1.0, hr1=0.65, alpha=0.15, beta=0.15, pi=0.75, eta=0.75)
fixed = solve_fixed_design(base)

# Trial logistics: 260 patients accrued uniformly over 12 months, a
# control arm median survival of 6 months, analysis when the planned
# number of events has occurred.
REPS = 20_000
HAZARD = math.log(2.0) / 6.0


def scenario(theta, trigger, seed):
    return SimScenario(
        true_log_hr_theta=theta,
        control_hazard=HAZARD,
        n_patients=260,
        accrual_duration=12.0,
        analysis_trigger=trigger,
        rng_seed=seed,
        n_replications=REPS,
    )


# Under the null the reject-H0 rate should track alpha and the
# reject-H1 rate should track eta.
under_h0 = simulate_trial(scenario(base.theta0, (fixed.n_events_d,), 7001), fixed)
print(f"{REPS} replications under H0 (true hr 1.0):")
print(f"  reject H0: {under_h0.p_reject_H0:.4f}  (analytic {fixed.achieved_alpha:.4f})")
print(f"  reject H1: {under_h0.p_reject_H1:.4f}  (analytic {fixed.achieved_eta:.4f})")
print(f"  monte carlo SE about {under_h0.mc_standard_errors['p_reject_H0']:.4f}")

# Under the alternative the same scenario machinery checks pi and beta.
under_h1 = simulate_trial(scenario(base.theta1, (fixed.n_events_d,), 7002), fixed)
print(f"\n{REPS} replications under H1 (true hr 0.65):")
print(f"  reject H0: {under_h1.p_reject_H0:.4f}  (analytic {fixed.achieved_pi:.4f})")
print(f"  reject H1: {under_h1.p_reject_H1:.4f}  (analytic {fixed.achieved_beta:.4f})")

# The group-sequential design adds an interim stop, whose rate under
# the alternative is the planned futility spending.
gs_design = solve_gs_design(GSSpec(base=base, info_fraction_t1=0.5, beta1=0.05))
trigger = (gs_design.d1_interim, gs_design.d_total)
gs_h1 = simulate_trial(scenario(base.theta1, trigger, 7003), gs_design)
print(f"\ngroup-sequential design under H1, triggers {trigger}:")
print(f"  stop at interim: {gs_h1.p_stop_interim:.4f}  (planned 0.0500)")
print(f"  reject H0:       {gs_h1.p_reject_H0:.4f}  (analytic {gs_design.achieved_pi:.4f})")

# Deeper check on the estimator itself: at the analysis event count the
# log hazard ratio estimate should be nearly normal with mean theta and
# variance (1+r)^2 / (r d).
check = theta_hat_sampling_check(scenario(base.theta1, (fixed.n_events_d,), 7004))
print(f"\nsampling check at d = {check.n_events_d}:")
print(f"  mean theta_hat {check.mean_theta_hat:+.4f}, expected {check.expected_mean:+.4f} "
      f"(SE {check.se_mean:.4f})")
print(f"  var theta_hat  {check.variance_theta_hat:.5f}, expected {check.expected_variance:.5f}")
