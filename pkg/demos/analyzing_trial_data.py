"""
Analyzing patient-level data against a design
=============================================

Given a patient table with arms, staggered entries, and censoring
flags, the log-rank machinery produces the standardized statistic and
the log hazard ratio estimate that the design boundaries act on.
"""

import math
import tempfile
from pathlib import Path

from tte3 import (
    DesignSpec,
    SimScenario,
    classify_outcome,
    log_rank,
    log_rank_increment,
    solve_fixed_design,
)
from tte3.trial import read_patient_csv, replicate_patients

base = DesignSpec(hr0=1.0, hr1=0.65, alpha=0.15, beta=0.15, pi=0.75, eta=0.75)
design = solve_fixed_design(base)

# Draw one synthetic trial under the alternative so the walkthrough is
# reproducible: 130 patients, true hazard ratio 0.65.
scenario = SimScenario(
    true_log_hr_theta=base.theta1,
    control_hazard=math.log(2.0) / 6.0,
    n_patients=130,
    accrual_duration=12.0,
    analysis_trigger=(design.n_events_d,),
    rng_seed=424242,
    n_replications=1,
)
data = replicate_patients(scenario, 0)

# Round trip through the on-disk format: one row per patient with
# columns arm, entry_time, time, event.
csv_path = Path(tempfile.mkdtemp()) / "patients.csv"
with open(csv_path, "w", encoding="utf-8") as handle:
    handle.write("arm,entry_time,time,event\n")
    for p in data.patients:
        handle.write(f"{p.arm},{p.entry_time:.6f},{p.event_time:.6f},{int(p.observed)}\n")
loaded = read_patient_csv(csv_path)
print(f"wrote and reloaded {len(loaded.patients)} patients "
      f"(allocation ratio {loaded.rand_ratio_r:.2f})")

# The analysis clock is calendar time since study start.  Cutting at
# the time of the planned event count mimics the design's final look.
result = log_rank(loaded)
print(f"\nfull-data analysis: {result.n_events_d} events, "
      f"L = {result.statistic_L:+.4f}, hr_hat = {math.exp(result.theta_hat):.4f}")
print(f"design decision: {classify_outcome(design, result.theta_hat)}")

# Stagewise increments split the same data at an interim calendar time.
# The two stage statistics are built from disjoint sets of events, and
# the information-weighted combination reproduces the full estimate.
interim_cutoff = 14.0
stages = log_rank_increment(loaded, interim_cutoff, math.inf)
d1, d2 = stages.d1_events, stages.d2_events
combined = (d1 * stages.theta_hat_1 + d2 * stages.theta_hat_2) / (d1 + d2)
print(f"\ninterim at t = {interim_cutoff}: {d1} events, "
      f"theta_hat_1 = {stages.theta_hat_1:+.4f}")
print(f"after the interim: {d2} more events, theta_hat_2 = {stages.theta_hat_2:+.4f}")
print(f"weighted combination {combined:+.4f} vs full-data {result.theta_hat:+.4f}")
