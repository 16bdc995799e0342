"""Log-rank analysis and trial simulation for two-arm survival data.

The log-rank statistic walks the observed events in calendar order and
accumulates, at each event, the experimental-arm indicator minus the
experimental fraction of the population still at risk, normalized by
the accumulated binomial variance:

    L = sum_j (X_j - p_j) / sqrt( sum_j p_j (1 - p_j) )

With d events under an r:1 experimental:control allocation, the
normalized estimator theta_hat = (1+r)/sqrt(r d) * L is approximately
normal around the true log hazard ratio with variance (1+r)^2/(r d).
That approximation is the distributional model behind the design
solvers, and this module is the empirical check on it: it analyzes
supplied patient-level datasets and simulates whole trials to estimate
operating characteristics.

A patient is at risk at calendar time c when they entered strictly
before c and their event or censoring lies at or after c. Simulated
trials use staggered uniform accrual, exponential event times (Weibull
via a common shape parameter), analyses triggered by event counts, and
administrative censoring at the analysis cutoff. Replications draw from
counter-based Philox streams keyed by (seed, replication index), so any
batching or parallel schedule reproduces identical results.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .design import FixedDesign
from .errors import (
    DataError,
    DataFormatError,
    DegenerateRiskSetError,
    InfeasibleScenarioError,
    InvalidParameterError,
    UndefinedStatisticError,
)
from .sequential import GSDesign

RNG_ALGORITHM = "philox4x64"

PATIENT_CSV_COLUMNS = ("arm", "entry_time", "time", "event")

# cap on elements of the largest per-batch work array (reps x patients x events)
_BATCH_CELL_BUDGET = 32_000_000


@dataclass(frozen=True)
class PatientRecord:
    """One patient: arm indicator, calendar entry, and follow-up time.

    ``event_time`` is measured from entry; ``observed`` distinguishes an
    event from censoring at that time.
    """

    arm: int
    entry_time: float
    event_time: float
    observed: bool

    def __post_init__(self):
        if self.arm not in (0, 1):
            raise InvalidParameterError(f"arm must be 0 or 1, got {self.arm!r}")
        if not (math.isfinite(self.entry_time) and self.entry_time >= 0.0):
            raise InvalidParameterError(
                f"entry_time must be a nonnegative real, got {self.entry_time!r}"
            )
        if not (math.isfinite(self.event_time) and self.event_time > 0.0):
            raise InvalidParameterError(
                f"event_time must be a positive real, got {self.event_time!r}"
            )


@dataclass(frozen=True)
class TrialData:
    """A collection of patients plus the planned allocation ratio."""

    patients: tuple[PatientRecord, ...]
    rand_ratio_r: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "patients", tuple(self.patients))
        if not self.patients:
            raise InvalidParameterError("patients must be a nonempty collection")
        if not self.rand_ratio_r > 0.0:
            raise InvalidParameterError(
                f"rand_ratio_r must be positive, got {self.rand_ratio_r!r}"
            )


@dataclass(frozen=True)
class LogRankResult:
    statistic_L: float
    n_events_d: int
    theta_hat: float


@dataclass(frozen=True)
class IncrementResult:
    """Stagewise statistics over the interim and post-interim event sets."""

    statistic_L1: float
    statistic_L2: float
    theta_hat_1: float
    theta_hat_2: float
    d1_events: int
    d2_events: int


def _columns(data: TrialData):
    arm = np.array([p.arm for p in data.patients], dtype=np.int64)
    entry = np.array([p.entry_time for p in data.patients], dtype=np.float64)
    end = entry + np.array([p.event_time for p in data.patients], dtype=np.float64)
    observed = np.array([p.observed for p in data.patients], dtype=bool)
    return arm, entry, end, observed


def _check_distinct_event_times(event_times: np.ndarray):
    values, counts = np.unique(event_times, return_counts=True)
    tied = values[counts > 1]
    if tied.size:
        raise DataError(
            f"tied observed event times at calendar time {tied[0]!r}; "
            "the statistic requires strictly distinct event times"
        )


def _event_table(data: TrialData, cutoff: float):
    """Sorted event times plus per-event score and variance terms.

    The score term is (X_j n_j - a_j) / n_j = X_j - p_j and the variance
    term a_j (n_j - a_j) / n_j^2 = p_j (1 - p_j), written over the
    integer risk-set counts n_j (total) and a_j (experimental). Integer
    arithmetic up front makes swapping the arm labels negate every score
    term exactly and leave every variance term bit-identical, so the
    statistic is exactly antisymmetric under relabeling.
    """
    arm, entry, end, observed = _columns(data)
    _check_distinct_event_times(end[observed])
    counted = observed & (end <= cutoff)
    if not counted.any():
        raise UndefinedStatisticError(
            f"no observed events at or before cutoff {cutoff!r}"
        )
    times = end[counted]
    order = np.argsort(times)
    times = times[order]
    event_arm = arm[counted][order].astype(np.float64)
    # at risk at time c: entered strictly before c, not yet evented or censored
    at_risk = (entry[None, :] < times[:, None]) & (end[None, :] >= times[:, None])
    n_at_risk = at_risk.sum(axis=1).astype(np.float64)
    n_at_risk_exp = (at_risk & (arm[None, :] == 1)).sum(axis=1).astype(np.float64)
    score = (event_arm * n_at_risk - n_at_risk_exp) / n_at_risk
    variance = n_at_risk_exp * (n_at_risk - n_at_risk_exp) / (n_at_risk * n_at_risk)
    return times, score, variance


def log_rank(data: TrialData, cutoff: float = math.inf) -> LogRankResult:
    """Log-rank statistic and normalized estimator at a calendar cutoff.

    Events after the cutoff are discarded and the remaining patients are
    treated as administratively censored at the cutoff, which leaves
    them in every earlier risk set.
    """
    _, score, var_terms = _event_table(data, cutoff)
    variance = float(var_terms.sum())
    if variance == 0.0:
        raise DegenerateRiskSetError(
            "every event has a single-arm risk set; the variance term is zero"
        )
    d = score.size
    statistic = float(score.sum()) / math.sqrt(variance)
    r = data.rand_ratio_r
    theta_hat = (1.0 + r) / math.sqrt(r * d) * statistic
    return LogRankResult(statistic_L=statistic, n_events_d=int(d), theta_hat=theta_hat)


def log_rank_increment(
    data: TrialData, cutoff_interim: float, cutoff_final: float
) -> IncrementResult:
    """Stagewise log-rank statistics for a two-stage analysis.

    Events are partitioned by calendar time into those at or before the
    interim cutoff and those after it up to the final cutoff. Each stage
    gets its own normalization, while every risk-set fraction is still
    computed from the full population at risk at that event time.
    """
    if not cutoff_interim < cutoff_final:
        raise InvalidParameterError(
            f"cutoffs must satisfy interim < final, got "
            f"({cutoff_interim!r}, {cutoff_final!r})"
        )
    times, score, var_terms = _event_table(data, cutoff_final)
    first = times <= cutoff_interim
    d1 = int(first.sum())
    d2 = int(times.size - d1)
    if d1 == 0 or d2 == 0:
        raise UndefinedStatisticError(
            f"both stages need at least one event, got d1={d1}, d2={d2}"
        )
    r = data.rand_ratio_r
    results = []
    for mask, d_k in ((first, d1), (~first, d2)):
        variance = float(var_terms[mask].sum())
        if variance == 0.0:
            raise DegenerateRiskSetError(
                "every event in one stage has a single-arm risk set"
            )
        L_k = float(score[mask].sum()) / math.sqrt(variance)
        results.append((L_k, (1.0 + r) / math.sqrt(r * d_k) * L_k))
    return IncrementResult(
        statistic_L1=results[0][0],
        statistic_L2=results[1][0],
        theta_hat_1=results[0][1],
        theta_hat_2=results[1][1],
        d1_events=d1,
        d2_events=d2,
    )


def read_patient_csv(path, rand_ratio_r: float | None = None) -> TrialData:
    """Load patient-level data from a delimited text file.

    The file must carry a header row naming exactly the columns
    ``arm`` (0/1), ``entry_time``, ``time``, and ``event`` (0/1), in any
    order. Malformed rows are rejected with their line number. When
    ``rand_ratio_r`` is omitted it is inferred from the arm counts.
    """
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        names = reader.fieldnames
        if names is None:
            raise DataFormatError(
                f"empty file; expected header columns {', '.join(PATIENT_CSV_COLUMNS)}"
            )
        if sorted(names) != sorted(PATIENT_CSV_COLUMNS):
            raise DataFormatError(
                f"header columns must be exactly {', '.join(PATIENT_CSV_COLUMNS)}, "
                f"got {', '.join(str(n) for n in names)}"
            )
        patients = []
        for row in reader:
            line = reader.line_num
            if None in row and row[None]:
                raise DataFormatError(f"line {line}: more fields than header columns")
            try:
                arm = int(row["arm"])
                entry_time = float(row["entry_time"])
                time = float(row["time"])
                event = int(row["event"])
            except (TypeError, ValueError) as exc:
                raise DataFormatError(f"line {line}: {exc}") from exc
            if event not in (0, 1):
                raise DataFormatError(f"line {line}: event must be 0 or 1, got {event}")
            try:
                patients.append(
                    PatientRecord(
                        arm=arm,
                        entry_time=entry_time,
                        event_time=time,
                        observed=bool(event),
                    )
                )
            except InvalidParameterError as exc:
                raise DataFormatError(f"line {line}: {exc}") from exc
    if not patients:
        raise DataFormatError("no data rows after the header")
    if rand_ratio_r is None:
        n_exp = sum(p.arm for p in patients)
        n_ctl = len(patients) - n_exp
        if n_exp == 0 or n_ctl == 0:
            raise DataFormatError(
                "single-arm data; pass rand_ratio_r explicitly to analyze it"
            )
        rand_ratio_r = n_exp / n_ctl
    return TrialData(patients=tuple(patients), rand_ratio_r=rand_ratio_r)


@dataclass(frozen=True)
class SimScenario:
    """Generative model and bookkeeping for one simulation study.

    ``analysis_trigger`` lists the event counts at which analyses fire,
    ascending: (d,) for a fixed design, (d1, d) for one interim. The
    control arm has exponential event times with rate ``control_hazard``
    unless ``weibull_shape`` differs from 1, in which case both arms are
    Weibull with that common shape and proportional hazards still hold
    with log hazard ratio ``true_log_hr_theta``.
    """

    true_log_hr_theta: float
    control_hazard: float
    n_patients: int
    accrual_duration: float
    analysis_trigger: tuple[int, ...]
    rng_seed: int
    n_replications: int
    rand_ratio_r: float = 1.0
    weibull_shape: float = 1.0

    def __post_init__(self):
        trigger = self.analysis_trigger
        if isinstance(trigger, (int, np.integer)):
            trigger = (int(trigger),)
        else:
            trigger = tuple(int(t) for t in trigger)
        object.__setattr__(self, "analysis_trigger", trigger)
        if not math.isfinite(self.true_log_hr_theta):
            raise InvalidParameterError("true_log_hr_theta must be finite")
        if not self.control_hazard > 0.0:
            raise InvalidParameterError("control_hazard must be positive")
        if int(self.n_patients) != self.n_patients or self.n_patients < 2:
            raise InvalidParameterError("n_patients must be an integer of at least 2")
        if not self.accrual_duration > 0.0:
            raise InvalidParameterError("accrual_duration must be positive")
        if not trigger or any(t < 1 for t in trigger):
            raise InvalidParameterError("analysis_trigger needs event counts of at least 1")
        if any(b <= a for a, b in zip(trigger, trigger[1:])):
            raise InvalidParameterError("analysis_trigger must be strictly increasing")
        if int(self.rng_seed) != self.rng_seed or self.rng_seed < 0:
            raise InvalidParameterError("rng_seed must be a nonnegative integer")
        if int(self.n_replications) != self.n_replications or self.n_replications < 1:
            raise InvalidParameterError("n_replications must be a positive integer")
        if not self.rand_ratio_r > 0.0:
            raise InvalidParameterError("rand_ratio_r must be positive")
        if not self.weibull_shape > 0.0:
            raise InvalidParameterError("weibull_shape must be positive")


@dataclass(frozen=True)
class OCEstimate:
    """Empirical operating characteristics with binomial standard errors.

    Interim stops are classified into their terminal decisions, so the
    three decision proportions count every replication exactly once and
    sum to one; ``p_stop_interim`` tracks early stopping separately and
    is zero for fixed designs. ``counts`` holds the raw tallies behind
    the proportions.
    """

    p_reject_H0: float
    p_reject_H1: float
    p_inconclusive: float
    p_stop_interim: float
    mc_standard_errors: dict[str, float]
    n_replications: int
    counts: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.counts:
            total = (
                self.counts["reject_H0"]
                + self.counts["reject_H1"]
                + self.counts["inconclusive"]
            )
            if total != self.n_replications:
                raise InvalidParameterError(
                    f"decision counts sum to {total}, expected {self.n_replications}"
                )


@dataclass(frozen=True)
class SamplingCheck:
    """Empirical moments of theta_hat against the normal approximation."""

    mean_theta_hat: float
    variance_theta_hat: float
    se_mean: float
    expected_mean: float
    expected_variance: float
    n_events_d: int
    n_replications: int


def _arm_split(n_patients: int, r: float) -> int:
    """Experimental-arm size under r:1 allocation, both arms nonempty."""
    n_exp = int(math.floor(n_patients * r / (1.0 + r) + 0.5))
    return min(max(n_exp, 1), n_patients - 1)


def _rep_generator(seed: int, index: int) -> np.random.Generator:
    key = np.array([seed, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _draw_raw(generator: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
    # draw order is part of the reproducibility contract
    uniforms = generator.random(n)
    exponentials = generator.standard_exponential(n)
    return uniforms, exponentials


def _event_times(raw: np.ndarray, n_exp: int, scenario: SimScenario) -> np.ndarray:
    scaled = raw.copy()
    scaled[..., :n_exp] *= math.exp(-scenario.true_log_hr_theta)
    if scenario.weibull_shape != 1.0:
        scaled **= 1.0 / scenario.weibull_shape
    return scaled / scenario.control_hazard


def replicate_patients(scenario: SimScenario, replication_index: int) -> TrialData:
    """Materialize one replication's patients exactly as the engine draws them.

    The first patients (by position) form the experimental arm. All
    records carry their uncensored event times; an analysis cutoff is
    applied by the log-rank functions, not here.
    """
    if not 0 <= replication_index < scenario.n_replications:
        raise InvalidParameterError(
            f"replication_index must lie in [0, {scenario.n_replications}), "
            f"got {replication_index!r}"
        )
    n = int(scenario.n_patients)
    n_exp = _arm_split(n, scenario.rand_ratio_r)
    uniforms, raw = _draw_raw(_rep_generator(scenario.rng_seed, replication_index), n)
    entries = uniforms * scenario.accrual_duration
    times = _event_times(raw, n_exp, scenario)
    patients = tuple(
        PatientRecord(
            arm=1 if k < n_exp else 0,
            entry_time=float(entries[k]),
            event_time=float(times[k]),
            observed=True,
        )
        for k in range(n)
    )
    return TrialData(patients=patients, rand_ratio_r=scenario.rand_ratio_r)


def simulate_theta_hats(scenario: SimScenario) -> dict[int, np.ndarray]:
    """Per-replication estimator values at every analysis trigger.

    Returns one array of length n_replications per trigger, where entry
    k is theta_hat computed over the first (trigger) calendar events of
    replication k. Work proceeds in batches but each replication owns a
    dedicated Philox stream, so results do not depend on the batch size.
    """
    n = int(scenario.n_patients)
    triggers = scenario.analysis_trigger
    d_max = max(triggers)
    if d_max > n:
        raise InfeasibleScenarioError(
            f"analysis after {d_max} events can never occur with {n} patients"
        )
    n_exp = _arm_split(n, scenario.rand_ratio_r)
    r = scenario.rand_ratio_r
    reps = int(scenario.n_replications)
    out = {t: np.empty(reps, dtype=np.float64) for t in triggers}
    batch = max(1, min(reps, _BATCH_CELL_BUDGET // max(1, n * d_max)))
    event_index = np.arange(d_max, dtype=np.float64)

    for start in range(0, reps, batch):
        m = min(batch, reps - start)
        entries = np.empty((m, n))
        raw = np.empty((m, n))
        for i in range(m):
            entries[i], raw[i] = _draw_raw(
                _rep_generator(scenario.rng_seed, start + i), n
            )
        entries *= scenario.accrual_duration
        calendar = entries + _event_times(raw, n_exp, scenario)

        order = np.argsort(calendar, axis=1)[:, :d_max]
        event_cal = np.take_along_axis(calendar, order, axis=1)
        event_arm = (order < n_exp).astype(np.float64)

        # at risk just before the j-th event: entered strictly before it,
        # minus the j patients already evented (nobody else leaves early)
        entered = (entries[:, None, :] < event_cal[:, :, None]).sum(axis=2)
        entered_exp = (entries[:, None, :n_exp] < event_cal[:, :, None]).sum(axis=2)
        prior_exp_events = np.concatenate(
            [np.zeros((m, 1)), np.cumsum(event_arm, axis=1)[:, :-1]], axis=1
        )
        n_risk = entered - event_index[None, :]
        a_risk = entered_exp - prior_exp_events

        # same integer-first forms as the log_rank analysis path
        numerator = np.cumsum((event_arm * n_risk - a_risk) / n_risk, axis=1)
        variance = np.cumsum(a_risk * (n_risk - a_risk) / (n_risk * n_risk), axis=1)
        for t in triggers:
            var_t = variance[:, t - 1]
            if np.any(var_t <= 0.0):
                raise DegenerateRiskSetError(
                    f"a replication reached {t} events with a zero-variance risk set"
                )
            scale = (1.0 + r) / math.sqrt(r * t)
            out[t][start : start + m] = scale * numerator[:, t - 1] / np.sqrt(var_t)
    return out


def _standard_error(p: float, n: int) -> float:
    return math.sqrt(p * (1.0 - p) / n)


def simulate_trial(scenario: SimScenario, design) -> OCEstimate:
    """Empirical operating characteristics of a design under a scenario.

    ``design`` is a FixedDesign (trigger (d,)) or a GSDesign (trigger
    (d1, d)). Each replication is classified by the design's decision
    rule: for one interim, an estimate beyond an interim boundary stops
    the trial with the corresponding rejection, otherwise the final
    estimate is compared against the final boundaries.
    """
    triggers = scenario.analysis_trigger
    if isinstance(design, FixedDesign):
        d = design.n_events_d
        if int(d) != d:
            raise InvalidParameterError(
                "simulation needs an integer event count; solve with rounding enabled"
            )
        expected = (int(d),)
        spec_r = design.spec.rand_ratio_r
    elif isinstance(design, GSDesign):
        expected = (design.d1_interim, design.d_total)
        spec_r = design.spec.base.rand_ratio_r
    else:
        raise InvalidParameterError(
            f"design must be a FixedDesign or GSDesign, got {type(design).__name__}"
        )
    if triggers != expected:
        raise InvalidParameterError(
            f"analysis_trigger {triggers} does not match the design's {expected}"
        )
    if not math.isclose(scenario.rand_ratio_r, spec_r, rel_tol=1e-12):
        raise InvalidParameterError(
            f"scenario allocation r={scenario.rand_ratio_r!r} differs from "
            f"the design's r={spec_r!r}"
        )

    paths = simulate_theta_hats(scenario)
    reps = int(scenario.n_replications)
    if isinstance(design, FixedDesign):
        final = paths[expected[0]]
        n_reject_h0 = int((final < design.boundary_lower_loghr).sum())
        n_reject_h1 = int((final > design.boundary_upper_loghr).sum())
        n_stop = 0
    else:
        at_interim = paths[design.d1_interim]
        final = paths[design.d_total]
        stop_efficacy = at_interim < design.interim_lower_loghr
        stop_futility = at_interim > design.interim_upper_loghr
        go_on = ~(stop_efficacy | stop_futility)
        n_reject_h0 = int(
            (stop_efficacy | (go_on & (final < design.final_lower_loghr))).sum()
        )
        n_reject_h1 = int(
            (stop_futility | (go_on & (final > design.final_upper_loghr))).sum()
        )
        n_stop = int(stop_efficacy.sum() + stop_futility.sum())
    n_inconclusive = reps - n_reject_h0 - n_reject_h1

    p0, p1 = n_reject_h0 / reps, n_reject_h1 / reps
    p_inc, p_stop = n_inconclusive / reps, n_stop / reps
    return OCEstimate(
        p_reject_H0=p0,
        p_reject_H1=p1,
        p_inconclusive=p_inc,
        p_stop_interim=p_stop,
        mc_standard_errors={
            "p_reject_H0": _standard_error(p0, reps),
            "p_reject_H1": _standard_error(p1, reps),
            "p_inconclusive": _standard_error(p_inc, reps),
            "p_stop_interim": _standard_error(p_stop, reps),
        },
        n_replications=reps,
        counts={
            "reject_H0": n_reject_h0,
            "reject_H1": n_reject_h1,
            "inconclusive": n_inconclusive,
            "stop_interim": n_stop,
        },
    )


def theta_hat_sampling_check(scenario: SimScenario) -> SamplingCheck:
    """Empirical mean and variance of theta_hat at the last trigger.

    The asymptotic model predicts mean true_log_hr_theta and variance
    (1+r)^2 / (r d); the returned summary carries both the estimates and
    those reference values, plus the Monte-Carlo standard error of the
    mean, so callers can judge the approximation at their own tolerance.
    """
    if scenario.n_replications < 2:
        raise InvalidParameterError("variance needs at least 2 replications")
    d = max(scenario.analysis_trigger)
    values = simulate_theta_hats(scenario)[d]
    variance = float(np.var(values, ddof=1))
    r = scenario.rand_ratio_r
    return SamplingCheck(
        mean_theta_hat=float(np.mean(values)),
        variance_theta_hat=variance,
        se_mean=math.sqrt(variance / scenario.n_replications),
        expected_mean=scenario.true_log_hr_theta,
        expected_variance=(1.0 + r) ** 2 / (r * d),
        n_events_d=int(d),
        n_replications=int(scenario.n_replications),
    )
