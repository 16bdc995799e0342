"""Log-rank analysis and the trial simulation engine."""
import math

import numpy as np
import pytest

import tte3.trial
from tte3 import (
    DataError,
    DataFormatError,
    DegenerateRiskSetError,
    DesignSpec,
    GSSpec,
    InfeasibleScenarioError,
    InvalidParameterError,
    OCEstimate,
    PatientRecord,
    SimScenario,
    TrialData,
    UndefinedStatisticError,
    log_rank,
    log_rank_increment,
    read_patient_csv,
    replicate_patients,
    simulate_theta_hats,
    simulate_trial,
    solve_fixed_design,
    solve_gs_design,
    theta_hat_sampling_check,
)

BASE_SPEC = DesignSpec(hr0=1.0, hr1=0.65, alpha=0.15, beta=0.15, pi=0.75, eta=0.75)


def patient(arm, t, entry=0.0, observed=True):
    return PatientRecord(arm=arm, entry_time=entry, event_time=t, observed=observed)


def random_data(rng, n, censor_rate=0.2, r=1.0, staggered=True):
    patients = []
    for k in range(n):
        patients.append(
            PatientRecord(
                arm=k % 2,
                entry_time=float(rng.random() * 3.0) if staggered else 0.0,
                event_time=float(rng.exponential(5.0) + 1e-3),
                observed=bool(rng.random() >= censor_rate),
            )
        )
    return TrialData(patients=tuple(patients), rand_ratio_r=r)


def brute_force_log_rank(data, cutoff=math.inf):
    """Independent O(n^2) reference: explicit risk sets, no vectorization."""
    rows = [
        (p.entry_time + p.event_time, p.arm)
        for p in data.patients
        if p.observed and p.entry_time + p.event_time <= cutoff
    ]
    rows.sort()
    numerator = 0.0
    variance = 0.0
    for time, arm in rows:
        at_risk = [
            q
            for q in data.patients
            if q.entry_time < time and q.entry_time + q.event_time >= time
        ]
        n = len(at_risk)
        a = sum(q.arm for q in at_risk)
        numerator += arm - a / n
        variance += (a / n) * (1.0 - a / n)
    d = len(rows)
    L = numerator / math.sqrt(variance)
    r = data.rand_ratio_r
    return L, d, (1.0 + r) / math.sqrt(r * d) * L


class TestRecordValidation:
    def test_patient_record_domains(self):
        with pytest.raises(InvalidParameterError):
            PatientRecord(arm=2, entry_time=0.0, event_time=1.0, observed=True)
        with pytest.raises(InvalidParameterError):
            PatientRecord(arm=0, entry_time=-1.0, event_time=1.0, observed=True)
        with pytest.raises(InvalidParameterError):
            PatientRecord(arm=0, entry_time=0.0, event_time=0.0, observed=True)
        with pytest.raises(InvalidParameterError):
            PatientRecord(arm=0, entry_time=0.0, event_time=math.inf, observed=True)

    def test_trial_data_needs_patients_and_positive_r(self):
        with pytest.raises(InvalidParameterError):
            TrialData(patients=())
        with pytest.raises(InvalidParameterError):
            TrialData(patients=(patient(0, 1.0),), rand_ratio_r=0.0)

    def test_trial_data_coerces_patient_sequence(self):
        data = TrialData(patients=[patient(0, 1.0), patient(1, 2.0)])
        assert isinstance(data.patients, tuple)
        assert data.rand_ratio_r == 1.0


class TestLogRankByHand:
    def test_two_patients_single_event(self):
        # one event with both patients at risk: score 1 - 1/2, variance 1/4
        data = TrialData(patients=(patient(1, 1.0), patient(0, 2.0)))
        result = log_rank(data, cutoff=1.5)
        assert result.statistic_L == 1.0
        assert result.n_events_d == 1
        assert result.theta_hat == 2.0

    def test_two_patients_both_events(self):
        # second event has a one-patient risk set: contributes nothing
        data = TrialData(patients=(patient(1, 1.0), patient(0, 2.0)))
        result = log_rank(data)
        assert result.statistic_L == 1.0
        assert result.n_events_d == 2
        assert result.theta_hat == pytest.approx(math.sqrt(2.0), rel=1e-15)

    def test_control_arm_event_first_flips_sign(self):
        data = TrialData(patients=(patient(0, 1.0), patient(1, 2.0)))
        result = log_rank(data, cutoff=1.5)
        assert result.statistic_L == -1.0
        assert result.theta_hat == -2.0

    def test_late_entry_shrinks_risk_set(self):
        # entry at 1.5 means the second patient misses the first risk set
        data = TrialData(
            patients=(patient(1, 1.0), patient(0, 2.0, entry=1.5), patient(0, 4.0))
        )
        result = log_rank(data, cutoff=1.2)
        # risk set at t=1: patients 0 and 2 only, p = 1/2
        assert result.statistic_L == 1.0


class TestLogRankAgainstBruteForce:
    @pytest.mark.parametrize("seed", range(12))
    def test_random_datasets(self, seed):
        rng = np.random.default_rng(1000 + seed)
        data = random_data(rng, n=int(rng.integers(5, 60)))
        try:
            expected_L, expected_d, expected_theta = brute_force_log_rank(data)
        except ZeroDivisionError:
            pytest.skip("degenerate draw")
        result = log_rank(data)
        assert result.n_events_d == expected_d
        assert result.statistic_L == pytest.approx(expected_L, abs=1e-12)
        assert result.theta_hat == pytest.approx(expected_theta, abs=1e-12)

    def test_cutoff_respected(self):
        rng = np.random.default_rng(42)
        data = random_data(rng, n=30, censor_rate=0.0)
        ends = sorted(p.entry_time + p.event_time for p in data.patients)
        cutoff = ends[9]
        expected_L, expected_d, _ = brute_force_log_rank(data, cutoff)
        result = log_rank(data, cutoff=cutoff)
        assert result.n_events_d == expected_d == 10
        assert result.statistic_L == pytest.approx(expected_L, abs=1e-12)

    def test_unbalanced_allocation(self):
        rng = np.random.default_rng(77)
        patients = tuple(
            PatientRecord(
                arm=1 if k < 20 else 0,
                entry_time=float(rng.random()),
                event_time=float(rng.exponential(4.0) + 1e-3),
                observed=True,
            )
            for k in range(30)
        )
        data = TrialData(patients=patients, rand_ratio_r=2.0)
        expected_L, expected_d, expected_theta = brute_force_log_rank(data)
        result = log_rank(data)
        assert result.statistic_L == pytest.approx(expected_L, abs=1e-12)
        assert result.theta_hat == pytest.approx(expected_theta, abs=1e-12)


class TestExactProperties:
    def test_arm_swap_antisymmetry_is_exact(self):
        rng = np.random.default_rng(5150)
        for _ in range(50):
            data = random_data(rng, n=int(rng.integers(4, 50)))
            swapped = TrialData(
                patients=tuple(
                    PatientRecord(
                        arm=1 - p.arm,
                        entry_time=p.entry_time,
                        event_time=p.event_time,
                        observed=p.observed,
                    )
                    for p in data.patients
                ),
                rand_ratio_r=data.rand_ratio_r,
            )
            try:
                original = log_rank(data)
            except DegenerateRiskSetError:
                continue
            mirrored = log_rank(swapped)
            assert mirrored.statistic_L == -original.statistic_L
            assert mirrored.theta_hat == -original.theta_hat

    def test_monotone_time_transform_invariance_is_exact(self):
        # ranks alone enter the statistic when entry times are shared, so
        # any strictly increasing clock change leaves it bit-identical
        rng = np.random.default_rng(31)
        base_data = random_data(rng, n=40, staggered=False)
        reference = log_rank(base_data)
        for transform in (math.sqrt, lambda t: t * t, lambda t: 2.5 * t + 3.125, math.exp):
            transformed = TrialData(
                patients=tuple(
                    PatientRecord(
                        arm=p.arm,
                        entry_time=0.0,
                        event_time=transform(p.event_time),
                        observed=p.observed,
                    )
                    for p in base_data.patients
                ),
                rand_ratio_r=1.0,
            )
            result = log_rank(transformed)
            assert result.statistic_L == reference.statistic_L
            assert result.theta_hat == reference.theta_hat


class TestDegenerateInputs:
    def test_tied_event_times_rejected(self):
        data = TrialData(patients=(patient(1, 1.0), patient(0, 1.0), patient(0, 3.0)))
        with pytest.raises(DataError, match="tied"):
            log_rank(data)

    def test_tie_between_event_and_censoring_allowed(self):
        data = TrialData(
            patients=(patient(1, 1.0), patient(0, 1.0, observed=False), patient(0, 3.0))
        )
        assert log_rank(data).n_events_d == 2

    def test_no_events_before_cutoff(self):
        data = TrialData(patients=(patient(1, 5.0), patient(0, 6.0)))
        with pytest.raises(UndefinedStatisticError):
            log_rank(data, cutoff=1.0)

    def test_all_censored(self):
        data = TrialData(
            patients=(patient(1, 5.0, observed=False), patient(0, 6.0, observed=False))
        )
        with pytest.raises(UndefinedStatisticError):
            log_rank(data)

    def test_single_arm_risk_sets(self):
        # the control patient enters after every experimental event ended
        data = TrialData(
            patients=(patient(1, 1.0), patient(1, 2.0), patient(0, 9.0, entry=5.0))
        )
        with pytest.raises(DegenerateRiskSetError):
            log_rank(data, cutoff=4.0)


class TestIncrementStatistics:
    def test_stage_partition_and_brute_force(self):
        rng = np.random.default_rng(2024)
        data = random_data(rng, n=50, censor_rate=0.1)
        ends = sorted(
            p.entry_time + p.event_time for p in data.patients if p.observed
        )
        cut1, cut2 = ends[14], ends[-1]
        inc = log_rank_increment(data, cut1, cut2)
        assert inc.d1_events == 15
        assert inc.d1_events + inc.d2_events == len(ends)

        # stage 1 equals the plain statistic at the interim cutoff
        stage1 = log_rank(data, cutoff=cut1)
        assert inc.statistic_L1 == pytest.approx(stage1.statistic_L, abs=1e-12)
        assert inc.theta_hat_1 == pytest.approx(stage1.theta_hat, abs=1e-12)

        # each stage's estimator is its statistic rescaled
        r = data.rand_ratio_r
        assert inc.theta_hat_2 == pytest.approx(
            (1.0 + r) / math.sqrt(r * inc.d2_events) * inc.statistic_L2, rel=1e-14
        )

    def test_information_weighted_combination_tracks_full_statistic(self):
        # the increment decomposition underlies the two-look design: the
        # weighted combination should approximate the single full-data
        # estimator closely on a realistically sized trial
        scenario = SimScenario(
            true_log_hr_theta=-0.3,
            control_hazard=math.log(2.0) / 6.0,
            n_patients=600,
            accrual_duration=12.0,
            analysis_trigger=(150, 300),
            rng_seed=17,
            n_replications=1,
        )
        data = replicate_patients(scenario, 0)
        ends = sorted(p.entry_time + p.event_time for p in data.patients)
        cut1, cut2 = ends[149], ends[299]
        inc = log_rank_increment(data, cut1, cut2)
        full = log_rank(data, cutoff=cut2)
        d1, d2 = inc.d1_events, inc.d2_events
        combined = (d1 * inc.theta_hat_1 + d2 * inc.theta_hat_2) / (d1 + d2)
        assert combined == pytest.approx(full.theta_hat, abs=0.05)

    def test_cutoff_ordering_enforced(self):
        data = TrialData(patients=(patient(1, 1.0), patient(0, 2.0)))
        with pytest.raises(InvalidParameterError):
            log_rank_increment(data, 2.0, 1.0)

    def test_empty_stage_rejected(self):
        data = TrialData(patients=(patient(1, 1.0), patient(0, 2.0)))
        with pytest.raises(UndefinedStatisticError):
            log_rank_increment(data, 5.0, 6.0)


class TestPatientCsv:
    def write(self, tmp_path, text):
        path = tmp_path / "patients.csv"
        path.write_text(text)
        return path

    def test_round_trip(self, tmp_path):
        path = self.write(
            tmp_path,
            "arm,entry_time,time,event\n1,0.0,2.5,1\n0,0.5,1.75,0\n0,1.0,3.5,1\n",
        )
        data = read_patient_csv(path)
        assert len(data.patients) == 3
        assert data.patients[0] == PatientRecord(1, 0.0, 2.5, True)
        assert data.patients[1].observed is False
        assert data.rand_ratio_r == pytest.approx(0.5)

    def test_column_order_is_free(self, tmp_path):
        path = self.write(tmp_path, "event,time,arm,entry_time\n1,2.5,1,0.0\n1,3.5,0,0.0\n")
        data = read_patient_csv(path)
        assert data.patients[0].arm == 1

    def test_explicit_ratio_overrides_inference(self, tmp_path):
        path = self.write(tmp_path, "arm,entry_time,time,event\n1,0,1,1\n0,0,2,1\n")
        assert read_patient_csv(path, rand_ratio_r=2.0).rand_ratio_r == 2.0

    def test_header_errors(self, tmp_path):
        path = self.write(tmp_path, "arm,entry,time,event\n1,0,1,1\n")
        with pytest.raises(DataFormatError, match="header"):
            read_patient_csv(path)
        with pytest.raises(DataFormatError):
            read_patient_csv(self.write(tmp_path, ""))

    def test_row_errors_carry_line_numbers(self, tmp_path):
        path = self.write(
            tmp_path, "arm,entry_time,time,event\n1,0.0,2.5,1\n0,oops,1.0,1\n"
        )
        with pytest.raises(DataFormatError, match="line 3"):
            read_patient_csv(path)
        path = self.write(
            tmp_path, "arm,entry_time,time,event\n1,0.0,2.5,1,extra\n"
        )
        with pytest.raises(DataFormatError, match="line 2"):
            read_patient_csv(path)
        path = self.write(tmp_path, "arm,entry_time,time,event\n1,0.0,2.5,7\n")
        with pytest.raises(DataFormatError, match="event"):
            read_patient_csv(path)
        # domain validation is surfaced as a data error with the line
        path = self.write(tmp_path, "arm,entry_time,time,event\n1,-3.0,2.5,1\n")
        with pytest.raises(DataFormatError, match="line 2"):
            read_patient_csv(path)

    def test_no_rows(self, tmp_path):
        path = self.write(tmp_path, "arm,entry_time,time,event\n")
        with pytest.raises(DataFormatError, match="no data rows"):
            read_patient_csv(path)

    def test_single_arm_needs_explicit_ratio(self, tmp_path):
        path = self.write(tmp_path, "arm,entry_time,time,event\n1,0,1,1\n1,0,2,1\n")
        with pytest.raises(DataFormatError, match="single-arm"):
            read_patient_csv(path)
        assert read_patient_csv(path, rand_ratio_r=1.0).rand_ratio_r == 1.0


def scenario(**overrides):
    base = dict(
        true_log_hr_theta=0.0,
        control_hazard=math.log(2.0) / 6.0,
        n_patients=120,
        accrual_duration=12.0,
        analysis_trigger=(64,),
        rng_seed=20260818,
        n_replications=50,
    )
    base.update(overrides)
    return SimScenario(**base)


class TestScenarioValidation:
    def test_bare_int_trigger_normalized(self):
        assert scenario(analysis_trigger=64).analysis_trigger == (64,)

    def test_trigger_ordering(self):
        with pytest.raises(InvalidParameterError):
            scenario(analysis_trigger=(66, 33))
        with pytest.raises(InvalidParameterError):
            scenario(analysis_trigger=(33, 33))
        with pytest.raises(InvalidParameterError):
            scenario(analysis_trigger=(0,))
        with pytest.raises(InvalidParameterError):
            scenario(analysis_trigger=())

    @pytest.mark.parametrize(
        "overrides",
        [
            {"true_log_hr_theta": math.nan},
            {"control_hazard": 0.0},
            {"n_patients": 1},
            {"n_patients": 10.5},
            {"accrual_duration": 0.0},
            {"rng_seed": -1},
            {"rng_seed": 1.5},
            {"n_replications": 0},
            {"rand_ratio_r": 0.0},
            {"weibull_shape": 0.0},
        ],
    )
    def test_domain_errors(self, overrides):
        with pytest.raises(InvalidParameterError):
            scenario(**overrides)

    def test_oc_estimate_count_identity(self):
        with pytest.raises(InvalidParameterError, match="counts"):
            OCEstimate(
                p_reject_H0=0.5,
                p_reject_H1=0.25,
                p_inconclusive=0.25,
                p_stop_interim=0.0,
                mc_standard_errors={},
                n_replications=100,
                counts={"reject_H0": 50, "reject_H1": 25, "inconclusive": 20},
            )


class TestReplicatePatients:
    def test_deterministic_and_index_validated(self):
        sc = scenario()
        first = replicate_patients(sc, 3)
        again = replicate_patients(sc, 3)
        assert first == again
        other = replicate_patients(sc, 4)
        assert first != other
        with pytest.raises(InvalidParameterError):
            replicate_patients(sc, -1)
        with pytest.raises(InvalidParameterError):
            replicate_patients(sc, sc.n_replications)

    def test_arm_split_even(self):
        data = replicate_patients(scenario(n_patients=260), 0)
        assert sum(p.arm for p in data.patients) == 130
        assert all(p.arm == 1 for p in data.patients[:130])

    def test_arm_split_two_to_one(self):
        data = replicate_patients(scenario(n_patients=9, rand_ratio_r=2.0), 0)
        assert sum(p.arm for p in data.patients) == 6

    def test_entries_within_accrual_window(self):
        sc = scenario(accrual_duration=7.5)
        data = replicate_patients(sc, 1)
        assert all(0.0 <= p.entry_time <= 7.5 for p in data.patients)
        assert all(p.observed for p in data.patients)

    def test_weibull_shape_transforms_the_same_draws(self):
        exp_data = replicate_patients(scenario(), 0)
        weib_data = replicate_patients(scenario(weibull_shape=2.0), 0)
        hazard = math.log(2.0) / 6.0
        for p_exp, p_weib in zip(exp_data.patients, weib_data.patients):
            assert p_exp.entry_time == p_weib.entry_time
            expected = math.sqrt(p_exp.event_time * hazard) / hazard
            assert p_weib.event_time == pytest.approx(expected, rel=1e-12)

    def test_theta_scales_experimental_arm_only(self):
        null = replicate_patients(scenario(), 0)
        shifted = replicate_patients(scenario(true_log_hr_theta=0.5), 0)
        factor = math.exp(-0.5)
        for p0, p1 in zip(null.patients, shifted.patients):
            if p0.arm == 1:
                assert p1.event_time == pytest.approx(p0.event_time * factor, rel=1e-12)
            else:
                assert p1.event_time == p0.event_time


class TestSimulateThetaHats:
    def test_trigger_exceeding_patients(self):
        with pytest.raises(InfeasibleScenarioError):
            simulate_theta_hats(scenario(n_patients=50, analysis_trigger=(64,)))

    def test_matches_per_replication_reconstruction(self):
        sc = scenario(
            true_log_hr_theta=-0.43,
            n_patients=90,
            analysis_trigger=(33, 66),
            n_replications=6,
        )
        paths = simulate_theta_hats(sc)
        assert set(paths) == {33, 66}
        for k in range(sc.n_replications):
            data = replicate_patients(sc, k)
            ends = sorted(p.entry_time + p.event_time for p in data.patients)
            for t in (33, 66):
                reference = log_rank(data, cutoff=ends[t - 1])
                assert reference.n_events_d == t
                assert paths[t][k] == pytest.approx(reference.theta_hat, abs=1e-10)

    def test_batch_size_does_not_change_results(self, monkeypatch):
        sc = scenario(n_replications=25)
        full = simulate_theta_hats(sc)[64].copy()
        monkeypatch.setattr(tte3.trial, "_BATCH_CELL_BUDGET", 64 * 120 * 3)
        chunked = simulate_theta_hats(sc)[64]
        np.testing.assert_array_equal(full, chunked)

    def test_sampling_moments_match_normal_model(self):
        sc = scenario(
            true_log_hr_theta=-0.43078291609245426,
            n_patients=260,
            analysis_trigger=(64,),
            n_replications=4000,
        )
        check = theta_hat_sampling_check(sc)
        assert check.n_events_d == 64
        assert check.expected_variance == pytest.approx(4.0 / 64.0, rel=1e-12)
        # mean within 4 standard errors, variance within 15 percent
        assert abs(check.mean_theta_hat - check.expected_mean) <= 4.0 * check.se_mean
        assert check.variance_theta_hat == pytest.approx(
            check.expected_variance, rel=0.15
        )

    def test_sampling_check_needs_replications(self):
        with pytest.raises(InvalidParameterError):
            theta_hat_sampling_check(scenario(n_replications=1))


class TestSimulateTrial:
    FIXED = solve_fixed_design(BASE_SPEC)
    GS = solve_gs_design(
        GSSpec(base=BASE_SPEC, info_fraction_t1=0.5, alpha1=0.0, beta1=0.05)
    )

    def test_fixed_design_classification(self):
        sc = scenario(n_patients=130, analysis_trigger=(64,), n_replications=400)
        oc = simulate_trial(sc, self.FIXED)
        paths = simulate_theta_hats(sc)[64]
        expected_h0 = int((paths < self.FIXED.boundary_lower_loghr).sum())
        expected_h1 = int((paths > self.FIXED.boundary_upper_loghr).sum())
        assert oc.counts["reject_H0"] == expected_h0
        assert oc.counts["reject_H1"] == expected_h1
        assert oc.p_stop_interim == 0.0
        assert oc.p_reject_H0 + oc.p_reject_H1 + oc.p_inconclusive == pytest.approx(
            1.0, abs=1e-12
        )

    def test_gs_design_classification_matches_manual_rule(self):
        sc = scenario(
            true_log_hr_theta=BASE_SPEC.theta1,
            n_patients=140,
            analysis_trigger=(33, 66),
            n_replications=500,
        )
        oc = simulate_trial(sc, self.GS)
        paths = simulate_theta_hats(sc)
        interim, final = paths[33], paths[66]
        stop_eff = interim < self.GS.interim_lower_loghr
        stop_fut = interim > self.GS.interim_upper_loghr
        go_on = ~(stop_eff | stop_fut)
        reject_h0 = stop_eff | (go_on & (final < self.GS.final_lower_loghr))
        reject_h1 = stop_fut | (go_on & (final > self.GS.final_upper_loghr))
        assert oc.counts["reject_H0"] == int(reject_h0.sum())
        assert oc.counts["reject_H1"] == int(reject_h1.sum())
        assert oc.counts["stop_interim"] == int((stop_eff | stop_fut).sum())
        # no efficacy stopping is possible with alpha1 = 0
        assert not stop_eff.any()

    def test_trigger_must_match_design(self):
        with pytest.raises(InvalidParameterError, match="trigger"):
            simulate_trial(scenario(analysis_trigger=(63,)), self.FIXED)
        with pytest.raises(InvalidParameterError, match="trigger"):
            simulate_trial(scenario(analysis_trigger=(64,)), self.GS)

    def test_allocation_must_match_design(self):
        sc = scenario(rand_ratio_r=2.0, analysis_trigger=(64,), n_patients=130)
        with pytest.raises(InvalidParameterError, match="allocation"):
            simulate_trial(sc, self.FIXED)

    def test_fractional_design_rejected(self):
        unrounded = solve_fixed_design(BASE_SPEC, round_events=False)
        sc = scenario(analysis_trigger=(64,), n_patients=130)
        with pytest.raises(InvalidParameterError, match="integer"):
            simulate_trial(sc, unrounded)

    def test_design_type_checked(self):
        with pytest.raises(InvalidParameterError, match="FixedDesign or GSDesign"):
            simulate_trial(scenario(), object())

    def test_standard_errors_are_binomial(self):
        sc = scenario(n_patients=130, n_replications=200)
        oc = simulate_trial(sc, self.FIXED)
        for key in ("p_reject_H0", "p_reject_H1", "p_inconclusive", "p_stop_interim"):
            p = getattr(oc, key)
            assert oc.mc_standard_errors[key] == pytest.approx(
                math.sqrt(p * (1.0 - p) / 200), abs=1e-15
            )
