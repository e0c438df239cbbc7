"""Grading formulas, descriptive statistics and the two-sample t-test.

Reference values for the t-test were computed with an independent
statistics package from the same inputs and frozen here.
"""
from __future__ import annotations

import math

import pytest
from hypothesis import given, strategies as st

from blocktutor.analytics import (
    ActivityOverCap,
    DegenerateVariance,
    GradeRecord,
    GradingPolicy,
    SampleStats,
    TooFewSamples,
    TTestVariant,
    adjusted_final,
    cohort_report,
    describe,
    format_cohort_report,
    grade_histogram,
    regularized_incomplete_beta,
    student_t_cdf,
    student_t_ppf,
    t_test_independent,
    term_grade,
)


class TestAdjustedFinal:
    def test_caps_at_one_hundred(self):
        # 70 + 25 + 10 + 5 = 110, clamped to 100.
        total = adjusted_final(70, {"homework": 25, "forum": 10, "chat": 5})
        assert total == 100

    def test_no_activities_is_identity(self):
        assert adjusted_final(50, {}) == 50

    def test_homework_over_cap(self):
        with pytest.raises(ActivityOverCap):
            adjusted_final(50, {"homework": 26})

    def test_partial_activities(self):
        assert adjusted_final(60, {"forum": 4.5}) == 64.5


class TestTermGrade:
    def test_blend(self):
        grade, passed = term_grade(50, 75)
        assert grade == pytest.approx(70.0)
        assert passed

    def test_fail_just_under_threshold(self):
        grade, passed = term_grade(0, 74)
        assert grade == pytest.approx(59.2)
        assert not passed

    def test_perfect(self):
        grade, passed = term_grade(100, 100)
        assert grade == pytest.approx(100.0)
        assert passed

    def test_pass_boundary_exactly_sixty(self):
        grade, passed = term_grade(60, 60)
        assert grade == pytest.approx(60.0)
        assert passed

    @given(st.floats(0, 100), st.floats(0, 100), st.floats(0, 99),
           st.floats(0, 99))
    def test_monotone(self, midterm, final, d_m, d_f):
        low, _ = term_grade(midterm, final)
        high_m, _ = term_grade(min(100, midterm + d_m), final)
        high_f, _ = term_grade(midterm, min(100, final + d_f))
        assert high_m >= low - 1e-12
        assert high_f >= low - 1e-12

    def test_grade_record_compute(self):
        record = GradeRecord.compute("s1", midterm=50, final_exam=70,
                                     activity_averages={"homework": 5},
                                     group="experimental")
        assert record.adjusted_final == 75
        assert record.term_grade == pytest.approx(70.0)
        assert record.passed


class TestDescribe:
    def test_constant_samples(self):
        stats = describe([10, 10, 10])
        assert stats == SampleStats(n=3, mean=10, stdev=0, median=10)

    def test_hand_computed_four_samples(self):
        # mean 2.5; variance ((1.5)^2+(0.5)^2+(0.5)^2+(1.5)^2)/3 = 5/3;
        # stdev sqrt(5/3) = 1.29099...; median (2+3)/2 = 2.5
        stats = describe([1, 2, 3, 4])
        assert stats.mean == pytest.approx(2.5)
        assert stats.stdev == pytest.approx(1.2910, abs=1e-4)
        assert stats.median == pytest.approx(2.5)

    def test_odd_count_median(self):
        assert describe([5, 1, 9]).median == 5

    def test_single_sample_rejected(self):
        with pytest.raises(TooFewSamples):
            describe([1])


class TestStudentT:
    def test_cdf_at_zero_is_half(self):
        for df in (1, 4, 30, 118):
            assert student_t_cdf(0.0, df) == pytest.approx(0.5)

    def test_cdf_symmetry(self):
        for t in (0.5, 1.0, 2.5):
            assert student_t_cdf(-t, 10) == pytest.approx(1 - student_t_cdf(t, 10),
                                                          abs=1e-12)

    def test_known_quantiles(self):
        # Classic table values.
        assert student_t_ppf(0.975, 4) == pytest.approx(2.776445, abs=1e-5)
        assert student_t_ppf(0.975, 118) == pytest.approx(1.980272, abs=1e-5)

    def test_ppf_inverts_cdf(self):
        for p in (0.6, 0.9, 0.975, 0.999):
            for df in (3, 17, 118.5):
                assert student_t_cdf(student_t_ppf(p, df), df) == pytest.approx(
                    p, abs=1e-9)

    def test_incomplete_beta_bounds(self):
        assert regularized_incomplete_beta(2.0, 0.5, 0.0) == 0.0
        assert regularized_incomplete_beta(2.0, 0.5, 1.0) == 1.0


class TestTTest:
    def stats_pair(self):
        return describe([1.0, 2.0, 3.0]), describe([2.0, 4.0, 6.0])

    def test_three_element_samples_match_direct_computation(self):
        # Frozen reference (computed independently from the raw samples):
        # t = -1.5491933, df = 4, p = 0.1962612, CI = (-5.5843752, 1.5843752)
        a, b = self.stats_pair()
        result = t_test_independent(a, b, TTestVariant.EQUAL_VARIANCES)
        assert result.t == pytest.approx(-1.5491933, abs=1e-6)
        assert result.df == 4
        assert result.p_two_tailed == pytest.approx(0.1962612, abs=1e-6)
        assert result.mean_difference == pytest.approx(-2.0)
        assert result.std_error_difference == pytest.approx(1.2909944, abs=1e-6)
        assert result.ci95[0] == pytest.approx(-5.5843752, abs=1e-5)
        assert result.ci95[1] == pytest.approx(1.5843752, abs=1e-5)

    def test_three_element_samples_welch(self):
        # Frozen reference: df = 50/17 = 2.9411765, p = 0.2208808,
        # CI = (-6.1553995, 2.1553995)
        a, b = self.stats_pair()
        result = t_test_independent(a, b, TTestVariant.WELCH_UNEQUAL)
        assert result.df == pytest.approx(2.9411765, abs=1e-6)
        assert result.p_two_tailed == pytest.approx(0.2208808, abs=1e-6)
        assert result.ci95[0] == pytest.approx(-6.1553995, abs=1e-5)
        assert result.ci95[1] == pytest.approx(2.1553995, abs=1e-5)

    def test_identical_groups(self):
        group = describe([50.0, 60.0, 70.0, 80.0])
        result = t_test_independent(group, group)
        assert result.t == 0.0
        assert result.mean_difference == 0.0
        assert result.ci95[0] == pytest.approx(-result.ci95[1])
        assert result.p_two_tailed == pytest.approx(1.0)

    def test_antisymmetry(self):
        a, b = self.stats_pair()
        forward = t_test_independent(a, b)
        backward = t_test_independent(b, a)
        assert backward.t == pytest.approx(-forward.t)
        assert backward.mean_difference == pytest.approx(-forward.mean_difference)
        assert backward.ci95[0] == pytest.approx(-forward.ci95[1])
        assert backward.ci95[1] == pytest.approx(-forward.ci95[0])

    def test_scale_equivariance(self):
        a, b = self.stats_pair()
        scaled_a = describe([3.0, 6.0, 9.0])
        scaled_b = describe([6.0, 12.0, 18.0])
        plain = t_test_independent(a, b)
        scaled = t_test_independent(scaled_a, scaled_b)
        assert scaled.t == pytest.approx(plain.t)
        assert scaled.df == pytest.approx(plain.df)
        assert scaled.p_two_tailed == pytest.approx(plain.p_two_tailed)
        assert scaled.mean_difference == pytest.approx(3 * plain.mean_difference)
        assert scaled.std_error_difference == pytest.approx(
            3 * plain.std_error_difference)

    def test_p_decreases_with_t_magnitude(self):
        df = 18
        previous = 1.0
        for t in (0.0, 0.5, 1.0, 2.0, 4.0, 8.0):
            from blocktutor.analytics import student_t_two_tailed
            p = student_t_two_tailed(t, df)
            assert p <= previous + 1e-15
            previous = p

    def test_degenerate_variance(self):
        flat = describe([5.0, 5.0, 5.0])
        with pytest.raises(DegenerateVariance):
            t_test_independent(flat, flat)

    def test_needs_two_samples_per_group(self):
        with pytest.raises(TooFewSamples):
            t_test_independent(SampleStats(1, 5.0, 0.0, 5.0),
                               SampleStats(3, 5.0, 1.0, 5.0))


class TestCohortReport:
    def test_shape_and_formatting(self):
        grades_a = [55.0, 62.0, 47.0, 71.0, 58.0, 66.0]
        grades_b = [78.0, 85.0, 91.0, 73.0, 88.0, 69.0]
        report = cohort_report("control", grades_a, "experimental", grades_b)
        assert [g["name"] for g in report["groups"]] == ["control", "experimental"]
        assert {t["variant"] for t in report["tests"]} == {
            "equal_variances", "welch_unequal"}
        text = format_cohort_report(report)
        assert "Sig.(2-tailed)" in text
        assert "Mean Diff." in text
        assert "control" in text and "experimental" in text

    def test_pass_percent(self):
        report = cohort_report("a", [59.0, 60.0, 61.0, 0.0],
                               "b", [100.0, 100.0, 0.0, 0.0])
        assert report["groups"][0]["passed_percent"] == 50.0
        assert report["groups"][1]["passed_percent"] == 50.0

    def test_histogram_bins(self):
        bars = grade_histogram([0, 5, 15, 95, 100, 100])
        assert bars[0] == ("0-10", 2)
        assert bars[1] == ("10-20", 1)
        assert bars[-1] == ("90-100", 3)
        assert sum(count for _, count in bars) == 6
