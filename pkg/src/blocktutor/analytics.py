"""Term grading and cohort statistics.

Grades blend one midterm and one final examination (20% / 80%), with
teacher-awarded activity points added to the final exam beforehand and
the pass mark fixed at 60.  Cohort comparisons use the independent
two-sample t-test in both the pooled-variance and Welch forms, computed
from summary statistics so published group summaries can be fed straight
in.  The Student-t distribution is evaluated through the regularized
incomplete beta function; no statistics package is involved.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum


class ActivityOverCap(Exception):
    def __init__(self, activity: str, value: float, cap: float):
        super().__init__(f"{activity} average {value} exceeds its cap of {cap}")
        self.activity = activity
        self.value = value
        self.cap = cap


class TooFewSamples(Exception):
    pass


class DegenerateVariance(Exception):
    pass


@dataclass(frozen=True)
class GradingPolicy:
    midterm_weight: float = 0.20
    final_weight: float = 0.80
    pass_threshold: float = 60.0
    activity_caps: dict = field(default_factory=lambda: {
        "homework": 25.0, "forum": 10.0, "chat": 5.0})
    adjusted_final_cap: float = 100.0

    def __post_init__(self) -> None:
        if abs(self.midterm_weight + self.final_weight - 1.0) > 1e-9:
            raise ValueError("midterm and final weights must sum to 1")
        if any(cap < 0 for cap in self.activity_caps.values()):
            raise ValueError("activity caps must be non-negative")


def adjusted_final(final_exam: float, activity_averages, policy: GradingPolicy | None = None) -> float:
    """Final exam points plus capped activity averages, clamped to the cap.

    ``activity_averages`` maps activity kinds (homework, forum, chat) to
    their term averages; each must stay within its configured cap.
    """
    policy = policy or GradingPolicy()
    total = float(final_exam)
    for activity, cap in policy.activity_caps.items():
        value = float(activity_averages.get(activity, 0.0))
        if value < 0 or value > cap:
            raise ActivityOverCap(activity, value, cap)
        total += value
    return min(policy.adjusted_final_cap, total)


def term_grade(midterm: float, final_points: float, policy: GradingPolicy | None = None):
    """(grade, passed): 20% midterm + 80% adjusted final, pass at 60."""
    policy = policy or GradingPolicy()
    grade = policy.midterm_weight * midterm + policy.final_weight * final_points
    return grade, grade >= policy.pass_threshold


@dataclass(frozen=True)
class GradeRecord:
    student_id: str
    midterm: float
    final_exam: float
    activity_averages: dict
    adjusted_final: float
    term_grade: float
    passed: bool
    group: str = ""

    @classmethod
    def compute(cls, student_id: str, midterm: float, final_exam: float,
                activity_averages=None, policy: GradingPolicy | None = None,
                group: str = "") -> "GradeRecord":
        policy = policy or GradingPolicy()
        activity_averages = dict(activity_averages or {})
        for value in (midterm, final_exam):
            if not 0 <= value <= 100:
                raise ValueError("exam points must be within [0, 100]")
        adjusted = adjusted_final(final_exam, activity_averages, policy)
        grade, passed = term_grade(midterm, adjusted, policy)
        return cls(student_id=student_id, midterm=midterm, final_exam=final_exam,
                   activity_averages=activity_averages, adjusted_final=adjusted,
                   term_grade=grade, passed=passed, group=group)


# ---------------------------------------------------------------------------
# Descriptive statistics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SampleStats:
    n: int
    mean: float
    stdev: float  # sample standard deviation (n-1 denominator)
    median: float


def describe(samples) -> SampleStats:
    values = [float(v) for v in samples]
    n = len(values)
    if n < 2:
        raise TooFewSamples("descriptive statistics need at least two samples")
    mean = sum(values) / n
    variance = sum((v - mean) ** 2 for v in values) / (n - 1)
    ordered = sorted(values)
    mid = n // 2
    median = ordered[mid] if n % 2 else (ordered[mid - 1] + ordered[mid]) / 2
    return SampleStats(n=n, mean=mean, stdev=math.sqrt(variance), median=median)


# ---------------------------------------------------------------------------
# Student-t distribution via the regularized incomplete beta function
# ---------------------------------------------------------------------------

_BETA_EPS = 1e-15
_BETA_MAX_ITER = 400


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (modified Lentz)."""
    tiny = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, _BETA_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETA_EPS:
            return h
    return h


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) with the symmetry split for fast continued-fraction convergence."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_cdf(t: float, df: float) -> float:
    """P(T <= t) for Student's t with ``df`` degrees of freedom."""
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    if t == 0.0:
        return 0.5
    x = df / (df + t * t)
    tail = 0.5 * regularized_incomplete_beta(df / 2.0, 0.5, x)
    return tail if t < 0 else 1.0 - tail


def student_t_two_tailed(t: float, df: float) -> float:
    """P(|T| >= |t|), the two-tailed p-value."""
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    x = df / (df + t * t)
    return regularized_incomplete_beta(df / 2.0, 0.5, x)


def student_t_ppf(p: float, df: float) -> float:
    """Quantile of Student's t by bisection on the CDF (relative tol 1e-10)."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must be strictly between 0 and 1")
    if p == 0.5:
        return 0.0
    if p < 0.5:
        return -student_t_ppf(1.0 - p, df)
    lo, hi = 0.0, 1.0
    while student_t_cdf(hi, df) < p:
        hi *= 2.0
        if hi > 1e12:
            break
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if student_t_cdf(mid, df) < p:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-10 * max(1.0, abs(hi)):
            break
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Independent two-sample t-test from summary statistics
# ---------------------------------------------------------------------------

class TTestVariant(str, Enum):
    EQUAL_VARIANCES = "equal_variances"
    WELCH_UNEQUAL = "welch_unequal"


@dataclass(frozen=True)
class TTestResult:
    t: float
    df: float
    p_two_tailed: float
    mean_difference: float
    std_error_difference: float
    ci95: tuple
    variant: TTestVariant

    def __post_init__(self) -> None:
        if self.ci95[0] > self.ci95[1]:
            raise ValueError("confidence interval bounds are reversed")
        if not 0.0 <= self.p_two_tailed <= 1.0:
            raise ValueError("p-value out of range")


def t_test_independent(a: SampleStats, b: SampleStats,
                       variant: TTestVariant = TTestVariant.EQUAL_VARIANCES) -> TTestResult:
    """Two-sample t-test of a.mean - b.mean from group summaries.

    Pooled form: sp^2 = ((na-1)sa^2 + (nb-1)sb^2) / (na+nb-2),
    SE = sp*sqrt(1/na + 1/nb), df = na+nb-2.  Welch form:
    SE = sqrt(sa^2/na + sb^2/nb) with Welch-Satterthwaite df.  The 95%
    interval is mean difference +/- t(0.975, df) * SE.
    """
    if a.n < 2 or b.n < 2:
        raise TooFewSamples("both groups need at least two samples")
    var_a = a.stdev ** 2
    var_b = b.stdev ** 2
    mean_diff = a.mean - b.mean

    if variant is TTestVariant.EQUAL_VARIANCES:
        df = a.n + b.n - 2
        pooled = ((a.n - 1) * var_a + (b.n - 1) * var_b) / df
        se = math.sqrt(pooled) * math.sqrt(1.0 / a.n + 1.0 / b.n)
    else:
        ratio_a = var_a / a.n
        ratio_b = var_b / b.n
        se = math.sqrt(ratio_a + ratio_b)
        if se == 0.0:
            raise DegenerateVariance("both groups have zero variance")
        df = (ratio_a + ratio_b) ** 2 / (
            ratio_a ** 2 / (a.n - 1) + ratio_b ** 2 / (b.n - 1))
    if se == 0.0:
        raise DegenerateVariance("both groups have zero variance")

    t = mean_diff / se
    p = student_t_two_tailed(t, df)
    t_crit = student_t_ppf(0.975, df)
    ci = (mean_diff - t_crit * se, mean_diff + t_crit * se)
    return TTestResult(t=t, df=df, p_two_tailed=p, mean_difference=mean_diff,
                       std_error_difference=se, ci95=ci, variant=variant)


# ---------------------------------------------------------------------------
# Cohort report
# ---------------------------------------------------------------------------

def grade_histogram(samples, bin_width: int = 10) -> list:
    """(range label, count) bars over 0-100, upper edge inclusive on the last bin."""
    bins = []
    start = 0
    while start < 100:
        end = min(start + bin_width, 100)
        bins.append([f"{start}-{end}", 0])
        start = end
    for value in samples:
        index = min(int(value // bin_width), len(bins) - 1)
        bins[index][1] += 1
    return [(label, count) for label, count in bins]


def cohort_report(group_a_name: str, grades_a, group_b_name: str, grades_b) -> dict:
    """Summary block, both t-test variants and histograms for two grade lists."""
    stats_a = describe(grades_a)
    stats_b = describe(grades_b)
    pooled = t_test_independent(stats_a, stats_b, TTestVariant.EQUAL_VARIANCES)
    welch = t_test_independent(stats_a, stats_b, TTestVariant.WELCH_UNEQUAL)

    def group_obj(name, grades, stats):
        passed = sum(1 for g in grades if g >= 60)
        return {
            "name": name, "n": stats.n,
            "passed_percent": round(100.0 * passed / stats.n, 1),
            "mean": stats.mean, "stdev": stats.stdev, "median": stats.median,
        }

    def test_obj(result: TTestResult):
        return {
            "variant": result.variant.value,
            "t": result.t, "df": result.df,
            "p_two_tailed": result.p_two_tailed,
            "mean_difference": result.mean_difference,
            "std_error_difference": result.std_error_difference,
            "ci95_lower": result.ci95[0], "ci95_upper": result.ci95[1],
        }

    return {
        "groups": [group_obj(group_a_name, grades_a, stats_a),
                   group_obj(group_b_name, grades_b, stats_b)],
        "tests": [test_obj(pooled), test_obj(welch)],
        "histograms": {
            group_a_name: grade_histogram(grades_a),
            group_b_name: grade_histogram(grades_b),
        },
    }


def format_cohort_report(report: dict) -> str:
    """Tabular text mirror of the cohort report for files and the CLI."""
    lines: list[str] = []
    lines.append("Group comparison")
    header = f"{'Group':<16} {'N':>4} {'Passed':>8} {'Mean':>9} {'Stdev':>9} {'Median':>9}"
    lines.append(header)
    lines.append("-" * len(header))
    for group in report["groups"]:
        lines.append(
            f"{group['name']:<16} {group['n']:>4} {group['passed_percent']:>7.1f}% "
            f"{group['mean']:>9.2f} {group['stdev']:>9.2f} {group['median']:>9.2f}")
    lines.append("")
    lines.append("Independent samples test")
    header = (f"{'Variant':<22} {'t':>9} {'df':>9} {'Sig.(2-tailed)':>15} "
              f"{'Mean Diff.':>11} {'Std.Err.Diff.':>14} {'CI95 Lower':>11} {'CI95 Upper':>11}")
    lines.append(header)
    lines.append("-" * len(header))
    for test in report["tests"]:
        p = test["p_two_tailed"]
        p_text = f"{p:.3f}" if p >= 0.0005 else "<.001"
        lines.append(
            f"{test['variant']:<22} {test['t']:>9.3f} {test['df']:>9.3f} {p_text:>15} "
            f"{test['mean_difference']:>11.5f} {test['std_error_difference']:>14.5f} "
            f"{test['ci95_lower']:>11.5f} {test['ci95_upper']:>11.5f}")
    lines.append("")
    lines.append("Grade ranges")
    for name, bars in report["histograms"].items():
        bar_text = "  ".join(f"{label}:{count}" for label, count in bars)
        lines.append(f"{name:<16} {bar_text}")
    return "\n".join(lines) + "\n"
