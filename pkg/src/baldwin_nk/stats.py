"""Sample summaries and two-sample t-tests.

The Student-t tail probability is computed through the regularized
incomplete beta function, evaluated by Lentz's continued fraction.
"""

from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from dataclasses import dataclass

from .strategies import ConfigurationError

ALPHAS = (0.05, 0.10)
REPORT_COLUMNS = (
    "strategy_id", "k", "count", "mean", "min", "max", "t", "df",
    "p_welch", "p_pooled", "verdict_05", "verdict_10",
)

_CF_EPS = 1e-15
_CF_TINY = 1e-300
_CF_MAX_ITER = 10_000


@dataclass(frozen=True)
class SampleSummary:
    count: int
    mean: float
    variance: float
    min: float
    max: float


@dataclass(frozen=True)
class TTestResult:
    t: float
    df: float
    p: float
    mean_difference: float
    degenerate: bool = False


def summarize(samples) -> SampleSummary:
    """Count, mean, unbiased variance, min and max of ``samples``."""
    xs = [float(x) for x in samples]
    if not xs:
        raise ValueError("cannot summarise an empty sample")
    n = len(xs)
    mean = math.fsum(xs) / n
    lo, hi = min(xs), max(xs)
    # guard the rounding of fsum/n against the observed range
    mean = min(max(mean, lo), hi)
    var = math.fsum((x - mean) ** 2 for x in xs) / (n - 1) if n > 1 else 0.0
    return SampleSummary(n, mean, var, lo, hi)


def _betacf(a: float, b: float, x: float) -> float:
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function ``I_x(a, b)``."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    if x == 0.0 or x == 1.0:
        return x
    log_front = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_two_tailed_p(t: float, df: float) -> float:
    if math.isinf(t):
        return 0.0
    p = betainc(df / 2.0, 0.5, df / (df + t * t))
    return min(max(p, 0.0), 1.0)


def _two_sample(a, b):
    sa, sb = summarize(a), summarize(b)
    if sa.count < 2 or sb.count < 2:
        raise ValueError("each sample needs at least two values")
    return sa, sb


def _degenerate(diff: float, df: float) -> TTestResult:
    if diff == 0.0:
        return TTestResult(0.0, df, 1.0, 0.0, True)
    return TTestResult(math.copysign(math.inf, diff), df, 0.0, diff, True)


def welch_t_test(a, b) -> TTestResult:
    """Two-tailed Welch t-test of ``mean(a) - mean(b)``.

    Degrees of freedom follow Welch-Satterthwaite.  When both samples have
    zero variance the result is flagged ``degenerate``: ``t=0, p=1`` for equal
    means, otherwise ``t=+-inf, p=0``.
    """
    sa, sb = _two_sample(a, b)
    diff = sa.mean - sb.mean
    va, vb = sa.variance / sa.count, sb.variance / sb.count
    se2 = va + vb
    if se2 == 0.0:
        return _degenerate(diff, float(sa.count + sb.count - 2))
    t = diff / math.sqrt(se2)
    # normalise by the larger term so squaring tiny variances cannot underflow
    top = max(va, vb)
    ra, rb = va / top, vb / top
    df = (ra + rb) ** 2 / (ra * ra / (sa.count - 1) + rb * rb / (sb.count - 1))
    return TTestResult(t, df, t_two_tailed_p(t, df), diff)


def pooled_t_test(a, b) -> TTestResult:
    """Two-tailed Student t-test assuming equal variances."""
    sa, sb = _two_sample(a, b)
    diff = sa.mean - sb.mean
    df = sa.count + sb.count - 2
    sp2 = ((sa.count - 1) * sa.variance + (sb.count - 1) * sb.variance) / df
    se2 = sp2 * (1.0 / sa.count + 1.0 / sb.count)
    if se2 == 0.0:
        return _degenerate(diff, float(df))
    t = diff / math.sqrt(se2)
    return TTestResult(t, float(df), t_two_tailed_p(t, df), diff)


def verdict(mean_difference: float, p: float, alpha: float) -> str:
    if p < alpha and mean_difference > 0:
        return "better"
    if p < alpha and mean_difference < 0:
        return "worse"
    return "indistinguishable"


@dataclass(frozen=True)
class ReportRow:
    strategy_id: str
    k: int
    summary: SampleSummary
    welch: TTestResult
    p_pooled: float
    verdicts: dict[float, str]


def group_fitness(records) -> dict[tuple[str, int], list[float]]:
    """Final fitnesses keyed by ``(strategy_id, k)``, in first-seen order."""
    groups: dict[tuple[str, int], list[float]] = defaultdict(list)
    for r in records:
        groups[(r.strategy_id, r.k)].append(r.final_fitness)
    return dict(groups)


def significance_report(records, baseline: str, alphas=ALPHAS) -> list[ReportRow]:
    """Compare every ``(strategy, k)`` cell with the baseline at the same k.

    The baseline's own cells are included (compared with themselves).
    """
    groups = group_fitness(records)
    if not any(sid == baseline for sid, _ in groups):
        raise ConfigurationError(f"baseline strategy {baseline!r} not found in records")
    rows = []
    for (sid, k), values in groups.items():
        if (baseline, k) not in groups:
            raise ConfigurationError(f"baseline {baseline!r} has no records at k={k}")
        base = groups[(baseline, k)]
        w = welch_t_test(values, base)
        pooled = pooled_t_test(values, base)
        rows.append(ReportRow(sid, k, summarize(values), w, pooled.p,
                              {alpha: verdict(w.mean_difference, w.p, alpha) for alpha in alphas}))
    return rows


def report_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for r in rows:
        s = r.summary
        writer.writerow([
            r.strategy_id, r.k, s.count, repr(s.mean), repr(s.min), repr(s.max),
            repr(r.welch.t), repr(r.welch.df), repr(r.welch.p), repr(r.p_pooled),
            r.verdicts.get(0.05, "NA"), r.verdicts.get(0.10, "NA"),
        ])
    return buf.getvalue()
