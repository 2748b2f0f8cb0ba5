"""Inferential statistics over trial aggregates.

One-way ANOVA, repeated-measures ANOVA (uncorrected degrees of freedom; no
sphericity correction, which is noted on the result), partial eta squared,
and Pearson correlation.  P-values come from the regularized incomplete
beta function, the exact survival-function transform for the F and t
distributions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc

from gazekit.errors import (
    DegenerateVariance,
    IncompleteDesign,
    InsufficientData,
    ShapeError,
    ZeroVariance,
)

_RM_NOTE = "uncorrected dfs; no sphericity correction applied"


@dataclass(frozen=True)
class AnovaResult:
    f: float
    df1: int
    df2: int
    p: float
    eta_sq_partial: float
    ss_effect: float
    ss_error: float
    note: str | None = None


@dataclass(frozen=True)
class CorrelationResult:
    r: float
    n: int
    p: float


def f_survival(f: float, df1: int, df2: int) -> float:
    """P(F >= f) for an F(df1, df2) variate, via I_x(df2/2, df1/2)."""
    if f <= 0.0:
        return 1.0
    if math.isinf(f):
        return 0.0
    return float(betainc(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * f)))


def t_survival_two_sided(t: float, df: int) -> float:
    """Two-sided P(|T| >= |t|) for a t(df) variate."""
    t2 = t * t
    if math.isinf(t2):
        return 0.0
    return float(betainc(df / 2.0, 0.5, df / (df + t2)))


def partial_eta_squared(f: float, df1: int, df2: int) -> float:
    """Effect size F*df1 / (F*df1 + df2); equals SS_effect/(SS_effect+SS_error)."""
    if f < 0:
        raise ValueError("F statistic must be non-negative")
    if df1 < 1 or df2 < 1:
        raise ValueError("degrees of freedom must be positive")
    if math.isinf(f):
        return 1.0
    return (f * df1) / (f * df1 + df2)


def _result(ss_effect: float, ss_error: float, df1: int, df2: int, ss_total: float,
            note: str | None = None) -> AnovaResult:
    # Snap sums of squares that vanish up to rounding, so constructed
    # zero-effect designs give exact F = 0 / p = 1.
    if ss_total <= 0.0:
        raise DegenerateVariance("input carries no variance at all")
    tol = 1e-12 * ss_total
    effect_zero = ss_effect <= tol
    error_zero = ss_error <= tol
    if effect_zero and error_zero:
        # All variance sits in the subject term; no condition effect exists.
        f, p, eta = 0.0, 1.0, 0.0
        return AnovaResult(
            f=f, df1=df1, df2=df2, p=p, eta_sq_partial=eta,
            ss_effect=ss_effect, ss_error=ss_error, note=note,
        )
    if effect_zero:
        f, p, eta = 0.0, 1.0, 0.0
    elif error_zero:
        f, p, eta = math.inf, 0.0, 1.0
    else:
        f = (ss_effect / df1) / (ss_error / df2)
        p = f_survival(f, df1, df2)
        eta = ss_effect / (ss_effect + ss_error)
    return AnovaResult(
        f=f, df1=df1, df2=df2, p=p, eta_sq_partial=eta,
        ss_effect=ss_effect, ss_error=ss_error, note=note,
    )


def one_way_anova(groups: list[list[float]]) -> AnovaResult:
    """Between/within decomposition over independent groups.

    Requires >= 2 groups with >= 2 observations each (InsufficientData
    otherwise); all-constant input raises DegenerateVariance.
    """
    if len(groups) < 2:
        raise InsufficientData(f"need >= 2 groups, got {len(groups)}")
    arrays = [np.asarray(g, dtype=float) for g in groups]
    for i, g in enumerate(arrays):
        if g.size < 2:
            raise InsufficientData(f"group {i} has {g.size} observations, need >= 2")
    values = np.concatenate(arrays)
    grand = values.mean()
    ss_between = float(sum(g.size * (g.mean() - grand) ** 2 for g in arrays))
    ss_within = float(sum(((g - g.mean()) ** 2).sum() for g in arrays))
    df1 = len(arrays) - 1
    df2 = values.size - len(arrays)
    return _result(ss_between, ss_within, df1, df2, ss_between + ss_within)


def rm_anova(matrix) -> AnovaResult:
    """Repeated-measures ANOVA on a subjects x conditions matrix.

    SS_error = SS_total - SS_condition - SS_subject, df1 = c-1,
    df2 = (c-1)(s-1).  Degrees of freedom are uncorrected by design; the
    result's note records the missing sphericity correction.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got shape {m.shape}")
    if np.isnan(m).any():
        raise IncompleteDesign("matrix contains missing cells")
    s, c = m.shape
    if s < 2 or c < 2:
        raise InsufficientData(f"need >= 2 subjects and >= 2 conditions, got {s}x{c}")

    grand = m.mean()
    ss_total = float(((m - grand) ** 2).sum())
    ss_subject = float(c * ((m.mean(axis=1) - grand) ** 2).sum())
    ss_condition = float(s * ((m.mean(axis=0) - grand) ** 2).sum())
    ss_error = max(ss_total - ss_condition - ss_subject, 0.0)
    df1 = c - 1
    df2 = (c - 1) * (s - 1)
    return _result(ss_condition, ss_error, df1, df2, ss_total, note=_RM_NOTE)


def pearson_r(xs, ys) -> CorrelationResult:
    """Product-moment correlation with a two-sided t-transform p-value."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ShapeError(f"series shapes differ: {x.shape} vs {y.shape}")
    n = x.size
    if n < 3:
        raise InsufficientData(f"need >= 3 pairs, got {n}")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float((dx * dx).sum())
    syy = float((dy * dy).sum())
    if sxx == 0.0 or syy == 0.0:
        raise ZeroVariance("constant series have no defined correlation")
    r = float((dx * dy).sum() / math.sqrt(sxx * syy))
    r = max(-1.0, min(1.0, r))
    if abs(r) == 1.0:
        p = 0.0
    else:
        t2 = r * r * (n - 2) / (1.0 - r * r)
        p = float(betainc((n - 2) / 2.0, 0.5, (n - 2) / ((n - 2) + t2)))
    return CorrelationResult(r=r, n=n, p=p)
