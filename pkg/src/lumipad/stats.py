"""From-scratch inferential statistics.

The numerical kernel is the regularized incomplete beta function I_x(a, b),
evaluated by the modified Lentz continued fraction with a log-gamma
normalized front factor and the standard symmetry switch at
x > (a + 1) / (a + b + 2) so both tails converge fast.  Student-t and F
tail probabilities reduce to I_x:

    two-tailed t:  p = I_{df/(df+t^2)}(df/2, 1/2)
    F upper tail:  p = I_{df2/(df2+df1*F)}(df2/2, df1/2)

On top of those sit the paired t-test and a balanced two-way
repeated-measures ANOVA (each effect tested against its own
effect-by-subject interaction).  No sphericity correction is applied; a
degenerate 0/0 F ratio is reported as F=0, p=1 with a flag rather than an
exception.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

_CF_MAX_ITER = 500
_CF_EPS = 1e-16
_CF_TINY = 1e-300


def _beta_cf(a: float, b: float, x: float) -> float:
    """Continued fraction for I_x(a, b), modified Lentz iteration."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        # even step
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        # odd step
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
    raise ArithmeticError(f"incomplete beta CF failed to converge for a={a}, b={b}, x={x}")


def reg_inc_beta(x: float, a: float, b: float) -> float:
    """Regularized incomplete beta I_x(a, b) for x in [0, 1], a, b > 0."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be > 0")
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must be in [0, 1]")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        a * math.log(x)
        + b * math.log1p(-x)
        + math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def _check_df(df, name: str) -> int:
    if df != int(df) or df < 1:
        raise ValueError(f"{name} must be a positive integer, got {df!r}")
    return int(df)


def t_two_tailed_p(t: float, df: int) -> float:
    """Two-tailed Student-t tail probability; symmetric in the sign of t."""
    df = _check_df(df, "df")
    if not math.isfinite(t):
        raise ValueError("t must be finite")
    return reg_inc_beta(df / (df + t * t), df / 2.0, 0.5)


def f_sf(f: float, df1: int, df2: int) -> float:
    """Upper-tail probability of an F(df1, df2) ratio."""
    df1 = _check_df(df1, "df1")
    df2 = _check_df(df2, "df2")
    if not math.isfinite(f) or f < 0:
        raise ValueError("F must be finite and >= 0")
    return reg_inc_beta(df2 / (df2 + df1 * f), df2 / 2.0, df1 / 2.0)


@dataclass(frozen=True)
class TTestResult:
    t: float
    df: int
    p: float


def paired_t_test(a: Sequence[float], b: Sequence[float]) -> TTestResult:
    """Paired two-tailed t-test of equal means.

    Raises for mismatched lengths, n < 2, or zero-variance differences (in
    the degenerate case the sign of the mean difference is all the data can
    support, so no statistic is fabricated).
    """
    if len(a) != len(b):
        raise ValueError(f"series lengths differ: {len(a)} vs {len(b)}")
    n = len(a)
    if n < 2:
        raise ValueError("need at least 2 pairs")
    d = [float(x) - float(y) for x, y in zip(a, b)]
    mean = sum(d) / n
    var = sum((x - mean) ** 2 for x in d) / (n - 1)
    if var == 0.0:
        raise ZeroDivisionError(
            f"zero-variance differences (sign of mean diff: {_sign_str(mean)})"
        )
    t = mean / math.sqrt(var / n)
    return TTestResult(t=t, df=n - 1, p=t_two_tailed_p(t, n - 1))


def _sign_str(x: float) -> str:
    return "+" if x > 0 else ("-" if x < 0 else "0")


@dataclass(frozen=True)
class AnovaEffect:
    name: str
    ss: float
    df: int
    ms: float
    f: float
    p: float
    error_ss: float
    error_df: int
    degenerate: bool = False


@dataclass(frozen=True)
class AnovaTable:
    effects: tuple
    subject_ss: float
    subject_df: int
    alpha: float = 0.05

    def effect(self, name: str) -> AnovaEffect:
        for e in self.effects:
            if e.name == name:
                return e
        raise KeyError(name)

    def significant(self, name: str) -> bool:
        return self.effect(name).p < self.alpha


class RMDataset:
    """Balanced within-subject observations keyed by (subject, A, B).

    Every subject must contribute the same number of replicates to every
    (A, B) cell; replicates are averaged into one cell value before the
    decomposition, which is the classical treatment for repeated measures.
    """

    def __init__(self):
        self._cells: dict = {}

    def add(self, subject, a_level, b_level, value: float) -> None:
        self._cells.setdefault((subject, a_level, b_level), []).append(float(value))

    def __len__(self) -> int:
        return sum(len(v) for v in self._cells.values())

    def to_array(self):
        """(Y[s, i, j] cell means, subjects, a_levels, b_levels); validates balance."""
        if not self._cells:
            raise ValueError("empty dataset")
        subjects = sorted({k[0] for k in self._cells}, key=repr)
        a_levels = sorted({k[1] for k in self._cells}, key=repr)
        b_levels = sorted({k[2] for k in self._cells}, key=repr)
        counts = {len(v) for v in self._cells.values()}
        if len(self._cells) != len(subjects) * len(a_levels) * len(b_levels) or len(counts) != 1:
            raise ValueError("dataset is unbalanced: every subject needs every cell, "
                             "with one common replicate count")
        y = np.empty((len(subjects), len(a_levels), len(b_levels)))
        for si, s in enumerate(subjects):
            for ai, a in enumerate(a_levels):
                for bi, b in enumerate(b_levels):
                    y[si, ai, bi] = float(np.mean(self._cells[(s, a, b)]))
        return y, subjects, a_levels, b_levels


def _f_and_p(ss: float, df: int, err_ss: float, err_df: int) -> tuple[float, float, bool]:
    ms = ss / df
    err_ms = err_ss / err_df
    if err_ms <= 0.0:
        if ms <= 0.0:
            return 0.0, 1.0, True  # 0/0: no variance anywhere
        return math.inf, 0.0, True
    f = ms / err_ms
    return f, f_sf(f, df, err_df), False


def rm_anova_two_way(data: RMDataset, alpha: float = 0.05) -> AnovaTable:
    """Two-way repeated-measures ANOVA on a balanced dataset.

    Decomposes total variation into A, B, AxB, subject, and the three
    effect-by-subject interactions; each effect's F uses its own
    interaction as the error term.
    """
    y, subjects, a_levels, b_levels = data.to_array()
    s, p, q = y.shape
    if s < 2:
        raise ValueError("need at least 2 subjects")
    if p < 2 or q < 2:
        raise ValueError("need at least 2 levels per factor")

    grand = y.mean()
    a_means = y.mean(axis=(0, 2))
    b_means = y.mean(axis=(0, 1))
    s_means = y.mean(axis=(1, 2))
    ab_means = y.mean(axis=0)
    sa_means = y.mean(axis=2)
    sb_means = y.mean(axis=1)

    ss_a = s * q * float(((a_means - grand) ** 2).sum())
    ss_b = s * p * float(((b_means - grand) ** 2).sum())
    ss_ab = s * float(((ab_means - a_means[:, None] - b_means[None, :] + grand) ** 2).sum())
    ss_subj = p * q * float(((s_means - grand) ** 2).sum())
    ss_as = q * float(((sa_means - a_means[None, :] - s_means[:, None] + grand) ** 2).sum())
    ss_bs = p * float(((sb_means - b_means[None, :] - s_means[:, None] + grand) ** 2).sum())
    ss_total = float(((y - grand) ** 2).sum())
    ss_abs = max(0.0, ss_total - (ss_a + ss_b + ss_ab + ss_subj + ss_as + ss_bs))

    df_a, df_b = p - 1, q - 1
    df_ab = df_a * df_b
    df_as, df_bs = df_a * (s - 1), df_b * (s - 1)
    df_abs = df_a * df_b * (s - 1)

    effects = []
    for name, ss, df, err_ss, err_df in (
        ("A", ss_a, df_a, ss_as, df_as),
        ("B", ss_b, df_b, ss_bs, df_bs),
        ("AxB", ss_ab, df_ab, ss_abs, df_abs),
    ):
        f, pval, degen = _f_and_p(ss, df, err_ss, err_df)
        effects.append(
            AnovaEffect(
                name=name, ss=ss, df=df, ms=ss / df, f=f, p=pval,
                error_ss=err_ss, error_df=err_df, degenerate=degen,
            )
        )
    return AnovaTable(effects=tuple(effects), subject_ss=ss_subj, subject_df=s - 1, alpha=alpha)


def rm_anova_one_way(
    values: dict,
    alpha: float = 0.05,
) -> AnovaTable:
    """One-way repeated-measures ANOVA: ``values[level] = per-subject series``.

    Companion to the two-way version for batches where only one grouping
    factor varies; the effect is tested against the level-by-subject
    interaction.
    """
    levels = sorted(values.keys(), key=repr)
    if len(levels) < 2:
        raise ValueError("need at least 2 levels")
    lengths = {len(values[k]) for k in levels}
    if len(lengths) != 1:
        raise ValueError("dataset is unbalanced across levels")
    y = np.array([[float(v) for v in values[k]] for k in levels]).T  # (subjects, levels)
    s, p = y.shape
    if s < 2:
        raise ValueError("need at least 2 subjects")
    grand = y.mean()
    level_means = y.mean(axis=0)
    subj_means = y.mean(axis=1)
    ss_level = s * float(((level_means - grand) ** 2).sum())
    ss_subj = p * float(((subj_means - grand) ** 2).sum())
    ss_total = float(((y - grand) ** 2).sum())
    ss_err = max(0.0, ss_total - ss_level - ss_subj)
    df_level, df_err = p - 1, (p - 1) * (s - 1)
    f, pval, degen = _f_and_p(ss_level, df_level, ss_err, df_err)
    effect = AnovaEffect(
        name="level", ss=ss_level, df=df_level, ms=ss_level / df_level,
        f=f, p=pval, error_ss=ss_err, error_df=df_err, degenerate=degen,
    )
    return AnovaTable(effects=(effect,), subject_ss=ss_subj, subject_df=s - 1, alpha=alpha)
