"""Per-condition landing statistics.

Works on landing records (one per drone per trial): displacement summary
stats in millimetres, the nearest-rank containment diameter used for pad
sizing (the circle always passes through an observed landing point), and
the least-squares landing-axis fit.

Containment supports two centre conventions: the plate centre (default)
and the mean landing point.  A plate-centred circle sizes the pad for
absolute placement error; a mean-centred circle measures scatter about the
typical landing spot.  Both are useful, so both are provided.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .conditions import ConditionSpec

CENTER_MODES = ("plate_center", "mean_landing_point")


@dataclass(frozen=True)
class LandingRecord:
    condition: ConditionSpec
    pad_id: int
    displacement: tuple[float, float]  # pad frame, metres, centre -> touchdown

    def __post_init__(self):
        dx, dy = self.displacement
        if not (math.isfinite(dx) and math.isfinite(dy)):
            raise ValueError(f"non-finite displacement {self.displacement!r}")

    @property
    def magnitude(self) -> float:
        return math.hypot(*self.displacement)


@dataclass(frozen=True)
class DisplacementStats:
    mean_mm: float
    std_mm: Optional[float]  # sample std (n-1); None when n < 2
    max_mm: float
    n: int


@dataclass(frozen=True)
class RegressionFit:
    intercept: float  # m
    slope: float
    r_squared: float
    n: int


def group_stats(records: Sequence[LandingRecord]) -> DisplacementStats:
    """Mean / sample std / max of displacement magnitudes, in mm."""
    if not records:
        raise ValueError("empty record group")
    mags = [r.magnitude * 1000.0 for r in records]
    n = len(mags)
    mean = sum(mags) / n
    if n >= 2:
        var = sum((m - mean) ** 2 for m in mags) / (n - 1)
        std = math.sqrt(var)
    else:
        std = None
    return DisplacementStats(mean_mm=mean, std_mm=std, max_mm=max(mags), n=n)


def containment_diameter(
    records: Sequence[LandingRecord],
    quantile: float = 0.9,
    center_mode: str = "plate_center",
) -> float:
    """Diameter (m) of the circle holding the q-quantile of landing points.

    Radii are measured from the chosen centre; the quantile is nearest-rank
    (the ceil(q*n)-th order statistic), so the circle's edge is an actual
    landing point.
    """
    if not records:
        raise ValueError("empty record group")
    if not 0.0 < quantile <= 1.0:
        raise ValueError("quantile must be in (0, 1]")
    if center_mode not in CENTER_MODES:
        raise ValueError(f"center_mode must be one of {CENTER_MODES}")
    if center_mode == "plate_center":
        cx = cy = 0.0
    else:
        cx = sum(r.displacement[0] for r in records) / len(records)
        cy = sum(r.displacement[1] for r in records) / len(records)
    radii = sorted(
        math.hypot(r.displacement[0] - cx, r.displacement[1] - cy) for r in records
    )
    rank = math.ceil(quantile * len(radii))
    return 2.0 * radii[rank - 1]


def landing_axis_regression(records: Sequence[LandingRecord]) -> RegressionFit:
    """OLS fit of landing y on landing x in the pad frame."""
    if len(records) < 2:
        raise ValueError("need at least 2 records to fit a line")
    xs = [r.displacement[0] for r in records]
    ys = [r.displacement[1] for r in records]
    if max(xs) == min(xs):
        raise ValueError("all landing x equal: vertical axis, no y-on-x fit")
    n = len(xs)
    sx = sum(xs)
    sy = sum(ys)
    sxx = sum(x * x for x in xs)
    sxy = sum(x * y for x, y in zip(xs, ys))
    denom = n * sxx - sx * sx
    if denom == 0.0:
        raise ValueError("degenerate x spread: no y-on-x fit")
    slope = (n * sxy - sx * sy) / denom
    intercept = (sy - slope * sx) / n
    ybar = sy / n
    ss_res = sum((y - (intercept + slope * x)) ** 2 for x, y in zip(xs, ys))
    ss_tot = sum((y - ybar) ** 2 for y in ys)
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return RegressionFit(intercept=intercept, slope=slope, r_squared=r_squared, n=n)
