"""Aggregation of infection records into time-vs-distance curves, slope
(slowness) estimation, and the domination check against the analytical
bound."""

import json
import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .kernel import BoundStatus


class StatsError(ValueError):
    """Insufficient or degenerate data for the requested statistic."""


@dataclass(frozen=True)
class CurveBin:
    distance_center: float
    mean_time: float
    std_error: float
    sample_count: int


@dataclass(frozen=True)
class PropagationCurve:
    bins: List[CurveBin]
    bin_width: float


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    slope_std_error: float
    fit_window: Tuple[float, float]


@dataclass(frozen=True)
class DominationReport:
    theoretical_slowness: float
    fitted_slowness: float
    stderr: float
    margin: float
    passed: bool

    def to_json(self):
        return json.dumps(
            {
                "theoretical_slowness": self.theoretical_slowness,
                "fitted_slowness": self.fitted_slowness,
                "stderr": self.stderr,
                "margin": self.margin,
                "pass": self.passed,
            }
        )

    def describe(self):
        verdict = "PASS" if self.passed else "FAIL"
        return (
            f"{verdict}: fitted slowness {self.fitted_slowness:.6g} "
            f"(stderr {self.stderr:.3g}) vs theoretical {self.theoretical_slowness:.6g}, "
            f"margin {self.margin:.6g}"
        )


def build_curve(records, bin_width):
    """Group records by distance bin; per-bin mean time, standard error of
    the mean, and count.  Empty input gives an empty curve."""
    if bin_width <= 0.0:
        raise StatsError(f"bin_width must be > 0, got {bin_width}")
    groups = {}
    for rec in records:
        groups.setdefault(int(rec.distance // bin_width), []).append(
            rec.infection_time
        )
    bins = []
    for k in sorted(groups):
        times = np.asarray(groups[k])
        count = times.size
        stderr = float(times.std(ddof=1) / math.sqrt(count)) if count > 1 else 0.0
        bins.append(
            CurveBin(
                distance_center=(k + 0.5) * bin_width,
                mean_time=float(times.mean()),
                std_error=stderr,
                sample_count=count,
            )
        )
    return PropagationCurve(bins=bins, bin_width=bin_width)


def front_records(records):
    """Per-run first-passage subset: records that push the maximum distance
    reached so far, in infection-time order.

    The analytical bound constrains the fastest journey, and the figure
    curves track the propagation front; per-node reception times in a
    finite box are dominated by mixing, not by the front.
    """
    best = -math.inf
    out = []
    for rec in sorted(records, key=lambda r: (r.infection_time, r.node_id)):
        if rec.distance > best:
            best = rec.distance
            out.append(rec)
    return out


def fit_slope(records, d_min, d_max=math.inf):
    """Ordinary least squares of infection time on distance, restricted to
    records at distance >= d_min (and <= d_max when given).  The free
    intercept absorbs the near-field transient; the slope estimates the
    slowness."""
    kept = [r for r in records if d_min <= r.distance <= d_max]
    xs = np.asarray([r.distance for r in kept])
    ys = np.asarray([r.infection_time for r in kept])
    n = xs.size
    if n < 10:
        raise StatsError(
            f"need at least 10 records with distance >= {d_min}, got {n}"
        )
    sxx = float(((xs - xs.mean()) ** 2).sum())
    if sxx == 0.0:
        raise StatsError("degenerate design: all records at one distance")
    slope = float(((xs - xs.mean()) * (ys - ys.mean())).sum()) / sxx
    intercept = float(ys.mean()) - slope * float(xs.mean())
    residuals = ys - (intercept + slope * xs)
    rss = float((residuals**2).sum())
    stderr = math.sqrt(rss / (n - 2) / sxx) if n > 2 else 0.0
    return SlopeFit(
        slope=slope,
        intercept=intercept,
        slope_std_error=stderr,
        fit_window=(float(d_min), float(xs.max())),
    )


def curve_r_squared(curve, d_min, d_max=math.inf):
    """Coefficient of determination of a straight-line fit on the bin means
    with d_min <= distance_center <= d_max; measures straight-line
    convergence."""
    pts = [
        (b.distance_center, b.mean_time)
        for b in curve.bins
        if d_min <= b.distance_center <= d_max
    ]
    if len(pts) < 3:
        raise StatsError(f"need at least 3 bins past d_min={d_min}, got {len(pts)}")
    xs = np.asarray([p[0] for p in pts])
    ys = np.asarray([p[1] for p in pts])
    slope, intercept = np.polyfit(xs, ys, 1)
    rss = float(((ys - (intercept + slope * xs)) ** 2).sum())
    tss = float(((ys - ys.mean()) ** 2).sum())
    if tss == 0.0:
        return 1.0
    return 1.0 - rss / tss


def check_bound(fit, bound):
    """Domination test: fitted slowness (plus 2 stderr) must not fall below
    the theoretical slowness.  Unbounded bounds pass trivially."""
    if bound.status != BoundStatus.FINITE:
        theoretical = 0.0
    else:
        theoretical = bound.slowness
    margin = fit.slope - theoretical
    passed = fit.slope + 2.0 * fit.slope_std_error >= theoretical
    return DominationReport(
        theoretical_slowness=theoretical,
        fitted_slowness=fit.slope,
        stderr=fit.slope_std_error,
        margin=margin,
        passed=passed,
    )


def write_curve(stream, curve):
    stream.write("distance,mean_time,std_error,count\n")
    for b in curve.bins:
        stream.write(
            f"{b.distance_center:.17g},{b.mean_time:.17g},"
            f"{b.std_error:.17g},{b.sample_count}\n"
        )


def write_fit(stream, fit):
    stream.write("slope,intercept,slope_std_error,d_min,d_max\n")
    stream.write(
        f"{fit.slope:.17g},{fit.intercept:.17g},{fit.slope_std_error:.17g},"
        f"{fit.fit_window[0]:.17g},{fit.fit_window[1]:.17g}\n"
    )
