"""Log-log slope fitting and Richardson extrapolation of geometric schedules.

Asymptotic statements of the form "this quantity is O(eps^m)" are realized
throughout the package as least-squares slopes of log|value| against
log(eps), reported together with the standard error of the slope so that a
bad fit cannot masquerade as a good order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

#: Fits whose slope standard error exceeds this value fail regardless of the
#: fitted slope.
MAX_SLOPE_RESIDUAL = 0.1


class ScheduleError(ValueError):
    """Raised when an eps schedule is unusable for order fitting."""


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    #: standard error of the slope (in slope units)
    residual: float
    n_used: int
    n_dropped: int

    @property
    def reliable(self) -> bool:
        return self.n_used >= 4 and self.residual <= MAX_SLOPE_RESIDUAL


@dataclass(frozen=True)
class OrderFitReport:
    """Measured asymptotic order of one sampled quantity.

    ``pass_`` holds exactly when the fitted slope matches ``claimed_order``
    within ``tolerance`` on the side recorded in ``direction`` and the fit is
    reliable.  ``direction`` is one of ``">="``, ``"<="`` or ``"=="``.
    """

    quantity_id: str
    samples: list = field(repr=False)  # list of (eps, value)
    slope: float
    intercept: float
    residual: float
    claimed_order: float
    tolerance: float
    direction: str = ">="
    all_zero: bool = False

    @property
    def pass_(self) -> bool:
        if self.all_zero:
            return True
        if not np.isfinite(self.slope) or self.residual > MAX_SLOPE_RESIDUAL:
            return False
        if self.direction == ">=":
            return self.slope >= self.claimed_order - self.tolerance
        if self.direction == "<=":
            return self.slope <= self.claimed_order + self.tolerance
        return abs(self.slope - self.claimed_order) <= self.tolerance


def fit_loglog_slope(eps, values, zero_floor=0.0):
    """Least-squares slope of log|values| against log eps.

    Zero, nonfinite, and below-floor values are dropped from the fit (and
    counted in ``n_dropped``).  Raises :class:`ScheduleError` when fewer than
    4 usable points remain, which the callers treat as a configuration error.
    """
    eps = np.asarray(eps, dtype=float)
    values = np.asarray(values, dtype=float)
    if eps.shape != values.shape or eps.ndim != 1:
        raise ScheduleError("eps and values must be 1-D arrays of equal length")
    mask = np.isfinite(values) & (np.abs(values) > zero_floor)
    n_used = int(mask.sum())
    if n_used < 4:
        raise ScheduleError(f"only {n_used} usable points; need at least 4 to fit a slope")
    lx = np.log(eps[mask])
    ly = np.log(np.abs(values[mask]))
    (slope, intercept), res = np.polyfit(lx, ly, 1, cov=False), None
    fitted = slope * lx + intercept
    dof = max(n_used - 2, 1)
    sxx = np.sum((lx - lx.mean()) ** 2)
    stderr = float(np.sqrt(np.sum((ly - fitted) ** 2) / dof / sxx))
    return SlopeFit(float(slope), float(intercept), stderr, n_used, int(mask.size - n_used))


def order_report(quantity_id, eps, values, claimed_order, tolerance, direction=">=",
                 zero_floor=0.0):
    """Build an :class:`OrderFitReport`; all-zero samples pass vacuously."""
    eps = np.asarray(eps, dtype=float)
    values = np.asarray(values, dtype=float)
    samples = list(zip(eps.tolist(), values.tolist()))
    if np.all(np.abs(values) <= zero_floor):
        return OrderFitReport(quantity_id, samples, float("nan"), float("nan"), 0.0,
                              claimed_order, tolerance, direction, all_zero=True)
    fit = fit_loglog_slope(eps, values, zero_floor=zero_floor)
    return OrderFitReport(quantity_id, samples, fit.slope, fit.intercept, fit.residual,
                          claimed_order, tolerance, direction)


@dataclass(frozen=True)
class Extrapolation:
    limit: float
    order: float
    bracket: float
    converged: bool
    note: str = ""


def richardson_extrapolate(eps, values, noise_floor=0.0):
    """Extrapolate a geometric-schedule sequence to eps -> 0.

    The leading order is fitted from the longest constant-sign suffix of the
    successive differences and used for one Richardson step when the fit is
    stable across suffix lengths; otherwise the last value stands, bracketed
    by the recent differences.  The sequence counts as converged when the
    difference tail has settled (constant sign and non-increasing magnitude,
    with slack), regardless of whether the power model was trusted.

    ``noise_floor`` is an absolute scale below which differences are treated
    as numerical noise: a tail entirely below it counts as converged (used
    by the experiments, whose disc quadrature carries a known error floor).
    """
    eps = np.asarray(eps, dtype=float)
    values = np.asarray(values, dtype=float)
    if eps.ndim != 1 or eps.size != values.size:
        raise ScheduleError("eps and values must be 1-D arrays of equal length")
    if eps.size < 4:
        raise ScheduleError("need at least 4 schedule points to extrapolate")
    if np.any(np.diff(eps) >= 0):
        raise ScheduleError("schedule must be strictly decreasing")
    ratios = eps[1:] / eps[:-1]
    if np.ptp(ratios) > 1e-8:
        raise ScheduleError("schedule must be geometric for Richardson extrapolation")
    rho = float(ratios.mean())
    diffs = np.diff(values)
    absd = np.abs(diffs)
    floor = max(1e-13 * max(1.0, float(np.max(np.abs(values)))), noise_floor)
    if np.all(absd[-3:] <= floor):
        return Extrapolation(float(values[-1]), float("inf"),
                             float(max(np.max(absd[-3:]), floor)), True,
                             "difference tail below the noise floor")

    # longest suffix of differences with one sign; sub-floor diffs are
    # sign-neutral noise and never break the run
    sign = 0.0
    k = len(diffs)
    while k > 0:
        if absd[k - 1] > floor:
            s = np.sign(diffs[k - 1])
            if sign == 0.0:
                sign = s
            elif s != sign:
                break
        k -= 1
    n_suf = len(diffs) - k

    tail = absd[-3:]
    settled = n_suf >= 3 and all(tail[i + 1] <= max(1.25 * tail[i], floor)
                                 for i in range(tail.size - 1))

    def fit_order(sl):
        lx = np.log(eps[:-1][sl])
        ly = np.log(absd[sl])
        return float(np.polyfit(lx, ly, 1)[0])

    p = float("nan")
    use_richardson = False
    if n_suf >= 4:
        p_short = fit_order(slice(len(diffs) - 3, len(diffs)))
        p_long = fit_order(slice(len(diffs) - min(n_suf, 6), len(diffs)))
        if abs(p_short - p_long) < 0.5 and 0.2 <= p_long <= 12.0:
            p, use_richardson = p_long, True
        else:
            p = p_long
    if use_richardson and settled:
        rp = rho ** p
        corr = diffs[-1] * rp / (1.0 - rp)
        return Extrapolation(float(values[-1] + corr), float(p),
                             float(abs(corr) + absd[-1]), True)
    note = "" if settled else "difference tail not settled"
    return Extrapolation(float(values[-1]), p, float(np.max(tail)), settled, note)


def geometric_schedule(start=0.08, ratio=0.7, count=10):
    """The default eps schedule: geometric, one decade wide."""
    if not (0 < ratio < 1):
        raise ScheduleError("ratio must lie in (0, 1)")
    if count < 4:
        raise ScheduleError("schedule needs at least 4 points")
    return start * ratio ** np.arange(count)
