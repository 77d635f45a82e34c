"""Shared curve analysis: least-squares fits, decay times, curve crossings.

All fits are ordinary least squares on suitably transformed data
(log-linear for exponential decay, log-log for power laws), with
standard errors derived from the residual variance.  Nothing here is
engine-specific: the inputs are plain arrays or TrajectoryRecord
instances produced by any of the evolution backends.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .floquet import first_zero
from .params import TrajectoryRecord

# An OLS line fit needs a healthy number of points before slope errors
# mean anything; fits on shorter windows are refused rather than hedged.
MIN_FIT_POINTS = 10


class FitWindowError(ValueError):
    """Raised when the usable fit window has too few points."""


@dataclass(frozen=True)
class FitResult:
    """Line fit y = intercept + slope * x with OLS error estimates.

    ``r_squared`` is the usual coefficient of determination and
    ``residual_norm`` the 2-norm of the fit residuals.  For the
    two-point degenerate case the fit is an exact interpolation and
    ``r_squared`` is reported as 1 with zero standard errors.
    """

    slope: float
    intercept: float
    slope_err: float
    intercept_err: float
    r_squared: float
    residual_norm: float
    n_points: int

    @property
    def delta(self) -> float:
        """Decay rate of log y = A - delta * t fits (= -slope)."""
        return -self.slope

    @property
    def delta_err(self) -> float:
        return self.slope_err

    @property
    def amplitude(self) -> float:
        """Prefactor of exponential / power-law fits (= e^intercept)."""
        return float(np.exp(self.intercept))

    @property
    def exponent(self) -> float:
        """Signed log-log slope: y ~ x**exponent."""
        return self.slope

    @property
    def decay_exponent(self) -> float:
        """Exponent gamma of decaying laws written y ~ x**(-gamma)."""
        return -self.slope


def fit_line(x: np.ndarray, y: np.ndarray) -> FitResult:
    """Ordinary least squares for y = a + b x.

    Returns slope/intercept with their standard errors estimated from
    the residual variance (the data carry no per-point weights; windows
    are chosen upstream so that residuals are noise-dominated).
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("fit_line expects two 1-d arrays of equal length")
    n = len(x)
    if n < 2:
        raise FitWindowError(f"need at least 2 points, got {n}")

    xm = x - x.mean()
    sxx = float(xm @ xm)
    if sxx == 0.0:
        raise ValueError("all x values identical; slope undefined")
    slope = float(xm @ (y - y.mean())) / sxx
    intercept = float(y.mean() - slope * x.mean())

    resid = y - (intercept + slope * x)
    rss = float(resid @ resid)
    tss = float((y - y.mean()) @ (y - y.mean()))

    if n == 2:
        # exact interpolation: no residual degrees of freedom
        return FitResult(slope, intercept, 0.0, 0.0, 1.0, 0.0, n)

    sigma2 = rss / (n - 2)
    slope_err = float(np.sqrt(sigma2 / sxx))
    intercept_err = float(np.sqrt(sigma2 * (1.0 / n + x.mean() ** 2 / sxx)))
    r_squared = 1.0 if tss == 0.0 else 1.0 - rss / tss
    return FitResult(slope, intercept, slope_err, intercept_err,
                     r_squared, float(np.sqrt(rss)), n)


def decay_window(record: TrajectoryRecord) -> int:
    """End (exclusive) of the usable exponential-decay fit window.

    The window runs from n=1 up to, but not including, the first index
    where the value drops below max(3 sigma, 0): past that point the
    log of the signal is dominated by sampling noise.  Records without
    error bars stop at the first non-positive value.
    """
    v = record.values
    floor = np.zeros_like(v)
    if record.errors is not None:
        floor = np.maximum(floor, 3.0 * record.errors)
    below = np.nonzero(v < floor)[0] if (v < floor).any() else np.array([], int)
    below = below[below >= 1]
    return int(below[0]) if len(below) else len(v)


def fit_exponential_decay(record: TrajectoryRecord) -> FitResult:
    """Fit log(O/l) = A - delta * t over the noise-free decay window.

    OLS on (n tau, log value) for n = 1 .. decay_window(record)-1.
    Raises FitWindowError when fewer than MIN_FIT_POINTS survive.
    """
    stop = decay_window(record)
    if stop - 1 < MIN_FIT_POINTS:
        raise FitWindowError(
            f"decay window n=1..{stop - 1} too short (< {MIN_FIT_POINTS} points)")
    t = record.times[1:stop]
    v = record.values[1:stop]
    if np.any(v <= 0.0):
        raise FitWindowError("non-positive values inside the decay window")
    return fit_line(t, np.log(v))


def fit_power_law(xs: np.ndarray, ys: np.ndarray) -> FitResult:
    """Fit y = amplitude * x**exponent by OLS in log-log space.

    Both decaying (y ~ x**-gamma, read gamma from .decay_exponent) and
    growing laws (read .exponent) use the same fit; only the reported
    sign convention differs.
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if np.any(xs <= 0.0) or np.any(ys <= 0.0):
        raise ValueError("power-law fit requires strictly positive data")
    return fit_line(np.log(xs), np.log(ys))


def decay_time(record: TrajectoryRecord,
               n_max: int | None = None) -> tuple[float, float]:
    """First-moment decay-time estimator with error propagation.

    t_d = tau * sum(n * O(n tau)) / sum(O(n tau)), both sums over
    n = 1 .. n_cut where n_cut is the first stroboscopic zero crossing
    of the record (override with n_max to reproduce runs that summed
    over a fixed horizon instead).  Returns (t_d, sigma_t_d); the error
    is propagated linearly from per-point error bars and is 0 for
    records without errors.
    """
    v = record.values
    t = record.times
    if len(t) < 2:
        raise ValueError("record too short for a decay time")
    tau = float(t[1] - t[0])
    if v[0] <= 0.0:
        raise ValueError("record must start positive")

    if n_max is None:
        n_cut = first_zero(record)
        if n_cut is None:
            raise ValueError("no zero crossing in record; pass n_max to force")
    else:
        n_cut = int(n_max)
        if not 1 <= n_cut < len(v):
            raise ValueError(f"n_max {n_max} outside record range")

    n = np.arange(1, n_cut + 1, dtype=np.float64)
    w = v[1:n_cut + 1]
    num = float(n @ w)
    den = float(w.sum())
    if den <= 0.0:
        raise ValueError("non-positive weight sum; window is all noise")
    td = tau * num / den

    sigma = 0.0
    if record.errors is not None:
        # d td / d v_n = tau (n * den - num) / den^2
        grad = tau * (n * den - num) / den ** 2
        sigma = float(np.sqrt(grad ** 2 @ record.errors[1:n_cut + 1] ** 2))
    return td, sigma


def crossing_point(k_grid: np.ndarray, y_lo: np.ndarray,
                   y_hi: np.ndarray) -> float | None:
    """K where two curves sampled on a common grid cross, or None.

    Finds the first sign change of y_lo - y_hi along the grid and
    linearly interpolates the crossing K.  Exact ties count as
    crossings at the grid point itself.  Symmetric in the two curves.
    """
    k = np.asarray(k_grid, dtype=np.float64)
    d = np.asarray(y_lo, dtype=np.float64) - np.asarray(y_hi, dtype=np.float64)
    if k.shape != d.shape or k.ndim != 1 or len(k) < 2:
        raise ValueError("curves must share a 1-d grid of length >= 2")
    for i in range(len(k) - 1):
        if d[i] == 0.0:
            return float(k[i])
        if d[i] * d[i + 1] < 0.0:
            return float(k[i] + (k[i + 1] - k[i]) * d[i] / (d[i] - d[i + 1]))
    if d[-1] == 0.0:
        return float(k[-1])
    return None


def adjacent_crossings(curves: dict[float, tuple[np.ndarray, np.ndarray]],
                       ) -> dict[tuple[float, float], float | None]:
    """Crossing K* for every adjacent pair of an l -> (K, y) family.

    The curves must share the same K grid.  Keys of the result are
    (l_smaller, l_larger) in ascending order of l.
    """
    ls = sorted(curves)
    if len(ls) < 2:
        raise ValueError("need at least two curves")
    k0 = np.asarray(curves[ls[0]][0], dtype=np.float64)
    out: dict[tuple[float, float], float | None] = {}
    for la, lb in zip(ls[:-1], ls[1:]):
        ka, ya = curves[la]
        kb, yb = curves[lb]
        if not (np.array_equal(np.asarray(ka, float), k0)
                and np.array_equal(np.asarray(kb, float), k0)):
            raise ValueError("curves are not sampled on a common K grid")
        out[(la, lb)] = crossing_point(k0, ya, yb)
    return out
