"""Eigenvalue exclusion: the quadratic-program bound, its scan, and the
threshold-interval extraction.

For a Gram system A and candidate parameter t, the computable bound is

    J(t) = 1 / <A^-1 c_t, c_t>,

the minimum of <A x, x> over the affine slice <c_t, x> = 1.  If t actually
is a spectral parameter of multiplicity m, then J(t) >= m; so the sublevel
set {J < 1} certifiably contains no spectral parameters, and the complement
{J >= 1} is the only place small eigenvalues can hide.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .spectrum import ManifoldData
from .testfuncs import SincSplineFamily, TestFunction, constraint_matrix, constraint_vector
from .trace import GramSystem, TraceEvaluation, geometric_side, solve_factorized

DEGENERATE_CONSTRAINT_TOL = 1e-14

DEFAULT_WINDOW = (0.0, 4.0)
DEFAULT_STEP = 1e-3
DEFAULT_TOL = 1e-6


def j_value_for_constraint(G: GramSystem, c: np.ndarray) -> float:
    """Minimum of <A x, x> over <c, x> = 1, via the cached factorization.

    A vanishing constraint vector (all entries below 1e-14) yields the +inf
    sentinel: the slice is empty at that tolerance.
    """
    c = np.asarray(c, dtype=np.float64)
    if np.abs(c).max() < DEGENERATE_CONSTRAINT_TOL:
        return math.inf
    q = float(solve_factorized(G, c[:, None])[0])
    return 1.0 / q


def j_value(G: GramSystem, t: float) -> float:
    """Exclusion bound at one candidate parameter; the constraint vector is
    the family transform sampled at t."""
    if t < 0:
        raise ValueError(f"candidate parameter must be >= 0, got {t}")
    return j_value_for_constraint(G, constraint_vector(G.family, t))


@dataclass(frozen=True)
class ExclusionCurve:
    """J sampled on a uniform grid."""

    t_grid: np.ndarray
    j_values: np.ndarray
    family: SincSplineFamily
    label: str = ""
    ridge: float = 0.0

    def __post_init__(self) -> None:
        t = np.asarray(self.t_grid, dtype=np.float64)
        j = np.asarray(self.j_values, dtype=np.float64)
        if t.ndim != 1 or t.shape != j.shape:
            raise ValueError("grid and values must be 1-d arrays of equal length")
        if len(t) >= 2 and not (np.diff(t) > 0).all():
            raise ValueError("grid must be strictly increasing")
        object.__setattr__(self, "t_grid", t)
        object.__setattr__(self, "j_values", j)

    def peak_count_per_unit(self, bin_width: float = 1.0) -> list[tuple[float, int]]:
        """Local-maxima counts per t-bin; a growth diagnostic, never asserted."""
        j = self.j_values
        interior = (j[1:-1] > j[:-2]) & (j[1:-1] >= j[2:])
        peak_ts = self.t_grid[1:-1][interior]
        lo, hi = self.t_grid[0], self.t_grid[-1]
        out = []
        edge = lo
        while edge < hi:
            nxt = min(edge + bin_width, hi)
            out.append((edge, int(((peak_ts >= edge) & (peak_ts < nxt)).sum())))
            edge = nxt
        return out


def scan(G: GramSystem, t_min: float = DEFAULT_WINDOW[0], t_max: float = DEFAULT_WINDOW[1],
         step: float = DEFAULT_STEP) -> ExclusionCurve:
    """Evaluate J on the uniform grid over [t_min, t_max].

    One factorization is shared by every grid point.  The default family
    spacing keeps the first common zero of the member transforms (pi/delta)
    far outside the window; scanning past it is refused since J degenerates
    there.
    """
    if not (0 <= t_min < t_max):
        raise ValueError(f"need 0 <= t_min < t_max, got [{t_min}, {t_max}]")
    if step <= 0:
        raise ValueError("step must be positive")
    first_zero = math.pi / G.family.delta
    if t_max >= first_zero:
        raise ValueError(
            f"scan window reaches the degenerate constraint point pi/delta = {first_zero}"
        )
    count = int(round((t_max - t_min) / step)) + 1
    grid = np.linspace(t_min, t_max, count)
    c = constraint_matrix(G.family, grid)
    q = solve_factorized(G, c)
    return ExclusionCurve(
        t_grid=grid,
        j_values=1.0 / q,
        family=G.family,
        label=G.label,
        ridge=G.ridge,
    )


@dataclass(frozen=True)
class ThresholdIntervals:
    """Disjoint sorted intervals where J >= level, clipped to the window.

    ``ridge`` records whether the underlying system was regularized; ridged
    results are exploratory and never certify anything downstream.
    """

    level: float
    intervals: tuple[tuple[float, float], ...]
    tolerance: float
    window: tuple[float, float]
    ridge: float = 0.0

    def covers(self, t: float, slack: float = 0.0) -> bool:
        return any(lo - slack <= t <= hi + slack for lo, hi in self.intervals)

    def intersect_upto(self, t_cap: float) -> tuple[tuple[float, float], ...]:
        """Intersection with [window_lo, t_cap]."""
        out = []
        for lo, hi in self.intervals:
            if lo <= t_cap:
                out.append((lo, min(hi, t_cap)))
        return tuple(out)


def _bisect_crossing(G: GramSystem, level: float, lo: float, hi: float, tol: float) -> float:
    f_lo = j_value(G, lo) - level
    for _ in range(200):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        f_mid = j_value(G, mid) - level
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def threshold_intervals(G: GramSystem, level: float = 1.0, tol: float = DEFAULT_TOL,
                        t_min: float = DEFAULT_WINDOW[0], t_max: float = DEFAULT_WINDOW[1],
                        step: float = DEFAULT_STEP,
                        curve: Optional[ExclusionCurve] = None) -> ThresholdIntervals:
    """Solve J = level by bisection seeded from the scan grid.

    Crossing pairs straddling a window edge produce an interval ending at
    that edge.  Every returned interval is midpoint-checked; a failed check
    (a dip the grid missed) re-resolves that stretch at a fiftieth of its
    width, twice at most.
    """
    if level <= 0:
        raise ValueError("level must be positive")
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    if curve is None:
        curve = scan(G, t_min, t_max, step)
    return _intervals_from_curve(G, curve, level, tol, depth=0)


def _intervals_from_curve(G: GramSystem, curve: ExclusionCurve, level: float,
                          tol: float, depth: int) -> ThresholdIntervals:
    grid = curve.t_grid
    above = curve.j_values >= level
    t_min, t_max = float(grid[0]), float(grid[-1])

    edges: list[float] = []
    if above[0]:
        edges.append(t_min)
    flips = np.nonzero(above[1:] != above[:-1])[0]
    for i in flips:
        edges.append(_bisect_crossing(G, level, float(grid[i]), float(grid[i + 1]), tol))
    if above[-1]:
        edges.append(t_max)
    assert len(edges) % 2 == 0
    pairs = [(edges[i], edges[i + 1]) for i in range(0, len(edges), 2)]

    checked: list[tuple[float, float]] = []
    for lo, hi in pairs:
        mid = 0.5 * (lo + hi)
        if j_value(G, mid) >= level or depth >= 2:
            checked.append((lo, hi))
            continue
        # grid-width artifact: re-resolve this stretch at a finer step
        finer = scan(G, max(t_min, lo - tol), min(t_max, hi + tol),
                     max((hi - lo) / 50.0, tol))
        sub = _intervals_from_curve(G, finer, level, tol, depth + 1)
        checked.extend(sub.intervals)
    return ThresholdIntervals(
        level=level,
        intervals=tuple(checked),
        tolerance=tol,
        window=(t_min, t_max),
        ridge=G.ridge,
    )


@dataclass(frozen=True)
class NaiveExclusionReport:
    """Outcome of the single-function exclusion test.

    ``passed`` records whether the spectral sum fell below the threshold;
    the verdict is only a sound exclusion of parameters in [0, t_window]
    when ``margin_ok`` also holds (the transform exceeds the whole sum
    there, so no single parameter could hide inside it).
    """

    spectral_sum: float
    threshold: float
    passed: bool
    t_window: float
    fourier_min: float
    margin_ok: bool
    evaluation: TraceEvaluation


def naive_exclusion(M: ManifoldData, H0: TestFunction, threshold: float = 0.01,
                    t_window: float = math.sqrt(2.0), grid_points: int = 2001) -> NaiveExclusionReport:
    """Evaluate sum_j Hhat0(t_j) and compare with the pass threshold.

    Requires Hhat0 >= 0 (a convolution square) and support inside the
    cutoff; both are checked, the first on the sampling grid.
    """
    ev = geometric_side(M, H0)
    ts = np.linspace(0.0, t_window, grid_points)
    fv = np.asarray(H0.fourier_values(ts))
    if fv.min() < -1e-12:
        raise ValueError(
            f"transform dips to {fv.min()}: not a nonnegative-transform test function"
        )
    fourier_min = float(fv.min())
    return NaiveExclusionReport(
        spectral_sum=ev.spectral_sum,
        threshold=threshold,
        passed=bool(ev.spectral_sum < threshold),
        t_window=t_window,
        fourier_min=fourier_min,
        margin_ok=bool(fourier_min > ev.spectral_sum),
        evaluation=ev,
    )
