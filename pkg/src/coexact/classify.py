"""Topological verdicts from exclusion output.

A Riemannian threshold parameter (default -4, the hyperbolic value of the
sum of the two smallest Ricci eigenvalues) sets the eigenvalue bar
lambda = -s/2 below which irreducible monopole solutions force the first
coexact eigenvalue to live.  Exclusion intervals disjoint from the bar
certify there are no irreducible solutions; for manifolds independently
known to carry them, the first surviving interval localizes the eigenvalue.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .exclusion import ThresholdIntervals

MINIMAL_L_SPACE = "MinimalLSpaceCertificate"
LAMBDA1_WINDOW = "Lambda1Window"
INCONCLUSIVE = "Inconclusive"

#: Every verdict carries this caveat: input spectra come from floating-point
#: enumeration, not interval arithmetic.
SPECTRUM_CAVEAT = "input length spectrum not interval-certified"

#: Attached when the Gram system was ridge-regularized; such runs explore but
#: never certify.
RIDGE_CAVEAT = "ridge regularization active: exploratory result, not certifying"


@dataclass(frozen=True)
class Verdict:
    kind: str
    sw_threshold_t: float
    possible_small_spectrum: ThresholdIntervals
    lambda1_window: Optional[tuple[float, float]] = None
    small_t_hits: tuple[tuple[float, float], ...] = ()
    caveats: tuple[str, ...] = ()
    certifying: bool = True


def classify(intervals: ThresholdIntervals, known_non_l_space: bool = False,
             s_tilde_inf: float = -4.0,
             extra_caveats: tuple[str, ...] = ()) -> Verdict:
    """Turn threshold intervals into a verdict.

    With threshold parameter tau = sqrt(-s_tilde_inf/2):

    * no interval meets [0, tau]  -> irreducible-solution-free certificate;
    * intervals meet it and the manifold is a known non-L-space -> the first
      intersecting interval, squared endpoint-wise, windows the eigenvalue;
    * otherwise inconclusive, with the intersecting intervals attached.
    """
    if not (math.isfinite(s_tilde_inf) and s_tilde_inf < 0):
        raise ValueError(
            f"curvature parameter must be negative (got {s_tilde_inf}); "
            "nonnegatively curved input is out of scope"
        )
    tau = math.sqrt(-s_tilde_inf / 2.0)
    if intervals.window[1] < tau:
        raise ValueError(
            f"scan window {intervals.window} does not contain the threshold {tau}"
        )
    caveats = (SPECTRUM_CAVEAT,) + tuple(extra_caveats)
    if intervals.level > 1.0:
        caveats += (f"threshold intervals computed at level {intervals.level} > 1",)
    certifying = intervals.ridge == 0.0
    if not certifying:
        caveats += (RIDGE_CAVEAT,)

    hits = intervals.intersect_upto(tau)
    if not hits:
        return Verdict(
            kind=MINIMAL_L_SPACE,
            sw_threshold_t=tau,
            possible_small_spectrum=intervals,
            caveats=caveats,
            certifying=certifying,
        )
    if known_non_l_space:
        lo, hi = hits[0]
        return Verdict(
            kind=LAMBDA1_WINDOW,
            sw_threshold_t=tau,
            possible_small_spectrum=intervals,
            lambda1_window=(lo * lo, hi * hi),
            small_t_hits=hits,
            caveats=caveats,
            certifying=certifying,
        )
    return Verdict(
        kind=INCONCLUSIVE,
        sw_threshold_t=tau,
        possible_small_spectrum=intervals,
        small_t_hits=hits,
        caveats=caveats,
        certifying=certifying,
    )
