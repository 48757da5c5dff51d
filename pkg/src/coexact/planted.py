"""Synthetic spectra with known parameters, for validation and fixtures.

Two constructions:

* :func:`planted_gram` builds a Gram system directly from declared spectral
  parameters, bypassing geodesics entirely.  Any declared (t, mu) makes the
  matrix dominate mu * c_t c_t^T, so the exclusion bound at t is at least mu
  by construction - the soundness property the certificate tests exercise.

* :func:`fit_manifold_to_spectrum` inverts the geometric side: it adjusts
  the holonomies of a geodesic list until the trace-formula Gram matrix for
  one fixed family reproduces a planted spectrum exactly.  The result is a
  schema-valid manifold document that behaves, for every test function in
  that family's span, exactly like a manifold whose coexact spectrum is the
  planted one.  Used to commit self-contained fixtures with known ground
  truth; functions outside the span see unconstrained data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .spectrum import GeodesicClass, ManifoldData, geodesic_weight
from .testfuncs import (
    SincSplineFamily,
    TestFunction,
    _sinc,
    bspline4_array,
    bspline4_d2_array,
    constraint_matrix,
)
from .trace import TWO_PI, GramSystem

#: Cubic leading coefficient of the eigenvalue counting function
#: N(X) ~ 2 vol X^3 / ((4 pi)^{3/2} Gamma(5/2)); per unit volume.
WEYL_CUBIC = 2.0 / ((4.0 * math.pi) ** 1.5 * math.gamma(2.5))


@dataclass(frozen=True)
class PlantedSpectrum:
    """Finite list of spectral parameters t_j with multiplicity weights mu_j."""

    atoms: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        for t, mu in self.atoms:
            if not (math.isfinite(t) and t >= 0):
                raise ValueError(f"spectral parameter must be >= 0, got {t}")
            if not (math.isfinite(mu) and mu > 0):
                raise ValueError(f"multiplicity weight must be positive, got {mu}")

    def parameters(self) -> np.ndarray:
        return np.asarray([t for t, _ in self.atoms])

    def multiplicities(self) -> np.ndarray:
        return np.asarray([mu for _, mu in self.atoms])

    def spectral_sum(self, H: TestFunction) -> float:
        """sum_j mu_j Hhat(t_j), the quantity the trace formula computes."""
        return float(self.multiplicities() @ np.asarray(H.fourier_values(self.parameters())))


def weyl_tail(volume: float, t_from: float, t_to: float) -> list[tuple[float, float]]:
    """Unit-multiplicity parameters following the cubic counting law between
    t_from and t_to; makes synthetic spectra density-realistic."""
    if not 0 <= t_from < t_to:
        raise ValueError("need 0 <= t_from < t_to")
    c = WEYL_CUBIC * volume
    k_lo = int(math.ceil(c * t_from**3))
    k_hi = int(math.floor(c * t_to**3))
    return [((k / c) ** (1.0 / 3.0), 1.0) for k in range(max(k_lo, 1), k_hi + 1)]


def planted_gram(fam: SincSplineFamily, spectrum: PlantedSpectrum,
                 label: str = "planted") -> GramSystem:
    """Gram system assembled directly from the planted parameters."""
    c = constraint_matrix(fam, spectrum.parameters())
    matrix = (c * spectrum.multiplicities()[None, :]) @ c.T
    return GramSystem(matrix=matrix, family=fam, label=label)


# -- inverse construction -----------------------------------------------------


def _even_profile(fam: SincSplineFamily, spectrum: PlantedSpectrum) -> np.ndarray:
    """P(m) = sum_j mu_j sinc(delta t_j)^4 cos(m delta t_j) for m = 0..2n."""
    u = fam.delta * spectrum.parameters()
    base = spectrum.multiplicities() * _sinc(u) ** 4
    ms = np.arange(0, 2 * fam.n + 1)
    return np.cos(np.outer(ms, u)) @ base


def _holonomy_for_weight(length: float, primitive_length: float, weight: float,
                         min_mult: int = 1) -> tuple[float, int]:
    """Smallest admissible multiplicity and the holonomy realizing a target
    trace coefficient.

    The per-class coefficient l0 cos(theta) / (D - 2 cos(theta)) with
    D = 2 cosh(length) is strictly increasing in cos(theta), giving the
    closed form cos(theta) = tau D / (l0 + 2 tau) for per-unit weight tau.
    """
    d0 = 2.0 * math.cosh(length)
    w_max = primitive_length / (d0 - 2.0)
    w_min = -primitive_length / (d0 + 2.0)
    if weight >= 0:
        mult = max(min_mult, int(math.ceil(weight / w_max - 1e-12)))
    else:
        mult = max(min_mult, int(math.ceil(weight / w_min - 1e-12)))
    tau = weight / mult
    c = tau * d0 / (primitive_length + 2.0 * tau)
    c = min(1.0, max(-1.0, c))
    return math.acos(c), mult


def _translate_kernel(fam: SincSplineFamily, lengths: np.ndarray) -> np.ndarray:
    """K[m, i] = ((h*h)(l_i + m delta) + (h*h)(l_i - m delta))/2, m = 0..2n."""
    d = fam.delta
    ms = np.arange(0, 2 * fam.n + 1) * d
    return 0.5 * (
        bspline4_array(d, lengths[None, :] + ms[:, None])
        + bspline4_array(d, lengths[None, :] - ms[:, None])
    )


def fit_manifold_to_spectrum(fam: SincSplineFamily, volume: float,
                             spectrum: PlantedSpectrum, label: str,
                             base: Optional[Sequence[GeodesicClass]] = None,
                             cutoff: Optional[float] = None,
                             extra_functions: Sequence[TestFunction] = ()) -> ManifoldData:
    """Geodesic list whose Gram matrix for ``fam`` is exactly the planted one.

    With no base list, classes are placed on the family's delta-grid.  With a
    base list (lengths, multiplicities, and provisional holonomies), the
    minimum-norm holonomy adjustment is spread across all classes, so large
    synthetic spectra keep a natural texture.

    Each entry of ``extra_functions`` adds one linear row tying the geodesic
    sum against that function to the planted spectral sum, so the fitted
    manifold also reproduces the planted spectrum for those functions (their
    truncated sums, for unbounded supports).  Raises when the linear fit
    cannot close, which has not been observed for admissible families.
    """
    d, n = fam.delta, fam.n
    cutoff = float(cutoff if cutoff is not None else fam.support_bound)
    fam.require_within(cutoff)

    if base is None:
        n_lengths = 2 * n + 3
        base = [
            GeodesicClass(length=i * d, holonomy=0.5 * math.pi, multiplicity=1)
            for i in range(1, n_lengths + 1)
        ]
    base = list(base)
    for g in base:
        if g.length > cutoff:
            raise ValueError(f"base class of length {g.length} exceeds cutoff {cutoff}")

    lengths = np.asarray([g.length for g in base])
    base_weights = np.asarray([geodesic_weight(g, 1) for g in base])

    ms = np.arange(0, 2 * n + 1)
    p = _even_profile(fam, spectrum)
    g_ident = volume / TWO_PI * (bspline4_array(d, ms * d) - bspline4_d2_array(d, ms * d))
    target = 0.5 * p - g_ident - 0.5

    kernel = _translate_kernel(fam, lengths)
    rows = [kernel]
    goals = [target]
    for H in extra_functions:
        support = H.support_radius()
        row = np.where(lengths <= support, np.asarray(H.values(lengths)), 0.0)
        goal = (
            0.5 * (spectrum.spectral_sum(H) - H.fourier_at(0.0))
            - volume / TWO_PI * (H.value_at(0.0) - H.second_derivative_at_zero())
        )
        rows.append(row[None, :])
        goals.append(np.asarray([goal]))
    kernel = np.concatenate(rows, axis=0)
    target = np.concatenate(goals)

    baseline = kernel @ base_weights
    delta_w, _, rank, _ = np.linalg.lstsq(kernel, target - baseline, rcond=None)
    fit_err = float(np.abs(kernel @ delta_w - (target - baseline)).max())
    if fit_err > 1e-9 * max(1.0, float(np.abs(target).max())):
        raise ArithmeticError(
            f"inverse spectrum fit did not close: residual {fit_err}, rank {rank}"
        )
    weights = base_weights + delta_w

    classes = []
    for g, w in zip(base, weights):
        theta, mult = _holonomy_for_weight(g.length, g.primitive_length, float(w),
                                           min_mult=g.multiplicity)
        classes.append(
            GeodesicClass(
                length=g.length,
                holonomy=theta,
                multiplicity=mult,
                is_primitive=g.is_primitive,
                primitive_length=g.primitive_length,
            )
        )
    classes.sort(key=lambda g: g.length)
    return ManifoldData(
        label=label,
        volume=volume,
        cutoff=cutoff,
        geodesics=tuple(classes),
        orientation_factor=1,
        primitives_only=False,
        metadata={
            "synthetic": True,
            "construction": "inverse trace-formula fit",
            "family": {"delta": d, "n": n},
            "planted": [[t, mu] for t, mu in spectrum.atoms],
        },
    )


def planted_trace_check(M: ManifoldData, fam: SincSplineFamily,
                        spectrum: PlantedSpectrum) -> float:
    """Largest relative Gram deviation between the fitted manifold and the
    planted spectrum; diagnostic for fixture generation."""
    from .trace import gram_matrix

    a = gram_matrix(M, fam).matrix
    b = planted_gram(fam, spectrum).matrix
    return float(np.abs(a - b).max() / np.abs(b).max())
