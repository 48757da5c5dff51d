"""Test-function families for the trace formula.

Three families are provided, all even and real-valued:

* the sinc-spline family built from translates of a triangle kernel, whose
  convolution squares have exact piecewise-cubic values and closed-form
  Fourier transforms;
* a bump convolution square evaluated by adaptive quadrature;
* a Gaussian probe with unbounded support, used only diagnostically.

Fourier convention throughout: ``Hhat(t) = integral H(x) exp(-i t x) dx``,
so ``Hhat(0)`` is the total mass of ``H``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Protocol, Sequence

import numpy as np
from scipy.integrate import quad

SQRT_TWO_PI = math.sqrt(2.0 * math.pi)


class SupportError(ValueError):
    """A compactly supported function does not fit inside the required bound."""


class TestFunction(Protocol):
    """Capability record for an even real test function H."""

    def value_at(self, x: float) -> float: ...

    def values(self, xs: np.ndarray) -> np.ndarray: ...

    def second_derivative_at_zero(self) -> float: ...

    def fourier_at(self, t: float) -> float: ...

    def fourier_values(self, ts: np.ndarray) -> np.ndarray: ...

    def fourier_derivative_at(self, t: float) -> float: ...

    def support_radius(self) -> float: ...


# -- stable sinc ----------------------------------------------------------

_SINC_SMALL = 1e-4


def _sinc(u: np.ndarray) -> np.ndarray:
    """sin(u)/u with the removable singularity filled by a degree-6 Taylor
    polynomial for |u| < 1e-4 (exact to well below 1e-15 there)."""
    u = np.asarray(u, dtype=np.float64)
    small = np.abs(u) < _SINC_SMALL
    safe = np.where(small, 1.0, u)
    out = np.sin(safe) / safe
    u2 = u * u
    taylor = 1.0 - u2 / 6.0 + u2 * u2 / 120.0 - u2 * u2 * u2 / 5040.0
    return np.where(small, taylor, out)


def _sinc_prime(u: np.ndarray) -> np.ndarray:
    """d/du sin(u)/u = (cos u - sinc u)/u, series-expanded for small |u|."""
    u = np.asarray(u, dtype=np.float64)
    small = np.abs(u) < 1e-3
    safe = np.where(small, 1.0, u)
    out = (np.cos(safe) - np.sin(safe) / safe) / safe
    u2 = u * u
    taylor = u * (-1.0 / 3.0 + u2 / 30.0 - u2 * u2 / 840.0)
    return np.where(small, taylor, out)


# -- 4-fold box convolution (cardinal cubic B-spline) ----------------------


def _bspline3(y: np.ndarray) -> np.ndarray:
    """Centered cardinal cubic B-spline: 4-fold self-convolution of the unit
    box, supported on [-2, 2] with unit mass."""
    ay = np.abs(np.asarray(y, dtype=np.float64))
    out = np.zeros_like(ay)
    inner = ay <= 1.0
    mid = (ay > 1.0) & (ay < 2.0)
    a = ay[inner]
    out[inner] = 2.0 / 3.0 - a * a + 0.5 * a * a * a
    m = 2.0 - ay[mid]
    out[mid] = m * m * m / 6.0
    return out


def _bspline3_d2(y: np.ndarray) -> np.ndarray:
    """Second derivative of :func:`_bspline3`; continuous (the spline is C^2)."""
    ay = np.abs(np.asarray(y, dtype=np.float64))
    out = np.zeros_like(ay)
    inner = ay <= 1.0
    mid = (ay > 1.0) & (ay < 2.0)
    out[inner] = -2.0 + 3.0 * ay[inner]
    out[mid] = 2.0 - ay[mid]
    return out


def bspline4_array(delta: float, x: np.ndarray) -> np.ndarray:
    """(h*h)(x) for the triangle kernel h of half-width 2*delta; exact
    piecewise cubic, no quadrature.  Supported on [-4 delta, 4 delta]."""
    return _bspline3(np.asarray(x) / (2.0 * delta)) / (2.0 * delta)


def bspline4_eval(delta: float, x: float) -> float:
    """Scalar convenience wrapper around :func:`bspline4_array`."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    return float(bspline4_array(delta, np.asarray([x]))[0])


def bspline4_d2_array(delta: float, x: np.ndarray) -> np.ndarray:
    """Second derivative of the 4-fold box convolution."""
    return _bspline3_d2(np.asarray(x) / (2.0 * delta)) / (8.0 * delta**3)


def bspline4_d2_eval(delta: float, x: float) -> float:
    return float(bspline4_d2_array(delta, np.asarray([x]))[0])


# -- sinc-spline family ----------------------------------------------------


@dataclass(frozen=True)
class SincSplineFamily:
    """Translate family: h_k = (h(. - k delta) + h(. + k delta))/2 for the
    triangle kernel h, k = 0..n.  Convolution squares of members span the
    admissible test functions used by the exclusion engine."""

    delta: float
    n: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.delta) and self.delta > 0):
            raise ValueError(f"delta must be positive, got {self.delta}")
        if self.n < 0 or int(self.n) != self.n:
            raise ValueError(f"n must be a nonnegative integer, got {self.n}")

    @property
    def size(self) -> int:
        return self.n + 1

    @property
    def support_bound(self) -> float:
        """Support radius (2n+4) delta of every convolution square in the span."""
        return (2 * self.n + 4) * self.delta

    def require_within(self, cutoff: float) -> None:
        if self.support_bound > cutoff * (1.0 + 1e-12):
            raise SupportError(
                f"family support (2n+4)*delta = {self.support_bound} exceeds cutoff {cutoff}"
            )

    @classmethod
    def for_cutoff(cls, cutoff: float, n: int) -> "SincSplineFamily":
        """Family with the largest admissible spacing, delta = cutoff/(2n+4)."""
        return cls(delta=cutoff / (2 * n + 4), n=n)


def family_member_eval(fam: SincSplineFamily, k: int, x: float) -> float:
    """h_k(x): symmetrized translate of the triangle kernel, piecewise linear,
    supported on [-(k+2) delta, (k+2) delta]."""
    if not 0 <= k <= fam.n:
        raise ValueError(f"member index {k} out of range 0..{fam.n}")
    d = fam.delta

    def tri(u: float) -> float:
        return max(0.0, 2.0 * d - abs(u)) / (4.0 * d * d)

    return 0.5 * (tri(x - k * d) + tri(x + k * d))


def pair_convolution_eval(fam: SincSplineFamily, a: int, b: int, x: float) -> float:
    """(h_a * h_b)(x) as the exact four-term sum of translates of h*h."""
    if not (0 <= a <= fam.n and 0 <= b <= fam.n):
        raise ValueError(f"member index ({a},{b}) out of range 0..{fam.n}")
    d = fam.delta
    xs = np.asarray([x + (a + b) * d, x + (a - b) * d, x + (b - a) * d, x - (a + b) * d])
    return float(0.25 * bspline4_array(d, xs).sum())


def constraint_vector(fam: SincSplineFamily, t: float) -> np.ndarray:
    """Vector of member transforms (hhat_k(t))_{k=0..n} =
    sinc(delta t)^2 cos(k delta t)."""
    return constraint_matrix(fam, np.asarray([t]))[:, 0]


def constraint_matrix(fam: SincSplineFamily, ts: np.ndarray) -> np.ndarray:
    """Columns are constraint vectors for each t; shape (n+1, len(ts))."""
    ts = np.asarray(ts, dtype=np.float64)
    u = fam.delta * ts
    s2 = _sinc(u) ** 2
    k = np.arange(fam.size)[:, None]
    return s2[None, :] * np.cos(k * u[None, :])


@dataclass(frozen=True)
class PairConvolution:
    """h_a * h_b as a test function.  Its transform hhat_a * hhat_b is not
    sign-definite for a != b, so pairs are trace-formula inputs but never
    exclusion certificates on their own."""

    family: SincSplineFamily
    a: int
    b: int

    def __post_init__(self) -> None:
        if not (0 <= self.a <= self.family.n and 0 <= self.b <= self.family.n):
            raise ValueError(f"member index ({self.a},{self.b}) out of range 0..{self.family.n}")

    def values(self, xs: np.ndarray) -> np.ndarray:
        # translate pairs +-m are folded together, making evenness bit-exact
        xs = np.asarray(xs, dtype=np.float64)
        d = self.family.delta
        out = np.zeros_like(xs)
        for m in ((self.a + self.b) * d, abs(self.a - self.b) * d):
            out = out + (bspline4_array(d, xs + m) + bspline4_array(d, xs - m))
        return 0.25 * out

    def value_at(self, x: float) -> float:
        return float(self.values(np.asarray([x]))[0])

    def second_derivative_at_zero(self) -> float:
        d = self.family.delta
        ms = np.asarray([(self.a + self.b) * d, abs(self.a - self.b) * d])
        return float(0.5 * bspline4_d2_array(d, ms).sum())

    def fourier_values(self, ts: np.ndarray) -> np.ndarray:
        u = self.family.delta * np.asarray(ts, dtype=np.float64)
        return _sinc(u) ** 4 * np.cos(self.a * u) * np.cos(self.b * u)

    def fourier_at(self, t: float) -> float:
        return float(self.fourier_values(np.asarray([t]))[0])

    def fourier_derivative_values(self, ts: np.ndarray) -> np.ndarray:
        d = self.family.delta
        u = d * np.asarray(ts, dtype=np.float64)
        s = _sinc(u)
        sp = _sinc_prime(u)
        ca, cb = np.cos(self.a * u), np.cos(self.b * u)
        term = 4.0 * s**3 * sp * d * ca * cb
        term = term + s**4 * (-self.a * d * np.sin(self.a * u) * cb - self.b * d * ca * np.sin(self.b * u))
        return term

    def fourier_derivative_at(self, t: float) -> float:
        return float(self.fourier_derivative_values(np.asarray([t]))[0])

    def support_radius(self) -> float:
        return (self.a + self.b + 4) * self.family.delta


@dataclass(frozen=True)
class CombinedSquare:
    """H = (sum_k x_k h_k)^{*2}: the generic admissible test function of the
    sinc-spline family.

    Values are exact piecewise cubics assembled from translate weights; the
    transform is the square of sinc(delta t)^2 sum_k x_k cos(k delta t), hence
    nonnegative by construction.
    """

    family: SincSplineFamily
    coefficients: np.ndarray
    _weights: np.ndarray = field(repr=False, compare=False, default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        x = np.asarray(self.coefficients, dtype=np.float64)
        if x.shape != (self.family.size,):
            raise ValueError(
                f"coefficient vector has length {x.shape}, family needs {self.family.size}"
            )
        if not np.isfinite(x).all():
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coefficients", x)
        n = self.family.n
        w = np.zeros(4 * n + 1)
        for a in range(n + 1):
            for b in range(n + 1):
                q = 0.25 * x[a] * x[b]
                for m in (a + b, a - b, b - a, -a - b):
                    w[m + 2 * n] += q
        object.__setattr__(self, "_weights", w)

    def translate_weights(self) -> np.ndarray:
        """Weights w_m with H(x) = sum_m w_m (h*h)(x + m delta), m = -2n..2n."""
        return self._weights.copy()

    def values(self, xs: np.ndarray) -> np.ndarray:
        # w_m = w_{-m}; folding the +-m pairs keeps evenness bit-exact
        xs = np.asarray(xs, dtype=np.float64)
        d = self.family.delta
        n = self.family.n
        out = self._weights[2 * n] * bspline4_array(d, xs)
        for m in range(1, 2 * n + 1):
            w = self._weights[2 * n + m]
            if w != 0.0:
                out = out + w * (bspline4_array(d, xs + m * d) + bspline4_array(d, xs - m * d))
        return out

    def value_at(self, x: float) -> float:
        return float(self.values(np.asarray([x]))[0])

    def second_derivative_at_zero(self) -> float:
        n = self.family.n
        ms = np.arange(0, 2 * n + 1) * self.family.delta
        folded = self._weights[2 * n:].copy()
        folded[1:] *= 2.0
        return float(folded @ bspline4_d2_array(self.family.delta, ms))

    def fourier_root_values(self, ts: np.ndarray) -> np.ndarray:
        """sinc(delta t)^2 sum_k x_k cos(k delta t); H's transform is its square."""
        u = self.family.delta * np.asarray(ts, dtype=np.float64)
        k = np.arange(self.family.size)[:, None]
        return _sinc(u) ** 2 * (self.coefficients @ np.cos(k * u[None, :]))

    def fourier_values(self, ts: np.ndarray) -> np.ndarray:
        return self.fourier_root_values(ts) ** 2

    def fourier_at(self, t: float) -> float:
        return float(self.fourier_values(np.asarray([t]))[0])

    def fourier_derivative_values(self, ts: np.ndarray) -> np.ndarray:
        d = self.family.delta
        u = d * np.asarray(ts, dtype=np.float64)
        k = np.arange(self.family.size)[:, None]
        s = _sinc(u)
        sp = _sinc_prime(u)
        csum = self.coefficients @ np.cos(k * u[None, :])
        ssum = self.coefficients @ (k * np.sin(k * u[None, :]))
        root = s * s * csum
        droot = 2.0 * s * sp * d * csum - s * s * d * ssum
        return 2.0 * root * droot

    def fourier_derivative_at(self, t: float) -> float:
        return float(self.fourier_derivative_values(np.asarray([t]))[0])

    def support_radius(self) -> float:
        return self.family.support_bound


def combined_test_function(fam: SincSplineFamily, coefficients: Sequence[float]) -> CombinedSquare:
    """Build the convolution square of sum_k x_k h_k."""
    return CombinedSquare(family=fam, coefficients=np.asarray(coefficients, dtype=np.float64))


# -- bump convolution square ------------------------------------------------


def _bump(u: float) -> float:
    """exp(-1/(1-u^2)) on (-1, 1), identically zero outside."""
    if abs(u) >= 1.0:
        return 0.0
    return math.exp(-1.0 / (1.0 - u * u))


_QUAD_ABS_TOL = 1e-12


@dataclass
class BumpSquare:
    """H(x) = (beta*beta)(scale*x) for the standard bump beta, computed by
    adaptive quadrature to absolute tolerance 1e-12.

    The transform equals betahat(t/scale)^2/scale, nonnegative; the literal
    support radius is 2/scale.
    """

    scale: float = 2.5
    _fourier_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if not (math.isfinite(self.scale) and self.scale > 0):
            raise ValueError(f"scale must be positive, got {self.scale}")

    def _self_convolution(self, y: float) -> float:
        """(beta*beta)(y) by adaptive quadrature."""
        ay = abs(y)
        if ay >= 2.0:
            return 0.0
        lo, hi = max(-1.0, ay - 1.0), min(1.0, ay + 1.0)
        val, err = quad(lambda u: _bump(u) * _bump(ay - u), lo, hi,
                        epsabs=_QUAD_ABS_TOL, epsrel=0.0, limit=200)
        if err > 100.0 * _QUAD_ABS_TOL:
            raise ArithmeticError(
                f"bump convolution quadrature did not converge at {y}: error estimate {err}"
            )
        return val

    def value_at(self, x: float) -> float:
        return self._self_convolution(self.scale * x)

    def values(self, xs: np.ndarray) -> np.ndarray:
        return np.asarray([self.value_at(float(x)) for x in np.asarray(xs)])

    def second_derivative_at_zero(self) -> float:
        """Central differences in the convolution variable, extrapolated by a
        three-stage Richardson table from h = 0.05; lands around 1e-10 of the
        true value while staying above the quadrature noise floor."""
        s = self.scale
        base = self._self_convolution(0.0)

        def centered(h: float) -> float:
            return 2.0 * (self._self_convolution(h) - base) / (h * h)

        table = [centered(0.05 / 2**k) for k in range(4)]
        for lev in range(1, 4):
            table = [
                (4**lev * table[i + 1] - table[i]) / (4**lev - 1)
                for i in range(len(table) - 1)
            ]
        return s * s * table[0]

    def _bump_transform(self, s: float) -> float:
        """betahat(s) = 2 integral_0^1 beta(u) cos(s u) du."""
        val, err = quad(lambda u: _bump(u) * math.cos(s * u), 0.0, 1.0,
                        epsabs=_QUAD_ABS_TOL, epsrel=0.0, limit=200)
        if err > 100.0 * _QUAD_ABS_TOL:
            raise ArithmeticError(
                f"bump transform quadrature did not converge at {s}: error estimate {err}"
            )
        return 2.0 * val

    def fourier_at(self, t: float) -> float:
        key = abs(float(t))
        got = self._fourier_cache.get(key)
        if got is None:
            got = self._bump_transform(key / self.scale) ** 2 / self.scale
            self._fourier_cache[key] = got
        return got

    def fourier_values(self, ts: np.ndarray) -> np.ndarray:
        return np.asarray([self.fourier_at(float(t)) for t in np.asarray(ts)])

    def fourier_derivative_at(self, t: float) -> float:
        h = 1e-5
        return (self.fourier_at(t + h) - self.fourier_at(t - h)) / (2.0 * h)

    def support_radius(self) -> float:
        return 2.0 / self.scale


def bump_square(scale: float = 2.5) -> BumpSquare:
    """Bump convolution square scaled so the support radius is 2/scale."""
    return BumpSquare(scale=scale)


# -- Gaussian probe ----------------------------------------------------------


@dataclass(frozen=True)
class GaussianProbe:
    """H_a(x) = (x^2 - 1 + a^2) exp(-x^2/2), whose transform
    sqrt(2 pi) (a^2 - t^2) exp(-t^2/2) changes sign at |t| = a.

    Unbounded support: trace-formula sums against it are always truncated and
    flagged accordingly.
    """

    a: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.a) and self.a > 0):
            raise ValueError(f"probe parameter must be positive, got {self.a}")

    def values(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.float64)
        return (xs * xs - 1.0 + self.a * self.a) * np.exp(-0.5 * xs * xs)

    def value_at(self, x: float) -> float:
        return float(self.values(np.asarray([x]))[0])

    def second_derivative_at_zero(self) -> float:
        return 3.0 - self.a * self.a

    def fourier_values(self, ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=np.float64)
        return SQRT_TWO_PI * (self.a * self.a - ts * ts) * np.exp(-0.5 * ts * ts)

    def fourier_at(self, t: float) -> float:
        return float(self.fourier_values(np.asarray([t]))[0])

    def fourier_derivative_values(self, ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=np.float64)
        return SQRT_TWO_PI * np.exp(-0.5 * ts * ts) * (-ts) * (2.0 + self.a * self.a - ts * ts)

    def fourier_derivative_at(self, t: float) -> float:
        return float(self.fourier_derivative_values(np.asarray([t]))[0])

    def support_radius(self) -> float:
        return math.inf

    def effective_radius(self, eps: float) -> float:
        """x beyond which |H_a| stays below eps, via the decreasing envelope
        (x^2 + |a^2-1|) exp(-x^2/2)."""
        if not 0 < eps < 1:
            raise ValueError("eps must be in (0, 1)")
        c = abs(self.a * self.a - 1.0)

        def env(x: float) -> float:
            return (x * x + c) * math.exp(-0.5 * x * x)

        lo = math.sqrt(2.0)
        if env(lo) < eps:
            return lo
        hi = 10.0
        while env(hi) >= eps:
            hi *= 2.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if env(mid) >= eps:
                lo = mid
            else:
                hi = mid
        return hi


def gaussian_probe(a: float) -> GaussianProbe:
    return GaussianProbe(a=a)


# -- admissibility diagnostic -------------------------------------------------


@lru_cache(maxsize=8)
def _gauss_nodes(order: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(order)


def admissibility_norm(H: TestFunction, sigma: float, window: float,
                       panel: float = 0.25, order: int = 8) -> float:
    """Truncated weighted Sobolev integral of the transform,

        integral_{-W}^{W} (Hhat^2 + Hhat'^2) (1 + t^2)^sigma dt,

    by composite Gauss-Legendre quadrature.  Callers judge convergence by
    comparing windows; see :func:`admissibility_report`.
    """
    if sigma <= 2.5:
        raise ValueError(f"sigma must exceed 5/2, got {sigma}")
    if window <= 0:
        raise ValueError("window must be positive")
    nodes, wts = _gauss_nodes(order)
    n_panels = max(1, int(math.ceil(window / panel)))
    edges = np.linspace(0.0, window, n_panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    ts = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    ws = (half[:, None] * wts[None, :]).ravel()
    fv = np.asarray(H.fourier_values(ts))
    deriv_batch = getattr(H, "fourier_derivative_values", None)
    if deriv_batch is not None:
        dv = np.asarray(deriv_batch(ts))
    else:
        dv = np.asarray([H.fourier_derivative_at(float(t)) for t in ts])
    integrand = (fv * fv + dv * dv) * (1.0 + ts * ts) ** sigma
    if not np.isfinite(integrand).all():
        raise ArithmeticError("non-finite value in admissibility integrand")
    return float(2.0 * (ws @ integrand))


@dataclass(frozen=True)
class AdmissibilityReport:
    sigma: float
    window: float
    norm: float
    norm_doubled: float
    ratio_minus_one: float
    converged: bool


def admissibility_report(H: TestFunction, sigma: float = 2.6, window: float = 1000.0,
                         ratio_tol: float = 1e-3) -> AdmissibilityReport:
    """Window-doubling convergence check of the weighted transform norm."""
    n1 = admissibility_norm(H, sigma, window)
    n2 = admissibility_norm(H, sigma, 2.0 * window)
    ratio = n2 / n1 - 1.0 if n1 > 0 else math.inf
    return AdmissibilityReport(
        sigma=sigma,
        window=window,
        norm=n1,
        norm_doubled=n2,
        ratio_minus_one=ratio,
        converged=bool(abs(ratio) < ratio_tol),
    )
