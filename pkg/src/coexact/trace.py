"""Geometric-side evaluation of the trace formula and Gram-matrix assembly.

For an even real test function H with transform Hhat, the identity relating
the two sides reads

    -1/2 Hhat(0) + 1/2 sum_j Hhat(t_j)
        = vol/(2 pi) (H(0) - H''(0)) + sum_over_classes weight * H(length),

where t_j runs over square roots of coexact 1-form eigenvalues counted with
multiplicity.  Everything here evaluates the right side from a manifold's
length spectrum and rearranges it into the spectral sum on the left.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .spectrum import ManifoldData
from .testfuncs import (
    PairConvolution,
    SincSplineFamily,
    SupportError,
    TestFunction,
    bspline4_array,
    bspline4_d2_array,
)

TWO_PI = 2.0 * math.pi

DEFAULT_CHUNK = 4096


class SingularGramError(ArithmeticError):
    """Cholesky factorization hit a nonpositive pivot."""

    def __init__(self, pivot_index: int, pivot: float):
        self.pivot_index = pivot_index
        self.pivot = pivot
        super().__init__(f"Gram matrix not positive definite: pivot {pivot_index} = {pivot}")


def compensated_sum(values: np.ndarray, chunk_size: int = DEFAULT_CHUNK) -> float:
    """Deterministic compensated summation in array order.

    Each chunk is reduced with exact (Shewchuk) float summation and the chunk
    partials are combined the same way, so results are bitwise reproducible
    across runs and agree across chunk sizes to full precision.
    """
    if chunk_size <= 0:
        raise ValueError("chunk_size must be positive")
    n = len(values)
    if n == 0:
        return 0.0
    partials = [math.fsum(values[i: i + chunk_size]) for i in range(0, n, chunk_size)]
    return math.fsum(partials)


@dataclass(frozen=True)
class TraceEvaluation:
    """One evaluation of the geometric side, rearranged into the spectral sum.

    ``spectral_sum`` equals 2 * (identity_term + regular_sum) + Hhat(0) by
    construction; the equality with the true eigenvalue sum only holds when
    ``truncation_flag`` is false (the support of H fit inside the cutoff).
    """

    identity_term: float
    trivial_rep_term: float
    regular_sum: float
    spectral_sum: float
    term_count: int
    truncation_flag: bool


def geometric_side(M: ManifoldData, H: TestFunction, allow_truncation: bool = False,
                   chunk_size: int = DEFAULT_CHUNK) -> TraceEvaluation:
    """Evaluate volume term plus geodesic sum for the test function H.

    Raises :class:`SupportError` when H's support exceeds the enumeration
    cutoff and ``allow_truncation`` is not set, since the geodesic sum is
    then incomplete.
    """
    support = H.support_radius()
    truncated = support > M.cutoff * (1.0 + 1e-12)
    if truncated and not allow_truncation:
        raise SupportError(
            f"test function support {support} exceeds spectrum cutoff {M.cutoff}; "
            "pass allow_truncation to evaluate the truncated sum"
        )
    lengths = M.lengths()
    weights = M.weights()
    if math.isfinite(support):
        mask = lengths <= support
        lengths = lengths[mask]
        weights = weights[mask]
    terms = weights * np.asarray(H.values(lengths))
    regular = compensated_sum(terms, chunk_size)
    identity = M.volume * (H.value_at(0.0) - H.second_derivative_at_zero()) / TWO_PI
    trivial = 0.5 * H.fourier_at(0.0)
    return TraceEvaluation(
        identity_term=identity,
        trivial_rep_term=trivial,
        regular_sum=regular,
        spectral_sum=2.0 * (identity + regular + trivial),
        term_count=int(len(terms)),
        truncation_flag=bool(truncated),
    )


def spectral_sum(M: ManifoldData, H: TestFunction, allow_truncation: bool = False,
                 chunk_size: int = DEFAULT_CHUNK) -> float:
    """sum_j Hhat(t_j) over the coexact spectrum, with multiplicity."""
    return geometric_side(M, H, allow_truncation, chunk_size).spectral_sum


# -- Gram system -------------------------------------------------------------


@dataclass(frozen=True)
class GramSystem:
    """Symmetric matrix A with A[a,b] = sum_j hhat_a(t_j) hhat_b(t_j).

    With this convention, <A x, x> = sum_j (sum_k x_k hhat_k(t_j))^2 is the
    spectral sum of the convolution square with coefficients x; the identity
    is enforced by tests rather than assumed.
    """

    matrix: np.ndarray
    family: SincSplineFamily
    label: str = ""
    ridge: float = 0.0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        a = np.asarray(self.matrix, dtype=np.float64)
        m = self.family.size
        if a.shape != (m, m):
            raise ValueError(f"matrix shape {a.shape} does not match family size {m}")
        if not np.isfinite(a).all():
            raise ValueError("Gram matrix has non-finite entries")
        object.__setattr__(self, "matrix", 0.5 * (a + a.T))

    def with_ridge(self, eps: float) -> "GramSystem":
        """Exploration aid only: results computed from a ridged system are
        never certificates."""
        if eps <= 0:
            raise ValueError("ridge must be positive")
        bump = eps * np.trace(self.matrix) / self.family.size
        return GramSystem(
            matrix=self.matrix + bump * np.eye(self.family.size),
            family=self.family,
            label=self.label,
            ridge=eps,
        )

    def cholesky(self) -> np.ndarray:
        """Lower-triangular factor, computed once and cached; raises
        :class:`SingularGramError` with the offending pivot index."""
        L = self._cache.get("chol")
        if L is None:
            L = _cholesky_lower(self.matrix)
            self._cache["chol"] = L
        return L

    def pivots(self) -> np.ndarray:
        """Diagonal pivots of the LDL^T scan, usable as a semidefiniteness
        diagnostic even when factorization would fail."""
        return _ldl_pivots(self.matrix)

    def is_psd(self, tol_scale: float = 1e-10) -> bool:
        return bool(self.pivots().min() > -tol_scale * np.trace(self.matrix))

    def condition_estimate(self) -> float:
        return float(np.linalg.cond(self.matrix))


def _cholesky_lower(a: np.ndarray) -> np.ndarray:
    n = a.shape[0]
    L = np.zeros_like(a)
    for j in range(n):
        d = a[j, j] - L[j, :j] @ L[j, :j]
        if not (d > 0 and math.isfinite(d)):
            raise SingularGramError(pivot_index=j, pivot=float(d))
        L[j, j] = math.sqrt(d)
        if j + 1 < n:
            L[j + 1:, j] = (a[j + 1:, j] - L[j + 1:, :j] @ L[j, :j]) / L[j, j]
    return L


def _ldl_pivots(a: np.ndarray) -> np.ndarray:
    n = a.shape[0]
    L = np.eye(n)
    d = np.zeros(n)
    for j in range(n):
        d[j] = a[j, j] - (L[j, :j] ** 2) @ d[:j]
        if d[j] == 0.0:
            d[j + 1:] = 0.0
            break
        if j + 1 < n:
            L[j + 1:, j] = (a[j + 1:, j] - L[j + 1:, :j] * d[:j] @ L[j, :j]) / d[j]
    return d


def gram_matrix(M: ManifoldData, fam: SincSplineFamily,
                chunk_size: int = DEFAULT_CHUNK) -> GramSystem:
    """Assemble the Gram system from the shared translate sums.

    Every pair function (h_a * h_b) is a four-term combination of translates
    (h*h)(. + m delta); the geodesic sum against each distinct translate is
    computed once and the pairs are recombined, so the geodesic list is
    traversed ~4n times instead of ~(n+1)^2 times.
    """
    fam.require_within(M.cutoff)
    d, n = fam.delta, fam.n
    lengths = M.lengths()
    weights = M.weights()

    # S[m] = sum_i w_i (h*h)(l_i + m delta) for m = -2n..2n
    s = np.empty(4 * n + 1)
    for m in range(-2 * n, 2 * n + 1):
        s[m + 2 * n] = compensated_sum(weights * bspline4_array(d, lengths + m * d), chunk_size)
    ms = np.arange(0, 2 * n + 1)
    t_even = 0.5 * (s[2 * n + ms] + s[2 * n - ms])

    g0 = bspline4_array(d, ms * d)
    g2 = bspline4_d2_array(d, ms * d)
    id_even = M.volume / TWO_PI * (g0 - g2)

    a_idx = np.arange(n + 1)
    sum_idx = a_idx[:, None] + a_idx[None, :]
    diff_idx = np.abs(a_idx[:, None] - a_idx[None, :])
    matrix = (
        2.0 * (0.5 * (id_even[sum_idx] + id_even[diff_idx])
               + 0.5 * (t_even[sum_idx] + t_even[diff_idx]))
        + 1.0
    )
    if not np.isfinite(matrix).all():
        raise ArithmeticError("non-finite entry in Gram assembly")
    return GramSystem(matrix=matrix, family=fam, label=M.label)


def gram_matrix_direct(M: ManifoldData, fam: SincSplineFamily,
                       chunk_size: int = DEFAULT_CHUNK) -> GramSystem:
    """Reference path: every entry evaluated independently as the spectral sum
    of the pair convolution.  Quadratically slower; kept as the oracle for the
    shared-translate assembly."""
    fam.require_within(M.cutoff)
    m = fam.size
    a = np.empty((m, m))
    for i in range(m):
        for j in range(i, m):
            a[i, j] = a[j, i] = spectral_sum(
                M, PairConvolution(fam, i, j), chunk_size=chunk_size
            )
    return GramSystem(matrix=a, family=fam, label=M.label)


def gram_quadratic_form(G: GramSystem, x: np.ndarray) -> float:
    """<A x, x>; equals the spectral sum of the combined square with
    coefficients x (the convention-pinning identity)."""
    x = np.asarray(x, dtype=np.float64)
    return float(x @ G.matrix @ x)


def solve_factorized(G: GramSystem, columns: np.ndarray) -> np.ndarray:
    """Given columns c, return <A^-1 c, c> per column using the cached factor."""
    L = G.cholesky()
    y = solve_triangular(L, columns, lower=True, check_finite=False)
    return np.einsum("ij,ij->j", y, y)
