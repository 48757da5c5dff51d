import math

import numpy as np
import pytest

from coexact import (
    GeodesicClass,
    GramSystem,
    ManifoldData,
    SincSplineFamily,
    SingularGramError,
    SupportError,
    combined_test_function,
    compensated_sum,
    gaussian_probe,
    geometric_side,
    gram_matrix,
    gram_matrix_direct,
    gram_quadratic_form,
    spectral_sum,
)
from coexact.planted import PlantedSpectrum, planted_gram, weyl_tail
from coexact.testfuncs import PairConvolution

from .conftest import planted_of

TWO_PI = 2.0 * math.pi


class _Scaled:
    """s * H, for linearity checks."""

    def __init__(self, inner, s):
        self.inner, self.s = inner, s

    def value_at(self, x):
        return self.s * self.inner.value_at(x)

    def values(self, xs):
        return self.s * self.inner.values(xs)

    def second_derivative_at_zero(self):
        return self.s * self.inner.second_derivative_at_zero()

    def fourier_at(self, t):
        return self.s * self.inner.fourier_at(t)

    def fourier_values(self, ts):
        return self.s * self.inner.fourier_values(ts)

    def fourier_derivative_at(self, t):
        return self.s * self.inner.fourier_derivative_at(t)

    def support_radius(self):
        return self.inner.support_radius()


def empty_manifold(volume=1.0, cutoff=6.5):
    return ManifoldData(label="empty", volume=volume, cutoff=cutoff, geodesics=())


# -- compensated summation -------------------------------------------------------


def test_compensated_sum_chunk_contract():
    rng = np.random.default_rng(0)
    values = rng.standard_normal(10_000) * np.exp(rng.uniform(-8, 8, 10_000))
    exact = math.fsum(values)
    assert compensated_sum(values, 10_000) == exact
    for chunk in (1, 7, 512, 4096):
        fixed = compensated_sum(values, chunk)
        assert fixed == compensated_sum(values, chunk)  # bitwise at fixed chunking
        assert fixed == pytest.approx(exact, rel=1e-12)


def test_compensated_sum_beats_naive_on_cancellation():
    big = np.asarray([1e16, 1.0, -1e16, 1.0] * 100)
    assert compensated_sum(big) == 200.0


def test_compensated_sum_empty():
    assert compensated_sum(np.asarray([])) == 0.0


# -- geometric side -----------------------------------------------------------------


def test_empty_spectrum_zero_function(family):
    H = combined_test_function(family, np.zeros(20))
    ev = geometric_side(empty_manifold(), H)
    assert ev.identity_term == 0.0
    assert ev.regular_sum == 0.0
    assert ev.spectral_sum == ev.trivial_rep_term == 0.0
    assert ev.term_count == 0


def test_empty_spectrum_unit_function(family):
    H = combined_test_function(family, np.eye(20)[0])
    ev = geometric_side(empty_manifold(volume=2.0), H)
    expected_identity = 2.0 * (H.value_at(0.0) - H.second_derivative_at_zero()) / TWO_PI
    assert ev.identity_term == pytest.approx(expected_identity, rel=1e-14)
    assert ev.spectral_sum == pytest.approx(2.0 * expected_identity + 1.0, rel=1e-14)
    assert not ev.truncation_flag


def test_assembly_identity_holds_by_construction(lspace_fixture, family):
    H = combined_test_function(family, np.random.default_rng(1).standard_normal(20))
    ev = geometric_side(lspace_fixture, H)
    assert ev.spectral_sum == pytest.approx(
        2.0 * (ev.identity_term + ev.regular_sum) + H.fourier_at(0.0), rel=1e-13)
    assert ev.trivial_rep_term == pytest.approx(0.5 * H.fourier_at(0.0), rel=1e-15)


def test_spectral_sum_linearity(lspace_fixture, family):
    H = combined_test_function(family, np.random.default_rng(2).standard_normal(20))
    one = spectral_sum(lspace_fixture, H)
    two = spectral_sum(lspace_fixture, _Scaled(H, 2.0))
    assert two == pytest.approx(2.0 * one, rel=1e-12)
    zero = spectral_sum(lspace_fixture, _Scaled(H, 0.0))
    assert zero == 0.0


def test_support_violation_raises(family):
    data = empty_manifold(cutoff=4.0)
    H = combined_test_function(family, np.eye(20)[0])  # support 6.5
    with pytest.raises(SupportError, match="support"):
        geometric_side(data, H)
    ev = geometric_side(data, H, allow_truncation=True)
    assert ev.truncation_flag


def test_gaussian_probe_always_truncates(lspace_fixture):
    ev = geometric_side(lspace_fixture, gaussian_probe(0.7), allow_truncation=True)
    assert ev.truncation_flag
    assert ev.term_count == len(lspace_fixture.geodesics)


def test_exactness_under_support_extension(family):
    rng = np.random.default_rng(3)
    near = [GeodesicClass(length=float(l), holonomy=float(h))
            for l, h in zip(np.sort(rng.uniform(0.6, 6.4, 40)), rng.uniform(-3, 3, 40))]
    far = [GeodesicClass(length=float(l), holonomy=float(h))
           for l, h in zip(np.sort(rng.uniform(6.6, 12.9, 40)), rng.uniform(-3, 3, 40))]
    small = ManifoldData(label="s", volume=1.3, cutoff=6.5, geodesics=tuple(near))
    large = ManifoldData(label="l", volume=1.3, cutoff=13.0,
                         geodesics=tuple(sorted(near + far, key=lambda g: g.length)))
    H = combined_test_function(family, rng.standard_normal(20))  # support 6.5
    a = geometric_side(small, H)
    b = geometric_side(large, H)
    assert a.spectral_sum == pytest.approx(b.spectral_sum, abs=1e-12, rel=1e-12)
    assert b.term_count == a.term_count  # the far classes sit outside the support


def test_geodesic_terms_skipped_beyond_support(family):
    small_support = PairConvolution(family, 0, 0)  # support 4 delta
    data = ManifoldData(
        label="t", volume=1.0, cutoff=6.5,
        geodesics=(
            GeodesicClass(length=0.3, holonomy=0.1),
            GeodesicClass(length=5.0, holonomy=0.2),
        ),
    )
    ev = geometric_side(data, small_support)
    assert ev.term_count == 1


def test_chunk_size_does_not_change_results(bulk_fixture, family):
    H = combined_test_function(family, np.random.default_rng(5).standard_normal(20))
    a = geometric_side(bulk_fixture, H, chunk_size=512)
    b = geometric_side(bulk_fixture, H, chunk_size=8192)
    assert a.regular_sum == pytest.approx(b.regular_sum, abs=1e-12, rel=1e-12)


def test_repeated_evaluation_is_bitwise_deterministic(lspace_fixture, family):
    H = combined_test_function(family, np.random.default_rng(6).standard_normal(20))
    a = geometric_side(lspace_fixture, H)
    b = geometric_side(lspace_fixture, H)
    assert a == b


# -- Gram systems ----------------------------------------------------------------------


def test_gram_requires_family_inside_cutoff(lspace_fixture):
    with pytest.raises(SupportError):
        gram_matrix(lspace_fixture, SincSplineFamily(delta=0.2, n=19))


def test_gram_empty_spectrum_is_positive_definite(family):
    G = gram_matrix(empty_manifold(), family)
    assert G.is_psd()
    G.cholesky()  # identity-plus-mass terms keep it PD outright


def test_gram_symmetry_and_psd_on_fixtures(lspace_fixture, nonlspace_fixture, family):
    for data in (lspace_fixture, nonlspace_fixture):
        G = gram_matrix(data, family)
        assert np.array_equal(G.matrix, G.matrix.T)
        assert G.is_psd()
        assert np.isfinite(G.condition_estimate())


def test_gram_two_paths_agree(lspace_fixture, family):
    fast = gram_matrix(lspace_fixture, family).matrix
    slow = gram_matrix_direct(lspace_fixture, family).matrix
    scale = np.abs(slow).max()
    assert np.abs(fast - slow).max() <= 1e-10 * scale


def test_gram_matches_planted_ground_truth(lspace_fixture, family):
    G = gram_matrix(lspace_fixture, family)
    P = planted_gram(family, planted_of(lspace_fixture))
    assert np.abs(G.matrix - P.matrix).max() <= 1e-11 * np.abs(P.matrix).max()


def test_quadratic_form_identity(nonlspace_fixture, family):
    G = gram_matrix(nonlspace_fixture, family)
    rng = np.random.default_rng(7)
    for _ in range(20):
        x = rng.standard_normal(20)
        qf = gram_quadratic_form(G, x)
        ss = spectral_sum(nonlspace_fixture, combined_test_function(family, x))
        assert qf == pytest.approx(ss, rel=1e-9)


def test_spectral_sums_of_squares_nonnegative(lspace_fixture, nonlspace_fixture, family):
    rng = np.random.default_rng(8)
    for data in (lspace_fixture, nonlspace_fixture):
        for _ in range(10):
            H = combined_test_function(family, rng.standard_normal(20))
            ev = geometric_side(data, H)
            scale = float(np.abs(data.weights() * H.values(data.lengths())).sum()) + abs(
                ev.identity_term) + 1.0
            assert ev.spectral_sum >= -1e-9 * scale


def test_cholesky_failure_reports_pivot(family):
    c = np.ones(20)
    singular = np.outer(c, c)
    G = GramSystem(matrix=singular, family=family, label="rank1")
    with pytest.raises(SingularGramError) as err:
        G.cholesky()
    assert err.value.pivot_index == 1
    assert not math.isnan(err.value.pivot)


def test_pivot_scan_flags_indefinite(family):
    a = np.eye(20)
    a[3, 3] = -1.0
    G = GramSystem(matrix=a, family=family, label="indef")
    assert not G.is_psd()


def test_with_ridge_marks_system(family):
    G = gram_matrix(empty_manifold(), family)
    R = G.with_ridge(1e-8)
    assert R.ridge == 1e-8
    assert np.trace(R.matrix) > np.trace(G.matrix)
    with pytest.raises(ValueError):
        G.with_ridge(0.0)


# -- planted constructions ----------------------------------------------------------------


def test_planted_gram_small_case_by_hand(family):
    spec = PlantedSpectrum(atoms=((0.0, 2.0),))
    G = planted_gram(family, spec)
    # c_0 is all ones, so the matrix is 2 * ones
    assert np.allclose(G.matrix, 2.0 * np.ones((20, 20)), atol=1e-14)


def test_planted_spectral_sum_matches_fixture_trace(nonlspace_fixture, family):
    spec = planted_of(nonlspace_fixture)
    rng = np.random.default_rng(9)
    for _ in range(5):
        H = combined_test_function(family, rng.standard_normal(20))
        assert spectral_sum(nonlspace_fixture, H) == pytest.approx(
            spec.spectral_sum(H), rel=1e-9, abs=1e-11)


def test_weyl_tail_counting():
    tail = weyl_tail(1.0, 0.0, 10.0)
    from coexact.planted import WEYL_CUBIC
    assert len(tail) == int(WEYL_CUBIC * 1000.0)
    ts = [t for t, _ in tail]
    assert ts == sorted(ts)
    assert all(0 < t <= 10.0 for t in ts)


def test_bulk_fixture_matches_its_planted_spectrum(bulk_fixture, family):
    G = gram_matrix(bulk_fixture, family)
    P = planted_gram(family, planted_of(bulk_fixture))
    assert np.abs(G.matrix - P.matrix).max() <= 1e-9 * np.abs(P.matrix).max()
