import math

import numpy as np
import pytest

from coexact import (
    GramSystem,
    SincSplineFamily,
    bump_square,
    combined_test_function,
    gram_matrix,
    j_value,
    naive_exclusion,
    scan,
    threshold_intervals,
)
from coexact.exclusion import ExclusionCurve
from coexact.spectrum import ManifoldData
from coexact.testfuncs import PairConvolution

from .conftest import NAIVE_SCALE, planted_of
from .oracles import qp_constrained_min, qp_projected_descent, random_spd


def gram_of(matrix, n=19):
    return GramSystem(matrix=np.asarray(matrix, dtype=float),
                      family=SincSplineFamily(delta=6.5 / 42.0, n=n), label="unit")


# -- j_value ---------------------------------------------------------------------


def test_j_value_identity_matrix_all_ones_constraint():
    # c at t = 0 is the all-ones vector, so <A^-1 c, c> = 20
    G = gram_of(np.eye(20))
    assert j_value(G, 0.0) == pytest.approx(1.0 / 20.0, rel=1e-14)


def test_j_value_two_by_two_hand_solve():
    G = GramSystem(matrix=np.diag([2.0, 8.0]),
                   family=SincSplineFamily(delta=6.5 / 8.0, n=1), label="2x2")
    # t = 0 gives c = (1, 1): J = 1/(1/2 + 1/8) = 1.6
    assert j_value(G, 0.0) == pytest.approx(1.6, rel=1e-14)


def test_j_value_matches_descent_oracle():
    rng = np.random.default_rng(21)
    A = random_spd(rng, 20, lo=1.0, hi=12.0)
    G = gram_of(A)
    t = 1.37
    from coexact.testfuncs import constraint_vector
    c = constraint_vector(G.family, t)
    assert j_value(G, t) == pytest.approx(qp_projected_descent(A, c), rel=1e-9)
    assert j_value(G, t) == pytest.approx(qp_constrained_min(A, c), rel=1e-11)


def test_j_value_rejects_negative_parameter():
    with pytest.raises(ValueError):
        j_value(gram_of(np.eye(20)), -0.1)


def test_j_value_degenerate_constraint_sentinel():
    # family with delta = pi/2 puts the common transform zero at t = 2
    G = GramSystem(matrix=np.eye(3), family=SincSplineFamily(delta=math.pi / 2.0, n=2),
                   label="degenerate")
    assert j_value(G, 2.0) == math.inf


# -- scan -------------------------------------------------------------------------


def test_scan_grid_and_positivity(lspace_fixture, family):
    G = gram_matrix(lspace_fixture, family)
    curve = scan(G)
    assert len(curve.t_grid) == 4001
    assert curve.t_grid[0] == 0.0 and curve.t_grid[-1] == 4.0
    assert (np.diff(curve.t_grid) > 0).all()
    assert curve.j_values.min() >= 0.0


def test_scan_refuses_degenerate_window():
    G = GramSystem(matrix=np.eye(3), family=SincSplineFamily(delta=math.pi / 2.0, n=2),
                   label="degenerate")
    with pytest.raises(ValueError, match="degenerate"):
        scan(G, 0.0, 2.5, 0.1)


def test_scan_matches_pointwise_j(lspace_fixture, family):
    G = gram_matrix(lspace_fixture, family)
    curve = scan(G, 0.0, 4.0, 0.25)
    for t, j in zip(curve.t_grid, curve.j_values):
        assert j == pytest.approx(j_value(G, float(t)), rel=1e-12)


def test_scan_factor_reuse_matches_fresh_solves(lspace_fixture, family):
    # one cached factorization across the 4001-point grid vs a fresh dense
    # solve per point
    from coexact.testfuncs import constraint_matrix

    G = gram_matrix(lspace_fixture, family)
    curve = scan(G, 0.0, 4.0, 1e-3)
    assert len(curve.t_grid) == 4001
    cols = constraint_matrix(family, curve.t_grid)
    fresh = 1.0 / np.einsum("ij,ij->j", np.linalg.solve(G.matrix, cols), cols)
    assert np.abs(curve.j_values - fresh).max() <= 1e-12 * np.abs(fresh).max()


def test_larger_family_never_raises_the_bound(lspace_fixture, family):
    # the bound is an infimum over a space that grows with n
    small = SincSplineFamily(delta=family.delta, n=9)
    big_curve = scan(gram_matrix(lspace_fixture, family))
    small_curve = scan(gram_matrix(lspace_fixture, small))
    assert (big_curve.j_values <= small_curve.j_values + 1e-9).all()


def test_curve_validation():
    with pytest.raises(ValueError, match="increasing"):
        ExclusionCurve(t_grid=np.asarray([0.0, 0.0, 1.0]), j_values=np.zeros(3),
                       family=SincSplineFamily(delta=0.1, n=1))


# -- threshold intervals -------------------------------------------------------------


def test_intervals_empty_when_level_above_curve(lspace_fixture, family):
    G = gram_matrix(lspace_fixture, family)
    curve = scan(G)
    top = float(curve.j_values.max())
    iv = threshold_intervals(G, level=top * 2.0, curve=curve)
    assert iv.intervals == ()


def test_intervals_bracket_planted_atoms(lspace_fixture, family):
    G = gram_matrix(lspace_fixture, family)
    iv = threshold_intervals(G)
    spec = planted_of(lspace_fixture)
    distinguished = [t for t, mu in spec.atoms if t < 4.0]
    for t in distinguished:
        assert iv.covers(t, slack=iv.tolerance)
    assert len(iv.intervals) >= 1
    for lo, hi in iv.intervals:
        assert lo <= hi


def test_intervals_disjoint_sorted_midpoint_above(nonlspace_fixture, family):
    G = gram_matrix(nonlspace_fixture, family)
    iv = threshold_intervals(G)
    flat = [x for pair in iv.intervals for x in pair]
    assert flat == sorted(flat)
    for lo, hi in iv.intervals:
        assert j_value(G, 0.5 * (lo + hi)) >= iv.level


def test_interval_endpoints_solve_level_equation(nonlspace_fixture, family):
    G = gram_matrix(nonlspace_fixture, family)
    iv = threshold_intervals(G)
    lo, hi = iv.intervals[0]
    for endpoint in (lo, hi):
        assert abs(j_value(G, endpoint) - iv.level) <= iv.level * 1e-3


def test_interval_clipped_at_window_edge(nonlspace_fixture, family):
    # the 3.2 atom sits at the edge of a window ending there
    G = gram_matrix(nonlspace_fixture, family)
    iv = threshold_intervals(G, t_max=3.2)
    assert iv.intervals[-1][1] == 3.2
    assert iv.window == (0.0, 3.2)


def test_intervals_seeded_from_supplied_curve(lspace_fixture, family):
    G = gram_matrix(lspace_fixture, family)
    curve = scan(G)
    a = threshold_intervals(G, curve=curve)
    b = threshold_intervals(G)
    assert a.intervals == b.intervals


def test_planted_soundness_j_at_atoms(lspace_fixture, nonlspace_fixture, family):
    # a declared parameter of multiplicity mu forces the bound >= mu there
    for data in (lspace_fixture, nonlspace_fixture):
        G = gram_matrix(data, family)
        for t, mu in planted_of(data).atoms:
            if t <= 4.0:
                assert j_value(G, float(t)) >= mu - 1e-9


def test_level_three_tightens_high_multiplicity_interval(lspace_fixture, family):
    # the multiplicity-3 atom at 3.05 survives a level-3 cut in a narrow window
    G = gram_matrix(lspace_fixture, family)
    lvl3 = threshold_intervals(G, level=3.0 - 1e-9)
    assert len(lvl3.intervals) == 1
    lo, hi = lvl3.intervals[0]
    assert lo <= 3.05 <= hi
    assert hi - lo < 0.05


# -- oracles over random systems --------------------------------------------------------


def test_j_value_oracle_agreement_random_batch():
    rng = np.random.default_rng(23)
    fam = SincSplineFamily(delta=6.5 / 42.0, n=19)
    from coexact.testfuncs import constraint_vector
    for _ in range(25):
        A = random_spd(rng, 20)
        G = GramSystem(matrix=A, family=fam, label="rand")
        t = float(rng.uniform(0.0, 4.0))
        c = constraint_vector(fam, t)
        assert j_value(G, t) == pytest.approx(qp_constrained_min(A, c), rel=1e-9)


# -- naive exclusion -------------------------------------------------------------------


def test_naive_trivial_zero_function(family):
    data = ManifoldData(label="e", volume=1.0, cutoff=6.5, geodesics=())
    H = combined_test_function(family, np.zeros(20))
    rep = naive_exclusion(data, H)
    assert rep.spectral_sum == 0.0
    assert rep.passed


def test_naive_passes_on_lspace_fixture(lspace_fixture):
    rep = naive_exclusion(lspace_fixture, bump_square(NAIVE_SCALE))
    oracle = planted_of(lspace_fixture).spectral_sum(bump_square(NAIVE_SCALE))
    assert rep.spectral_sum == pytest.approx(oracle, rel=1e-9)
    assert rep.passed
    assert rep.margin_ok
    assert rep.fourier_min > rep.spectral_sum


def test_naive_fails_on_nonlspace_fixture(nonlspace_fixture):
    rep = naive_exclusion(nonlspace_fixture, bump_square(NAIVE_SCALE))
    oracle = planted_of(nonlspace_fixture).spectral_sum(bump_square(NAIVE_SCALE))
    assert rep.spectral_sum == pytest.approx(oracle, rel=1e-9)
    assert not rep.passed
    assert not rep.margin_ok


def test_naive_rejects_sign_indefinite_function(nonlspace_fixture, family):
    mixed = PairConvolution(family, 0, 8)  # transform turns negative inside the window
    with pytest.raises(ValueError, match="nonnegative"):
        naive_exclusion(nonlspace_fixture, mixed)


def test_naive_requires_support_inside_cutoff(family):
    data = ManifoldData(label="small", volume=1.0, cutoff=3.0, geodesics=())
    from coexact.testfuncs import SupportError
    with pytest.raises(SupportError):
        naive_exclusion(data, bump_square(NAIVE_SCALE))  # support 5 > 3


# -- probe sign diagnostic ----------------------------------------------------------------


def test_probe_positive_sum_flags_low_parameter(nonlspace_fixture):
    # planted parameter 0.58 < 0.7 dominates the probe sum
    from coexact import gaussian_probe, geometric_side
    ev = geometric_side(nonlspace_fixture, gaussian_probe(0.7), allow_truncation=True)
    assert ev.truncation_flag
    assert ev.spectral_sum > 0
    oracle = planted_of(nonlspace_fixture).spectral_sum(gaussian_probe(0.7))
    assert ev.spectral_sum == pytest.approx(oracle, rel=1e-6)


def test_peak_count_diagnostic_reports(lspace_fixture, family):
    G = gram_matrix(lspace_fixture, family)
    curve = scan(G)
    counts = curve.peak_count_per_unit()
    assert len(counts) == 4
    assert all(isinstance(c, int) and c >= 0 for _, c in counts)


def test_census1_probe_sign_when_exported(family):
    from .conftest import fixture_path
    from coexact import gaussian_probe, geometric_side, load_manifold

    path = fixture_path("census1.json")
    if not path.exists():
        pytest.skip("census1.json not committed (no spectrum backend here)")
    data = load_manifold(path.read_text(encoding="utf-8"))
    # the first spectral parameter sits near 0.58 < 0.7, where the probe
    # transform is positive, so the truncated sum should come out positive
    ev = geometric_side(data, gaussian_probe(0.7), allow_truncation=True)
    assert ev.truncation_flag
    assert ev.spectral_sum > 0
