from fractions import Fraction

import numpy as np
import pytest

from ifsmeasures import (
    AffineIFS,
    AffineMap,
    DepthOverflow,
    attractor_cover,
    cascade,
    chaos_game,
    invariant_interval,
    self_similarity_residual,
    solve_moments,
)
from ifsmeasures.fixtures import cantor_ifs, dyadic_ifs


def w1_by_cdf(xa, ma, xb, mb):
    """Oracle: W1 on the line is the L1 distance between the two CDFs."""
    grid = np.union1d(xa, xb)
    fa = np.array([ma[xa <= x].sum() for x in grid])
    fb = np.array([mb[xb <= x].sum() for x in grid])
    return float(np.sum(np.abs(fa - fb)[:-1] * np.diff(grid)))


def test_affine_map_must_contract():
    with pytest.raises(ValueError):
        AffineMap(1.0, 0.0)
    assert AffineMap(0.5, 0.25).fixed_point == 0.5


def test_ifs_weight_validation():
    with pytest.raises(ValueError):
        AffineIFS.from_pairs([(0.5, 0.0), (0.5, 0.5)], [0.6, 0.6])
    with pytest.raises(ValueError):
        AffineIFS.from_pairs([(0.5, 0.0), (0.5, 0.5)], [1.5, -0.5])
    with pytest.raises(ValueError):
        AffineIFS.from_pairs([(0.5, 0.0)], [0.5, 0.5])


def test_cantor_cascade_depth_one():
    cloud = cascade(cantor_ifs(), 1)
    np.testing.assert_allclose(cloud.positions, [0.0, 2 / 3])
    np.testing.assert_allclose(cloud.masses, [0.5, 0.5])


def test_dyadic_cascade_is_uniform_grid():
    cloud = cascade(dyadic_ifs(), 8)
    np.testing.assert_allclose(cloud.positions, np.arange(256) / 256)
    np.testing.assert_allclose(cloud.masses, 1 / 256)


def test_zero_weight_collapses_to_single_atom():
    ifs = AffineIFS.from_pairs([(0.5, 0.0), (0.5, 0.5)], [1.0, 0.0])
    cloud = cascade(ifs, 10, seed=0.3)
    assert len(cloud) == 1
    assert cloud.positions[0] == pytest.approx(0.3 / 1024)


def test_cascade_merges_coincident_atoms():
    # both maps send 0 to 0 at the first step
    ifs = AffineIFS.from_pairs([(0.5, 0.0), (-0.5, 0.0)], [0.5, 0.5])
    cloud = cascade(ifs, 3)
    assert len(cloud) == 1
    assert cloud.total_mass() == pytest.approx(1.0)


def test_cascade_cap():
    with pytest.raises(DepthOverflow):
        cascade(dyadic_ifs(), 12, cap=1000)


def test_cantor_moments_exact():
    m = solve_moments(cantor_ifs(exact=True), 4)
    assert m[1] == Fraction(1, 2)
    assert m[2] == Fraction(3, 8)


def test_cantor_moments_float():
    m = solve_moments(cantor_ifs(), 2)
    assert abs(m[1] - 0.5) <= 1e-12
    assert abs(m[2] - 0.375) <= 1e-12


def test_dyadic_moments():
    exact = solve_moments(dyadic_ifs(exact=True), 6)
    assert exact == [Fraction(1, r + 1) for r in range(7)]
    approx = solve_moments(dyadic_ifs(), 6)
    np.testing.assert_allclose(approx, [1 / (r + 1) for r in range(7)], atol=1e-12)


def test_moments_match_deep_cascade():
    # cascade of delta_0 at depth k has moments converging geometrically
    ifs = AffineIFS.from_pairs([(0.3, 0.0), (-0.4, 1.0), (0.5, 0.2)], [0.2, 0.5, 0.3])
    cloud = cascade(ifs, 12)
    m = solve_moments(ifs, 4)
    for r in range(1, 5):
        assert cloud.moment(r) == pytest.approx(m[r], abs=1e-5)


def test_chaos_game_cantor():
    res = chaos_game(cantor_ifs(), 1_000_000, rng_seed=1)
    assert abs(res.mean - 0.5) <= 0.002
    assert abs(res.variance - (3 / 8 - 1 / 4)) <= 0.002
    m = solve_moments(cantor_ifs(), 4)
    for r in range(1, 5):
        assert abs(res.moment(r) - m[r]) <= 4 * res.moment_stderr(r) + 1e-4


def test_chaos_game_reproducible():
    a = chaos_game(dyadic_ifs(), 5000, rng_seed=3)
    b = chaos_game(dyadic_ifs(), 5000, rng_seed=3)
    np.testing.assert_array_equal(a.samples, b.samples)
    c = chaos_game(dyadic_ifs(), 5000, rng_seed=4)
    assert not np.array_equal(a.samples, c.samples)


def test_chaos_game_histogram_and_no_samples():
    res = chaos_game(dyadic_ifs(), 20000, bins=10, keep_samples=False)
    counts, edges = res.histogram
    assert counts.sum() == 20000
    assert np.all(counts > 1500)
    with pytest.raises(ValueError):
        res.moment(1)


def test_residual_matches_cdf_oracle():
    ifs = cantor_ifs()
    for k in (3, 5):
        cloud = cascade(ifs, k)
        image = cloud.push(ifs)
        want = w1_by_cdf(cloud.positions, cloud.masses, image.positions, image.masses)
        assert self_similarity_residual(ifs, cloud) == pytest.approx(want, abs=1e-14)


def test_residual_at_depth_eight():
    assert self_similarity_residual(cantor_ifs(), cascade(cantor_ifs(), 8)) <= 3.0**-8


def test_residual_decreases_with_depth():
    ifs = cantor_ifs()
    res = [self_similarity_residual(ifs, cascade(ifs, k)) for k in range(1, 9)]
    assert all(b <= a + 1e-15 for a, b in zip(res, res[1:]))


def test_invariant_interval():
    assert invariant_interval(cantor_ifs()) == pytest.approx((0.0, 1.0))
    ifs = AffineIFS.from_pairs([(0.5, 0.0), (0.5, 0.1)], [0.5, 0.5])
    assert invariant_interval(ifs) == pytest.approx((0.0, 0.2))
    flip = AffineIFS.from_pairs([(-0.5, 0.0), (0.5, 0.5)], [0.5, 0.5])
    lo, hi = invariant_interval(flip)
    # both maps must send [lo, hi] into itself
    for m in flip.maps:
        ends = sorted([m(lo), m(hi)])
        assert lo - 1e-12 <= ends[0] and ends[1] <= hi + 1e-12


def test_cantor_cover_depth_two():
    cov = attractor_cover(cantor_ifs(), 2)
    got = sorted(map(tuple, cov.intervals))
    want = [(0, 1 / 9), (2 / 9, 1 / 3), (2 / 3, 7 / 9), (8 / 9, 1)]
    np.testing.assert_allclose(got, want, atol=1e-15)
    assert cov.non_overlapping
    assert cov.complete
    assert cov.max_diameter == pytest.approx(1 / 9)


def test_dyadic_cover_touches_only():
    cov = attractor_cover(dyadic_ifs(), 5)
    assert cov.non_overlapping
    assert cov.complete


def test_touching_images_are_not_overlaps():
    ifs = AffineIFS.from_pairs([(0.5, 0.0), (0.5, 0.1)], [0.5, 0.5])
    cov = attractor_cover(ifs, 1)
    np.testing.assert_allclose(cov.intervals, [[0.0, 0.1], [0.1, 0.2]])
    assert cov.non_overlapping


def test_overlapping_cover_is_detected():
    ifs = AffineIFS.from_pairs([(0.6, 0.0), (0.6, 0.4)], [0.5, 0.5])
    cov = attractor_cover(ifs, 1)
    assert not cov.non_overlapping
    assert cov.overlaps == [(0, 1)]
    assert cov.complete


def test_nadic_cascade_matches_eigen_measure():
    from ifsmeasures import atom_tree, fourier_basis_bank
    from ifsmeasures.cuntz import CoeffVector

    n = 3
    cloud = cascade(AffineIFS.nadic(n), 5)
    mu = atom_tree(fourier_basis_bank(n), CoeffVector.basis(0), 5)
    np.testing.assert_allclose(cloud.positions, mu.positions, atol=1e-15)
    np.testing.assert_allclose(cloud.masses, mu.masses, atol=1e-12)
