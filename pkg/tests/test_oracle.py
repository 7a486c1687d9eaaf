import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import brute_rect_gap, tent_terrain
from epsapprox.discrepancy import beck_fiala, canonical_structure, certified_bound
from epsapprox.geometry import (AxisRect, DirectionSet, LinearPatch, PLTerrain, RangeFamily,
                                WeightedPointSet, terrain_measure)
from epsapprox.lowdisc import stretched_vdc, van_der_corput
from epsapprox.oracle import (comb_disc, eps_error_discrete, eps_error_terrain, lebesgue_disc,
                              mc_check, range_error)

UNIT = AxisRect([0, 0], [1, 1])


def test_identical_sets_have_zero_error(rng):
    D = WeightedPointSet(rng.random((30, 2)))
    assert eps_error_discrete(D, D).max_error == 0.0


def test_single_corner_witness():
    D = WeightedPointSet([[0.1, 0.1], [0.9, 0.12], [0.88, 0.9], [0.11, 0.91]])
    P = D.subset([0])
    rep = eps_error_discrete(P, D)
    assert rep.max_error == pytest.approx(0.75)
    inside = rep.witness_range.contains_many(D.points)
    assert inside.tolist() == [False, True, True, True]


@pytest.mark.parametrize("seed", range(4))
def test_discrete_matches_quadruple_loop(seed):
    r = np.random.default_rng(seed)
    D = WeightedPointSet(r.random((24, 2)), r.random(24) + 0.5)
    P = D.subset(r.choice(24, 9, replace=False))
    assert eps_error_discrete(P, D).max_error == pytest.approx(brute_rect_gap(P, D), abs=1e-12)


def test_random_sampler_never_beats_oracle(rng):
    D = WeightedPointSet(rng.random((64, 2)))
    P = D.subset(rng.choice(64, 32, replace=False))
    rep = eps_error_discrete(P, D)
    sampled = 0.0
    for _ in range(3000):
        a, b = np.sort(rng.random((2, 2)), axis=0)
        sampled = max(sampled, range_error(P, D, AxisRect(a, b)))
    assert sampled <= rep.max_error + 1e-12
    assert sampled >= 0.5 * rep.max_error


def test_witness_reproduces_and_perturbations_never_beat(rng):
    D = WeightedPointSet(rng.random((40, 2)))
    P = D.subset(np.arange(0, 40, 3))
    rep = eps_error_discrete(P, D)
    assert range_error(P, D, rep.witness_range) == rep.max_error
    for _ in range(500):
        d = rng.normal(scale=0.05, size=(2, 2))
        lo = np.minimum(rep.witness_range.lo + d[0], rep.witness_range.hi + d[1])
        hi = np.maximum(rep.witness_range.lo + d[0], rep.witness_range.hi + d[1])
        assert range_error(P, D, AxisRect(lo, hi)) <= rep.max_error + 1e-12


def test_three_direction_family_matches_brute_force(rng):
    dirs = DirectionSet([[1, 0], [0, 1], [1, 1]], normalize=True)
    fam = RangeFamily.kdir(dirs)
    D = WeightedPointSet(rng.random((10, 2)))
    P = D.subset([0, 3, 5, 7])
    pr = D.points @ dirs.dirs.T
    best = 0.0
    cands = [np.unique(pr[:, j]) for j in range(3)]
    for iv in itertools.product(*[list(itertools.combinations_with_replacement(c, 2)) for c in cands]):
        ins = np.all((pr >= [a for a, _ in iv]) & (pr <= [b for _, b in iv]), axis=1)
        best = max(best, abs(ins[[0, 3, 5, 7]].sum() / 4 - ins.sum() / 10))
    assert eps_error_discrete(P, D, fam).max_error == pytest.approx(best, abs=1e-12)


def test_family_size_cap(rng):
    fam = RangeFamily.kdir(DirectionSet([[1, 0], [0, 1], [1, 1], [1, -1]], normalize=True))
    D = WeightedPointSet(rng.random((8, 2)))
    with pytest.raises(ValueError):
        eps_error_discrete(D, D, fam)


def _corner_brute(P):
    n = len(P)
    xs = np.unique(np.concatenate([P.points[:, 0], [1.0]]))
    ys = np.unique(np.concatenate([P.points[:, 1], [1.0]]))
    best = 0.0
    for x in xs:
        for y in ys:
            incl = np.sum((P.points[:, 0] <= x) & (P.points[:, 1] <= y))
            excl = np.sum((P.points[:, 0] < x) & (P.points[:, 1] < y))
            best = max(best, incl - n * x * y, n * x * y - excl)
    return best


def test_lebesgue_single_center_point():
    rep = lebesgue_disc(WeightedPointSet([[0.5, 0.5]]))
    assert rep.max_error == pytest.approx(0.75)
    assert rep.witness_range == {"corner": [0.5, 0.5], "closed": True}


def test_lebesgue_corner_matches_brute_force(rng):
    for _ in range(5):
        P = WeightedPointSet(rng.random((12, 2)))
        assert lebesgue_disc(P).max_error == pytest.approx(_corner_brute(P), abs=1e-12)


def test_lebesgue_full_square_is_balanced():
    P = van_der_corput(16)
    n = len(P)
    assert abs(n * 1.0 - np.sum(UNIT.contains_many(P.points))) == 0


def test_lebesgue_vdc_256_within_log_bound():
    P = van_der_corput(256)
    assert lebesgue_disc(P).max_error <= math.log2(256) + 2
    assert lebesgue_disc(P, "rect").max_error <= 4 * lebesgue_disc(P).max_error + 1e-9


def test_lebesgue_rejects_points_outside():
    with pytest.raises(ValueError):
        lebesgue_disc(WeightedPointSet([[1.5, 0.5]]))


def test_comb_disc_all_plus(rng):
    X = WeightedPointSet(rng.random((20, 2)))
    rep = comb_disc(np.ones(20), X)
    assert rep.max_error == 20
    assert rep.witness_range.contains_many(X.points).all()


def test_comb_disc_alternating_intervals():
    X = WeightedPointSet(np.arange(16.0)[:, None], dim=1)
    chi = np.array([1, -1] * 8)
    assert comb_disc(chi, X, RangeFamily.rect(1)).max_error <= 1


def test_comb_disc_beck_fiala_bound(rng):
    X = WeightedPointSet(rng.random((128, 2)))
    inc = canonical_structure(X)
    chi = beck_fiala(inc)
    assert comb_disc(chi, X).max_error <= (2 * inc.t - 1) * (2 * 7) ** 2
    with pytest.raises(ValueError):
        comb_disc(np.ones(3), X)


def test_terrain_oracle_flat_stretched_sample():
    P = stretched_vdc(256, LinearPatch(UNIT, (0, 0, 1)))
    rep = eps_error_terrain(P, PLTerrain.flat(UNIT))
    assert rep.max_error <= (math.log2(256) + 2) * 4 / 256


def test_terrain_oracle_refinement_monotone(rng):
    T = tent_terrain()
    P = WeightedPointSet(rng.random((600, 2)))
    assert eps_error_terrain(P, T, 64).max_error >= eps_error_terrain(P, T, 16).max_error - 1e-12


def test_terrain_oracle_empty_set():
    assert eps_error_terrain(WeightedPointSet(np.zeros((0, 2))), tent_terrain()).max_error == 1.0


def test_terrain_oracle_witness_reproduces(rng):
    T = tent_terrain()
    P = WeightedPointSet(rng.random((50, 2)))
    rep = eps_error_terrain(P, T, 32)
    R = rep.witness_range
    mu = terrain_measure(T, R) / T.total_mass
    frac = P.weights[R.contains_many(P.points)].sum() / P.total_weight
    assert abs(mu - frac) == pytest.approx(rep.max_error, abs=1e-12)


def test_mc_check_examples():
    est, err = mc_check(PLTerrain.flat(UNIT), UNIT, 10**6)
    assert abs(est - 1.0) <= 3 * err + 1e-12
    T = tent_terrain()
    est, err = mc_check(T, UNIT, 10**5, seed=1)
    assert abs(est - terrain_measure(T, UNIT)) <= 3 * err
    zero = PLTerrain.flat(UNIT, 0.0)
    assert mc_check(zero, UNIT, 10**4) == (0.0, 0.0)
    assert mc_check(T, UNIT, 10**4, seed=5) == mc_check(T, UNIT, 10**4, seed=5)
    with pytest.raises(ValueError):
        mc_check(T, UNIT, 100)


@given(st.integers(2, 12), st.integers(0, 2**31))
def test_error_bounded_by_one_and_symmetric_in_roles(n, seed):
    r = np.random.default_rng(seed)
    D = WeightedPointSet(r.random((n, 2)))
    P = D.subset(r.choice(n, max(1, n // 2), replace=False))
    e = eps_error_discrete(P, D).max_error
    assert 0 <= e <= 1
    assert eps_error_discrete(D, P).max_error == pytest.approx(e, abs=1e-12)
